//! Restrictions of globally defined functions of a vanishing class keep vanishing profiles.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::{jet_from_smooth, SmoothFunction};
use crate::modulus::Modulus;
use crate::profile::{Scale, VanishingProfile};
use crate::seminorm::jet_vanishing_profile;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NecessityReport {
    pub function: String,
    pub scale: Scale,
    pub order: usize,
    pub profiles: Vec<VanishingProfile>,
    /// Largest final sample over the returned profiles.
    pub final_sample: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Restricts `f` to `points` as an order-`m` jet and compares the final profile sample with `threshold`.
pub fn necessity_check(
    f: &dyn SmoothFunction,
    points: Vec<Vec<f64>>,
    m: usize,
    modulus: &Modulus,
    scale: Scale,
    deltas: &[f64],
    threshold: f64,
) -> Result<NecessityReport> {
    if !f.vanishing_scales(m).contains(&scale) {
        return Err(Error::argument(format!(
            "{} is not declared to vanish at the {scale} scale for m = {m}",
            f.name()
        )));
    }
    modulus.admits(scale)?;
    let (set, jet) = jet_from_smooth(f, points, m)?;
    let profiles = jet_vanishing_profile(&jet, &set, modulus, scale, deltas)?;
    let final_sample = profiles.iter().map(VanishingProfile::last).fold(0.0, f64::max);
    Ok(NecessityReport {
        function: f.name(),
        scale,
        order: m,
        profiles,
        final_sample,
        threshold,
        pass: final_sample <= threshold,
    })
}
