//! Vanishing profiles: `δ ↦ sup ratio` over the pairs admitted by one scale's window.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Small,
    Large,
    Far,
}

impl Scale {
    pub const ALL: [Scale; 3] = [Scale::Small, Scale::Large, Scale::Far];

    pub fn name(self) -> &'static str {
        match self {
            Scale::Small => "small",
            Scale::Large => "large",
            Scale::Far => "far",
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "small" => Ok(Scale::Small),
            "large" => Ok(Scale::Large),
            "far" => Ok(Scale::Far),
            other => Err(Error::argument(format!("unknown scale `{other}`"))),
        }
    }
}

/// How the far window restricts a pair `(x, y)`: `min(|x|,|y|) ≥ δ` or `max(|x|,|y|) ≥ δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FarForm {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub delta: f64,
    pub sup_ratio: f64,
    /// Number of pairs inside the window.
    pub pairs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VanishingProfile {
    pub scale: Scale,
    /// Only set for the far scale.
    pub form: Option<FarForm>,
    pub samples: Vec<ProfileSample>,
    /// True when the sup ran over every pair (jets on a finite set).
    pub exhaustive: bool,
}

impl VanishingProfile {
    pub fn first(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.sup_ratio)
    }

    pub fn last(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.sup_ratio)
    }

    pub fn at(&self, delta: f64) -> Option<f64> {
        self.samples.iter().find(|s| s.delta == delta).map(|s| s.sup_ratio)
    }

    /// Windows that contained no pair (reported as 0).
    pub fn empty_windows(&self) -> usize {
        self.samples.iter().filter(|s| s.pairs == 0).count()
    }

    pub fn scaled(&self, lambda: f64) -> VanishingProfile {
        let mut out = self.clone();
        for s in &mut out.samples {
            s.sup_ratio *= lambda;
        }
        out
    }

    pub fn form_label(&self) -> &'static str {
        match self.form {
            Some(FarForm::Min) => "min",
            Some(FarForm::Max) => "max",
            None => "-",
        }
    }
}

pub fn check_deltas(deltas: &[f64]) -> Result<()> {
    if deltas.is_empty() {
        return Err(Error::argument("profile needs at least one δ"));
    }
    if deltas.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(Error::argument("profile δ values must be positive and finite"));
    }
    if deltas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::argument("profile δ values must be sorted ascending"));
    }
    Ok(())
}

/// Per-pair geometry used to decide window membership.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PairKey {
    pub dist: f64,
    pub min_norm: f64,
    pub max_norm: f64,
    pub ratio: f64,
}

/// Reduces per-pair ratios to profiles; one profile for small/large, two for far.
pub(crate) fn reduce_profiles(
    keys: &[PairKey],
    scale: Scale,
    deltas: &[f64],
    exhaustive: bool,
) -> Vec<VanishingProfile> {
    let window = |delta: f64, form: Option<FarForm>| {
        let mut sup = 0.0f64;
        let mut count = 0usize;
        for k in keys {
            let inside = match (scale, form) {
                (Scale::Small, _) => k.dist > 0.0 && k.dist <= delta,
                (Scale::Large, _) => k.dist >= delta,
                (Scale::Far, Some(FarForm::Max)) => k.max_norm >= delta,
                (Scale::Far, _) => k.min_norm >= delta,
            };
            if inside {
                count += 1;
                if k.ratio > sup {
                    sup = k.ratio;
                }
            }
        }
        ProfileSample {
            delta,
            sup_ratio: sup,
            pairs: count,
        }
    };
    let forms: &[Option<FarForm>] = match scale {
        Scale::Far => &[Some(FarForm::Min), Some(FarForm::Max)],
        _ => &[None],
    };
    forms
        .iter()
        .map(|&form| VanishingProfile {
            scale,
            form,
            samples: deltas.iter().map(|&d| window(d, form)).collect(),
            exhaustive,
        })
        .collect()
}

/// Writes profiles as CSV with columns `delta, sup_ratio, scale, form`.
pub fn write_profiles_csv<W: Write>(out: W, profiles: &[VanishingProfile]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["delta", "sup_ratio", "scale", "form"])?;
    for p in profiles {
        for s in &p.samples {
            w.write_record([
                format!("{:e}", s.delta),
                format!("{:e}", s.sup_ratio),
                p.scale.name().to_string(),
                p.form_label().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
