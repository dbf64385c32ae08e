//! The remainder functional `R(𝒜, x, y)`, jet seminorms and jet vanishing profiles.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::{distance, norm, poly_derivatives_into, Jet, PointSet};
use crate::modulus::Modulus;
use crate::profile::{check_deltas, reduce_profiles, PairKey, Scale, VanishingProfile};
use crate::symnorm::{sym_norm, NormBracket};

/// `R(𝒜, x_i, y_j)` as a bracket (lower bound is the reported value).
pub fn remainder_bracket(jet: &Jet, set: &PointSet, i: usize, j: usize) -> Result<NormBracket> {
    jet.check_compatible(set)?;
    let n = set.len();
    if i >= n || j >= n {
        return Err(Error::argument(format!("pair ({i}, {j}) out of range for {n} points")));
    }
    if i == j {
        return Err(Error::argument("remainder is undefined at coincident points (i = j)"));
    }
    let mut scratch = vec![0.0; jet.point_coeffs(0).len()];
    Ok(remainder_raw(jet, set.point(i), jet.point_coeffs(i), set.point(j), jet.point_coeffs(j), &mut scratch))
}

pub fn remainder(jet: &Jet, set: &PointSet, i: usize, j: usize) -> Result<f64> {
    remainder_bracket(jet, set, i, j).map(|b| b.value())
}

/// `R` for explicit coefficient blocks at `x` and `y`; `0` when `x = y`.
pub(crate) fn remainder_raw(
    jet: &Jet,
    x: &[f64],
    ax: &[f64],
    y: &[f64],
    ay: &[f64],
    scratch: &mut [f64],
) -> NormBracket {
    let r = distance(x, y);
    if r == 0.0 {
        return NormBracket::exact(0.0);
    }
    let d = jet.value_dim();
    let basis = jet.basis();
    let m = jet.order();
    poly_derivatives_into(basis, d, y, ay, x, scratch);
    for (s, a) in scratch.iter_mut().zip(ax) {
        *s = a - *s;
    }
    let mut out = NormBracket::exact(0.0);
    for k in 0..=m {
        let range = basis.level(k);
        let level = &basis.indices()[range.clone()];
        let nb = sym_norm(level, &scratch[range.start * d..range.end * d], d);
        let scale = r.powi((m - k) as i32);
        out.lower = out.lower.max(nb.lower / scale);
        out.upper = out.upper.max(nb.upper / scale);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeminormReport {
    pub value: f64,
    /// Upper end of the operator-norm bracket.
    pub upper: f64,
    /// Ordered pair attaining the value.
    pub argmax: Option<(usize, usize)>,
    /// Set when `E` is a singleton and the supremum is empty.
    pub vacuous: bool,
}

fn pair_keys(jet: &Jet, set: &PointSet, modulus: &Modulus) -> Result<Vec<(PairKey, f64, usize, usize)>> {
    jet.check_compatible(set)?;
    let n = set.len();
    let width = jet.point_coeffs(0).len();
    let norms: Vec<f64> = set.iter().map(norm).collect();
    let rows: Vec<Vec<(PairKey, f64, usize, usize)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut scratch = vec![0.0; width];
            let mut row = Vec::with_capacity(n.saturating_sub(1));
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (x, y) = (set.point(i), set.point(j));
                let dist = distance(x, y);
                let w = modulus.value(dist);
                let b = remainder_raw(jet, x, jet.point_coeffs(i), y, jet.point_coeffs(j), &mut scratch);
                row.push((
                    PairKey {
                        dist,
                        min_norm: norms[i].min(norms[j]),
                        max_norm: norms[i].max(norms[j]),
                        ratio: b.lower / w,
                    },
                    b.upper / w,
                    i,
                    j,
                ));
            }
            row
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// `sup_{i≠j} R(𝒜, x_i, y_j) / ω(|x_i − y_j|)` over all ordered pairs.
pub fn jet_seminorm(jet: &Jet, set: &PointSet, modulus: &Modulus) -> Result<SeminormReport> {
    let keys = pair_keys(jet, set, modulus)?;
    let mut report = SeminormReport {
        value: 0.0,
        upper: 0.0,
        argmax: None,
        vacuous: set.len() < 2,
    };
    for (k, upper, i, j) in keys {
        if report.argmax.is_none() || k.ratio > report.value {
            report.value = k.ratio;
            report.argmax = Some((i, j));
        }
        report.upper = report.upper.max(upper);
    }
    Ok(report)
}

/// Seminorm plus `max_k ‖A_k(x_base)‖`.
pub fn jet_norm_full(jet: &Jet, set: &PointSet, modulus: &Modulus, base: usize) -> Result<f64> {
    if base >= set.len() {
        return Err(Error::argument(format!("base index {base} out of range for {} points", set.len())));
    }
    let semi = jet_seminorm(jet, set, modulus)?.value;
    let d = jet.value_dim();
    let basis = jet.basis();
    let coeffs = jet.point_coeffs(base);
    let top = (0..=jet.order())
        .map(|k| {
            let range = basis.level(k);
            sym_norm(&basis.indices()[range.clone()], &coeffs[range.start * d..range.end * d], d).value()
        })
        .fold(0.0, f64::max);
    Ok(semi + top)
}

/// Exhaustive profile of the jet over all ordered pairs of `E`. The far scale
/// yields two profiles (min-form, then max-form); the other scales one.
pub fn jet_vanishing_profile(
    jet: &Jet,
    set: &PointSet,
    modulus: &Modulus,
    scale: Scale,
    deltas: &[f64],
) -> Result<Vec<VanishingProfile>> {
    check_deltas(deltas)?;
    let keys: Vec<PairKey> = pair_keys(jet, set, modulus)?.into_iter().map(|k| k.0).collect();
    Ok(reduce_profiles(&keys, scale, deltas, true))
}
