//! Pointwise comparison of the extension's top derivatives with sums of jet
//! remainders over the cubes whose enlargement contains the point.

use rayon::prelude::*;
use serde::Serialize;

use crate::cube::ON_SET_TOLERANCE;
use crate::error::Result;
use crate::extension::ExtensionField;
use crate::seminorm::remainder_raw;
use crate::symnorm::sym_norm;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lemma32Sample {
    pub lhs_a: f64,
    pub rhs_a: f64,
    pub lhs_b: f64,
    pub rhs_b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma32Report {
    pub samples: usize,
    pub skipped_on_set: usize,
    pub max_ratio_a: f64,
    pub max_ratio_b: f64,
    /// Samples with a vanishing right-hand side but a nonzero left-hand side.
    pub zero_rhs_violations: usize,
    #[serde(skip)]
    pub points: Vec<Lemma32Sample>,
}

/// Values at or below `noise` count as zero.
fn ratio(lhs: f64, rhs: f64, noise: f64) -> Option<f64> {
    let lhs = if lhs <= noise { 0.0 } else { lhs };
    let rhs = if rhs <= noise { 0.0 } else { rhs };
    if rhs > 0.0 {
        Some(lhs / rhs)
    } else if lhs == 0.0 {
        Some(0.0)
    } else {
        None
    }
}

/// Uniform points of the box `[lo, hi]` at which some cube whose enlargement
/// contains the point has `p_Q ≠ ξ`; elsewhere both sides vanish identically.
/// Stops after `1000·count` draws.
pub fn informative_samples(field: &ExtensionField, seed: u64, count: usize, lo: &[f64], hi: &[f64]) -> Result<Vec<Vec<f64>>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let cover = field.cover();
    let mut out = Vec::with_capacity(count);
    for _ in 0..1000 * count {
        if out.len() == count {
            break;
        }
        let x: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| rng.gen_range(*a..*b)).collect();
        let (xi, dist) = cover.nearest(&x);
        if dist <= ON_SET_TOLERANCE {
            continue;
        }
        let near = match cover.cubes_near(&x) {
            Err(crate::error::Error::Range(_)) if field.isolated(xi, dist) => continue,
            r => r?,
        };
        if near.iter().any(|r| r.p_q != xi) {
            out.push(x);
        }
    }
    Ok(out)
}

/// Relative rounding floors for the two inequalities.
pub const NOISE_FLOOR_A: f64 = 1e-10;
pub const NOISE_FLOOR_B: f64 = 1e-7;

/// Evaluates both inequalities at every sample off `E`. With `M = max(1, max |A_β|)`
/// and `d = d(x,E)`, sides of (a) below `NOISE_FLOOR_A·M·max(1, d^{-m})` and of (b)
/// below `NOISE_FLOOR_B·M·max(1, d^{-m-1})` count as zero.
pub fn lemma32_check(field: &ExtensionField, samples: &[Vec<f64>]) -> Result<Lemma32Report> {
    let jet = field.jet();
    let set = field.set();
    let cover = field.cover();
    let m = jet.order();
    let d = jet.value_dim();
    let basis = jet.basis().clone();
    let width = jet.point_coeffs(0).len();
    let magnitude = (0..set.len())
        .flat_map(|i| jet.point_coeffs(i).iter().map(|c| c.abs()))
        .fold(1.0f64, f64::max);
    let floor = |rel: f64, dist: f64, k: usize| rel * magnitude * dist.powi(-(k as i32)).max(1.0);
    let results: Vec<Option<(Lemma32Sample, f64)>> = samples
        .par_iter()
        .map(|x| -> Result<Option<(Lemma32Sample, f64)>> {
            let (xi, dist) = cover.nearest(x);
            if dist <= ON_SET_TOLERANCE {
                return Ok(None);
            }
            let near = match cover.cubes_near(x) {
                Err(crate::error::Error::Range(_)) if field.isolated(xi, dist) => Vec::new(),
                r => r?,
            };
            let der = field.eval_derivatives(x, m + 1)?;
            let top = der.level(m);
            let am = &jet.point_coeffs(xi)[basis.level(m).start * d..];
            let diff: Vec<f64> = top.iter().zip(am).map(|(a, b)| a - b).collect();
            let lm = &der.basis().indices()[der.basis().level(m)];
            let lm1 = &der.basis().indices()[der.basis().level(m + 1)];
            let lhs_a = sym_norm(lm, &diff, d).value();
            let lhs_b = sym_norm(lm1, der.level(m + 1), d).value();
            let mut scratch = vec![0.0; width];
            let mut sum = 0.0;
            for rec in near {
                sum += remainder_raw(
                    jet,
                    set.point(xi),
                    jet.point_coeffs(xi),
                    set.point(rec.p_q),
                    jet.point_coeffs(rec.p_q),
                    &mut scratch,
                )
                .value();
            }
            let s = Lemma32Sample {
                lhs_a,
                rhs_a: 2.0 * sum,
                lhs_b,
                rhs_b: sum / dist,
            };
            Ok(Some((s, dist)))
        })
        .collect::<Result<_>>()?;
    let mut report = Lemma32Report {
        samples: 0,
        skipped_on_set: 0,
        max_ratio_a: 0.0,
        max_ratio_b: 0.0,
        zero_rhs_violations: 0,
        points: Vec::new(),
    };
    for r in results {
        let Some((s, dist)) = r else {
            report.skipped_on_set += 1;
            continue;
        };
        report.samples += 1;
        match (ratio(s.lhs_a, s.rhs_a, floor(NOISE_FLOOR_A, dist, m)),
            ratio(s.lhs_b, s.rhs_b, floor(NOISE_FLOOR_B, dist, m + 1)),) {
            (Some(a), Some(b)) => {
                report.max_ratio_a = report.max_ratio_a.max(a);
                report.max_ratio_b = report.max_ratio_b.max(b);
            }
            _ => report.zero_rhs_violations += 1,
        }
        report.points.push(s);
    }
    Ok(report)
}
