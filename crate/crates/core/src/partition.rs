//! Smooth bumps `ψ_Q` and the normalized Whitney partition of unity
//! `φ_Q = ψ_Q / Σ ψ_{Q'}`, evaluated in truncated Taylor arithmetic.

use crate::cube::{CubeCover, CubeRecord, DyadicCube};
use crate::error::{Error, Result};
use crate::multi_index::Basis;
use crate::taylor::TaylorValue;

/// Largest Taylor order supported for bump evaluation.
pub const MAX_BUMP_ORDER: usize = 12;

/// `s(t) = g(t)/(g(t) + g(1−t))`, `g(u) = exp(−1/u)` for `u > 0` and `0` otherwise.
pub fn smooth_step(t: &TaylorValue) -> TaylorValue {
    let t0 = t.value();
    if t0 <= 0.0 {
        return TaylorValue::zero(t.basis().clone());
    }
    if t0 >= 1.0 {
        return TaylorValue::constant(t.basis().clone(), 1.0);
    }
    let one_minus = t.scale(-1.0).add_scalar(1.0);
    // q = 1/t − 1/(1−t); s = 1/(1 + e^q)
    let q = &t.recip().expect("t > 0") - &one_minus.recip().expect("t < 1");
    if t0 < 0.5 {
        let e = q.scale(-1.0).exp();
        if e.value() == 0.0 {
            return TaylorValue::zero(t.basis().clone());
        }
        &e * &e.add_scalar(1.0).recip().expect("1 + e > 0")
    } else {
        q.exp().add_scalar(1.0).recip().expect("1 + e > 0")
    }
}

/// The bump `ψ_Q`: equal to 1 on `Q`, vanishing outside `Q* = (9/8)Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionFunction {
    cube: DyadicCube,
    margin: f64,
}

impl PartitionFunction {
    pub fn new(cube: DyadicCube) -> Self {
        let margin = cube.side() / 16.0;
        PartitionFunction { cube, margin }
    }

    pub fn cube(&self) -> &DyadicCube {
        &self.cube
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn eval(&self, x: &[f64], order: usize) -> Result<TaylorValue> {
        bump_eval(self, x, order)
    }
}

/// Tensor product of one-dimensional plateau functions.
pub fn bump_eval(pf: &PartitionFunction, x: &[f64], order: usize) -> Result<TaylorValue> {
    if order > MAX_BUMP_ORDER {
        return Err(Error::argument(format!("bump order {order} exceeds {MAX_BUMP_ORDER}")));
    }
    let n = pf.cube.dim();
    if x.len() != n {
        return Err(Error::argument("query dimension does not match the cube"));
    }
    let basis = Basis::shared(n, order);
    let (lo, hi) = (pf.cube.lo(), pf.cube.hi());
    let star_lo = pf.cube.star_lo();
    let star_hi = pf.cube.star_hi();
    if !pf.cube.star_contains(x) {
        return Ok(TaylorValue::zero(basis));
    }
    let uni = Basis::shared(1, order);
    let mut factors = Vec::with_capacity(n);
    for i in 0..n {
        if lo[i] <= x[i] && x[i] <= hi[i] {
            let mut c = vec![0.0; order + 1];
            c[0] = 1.0;
            factors.push(c);
            continue;
        }
        let u = TaylorValue::variable(uni.clone(), 0, x[i]);
        let left = smooth_step(&u.add_scalar(-star_lo[i]).scale(1.0 / pf.margin));
        let right = smooth_step(&u.scale(-1.0).add_scalar(star_hi[i]).scale(1.0 / pf.margin));
        factors.push((&left * &right).coeffs().to_vec());
    }
    let coeffs = basis
        .indices()
        .iter()
        .map(|b| b.components().iter().zip(&factors).map(|(&k, c)| c[k]).product())
        .collect();
    Ok(TaylorValue::from_coeffs(basis, coeffs))
}

/// `φ_Q` for every `Q` with `x ∈ Q*`, as Taylor values of order `order`.
pub fn phi_eval(cover: &CubeCover, x: &[f64], order: usize) -> Result<Vec<(CubeRecord, TaylorValue)>> {
    let records = cover.cubes_near(x)?;
    let psis = records
        .iter()
        .map(|r| bump_eval(&PartitionFunction::new(r.cube.clone()), x, order))
        .collect::<Result<Vec<_>>>()?;
    let basis = Basis::shared(cover.dim(), order);
    let sum = psis.iter().fold(TaylorValue::zero(basis), |acc, p| &acc + p);
    let inv = sum.recip()?;
    // The cube holding the plateau absorbs the value complement; each derivative
    // complement goes to the function whose coefficient is smallest in magnitude,
    // so that its final rounding is as small as possible.
    let home = psis
        .iter()
        .enumerate()
        .fold(0, |best, (i, p)| if p.value() > psis[best].value() { i } else { best });
    let mut coeffs: Vec<Vec<f64>> = psis.iter().map(|p| (p * &inv).coeffs().to_vec()).collect();
    for k in 0..inv.coeffs().len() {
        let target = if k == 0 {
            home
        } else {
            (0..coeffs.len()).fold(0, |best, i| if coeffs[i][k].abs() < coeffs[best][k].abs() { i } else { best })
        };
        let rest = compensated_sum(coeffs.iter().enumerate().filter(|(i, _)| *i != target).map(|(_, c)| c[k]));
        coeffs[target][k] = if k == 0 { 1.0 - rest } else { -rest };
    }
    let phis: Vec<TaylorValue> = coeffs
        .into_iter()
        .map(|c| TaylorValue::from_coeffs(inv.basis().clone(), c))
        .collect();
    Ok(records.into_iter().zip(phis).collect())
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::PointSet;
    use crate::multi_index::MultiIndex;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn step_at(t: f64, order: usize) -> TaylorValue {
        smooth_step(&TaylorValue::variable(Basis::shared(1, order), 0, t))
    }

    #[test]
    fn step_values() {
        assert_eq!(step_at(0.5, 0).value(), 0.5);
        let dead = step_at(-1.0, 4);
        assert!(dead.coeffs().iter().all(|&c| c == 0.0));
        assert_eq!(step_at(1.0, 3).derivatives(), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn step_symmetry() {
        for t in [0.1, 0.3, 0.45] {
            assert_relative_eq!(step_at(t, 0).value() + step_at(1.0 - t, 0).value(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn step_derivative_matches_finite_difference() {
        let f = |t: f64| step_at(t, 0).value();
        for t in [0.2, 0.5, 0.77] {
            let h = 1e-6;
            let fd = (f(t + h) - f(t - h)) / (2.0 * h);
            let d = step_at(t, 1).derivatives()[1];
            assert!((d - fd).abs() <= 1e-6 * d.abs(), "t={t}: {d} vs {fd}");
        }
        // second derivative against differences of the first
        let g = |t: f64| step_at(t, 1).derivatives()[1];
        for t in [0.15, 0.6] {
            let h = 1e-6;
            let fd = (g(t + h) - g(t - h)) / (2.0 * h);
            assert_relative_eq!(step_at(t, 2).derivatives()[2], fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn step_is_flat_near_junctions() {
        let near = step_at(1e-3, 5);
        assert!(near.derivatives().iter().all(|d| d.abs() < 1e-300));
        let top = step_at(1.0 - 1e-3, 5);
        assert_eq!(top.value(), 1.0);
        assert!(top.derivatives()[1..].iter().all(|d| d.abs() < 1e-300));
    }

    #[test]
    fn bump_plateau_and_support() {
        let pf = PartitionFunction::new(DyadicCube::new(0, vec![1, -1]).unwrap());
        let c = pf.eval(&[1.5, -0.5], 3).unwrap();
        assert_eq!(c.value(), 1.0);
        assert!(c.coeffs()[1..].iter().all(|&v| v == 0.0));
        let out = pf.eval(&[2.2, -0.5], 3).unwrap();
        assert!(out.coeffs().iter().all(|&v| v == 0.0));
        let edge = pf.eval(&[2.0 + 1.0 / 16.0, -0.5], 3).unwrap();
        assert!(edge.coeffs().iter().all(|&v| v == 0.0));
        assert!(pf.eval(&[1.5, -0.5], 13).is_err());
    }

    #[test]
    fn bump_gradient_matches_finite_difference() {
        let pf = PartitionFunction::new(DyadicCube::new(-1, vec![3, 0]).unwrap());
        let x = [2.03, 0.47];
        let t = pf.eval(&x, 1).unwrap();
        let h = 1e-7;
        let f = |p: [f64; 2]| pf.eval(&p, 0).unwrap().value();
        let fd0 = (f([x[0] + h, x[1]]) - f([x[0] - h, x[1]])) / (2.0 * h);
        let fd1 = (f([x[0], x[1] + h]) - f([x[0], x[1] - h])) / (2.0 * h);
        assert_relative_eq!(t.derivative(&MultiIndex::new(vec![1, 0])), fd0, max_relative = 1e-6);
        assert_relative_eq!(t.derivative(&MultiIndex::new(vec![0, 1])), fd1, max_relative = 1e-6);
    }

    #[test]
    fn partition_sums_to_one() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let pts: Vec<Vec<f64>> = (0..12).map(|_| vec![rng.gen(), rng.gen()]).collect();
        let cover = CubeCover::new(PointSet::new(2, pts).unwrap());
        for _ in 0..300 {
            let x = [rng.gen_range(-2.0..3.0), rng.gen_range(-2.0..3.0)];
            let phis = phi_eval(&cover, &x, 3).unwrap();
            let d = cover.nearest(&x).1;
            let basis = Basis::shared(2, 3);
            for (k, b) in basis.indices().iter().enumerate() {
                let s = compensated_sum(phis.iter().map(|(_, p)| p.coeffs()[k])) * b.factorial();
                let target = if k == 0 { 1.0 } else { 0.0 };
                assert!((s - target).abs() <= 1e-8 * d.powi(-(b.order() as i32)), "{b:?}: {s}");
            }
            for (r, p) in &phis {
                assert!(r.cube.star_contains(&x));
                assert!((0.0..=1.0 + 1e-15).contains(&p.value()));
            }
        }
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        assert_eq!(compensated_sum([1e16, 1.0, -1e16]), 1.0);
        assert_eq!(compensated_sum([]), 0.0);
    }

    #[test]
    fn single_cube_plateau() {
        let cover = CubeCover::new(PointSet::new(1, vec![vec![0.0]]).unwrap());
        let phis = phi_eval(&cover, &[1.5], 2).unwrap();
        assert_eq!(phis.len(), 1);
        assert_eq!(phis[0].1.value(), 1.0);
    }
}
