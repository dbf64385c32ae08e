//! Smooth test functions with exact derivatives, used to build jets with
//! known membership in the vanishing classes.

use crate::error::{Error, Result};
use crate::jet::{Jet, PointSet};
use crate::multi_index::{Basis, MultiIndex};
use crate::profile::Scale;
use crate::taylor::TaylorValue;

pub trait SmoothFunction: Send + Sync {
    fn dim(&self) -> usize;

    fn name(&self) -> String;

    /// Taylor expansion of order `order` at `x`.
    fn taylor(&self, x: &[f64], order: usize) -> Result<TaylorValue>;

    /// Scales at which the function's order-`m` derivatives vanish for
    /// `ω = t^α`, `α ∈ (0,1)`.
    fn vanishing_scales(&self, m: usize) -> Vec<Scale>;

    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.taylor(x, 0)?.value())
    }
}

fn check_dim(f: &dyn SmoothFunction, x: &[f64]) -> Result<()> {
    if x.len() != f.dim() {
        return Err(Error::argument(format!("{} expects {} coordinates, got {}", f.name(), f.dim(), x.len())));
    }
    Ok(())
}

/// `Σ c_β x^β`.
#[derive(Clone, Debug)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<(f64, MultiIndex)>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<(f64, MultiIndex)>) -> Result<Self> {
        if terms.iter().any(|(_, b)| b.dim() != dim) {
            return Err(Error::argument("polynomial term has the wrong dimension"));
        }
        Ok(Polynomial { dim, terms })
    }

    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .filter(|(c, _)| *c != 0.0)
            .map(|(_, b)| b.order())
            .max()
            .unwrap_or(0)
    }
}

impl SmoothFunction for Polynomial {
    fn dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> String {
        format!("polynomial of degree {}", self.degree())
    }

    fn taylor(&self, x: &[f64], order: usize) -> Result<TaylorValue> {
        check_dim(self, x)?;
        let basis = Basis::shared(self.dim, order);
        let vars = TaylorValue::seeds(&basis, x);
        let mut out = TaylorValue::zero(basis.clone());
        for (c, beta) in &self.terms {
            let mut term = TaylorValue::constant(basis.clone(), *c);
            for (v, &k) in vars.iter().zip(beta.components()) {
                for _ in 0..k {
                    term = &term * v;
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }

    fn vanishing_scales(&self, m: usize) -> Vec<Scale> {
        match self.degree() {
            d if d <= m => Scale::ALL.to_vec(),
            d if d == m + 1 => vec![Scale::Small],
            _ => Vec::new(),
        }
    }
}

/// `sin(k·x + phase)`.
#[derive(Clone, Debug)]
pub struct Sine {
    pub frequency: Vec<f64>,
    pub phase: f64,
}

impl SmoothFunction for Sine {
    fn dim(&self) -> usize {
        self.frequency.len()
    }

    fn name(&self) -> String {
        "sine wave".into()
    }

    fn taylor(&self, x: &[f64], order: usize) -> Result<TaylorValue> {
        check_dim(self, x)?;
        let basis = Basis::shared(self.dim(), order);
        let vars = TaylorValue::seeds(&basis, x);
        let arg = vars
            .iter()
            .zip(&self.frequency)
            .fold(TaylorValue::constant(basis.clone(), self.phase), |acc, (v, k)| &acc + &v.scale(*k));
        Ok(arg.sin())
    }

    fn vanishing_scales(&self, _m: usize) -> Vec<Scale> {
        vec![Scale::Small, Scale::Large]
    }
}

/// `sin(x₁)·cos(x₂)` on `ℝ²`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SinCos;

impl SmoothFunction for SinCos {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> String {
        "sin(x1) cos(x2)".into()
    }

    fn taylor(&self, x: &[f64], order: usize) -> Result<TaylorValue> {
        check_dim(self, x)?;
        let v = TaylorValue::seeds(&Basis::shared(2, order), x);
        Ok(&v[0].sin() * &v[1].cos())
    }

    fn vanishing_scales(&self, _m: usize) -> Vec<Scale> {
        vec![Scale::Small, Scale::Large]
    }
}

/// `exp(−1/(1 − |x−c|²/ρ²))` inside the ball `B(c, ρ)`, `0` outside.
#[derive(Clone, Debug)]
pub struct SmoothBump {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl SmoothFunction for SmoothBump {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn name(&self) -> String {
        format!("smooth bump of radius {}", self.radius)
    }

    fn taylor(&self, x: &[f64], order: usize) -> Result<TaylorValue> {
        check_dim(self, x)?;
        let basis = Basis::shared(self.dim(), order);
        let vars = TaylorValue::seeds(&basis, x);
        let r2 = self.radius * self.radius;
        let mut s = TaylorValue::constant(basis.clone(), 1.0);
        for (v, c) in vars.iter().zip(&self.center) {
            let h = v.add_scalar(-c);
            s = &s - &(&h * &h).scale(1.0 / r2);
        }
        if s.value() <= 0.0 {
            return Ok(TaylorValue::zero(basis));
        }
        Ok(s.recip()?.scale(-1.0).exp())
    }

    fn vanishing_scales(&self, _m: usize) -> Vec<Scale> {
        Scale::ALL.to_vec()
    }
}

/// `x/√(1+x²)` in one variable.
#[derive(Clone, Copy, Debug, Default)]
pub struct Saturating;

impl SmoothFunction for Saturating {
    fn dim(&self) -> usize {
        1
    }

    fn name(&self) -> String {
        "x / sqrt(1 + x^2)".into()
    }

    fn taylor(&self, x: &[f64], order: usize) -> Result<TaylorValue> {
        check_dim(self, x)?;
        let v = TaylorValue::variable(Basis::shared(1, order), 0, x[0]);
        let den = (&v * &v).add_scalar(1.0).powf(-0.5)?;
        Ok(&v * &den)
    }

    fn vanishing_scales(&self, _m: usize) -> Vec<Scale> {
        Scale::ALL.to_vec()
    }
}

/// `√|x|` in one variable; Hölder-1/2 but at no scale vanishing. Only order 0
/// is available at the origin.
#[derive(Clone, Copy, Debug, Default)]
pub struct SqrtAbs;

impl SmoothFunction for SqrtAbs {
    fn dim(&self) -> usize {
        1
    }

    fn name(&self) -> String {
        "sqrt(|x|)".into()
    }

    fn taylor(&self, x: &[f64], order: usize) -> Result<TaylorValue> {
        check_dim(self, x)?;
        let basis = Basis::shared(1, order);
        if x[0] == 0.0 {
            if order == 0 {
                return Ok(TaylorValue::zero(basis));
            }
            return Err(Error::Domain("sqrt(|x|) is not differentiable at 0".into()));
        }
        let v = TaylorValue::variable(basis, 0, x[0]);
        let a = if x[0] < 0.0 { v.scale(-1.0) } else { v };
        a.sqrt()
    }

    fn vanishing_scales(&self, _m: usize) -> Vec<Scale> {
        Vec::new()
    }
}

/// Jet of order `m` of `f` on the given points: `A_β(y) = D^β f(y)`.
pub fn jet_from_smooth(f: &dyn SmoothFunction, points: Vec<Vec<f64>>, order: usize) -> Result<(PointSet, Jet)> {
    let set = PointSet::new(f.dim(), points)?;
    let mut jet = Jet::zeros(f.dim(), order, 1, set.len())?;
    for i in 0..set.len() {
        let t = f.taylor(set.point(i), order)?;
        for (b, d) in t.derivatives().into_iter().enumerate() {
            jet.coeff_mut(i, b)[0] = d;
        }
    }
    Ok((set, jet))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bump_values() {
        let b = SmoothBump {
            center: vec![0.0, 0.0],
            radius: 2.0,
        };
        assert_relative_eq!(b.value(&[0.0, 0.0]).unwrap(), (-1.0f64).exp());
        assert_eq!(b.value(&[2.0, 0.0]).unwrap(), 0.0);
        assert_eq!(b.value(&[5.0, 5.0]).unwrap(), 0.0);
        // radial derivative against a finite difference
        let t = b.taylor(&[0.7, 0.4], 1).unwrap();
        let h = 1e-6;
        let fd = (b.value(&[0.7 + h, 0.4]).unwrap() - b.value(&[0.7 - h, 0.4]).unwrap()) / (2.0 * h);
        assert_relative_eq!(t.derivative(&MultiIndex::new(vec![1, 0])), fd, max_relative = 1e-7);
    }

    #[test]
    fn saturating_derivative() {
        // d/dx x(1+x²)^{-1/2} = (1+x²)^{-3/2}
        let t = Saturating.taylor(&[1.3], 1).unwrap();
        assert_relative_eq!(t.derivatives()[1], (1.0 + 1.69f64).powf(-1.5), max_relative = 1e-14);
    }

    #[test]
    fn sqrt_abs() {
        assert_eq!(SqrtAbs.value(&[-4.0]).unwrap(), 2.0);
        assert_eq!(SqrtAbs.value(&[0.0]).unwrap(), 0.0);
        assert!(SqrtAbs.taylor(&[0.0], 1).is_err());
    }

    #[test]
    fn polynomial_jet_and_classes() {
        let p = Polynomial::new(1, vec![(1.0, MultiIndex::new(vec![2]))]).unwrap();
        let (_, jet) = jet_from_smooth(&p, vec![vec![0.0], vec![1.0]], 2).unwrap();
        assert_eq!(jet.point_coeffs(0), &[0.0, 0.0, 2.0]);
        assert_eq!(jet.point_coeffs(1), &[1.0, 2.0, 2.0]);
        assert_eq!(p.vanishing_scales(2).len(), 3);
        assert_eq!(p.vanishing_scales(1), vec![Scale::Small]);
        assert!(p.vanishing_scales(0).is_empty());
    }

    #[test]
    fn sincos_mixed_partial() {
        let t = SinCos.taylor(&[0.3, 1.1], 2).unwrap();
        assert_relative_eq!(t.derivative(&MultiIndex::new(vec![1, 1])), -(0.3f64.cos()) * 1.1f64.sin(), max_relative = 1e-14);
    }
}
