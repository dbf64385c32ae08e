//! Truncated multivariate Taylor arithmetic.
//!
//! A [`TaylorValue`] of order `r` stores the normalized Taylor coefficients
//! `c_β = D^β f(x₀) / β!` for `|β| ≤ r` of a scalar function at a fixed
//! expansion point. Products are truncated Cauchy products, so every
//! derivative up to order `r` of a composite expression is exact up to
//! round-off.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::multi_index::{Basis, MultiIndex};

#[derive(Clone, Debug)]
pub struct TaylorValue {
    basis: Arc<Basis>,
    coeffs: Vec<f64>,
}

impl TaylorValue {
    pub fn constant(basis: Arc<Basis>, value: f64) -> Self {
        let mut coeffs = vec![0.0; basis.len()];
        coeffs[0] = value;
        TaylorValue { basis, coeffs }
    }

    pub fn zero(basis: Arc<Basis>) -> Self {
        Self::constant(basis, 0.0)
    }

    /// Seed for coordinate `i` at the expansion point value `value`.
    pub fn variable(basis: Arc<Basis>, i: usize, value: f64) -> Self {
        let mut t = Self::constant(basis, value);
        if t.basis.order() >= 1 {
            let e = MultiIndex::unit(t.basis.dim(), i);
            let k = t.basis.index_of(&e).expect("unit index present");
            t.coeffs[k] = 1.0;
        }
        t
    }

    /// Seeds for all coordinates of `point`.
    pub fn seeds(basis: &Arc<Basis>, point: &[f64]) -> Vec<TaylorValue> {
        assert_eq!(point.len(), basis.dim());
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| TaylorValue::variable(basis.clone(), i, v))
            .collect()
    }

    pub fn from_coeffs(basis: Arc<Basis>, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), basis.len());
        TaylorValue { basis, coeffs }
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn order(&self) -> usize {
        self.basis.order()
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Normalized coefficients in basis order.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, beta: &MultiIndex) -> f64 {
        self.basis.index_of(beta).map_or(0.0, |k| self.coeffs[k])
    }

    /// `D^β f` at the expansion point.
    pub fn derivative(&self, beta: &MultiIndex) -> f64 {
        self.coeff(beta) * beta.factorial()
    }

    /// All partial derivatives in basis order.
    pub fn derivatives(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .zip(self.basis.indices())
            .map(|(c, b)| c * b.factorial())
            .collect()
    }

    pub fn scale(&self, s: f64) -> TaylorValue {
        TaylorValue {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> TaylorValue {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    /// `1/f` by the power-series reciprocal recursion.
    pub fn recip(&self) -> Result<TaylorValue> {
        let a0 = self.coeffs[0];
        if a0 == 0.0 || !a0.is_finite() {
            return Err(Error::Domain(format!(
                "reciprocal of a Taylor value with constant term {a0}"
            )));
        }
        let conv = self.basis.convolution();
        let mut out = vec![0.0; self.coeffs.len()];
        out[0] = 1.0 / a0;
        for k in 1..out.len() {
            let mut acc = 0.0;
            for &(i, j) in &conv[k] {
                if i != 0 {
                    acc += self.coeffs[i as usize] * out[j as usize];
                }
            }
            out[k] = -acc / a0;
        }
        Ok(TaylorValue {
            basis: self.basis.clone(),
            coeffs: out,
        })
    }

    pub fn div(&self, other: &TaylorValue) -> Result<TaylorValue> {
        Ok(self * &other.recip()?)
    }

    /// Composition `g ∘ f` for a univariate `g` given its derivatives
    /// `g^(k)(f(x₀))`, `k = 0..=r`.
    pub fn compose(&self, derivs: &[f64]) -> TaylorValue {
        let r = self.order();
        assert!(derivs.len() > r, "need {} derivatives, got {}", r + 1, derivs.len());
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut acc = TaylorValue::constant(self.basis.clone(), derivs[r] / crate::multi_index::factorial(r));
        for k in (0..r).rev() {
            acc = &acc * &h;
            acc.coeffs[0] += derivs[k] / crate::multi_index::factorial(k);
        }
        acc
    }

    pub fn exp(&self) -> TaylorValue {
        let e = self.value().exp();
        if e == 0.0 {
            return TaylorValue::zero(self.basis.clone());
        }
        self.compose(&vec![e; self.order() + 1])
    }

    pub fn sin(&self) -> TaylorValue {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let derivs: Vec<f64> = (0..=self.order()).map(|k| cycle[k % 4]).collect();
        self.compose(&derivs)
    }

    pub fn cos(&self) -> TaylorValue {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let derivs: Vec<f64> = (0..=self.order()).map(|k| cycle[k % 4]).collect();
        self.compose(&derivs)
    }

    /// `f^p` for `f(x₀) > 0`.
    pub fn powf(&self, p: f64) -> Result<TaylorValue> {
        let v = self.value();
        if v <= 0.0 {
            return Err(Error::Domain(format!("power {p} of non-positive value {v}")));
        }
        let mut derivs = Vec::with_capacity(self.order() + 1);
        let mut falling = 1.0;
        for k in 0..=self.order() {
            derivs.push(falling * v.powf(p - k as f64));
            falling *= p - k as f64;
        }
        Ok(self.compose(&derivs))
    }

    pub fn sqrt(&self) -> Result<TaylorValue> {
        self.powf(0.5)
    }

    fn check_same(&self, other: &TaylorValue) {
        assert!(
            Arc::ptr_eq(&self.basis, &other.basis)
                || (self.basis.dim() == other.basis.dim() && self.basis.order() == other.basis.order()),
            "Taylor values over different bases"
        );
    }
}

impl Add for &TaylorValue {
    type Output = TaylorValue;
    fn add(self, rhs: &TaylorValue) -> TaylorValue {
        self.check_same(rhs);
        TaylorValue {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &TaylorValue {
    type Output = TaylorValue;
    fn sub(self, rhs: &TaylorValue) -> TaylorValue {
        self.check_same(rhs);
        TaylorValue {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &TaylorValue {
    type Output = TaylorValue;
    fn neg(self) -> TaylorValue {
        self.scale(-1.0)
    }
}

impl Mul for &TaylorValue {
    type Output = TaylorValue;
    fn mul(self, rhs: &TaylorValue) -> TaylorValue {
        self.check_same(rhs);
        let conv = self.basis.convolution();
        let coeffs = conv
            .iter()
            .map(|pairs| {
                pairs
                    .iter()
                    .map(|&(i, j)| self.coeffs[i as usize] * rhs.coeffs[j as usize])
                    .sum()
            })
            .collect();
        TaylorValue {
            basis: self.basis.clone(),
            coeffs,
        }
    }
}
