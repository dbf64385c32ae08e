//! The Whitney extension `F = Σ_Q φ_Q · P_{p_Q}` of a jet and its derivatives.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::cube::{CubeCover, ON_SET_TOLERANCE};
use crate::error::{Error, Result};
use crate::jet::{poly_derivatives_into, Jet, PointSet};
use crate::modulus::Modulus;
use crate::multi_index::{Basis, MultiIndex};
use crate::partition::phi_eval;

/// Largest number of grid points accepted by [`ExtensionField::eval_grid`].
pub const MAX_GRID_POINTS: usize = 10_000_000;

/// `D^α F(x)` for every `|α| ≤ r`, laid out `[α][component]` in basis order.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldDerivatives {
    basis: Arc<Basis>,
    value_dim: usize,
    values: Vec<f64>,
}

impl FieldDerivatives {
    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn order(&self) -> usize {
        self.basis.order()
    }

    pub fn value_dim(&self) -> usize {
        self.value_dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, position: usize) -> &[f64] {
        &self.values[position * self.value_dim..(position + 1) * self.value_dim]
    }

    pub fn get(&self, alpha: &MultiIndex) -> Option<&[f64]> {
        self.basis.index_of(alpha).map(|k| self.at(k))
    }

    /// All `D^α F`, `|α| = k`, concatenated.
    pub fn level(&self, k: usize) -> &[f64] {
        let r = self.basis.level(k);
        &self.values[r.start * self.value_dim..r.end * self.value_dim]
    }
}

#[derive(Debug)]
pub struct ExtensionField {
    cover: CubeCover,
    jet: Jet,
    modulus: Modulus,
}

impl ExtensionField {
    pub fn new(set: PointSet, jet: Jet, modulus: Modulus) -> Result<Self> {
        jet.check_compatible(&set)?;
        Ok(ExtensionField {
            cover: CubeCover::new(set),
            jet,
            modulus,
        })
    }

    pub fn cover(&self) -> &CubeCover {
        &self.cover
    }

    pub fn set(&self) -> &PointSet {
        self.cover.set()
    }

    pub fn jet(&self) -> &Jet {
        &self.jet
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn dim(&self) -> usize {
        self.cover.dim()
    }

    pub fn value_dim(&self) -> usize {
        self.jet.value_dim()
    }

    /// `F(x)`; on `E` (within `1e-14`) the jet value `A_0` is returned verbatim.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let (xi, dist) = self.cover.nearest(x);
        if dist <= ON_SET_TOLERANCE {
            return Ok(self.jet.coeff(xi, 0).to_vec());
        }
        Ok(self.formula_or_isolated(x, xi, dist, 0)?.values)
    }

    /// `D^α F(x)` for `|α| ≤ order ≤ m + 1`. On `E` the jet coefficients are
    /// returned for `order ≤ m`; order `m + 1` is not defined there.
    pub fn eval_derivatives(&self, x: &[f64], order: usize) -> Result<FieldDerivatives> {
        let m = self.jet.order();
        if order > m + 1 {
            return Err(Error::argument(format!("derivative order {order} exceeds m + 1 = {}", m + 1)));
        }
        self.check_point(x)?;
        let (xi, dist) = self.cover.nearest(x);
        if dist <= ON_SET_TOLERANCE {
            if order > m {
                return Err(Error::OnSet { index: xi, distance: dist });
            }
            let basis = Basis::shared(self.dim(), order);
            let d = self.value_dim();
            let values = self.jet.point_coeffs(xi)[..basis.len() * d].to_vec();
            return Ok(FieldDerivatives {
                basis,
                value_dim: d,
                values,
            });
        }
        self.formula_or_isolated(x, xi, dist, order)
    }

    /// Beyond the integer cube window, falls back to `P_ξ` when every cube whose
    /// enlargement contains `x` provably has `p_Q = ξ`, i.e. when no other point
    /// of `E` lies within `4·d(x,E)` of `ξ`. The operator then equals `P_ξ` near `x`.
    fn formula_or_isolated(&self, x: &[f64], xi: usize, dist: f64, order: usize) -> Result<FieldDerivatives> {
        match self.formula(x, xi, order) {
            Err(Error::Range(_)) if self.isolated(xi, dist) => Ok(self.anchor(x, xi, order)),
            other => other,
        }
    }

    /// Whether every cube `Q` with `x ∈ Q*` has `p_Q = ξ` for `d(x,E) = dist` attained at `ξ`.
    pub(crate) fn isolated(&self, xi: usize, dist: f64) -> bool {
        let set = self.cover.set();
        let sep = (0..set.len())
            .filter(|&j| j != xi)
            .map(|j| crate::jet::distance(set.point(j), set.point(xi)))
            .fold(f64::INFINITY, f64::min);
        sep > 4.0 * dist
    }

    fn anchor(&self, x: &[f64], xi: usize, order: usize) -> FieldDerivatives {
        let basis = Basis::shared(self.dim(), order);
        let d = self.value_dim();
        let mut values = vec![0.0; basis.len() * d];
        let set = self.cover.set();
        poly_derivatives_into(self.jet.basis(), d, set.point(xi), self.jet.point_coeffs(xi), x, &mut values);
        FieldDerivatives {
            basis,
            value_dim: d,
            values,
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::argument(format!("query has {} coordinates, expected {}", x.len(), self.dim())));
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::argument("query coordinates must be finite"));
        }
        Ok(())
    }

    /// `P_ξ + Σ_Q φ_Q (P_{p_Q} − P_ξ)`, which equals `Σ_Q φ_Q P_{p_Q}` since `Σ φ_Q = 1`.
    fn formula(&self, x: &[f64], xi: usize, order: usize) -> Result<FieldDerivatives> {
        let basis = Basis::shared(self.dim(), order);
        let d = self.value_dim();
        let len = basis.len();
        let set = self.cover.set();
        let jb = self.jet.basis();

        let mut anchor = vec![0.0; len * d];
        poly_derivatives_into(jb, d, set.point(xi), self.jet.point_coeffs(xi), x, &mut anchor);
        // normalized Taylor coefficients D^γ/γ!
        let inv_fact: Vec<f64> = basis.indices().iter().map(|g| 1.0 / g.factorial()).collect();

        let phis = phi_eval(&self.cover, x, order)?;
        let conv = basis.convolution();
        let mut acc = vec![0.0; len * d];
        let mut diff = vec![0.0; len * d];
        for (rec, phi) in &phis {
            if rec.p_q == xi {
                continue;
            }
            poly_derivatives_into(jb, d, set.point(rec.p_q), self.jet.point_coeffs(rec.p_q), x, &mut diff);
            for (g, w) in inv_fact.iter().enumerate() {
                for c in 0..d {
                    diff[g * d + c] = (diff[g * d + c] - anchor[g * d + c]) * w;
                }
            }
            let pc = phi.coeffs();
            for (k, pairs) in conv.iter().enumerate() {
                for &(i, j) in pairs {
                    let a = pc[i as usize];
                    if a == 0.0 {
                        continue;
                    }
                    for c in 0..d {
                        acc[k * d + c] += a * diff[j as usize * d + c];
                    }
                }
            }
        }
        let values = (0..len * d)
            .map(|idx| anchor[idx] + acc[idx] / inv_fact[idx / d])
            .collect();
        Ok(FieldDerivatives {
            basis,
            value_dim: d,
            values,
        })
    }

    /// Evaluation at arbitrary points, in the layout of [`eval_grid`](Self::eval_grid).
    pub fn eval_points(&self, points: &[Vec<f64>], order: usize) -> Result<GridTable> {
        let n = self.dim();
        if order > self.jet.order() + 1 {
            return Err(Error::argument(format!("derivative order {order} exceeds m + 1 = {}", self.jet.order() + 1)));
        }
        if let Some(i) = points.iter().position(|p| p.len() != n) {
            return Err(Error::schema(format!("points[{i}]"), format!("expected {n} coordinates")));
        }
        let basis = Basis::shared(n, order);
        let rows = points
            .par_iter()
            .map(|x| self.table_row(x, order, &basis))
            .collect::<Result<_>>()?;
        Ok(GridTable {
            header: self.table_header(&basis),
            rows,
        })
    }

    fn table_row(&self, x: &[f64], order: usize, basis: &Basis) -> Result<Vec<f64>> {
        let n = self.dim();
        let d = self.value_dim();
        let mut row = x.to_vec();
        match self.eval_derivatives(x, order) {
            Ok(fd) => row.extend_from_slice(fd.values()),
            Err(Error::OnSet { index, .. }) => {
                let known = basis.level(self.jet.order().min(order)).end * d;
                row.extend_from_slice(&self.jet.point_coeffs(index)[..known]);
                row.resize(n + basis.len() * d, f64::NAN);
            }
            Err(e) => return Err(e),
        }
        Ok(row)
    }

    fn table_header(&self, basis: &Basis) -> Vec<String> {
        let d = self.value_dim();
        let mut header: Vec<String> = (0..self.dim()).map(|i| format!("x{}", i + 1)).collect();
        for alpha in basis.indices() {
            for c in 0..d {
                header.push(if alpha.order() == 0 {
                    format!("f{c}")
                } else {
                    format!("d{}_f{c}", alpha.label())
                });
            }
        }
        header
    }

    /// Row-major evaluation on the grid `lo..=hi` with `res[i] ≥ 2` points per axis.
    pub fn eval_grid(&self, lo: &[f64], hi: &[f64], res: &[usize], order: usize) -> Result<GridTable> {
        let n = self.dim();
        if lo.len() != n || hi.len() != n || res.len() != n {
            return Err(Error::argument(format!("grid box and resolution need {n} entries")));
        }
        if lo.iter().zip(hi).any(|(a, b)| !(a < b && a.is_finite() && b.is_finite())) {
            return Err(Error::argument("grid box must be nondegenerate"));
        }
        if res.iter().any(|&r| r < 2) {
            return Err(Error::argument("grid resolution must be at least 2 per axis"));
        }
        let total = res.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r)).unwrap_or(usize::MAX);
        if total > MAX_GRID_POINTS {
            return Err(Error::argument(format!("grid of {total} points exceeds the limit of {MAX_GRID_POINTS}")));
        }
        if order > self.jet.order() + 1 {
            return Err(Error::argument(format!("derivative order {order} exceeds m + 1 = {}", self.jet.order() + 1)));
        }
        let basis = Basis::shared(n, order);
        let rows: Vec<Vec<f64>> = (0..total)
            .into_par_iter()
            .map(|flat| {
                let mut rem = flat;
                let mut x = vec![0.0; n];
                for i in (0..n).rev() {
                    let k = rem % res[i];
                    rem /= res[i];
                    x[i] = lo[i] + (hi[i] - lo[i]) * k as f64 / (res[i] - 1) as f64;
                }
                self.table_row(&x, order, &basis)
            })
            .collect::<Result<_>>()?;
        let header = self.table_header(&basis);
        Ok(GridTable { header, rows })
    }
}

/// Tabular grid output: coordinates, then `D^α F` columns in basis order.
#[derive(Clone, Debug, PartialEq)]
pub struct GridTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl GridTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}
