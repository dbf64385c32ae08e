//! Point sets, jets in multi-index form, and their Taylor polynomials.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::multi_index::{Basis, MultiIndex};

/// Largest supported jet order.
pub const MAX_JET_ORDER: usize = 10;

/// Points closer than this are treated as duplicates.
pub const DUPLICATE_TOLERANCE: f64 = 1e-12;

/// A finite, nonempty set of pairwise distinct points of `ℝⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::schema("dimension", "dimension must be positive"));
        }
        if points.is_empty() {
            return Err(Error::schema("points", "point set must be nonempty"));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::schema(
                    format!("points[{i}]"),
                    format!("expected {dim} coordinates, got {}", p.len()),
                ));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::schema(format!("points[{i}]"), "coordinates must be finite"));
            }
            coords.extend_from_slice(p);
        }
        let set = PointSet { dim, coords };
        let dups = set.duplicates();
        if !dups.is_empty() {
            let list = dups
                .iter()
                .map(|(a, b)| format!("({a}, {b})"))
                .collect::<Vec<_>>()
                .join(", ");
            return Err(Error::schema("points", format!("duplicate points at indices {list}")));
        }
        Ok(set)
    }

    fn duplicates(&self) -> Vec<(usize, usize)> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.point(a)[0].total_cmp(&self.point(b)[0]));
        let mut out = Vec::new();
        for (pos, &i) in order.iter().enumerate() {
            for &j in &order[pos + 1..] {
                if self.point(j)[0] - self.point(i)[0] > DUPLICATE_TOLERANCE {
                    break;
                }
                if distance(self.point(i), self.point(j)) <= DUPLICATE_TOLERANCE {
                    out.push((i.min(j), i.max(j)));
                }
            }
        }
        out.sort();
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn to_vecs(&self) -> Vec<Vec<f64>> {
        self.iter().map(|p| p.to_vec()).collect()
    }

    /// `max_i |x_i|`
    pub fn radius(&self) -> f64 {
        self.iter().map(norm).fold(0.0, f64::max)
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Coefficients `A_β(y_i) ∈ ℝ^d` for every point and every `|β| ≤ m`.
#[derive(Clone, Debug)]
pub struct Jet {
    order: usize,
    value_dim: usize,
    npoints: usize,
    basis: Arc<Basis>,
    coeffs: Vec<f64>,
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order
            && self.value_dim == other.value_dim
            && self.npoints == other.npoints
            && self.basis.dim() == other.basis.dim()
            && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn zeros(dim: usize, order: usize, value_dim: usize, npoints: usize) -> Result<Self> {
        if order > MAX_JET_ORDER {
            return Err(Error::schema("order", format!("jet order must be at most {MAX_JET_ORDER}")));
        }
        if value_dim == 0 {
            return Err(Error::schema("value_dim", "value_dim must be positive"));
        }
        let basis = Basis::shared(dim, order);
        let coeffs = vec![0.0; npoints * basis.len() * value_dim];
        Ok(Jet {
            order,
            value_dim,
            npoints,
            basis,
            coeffs,
        })
    }

    /// Builds a jet from `(point, β, value)` entries; every `(point, |β| ≤ m)`
    /// must appear exactly once.
    pub fn from_entries(
        dim: usize,
        order: usize,
        value_dim: usize,
        npoints: usize,
        entries: impl IntoIterator<Item = (usize, MultiIndex, Vec<f64>)>,
    ) -> Result<Self> {
        let mut jet = Jet::zeros(dim, order, value_dim, npoints)?;
        let nb = jet.basis.len();
        let mut seen = vec![false; npoints * nb];
        for (n, (point, beta, value)) in entries.into_iter().enumerate() {
            let path = format!("coefficients[{n}]");
            if point >= npoints {
                return Err(Error::schema(path, format!("point index {point} out of range")));
            }
            if beta.dim() != dim {
                return Err(Error::schema(path, format!("beta must have {dim} components")));
            }
            let Some(b) = jet.basis.index_of(&beta) else {
                return Err(Error::schema(path, format!("|beta| = {} exceeds the jet order {order}", beta.order())));
            };
            if value.len() != value_dim {
                return Err(Error::schema(path, format!("value must have {value_dim} components")));
            }
            if value.iter().any(|v| !v.is_finite()) {
                return Err(Error::schema(path, "coefficient values must be finite"));
            }
            if std::mem::replace(&mut seen[point * nb + b], true) {
                return Err(Error::schema(path, format!("duplicate coefficient for point {point}, beta {beta:?}")));
            }
            jet.coeff_mut(point, b).copy_from_slice(&value);
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            let (point, b) = (missing / nb, missing % nb);
            return Err(Error::schema(
                "coefficients",
                format!("missing coefficient for point {point}, beta {:?}", jet.basis.get(b)),
            ));
        }
        Ok(jet)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value_dim(&self) -> usize {
        self.value_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn npoints(&self) -> usize {
        self.npoints
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    /// `A_β(y_point)` for the basis position `b`.
    pub fn coeff(&self, point: usize, b: usize) -> &[f64] {
        let nb = self.basis.len();
        let start = (point * nb + b) * self.value_dim;
        &self.coeffs[start..start + self.value_dim]
    }

    pub fn coeff_mut(&mut self, point: usize, b: usize) -> &mut [f64] {
        let nb = self.basis.len();
        let start = (point * nb + b) * self.value_dim;
        &mut self.coeffs[start..start + self.value_dim]
    }

    /// All `A_β(y_point)`, `|β| ≤ m`, concatenated in basis order.
    pub fn point_coeffs(&self, point: usize) -> &[f64] {
        let stride = self.basis.len() * self.value_dim;
        &self.coeffs[point * stride..(point + 1) * stride]
    }

    pub fn scaled(&self, lambda: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= lambda);
        out
    }

    /// `a·self + b·other`
    pub fn combine(&self, a: f64, other: &Jet, b: f64) -> Result<Jet> {
        if self.order != other.order
            || self.value_dim != other.value_dim
            || self.npoints != other.npoints
            || self.dim() != other.dim()
        {
            return Err(Error::argument("jets differ in shape"));
        }
        let mut out = self.clone();
        for (o, (x, y)) in out.coeffs.iter_mut().zip(self.coeffs.iter().zip(&other.coeffs)) {
            *o = a * x + b * y;
        }
        Ok(out)
    }

    pub fn check_compatible(&self, set: &PointSet) -> Result<()> {
        if set.dim() != self.dim() || set.len() != self.npoints {
            return Err(Error::argument(format!(
                "jet ({} points in ℝ^{}) does not match point set ({} points in ℝ^{})",
                self.npoints,
                self.dim(),
                set.len(),
                set.dim()
            )));
        }
        Ok(())
    }

    /// Coefficients of the top level `|β| = m` at `point`, flattened.
    pub fn top_level(&self, point: usize) -> Vec<f64> {
        self.basis
            .level(self.order)
            .flat_map(|b| self.coeff(point, b).iter().copied())
            .collect()
    }
}

/// `P_y(x) = Σ_{|β|≤m} A_β(y) (x−y)^β / β!` at `y = E[base]`.
pub fn taylor_poly_eval(jet: &Jet, set: &PointSet, base: usize, x: &[f64]) -> Result<Vec<f64>> {
    jet.check_compatible(set)?;
    if base >= set.len() {
        return Err(Error::argument(format!("base index {base} out of range for {} points", set.len())));
    }
    if x.len() != set.dim() {
        return Err(Error::argument("query point has the wrong dimension"));
    }
    Ok(poly_derivatives(jet, set.point(base), jet.point_coeffs(base), x, 0))
}

/// `D^γ P_y(x)` for every `|γ| ≤ r`, laid out `[γ][component]` in the order of
/// `Basis::shared(dim, r)`. `coeffs` are the jet coefficients at `y`.
pub fn poly_derivatives(jet: &Jet, y: &[f64], coeffs: &[f64], x: &[f64], r: usize) -> Vec<f64> {
    let d = jet.value_dim();
    let mut out = vec![0.0; Basis::count(jet.dim(), r) * d];
    poly_derivatives_into(jet.basis(), d, y, coeffs, x, &mut out);
    out
}

/// Writes `D^γ P_y(x)` for the positions of `basis` that fit into `out`
/// (graded orders share prefixes, so `out` may be sized for any `r`);
/// entries above the jet order are zeroed.
pub(crate) fn poly_derivatives_into(
    basis: &Basis,
    d: usize,
    y: &[f64],
    coeffs: &[f64],
    x: &[f64],
    out: &mut [f64],
) {
    let h: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let mut mono = vec![0.0; basis.len()];
    basis.scaled_monomials(&h, &mut mono);
    out.iter_mut().for_each(|v| *v = 0.0);
    let shifts = basis.shifts();
    let rows = (out.len() / d).min(basis.len());
    for (g, pairs) in shifts.iter().take(rows).enumerate() {
        let slot = &mut out[g * d..(g + 1) * d];
        for &(b, delta) in pairs {
            let w = mono[delta as usize];
            if w == 0.0 {
                continue;
            }
            let a = &coeffs[b as usize * d..(b as usize + 1) * d];
            for (s, c) in slot.iter_mut().zip(a) {
                *s += w * c;
            }
        }
    }
}

/// A derivative table `β ↦ D^β f(y) ∈ ℝ^d` for one point.
pub type DerivativeTable = BTreeMap<MultiIndex, Vec<f64>>;

/// Builds `(E, 𝒜)` with `A_β(y) = D^β f(y)` from supplied derivative tables.
pub fn jet_from_function(
    dim: usize,
    order: usize,
    value_dim: usize,
    samples: Vec<(Vec<f64>, DerivativeTable)>,
) -> Result<(PointSet, Jet)> {
    let npoints = samples.len();
    let mut points = Vec::with_capacity(npoints);
    let mut entries = Vec::new();
    let basis = Basis::shared(dim, order);
    for (i, (p, table)) in samples.into_iter().enumerate() {
        points.push(p);
        for beta in basis.indices() {
            let Some(v) = table.get(beta) else {
                return Err(Error::argument(format!(
                    "derivative table for sample {i} lacks beta {beta:?}"
                )));
            };
            entries.push((i, beta.clone(), v.clone()));
        }
    }
    let set = PointSet::new(dim, points)?;
    let jet = Jet::from_entries(dim, order, value_dim, npoints, entries)?;
    Ok((set, jet))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[usize]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn constant_polynomial() {
        let set = PointSet::new(1, vec![vec![0.3]]).unwrap();
        let jet = Jet::from_entries(1, 0, 2, 1, [(0, mi(&[0]), vec![1.5, -2.0])]).unwrap();
        for x in [-3.0, 0.3, 17.0] {
            assert_eq!(taylor_poly_eval(&jet, &set, 0, &[x]).unwrap(), vec![1.5, -2.0]);
        }
    }

    #[test]
    fn square_from_second_derivative() {
        let set = PointSet::new(1, vec![vec![0.0]]).unwrap();
        let jet = Jet::from_entries(
            1,
            2,
            1,
            1,
            [(0, mi(&[0]), vec![0.0]), (0, mi(&[1]), vec![0.0]), (0, mi(&[2]), vec![2.0])],
        )
        .unwrap();
        for x in [-2.0, 0.5, 3.0] {
            assert_eq!(taylor_poly_eval(&jet, &set, 0, &[x]).unwrap()[0], x * x);
        }
    }

    #[test]
    fn two_dimensional_linear() {
        let set = PointSet::new(2, vec![vec![1.0, 1.0]]).unwrap();
        let jet = Jet::from_entries(
            2,
            1,
            1,
            1,
            [(0, mi(&[0, 0]), vec![3.0]), (0, mi(&[1, 0]), vec![1.0]), (0, mi(&[0, 1]), vec![-2.0])],
        )
        .unwrap();
        assert_eq!(taylor_poly_eval(&jet, &set, 0, &[2.0, 0.0]).unwrap(), vec![6.0]);
        assert!(taylor_poly_eval(&jet, &set, 1, &[2.0, 0.0]).is_err());
    }

    #[test]
    fn derivatives_of_polynomial() {
        // P(x) = x1^2 x2 around y=0 as a jet of order 3: A_{(2,1)} = 2
        let set = PointSet::new(2, vec![vec![0.0, 0.0]]).unwrap();
        let basis = Basis::shared(2, 3);
        let entries = basis.indices().iter().map(|b| {
            let v = if b == &mi(&[2, 1]) { 2.0 } else { 0.0 };
            (0, b.clone(), vec![v])
        });
        let jet = Jet::from_entries(2, 3, 1, 1, entries).unwrap();
        let x = [1.5, -0.5];
        let d = poly_derivatives(&jet, set.point(0), jet.point_coeffs(0), &x, 2);
        let b2 = Basis::shared(2, 2);
        let get = |m: &[usize]| d[b2.index_of(&mi(m)).unwrap()];
        assert_eq!(get(&[0, 0]), 1.5 * 1.5 * -0.5);
        assert_eq!(get(&[1, 0]), 2.0 * 1.5 * -0.5);
        assert_eq!(get(&[0, 1]), 1.5 * 1.5);
        assert_eq!(get(&[1, 1]), 3.0);
        assert_eq!(get(&[2, 0]), -1.0);
        assert_eq!(get(&[0, 2]), 0.0);
    }

    #[test]
    fn duplicate_points_listed() {
        let err = PointSet::new(1, vec![vec![0.0], vec![1.0], vec![0.0]]).unwrap_err();
        assert!(err.to_string().contains("(0, 2)"), "{err}");
    }

    #[test]
    fn incomplete_entries_rejected() {
        let err = Jet::from_entries(2, 1, 1, 1, [(0, mi(&[0, 0]), vec![1.0]), (0, mi(&[0, 1]), vec![1.0])]).unwrap_err();
        match err {
            Error::Schema { path, message } => {
                assert_eq!(path, "coefficients");
                assert!(message.contains("(1.0)"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = Jet::from_entries(1, 0, 1, 1, [(0, mi(&[0]), vec![1.0]), (0, mi(&[1]), vec![1.0])]).unwrap_err();
        assert!(err.to_string().contains("exceeds the jet order"));
    }

    #[test]
    fn from_function_tables() {
        let mk = |v: &[f64]| -> DerivativeTable {
            v.iter().enumerate().map(|(k, &x)| (mi(&[k]), vec![x])).collect()
        };
        // x^2 at 0 and 1
        let (set, jet) = jet_from_function(1, 2, 1, vec![(vec![0.0], mk(&[0.0, 0.0, 2.0])), (vec![1.0], mk(&[1.0, 2.0, 2.0]))]).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(jet.point_coeffs(1), &[1.0, 2.0, 2.0]);
        // sin at 0, order 1
        let (_, jet) = jet_from_function(1, 1, 1, vec![(vec![0.0], mk(&[0f64.sin(), 0f64.cos()]))]).unwrap();
        assert_eq!(jet.point_coeffs(0), &[0.0, 1.0]);
        // missing entry
        assert!(jet_from_function(1, 2, 1, vec![(vec![0.0], mk(&[0.0, 1.0]))]).is_err());
    }
}
