//! Operator norms of symmetric `k`-linear maps `(ℝⁿ)^k → ℝ^d` given in
//! multi-index form `T_β = T(e₁^β₁, …, eₙ^βₙ)`, `|β| = k`.
//!
//! The exact norm is only computed where it is cheap (`k ≤ 1`, or `n = 1`).
//! Otherwise the value is the maximum of `‖T(u,…,u)‖` over a fixed set of
//! `2·n·k` unit directions (a lower bound), bracketed above by the Frobenius
//! norm of the full coefficient tensor.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::multi_index::{factorial, MultiIndex};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
}

impl NormBracket {
    pub fn exact(v: f64) -> Self {
        NormBracket { lower: v, upper: v }
    }

    pub fn value(&self) -> f64 {
        self.lower
    }

    pub fn is_tight(&self) -> bool {
        self.upper - self.lower <= 1e-12 * self.upper.max(1e-300)
    }
}

/// Deterministic direction sample used for the lower bound.
pub fn directions(dim: usize, k: usize) -> Arc<Vec<Vec<f64>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Vec<Vec<f64>>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("direction cache poisoned");
    guard
        .entry((dim, k))
        .or_insert_with(|| Arc::new(build_directions(dim, k)))
        .clone()
}

fn build_directions(dim: usize, k: usize) -> Vec<Vec<f64>> {
    let target = (2 * dim * k.max(1)).max(1);
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(target);
    let push = |mut v: Vec<f64>, out: &mut Vec<Vec<f64>>| {
        if out.len() >= target {
            return;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        let duplicate = out
            .iter()
            .any(|u| u.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>().abs() > 1.0 - 1e-12);
        if !duplicate {
            out.push(v);
        }
    };
    for i in 0..dim {
        push(MultiIndex::unit(dim, i).components().iter().map(|&c| c as f64).collect(), &mut out);
    }
    if dim > 1 {
        for pattern in 0..(1usize << (dim - 1)).min(1 << 12) {
            let v = (0..dim)
                .map(|i| if i > 0 && (pattern >> (i - 1)) & 1 == 1 { -1.0 } else { 1.0 })
                .collect();
            push(v, &mut out);
        }
        let mut c = 1.0;
        let mut step = 0;
        while out.len() < target && step < 64 {
            for i in 0..dim {
                for j in (i + 1)..dim {
                    for sign in [1.0, -1.0] {
                        let mut v = vec![0.0; dim];
                        v[i] = 1.0;
                        v[j] = sign * c;
                        push(v, &mut out);
                    }
                }
            }
            step += 1;
            // 1, 2, 1/2, 3, 1/3, ...
            c = if step % 2 == 1 { (step / 2 + 2) as f64 } else { 1.0 / (step / 2 + 1) as f64 };
        }
    }
    out
}

/// Norm bracket of a symmetric `k`-linear map. `level` lists the multi-indices
/// with `|β| = k` and `values[i*d..(i+1)*d]` holds `T_{level[i]}`.
pub fn sym_norm(level: &[MultiIndex], values: &[f64], value_dim: usize) -> NormBracket {
    assert_eq!(values.len(), level.len() * value_dim);
    let Some(first) = level.first() else {
        return NormBracket::exact(0.0);
    };
    let dim = first.dim();
    let k = first.order();
    let component = |i: usize| &values[i * value_dim..(i + 1) * value_dim];
    let norm2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();

    let frobenius = level
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let w = factorial(k) / b.factorial();
            w * component(i).iter().map(|x| x * x).sum::<f64>()
        })
        .sum::<f64>()
        .sqrt();

    if k == 0 {
        return NormBracket::exact(norm2(component(0)));
    }
    if dim == 1 {
        return NormBracket::exact(norm2(component(0)));
    }
    if k == 1 {
        if value_dim == 1 {
            return NormBracket::exact(frobenius);
        }
        let m = DMatrix::from_fn(value_dim, dim, |c, i| {
            let pos = level.iter().position(|b| b.components()[i] == 1).expect("unit index");
            component(pos)[c]
        });
        let sigma = m
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0f64, f64::max);
        return NormBracket::exact(sigma);
    }

    let weights: Vec<f64> = level.iter().map(|b| factorial(k) / b.factorial()).collect();
    let mut lower = 0.0f64;
    let mut acc = vec![0.0; value_dim];
    for u in directions(dim, k).iter() {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for (i, b) in level.iter().enumerate() {
            let coef = weights[i] * b.monomial(u);
            for (a, t) in acc.iter_mut().zip(component(i)) {
                *a += coef * t;
            }
        }
        lower = lower.max(norm2(&acc));
    }
    NormBracket {
        lower,
        upper: frobenius.max(lower),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multi_index::Basis;
    use approx::assert_relative_eq;

    fn level(dim: usize, k: usize) -> Vec<MultiIndex> {
        let b = Basis::new(dim, k);
        b.indices()[b.level(k)].to_vec()
    }

    #[test]
    fn direction_counts() {
        assert_eq!(directions(2, 2).len(), 8);
        assert_eq!(directions(3, 2).len(), 12);
        assert_eq!(directions(1, 3).len(), 1);
        for u in directions(3, 3).iter() {
            assert_relative_eq!(u.iter().map(|x| x * x).sum::<f64>(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn gradient_norm_is_exact() {
        let lv = level(2, 1);
        let nb = sym_norm(&lv, &[3.0, 4.0], 1);
        assert_eq!(nb, NormBracket::exact(5.0));
    }

    #[test]
    fn jacobian_spectral_norm() {
        // rows (1,0),(0,2) in ℝ^2 -> σ_max = 2
        let lv = level(2, 1);
        // T_{e1} = (1, 0), T_{e2} = (0, 2)
        let nb = sym_norm(&lv, &[1.0, 0.0, 0.0, 2.0], 2);
        assert_relative_eq!(nb.lower, 2.0, epsilon = 1e-12);
        assert!(nb.is_tight());
    }

    #[test]
    fn quadratic_form_bracket() {
        // Hessian diag(1, -3): operator norm 3, Frobenius √10
        let lv = level(2, 2);
        let nb = sym_norm(&lv, &[1.0, 0.0, -3.0], 1);
        assert_relative_eq!(nb.lower, 3.0, epsilon = 1e-12);
        assert_relative_eq!(nb.upper, 10f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn off_diagonal_bilinear_form() {
        // T(u,v) = u1 v2 + u2 v1 has norm 1, attained at (1,1)/√2 on the diagonal
        let lv = level(2, 2);
        let nb = sym_norm(&lv, &[0.0, 1.0, 0.0], 1);
        assert_relative_eq!(nb.lower, 1.0, epsilon = 1e-12);
        assert_relative_eq!(nb.upper, 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn one_dimensional_is_tight() {
        let lv = level(1, 3);
        let nb = sym_norm(&lv, &[-2.5], 1);
        assert_eq!(nb, NormBracket::exact(2.5));
    }
}
