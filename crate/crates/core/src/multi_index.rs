//! Multi-indices and graded monomial bases.
//!
//! A [`Basis`] enumerates every multi-index `β ∈ ℕⁿ` with `|β| ≤ r` in graded
//! order (total degree first, then lexicographically descending), which is the
//! storage order used by jets, Taylor values and derivative tables throughout
//! the crate.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;
use std::sync::{Arc, Mutex, OnceLock};

/// Largest total order any basis may have. `22!` is the last exact `f64` factorial.
pub const MAX_BASIS_ORDER: usize = 16;

/// `k!` for `k ≤ 22`, exact in `f64`.
pub fn factorial(k: usize) -> f64 {
    static TABLE: OnceLock<[f64; 23]> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = [1.0; 23];
        for i in 1..23 {
            t[i] = t[i - 1] * i as f64;
        }
        t
    });
    assert!(k < table.len(), "factorial table exhausted at {k}");
    table[k]
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(components: Vec<usize>) -> Self {
        MultiIndex(components)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = vec![0; dim];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn components(&self) -> &[usize] {
        &self.0
    }

    /// `β! = β₁!⋯βₙ!`
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&b| factorial(b)).product()
    }

    /// `z^β = z₁^β₁ ⋯ zₙ^βₙ`
    pub fn monomial(&self, z: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(z)
            .map(|(&b, &zi)| zi.powi(b as i32))
            .product()
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if other.le(self) {
            Some(MultiIndex(
                self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
            ))
        } else {
            None
        }
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `C(α, β) = α! / (β! (α-β)!)`, zero unless `β ≤ α`.
    pub fn binomial(alpha: &MultiIndex, beta: &MultiIndex) -> f64 {
        match alpha.checked_sub(beta) {
            Some(diff) => alpha.factorial() / (beta.factorial() * diff.factorial()),
            None => 0.0,
        }
    }

    /// Compact label such as `2.0.1`.
    pub fn label(&self) -> String {
        self.0
            .iter()
            .map(|b| b.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.label())
    }
}

/// Graded enumeration of all `β` with `|β| ≤ order`.
pub struct Basis {
    dim: usize,
    order: usize,
    indices: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
    level_start: Vec<usize>,
    convolution: OnceLock<Vec<Vec<(u32, u32)>>>,
    shifts: OnceLock<Vec<Vec<(u32, u32)>>>,
    parents: OnceLock<Vec<(u32, u32)>>,
}

impl Basis {
    pub fn new(dim: usize, order: usize) -> Self {
        assert!(dim >= 1, "basis dimension must be positive");
        assert!(order <= MAX_BASIS_ORDER, "basis order {order} too large");
        let mut indices = Vec::new();
        let mut level_start = Vec::with_capacity(order + 2);
        for k in 0..=order {
            level_start.push(indices.len());
            let mut current = vec![0; dim];
            compositions(k, 0, &mut current, &mut indices);
        }
        level_start.push(indices.len());
        let lookup = indices
            .iter()
            .enumerate()
            .map(|(i, b)| (b.clone(), i))
            .collect();
        Basis {
            dim,
            order,
            indices,
            lookup,
            level_start,
            convolution: OnceLock::new(),
            shifts: OnceLock::new(),
            parents: OnceLock::new(),
        }
    }

    /// Process-wide shared basis for `(dim, order)`.
    pub fn shared(dim: usize, order: usize) -> Arc<Basis> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Basis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("basis cache poisoned");
        guard
            .entry((dim, order))
            .or_insert_with(|| Arc::new(Basis::new(dim, order)))
            .clone()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn get(&self, i: usize) -> &MultiIndex {
        &self.indices[i]
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn index_of(&self, beta: &MultiIndex) -> Option<usize> {
        self.lookup.get(beta).copied()
    }

    /// Positions of the multi-indices with `|β| = k`.
    pub fn level(&self, k: usize) -> Range<usize> {
        assert!(k <= self.order);
        self.level_start[k]..self.level_start[k + 1]
    }

    /// Number of monomials of total degree ≤ `order` in `dim` variables, `C(dim+order, order)`.
    pub fn count(dim: usize, order: usize) -> usize {
        let mut c: usize = 1;
        for i in 1..=order {
            c = c * (dim + i) / i;
        }
        c
    }

    /// For each target position `k`, the pairs `(i, j)` with `β_i + β_j = β_k`.
    pub fn convolution(&self) -> &[Vec<(u32, u32)>] {
        self.convolution.get_or_init(|| {
            let mut table = vec![Vec::new(); self.len()];
            for (i, a) in self.indices.iter().enumerate() {
                let remaining = self.order - a.order();
                for j in 0..self.level_start[remaining + 1] {
                    let k = self.lookup[&a.add(&self.indices[j])];
                    table[k].push((i as u32, j as u32));
                }
            }
            table
        })
    }

    /// For each position `g`, the pairs `(b, δ)` with `β_b = γ_g + β_δ`.
    pub fn shifts(&self) -> &[Vec<(u32, u32)>] {
        self.shifts.get_or_init(|| {
            let mut table = vec![Vec::new(); self.len()];
            for (i, a) in self.indices.iter().enumerate() {
                let remaining = self.order - a.order();
                for j in 0..self.level_start[remaining + 1] {
                    let k = self.lookup[&a.add(&self.indices[j])];
                    table[i].push((k as u32, j as u32));
                }
            }
            table
        })
    }

    /// Writes `h^β / β!` for every basis position into `out`.
    pub fn scaled_monomials(&self, h: &[f64], out: &mut [f64]) {
        assert_eq!(h.len(), self.dim);
        assert_eq!(out.len(), self.len());
        let parents = self.parents.get_or_init(|| {
            self.indices
                .iter()
                .map(|b| match b.0.iter().position(|&c| c > 0) {
                    None => (0, 0),
                    Some(i) => {
                        let mut p = b.0.clone();
                        p[i] -= 1;
                        (self.lookup[&MultiIndex(p)] as u32, i as u32)
                    }
                })
                .collect()
        });
        out[0] = 1.0;
        for k in 1..out.len() {
            let (p, i) = parents[k];
            let i = i as usize;
            out[k] = out[p as usize] * h[i] / self.indices[k].0[i] as f64;
        }
    }
}

impl PartialEq for Basis {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.order == other.order
    }
}

impl fmt::Debug for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Basis")
            .field("dim", &self.dim)
            .field("order", &self.order)
            .field("len", &self.indices.len())
            .finish()
    }
}

fn compositions(remaining: usize, pos: usize, current: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
    let dim = current.len();
    if pos == dim - 1 {
        current[pos] = remaining;
        out.push(MultiIndex(current.clone()));
        return;
    }
    for first in (0..=remaining).rev() {
        current[pos] = first;
        compositions(remaining - first, pos + 1, current, out);
    }
    current[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_order_two_variables() {
        let b = Basis::new(2, 2);
        let labels: Vec<_> = b.indices().iter().map(|m| m.label()).collect();
        assert_eq!(labels, ["0.0", "1.0", "0.1", "2.0", "1.1", "0.2"]);
        assert_eq!(b.level(1), 1..3);
    }

    #[test]
    fn count_matches_enumeration() {
        for n in 1..=4 {
            for r in 0..=6 {
                assert_eq!(Basis::new(n, r).len(), Basis::count(n, r));
            }
        }
    }

    #[test]
    fn convolution_covers_all_splits() {
        let b = Basis::new(3, 3);
        for (k, pairs) in b.convolution().iter().enumerate() {
            let target = b.get(k);
            let expected = b.indices().iter().filter(|g| MultiIndex::le(g, target)).count();
            assert_eq!(pairs.len(), expected);
            for &(i, j) in pairs {
                assert_eq!(&b.get(i as usize).add(b.get(j as usize)), target);
            }
        }
    }

    #[test]
    fn binomial_and_factorial() {
        let a = MultiIndex::new(vec![3, 2]);
        let c = MultiIndex::new(vec![1, 1]);
        assert_eq!(MultiIndex::binomial(&a, &c), 6.0);
        assert_eq!(MultiIndex::binomial(&c, &a), 0.0);
        assert_eq!(a.factorial(), 12.0);
        assert_eq!(factorial(10), 3_628_800.0);
    }
}
