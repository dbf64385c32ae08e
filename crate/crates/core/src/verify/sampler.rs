//! Deterministic pair samplers: finite surrogates for the sups over `ℝⁿ × ℝⁿ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::PointSet;

/// Points plus index pairs into them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairSet {
    dim: usize,
    coords: Vec<f64>,
    pairs: Vec<(u32, u32)>,
}

impl PairSet {
    pub fn new(dim: usize) -> Self {
        PairSet {
            dim,
            coords: Vec::new(),
            pairs: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_points(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn push_point(&mut self, x: &[f64]) -> u32 {
        assert_eq!(x.len(), self.dim);
        self.coords.extend_from_slice(x);
        (self.num_points() - 1) as u32
    }

    pub fn push_pair(&mut self, a: u32, b: u32) {
        self.pairs.push((a, b));
    }

    /// Adds `points` and every unordered pair among them.
    pub fn push_clique(&mut self, points: impl IntoIterator<Item = Vec<f64>>) {
        let ids: Vec<u32> = points.into_iter().map(|p| self.push_point(&p)).collect();
        for (k, &a) in ids.iter().enumerate() {
            for &b in &ids[k + 1..] {
                self.push_pair(a, b);
            }
        }
    }

    pub fn extend(&mut self, other: &PairSet) {
        assert_eq!(self.dim, other.dim);
        let offset = self.num_points() as u32;
        self.coords.extend_from_slice(&other.coords);
        self.pairs
            .extend(other.pairs.iter().map(|&(a, b)| (a + offset, b + offset)));
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Strategy {
    /// All pairs among the `res^n` points of a grid on `[lo, hi]`.
    GridPairs { lo: Vec<f64>, hi: Vec<f64>, res: usize },
    /// Rays `c + r·u` for each center and `directions` seeded unit vectors;
    /// all pairs among the center and the points of one ray.
    Radial {
        centers: Vec<Vec<f64>>,
        radii: Vec<f64>,
        directions: usize,
    },
    /// For each `δ`, `count` pairs with `x` uniform in `[lo, hi]` and
    /// `|x − y| ∈ (δ/2, δ]`. Each stratum has its own stream, so raising
    /// `count` only appends pairs.
    Annulus {
        lo: Vec<f64>,
        hi: Vec<f64>,
        deltas: Vec<f64>,
        count: usize,
    },
}

/// Largest number of grid points for [`Strategy::GridPairs`].
pub const MAX_GRID_PAIR_POINTS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSampler {
    pub strategy: Strategy,
    pub seed: u64,
}

fn stream(seed: u64, stratum: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stratum);
    rng
}

fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

fn check_box(lo: &[f64], hi: &[f64], dim: usize) -> Result<()> {
    if lo.len() != dim || hi.len() != dim {
        return Err(Error::argument(format!("sampler box needs {dim} coordinates")));
    }
    if lo.iter().zip(hi).any(|(a, b)| !(a <= b && a.is_finite() && b.is_finite())) {
        return Err(Error::argument("sampler box must satisfy lo ≤ hi"));
    }
    Ok(())
}

impl PairSampler {
    pub fn new(strategy: Strategy, seed: u64) -> Self {
        PairSampler { strategy, seed }
    }

    pub fn sample(&self, dim: usize) -> Result<PairSet> {
        let mut out = PairSet::new(dim);
        match &self.strategy {
            Strategy::GridPairs { lo, hi, res } => {
                check_box(lo, hi, dim)?;
                if *res < 2 {
                    return Err(Error::argument("grid sampler needs res ≥ 2"));
                }
                let total = res.checked_pow(dim as u32).unwrap_or(usize::MAX);
                if total > MAX_GRID_PAIR_POINTS {
                    return Err(Error::argument(format!(
                        "grid sampler with {total} points exceeds {MAX_GRID_PAIR_POINTS}"
                    )));
                }
                let points = (0..total).map(|flat| {
                    let mut rem = flat;
                    let mut x = vec![0.0; dim];
                    for i in (0..dim).rev() {
                        let k = rem % res;
                        rem /= res;
                        x[i] = lo[i] + (hi[i] - lo[i]) * k as f64 / (*res - 1) as f64;
                    }
                    x
                });
                out.push_clique(points);
            }
            Strategy::Radial {
                centers,
                radii,
                directions,
            } => {
                let mut rng = stream(self.seed, 0);
                let dirs: Vec<Vec<f64>> = (0..*directions).map(|_| unit_vector(&mut rng, dim)).collect();
                for c in centers {
                    if c.len() != dim {
                        return Err(Error::argument(format!("radial center needs {dim} coordinates")));
                    }
                    for u in &dirs {
                        let ray = std::iter::once(c.clone())
                            .chain(radii.iter().map(|r| c.iter().zip(u).map(|(a, b)| a + r * b).collect()));
                        out.push_clique(ray);
                    }
                }
            }
            Strategy::Annulus { lo, hi, deltas, count } => {
                check_box(lo, hi, dim)?;
                for (s, &delta) in deltas.iter().enumerate() {
                    if !(delta > 0.0 && delta.is_finite()) {
                        return Err(Error::argument("annulus δ values must be positive"));
                    }
                    let mut rng = stream(self.seed, s as u64 + 1);
                    for _ in 0..*count {
                        let x: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| if a < b { rng.gen_range(*a..*b) } else { *a }).collect();
                        let u = unit_vector(&mut rng, dim);
                        let t = delta * (1.0 - 0.5 * rng.gen::<f64>());
                        let y: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + t * b).collect();
                        let i = out.push_point(&x);
                        let j = out.push_point(&y);
                        out.push_pair(i, j);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// All pairs among the points of `E`.
pub fn set_pairs(set: &PointSet) -> PairSet {
    let mut out = PairSet::new(set.dim());
    out.push_clique(set.to_vecs());
    out
}
