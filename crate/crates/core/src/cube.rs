//! Dyadic cubes and the lazily materialized Whitney decomposition of `ℝⁿ∖E`.
//!
//! A cube `Q` is accepted when `diam(Q) ≤ d(Q,E)` while its parent violates
//! that inequality. Accepted cubes have disjoint interiors, cover `ℝⁿ∖E` and
//! satisfy `diam(Q) ≤ d(Q,E) ≤ 4·diam(Q)`.

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::RwLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::PointSet;
use crate::kdtree::KdTree;

pub const MAX_GENERATION: i32 = 40;
pub const MAX_ANCHOR: i64 = 1 << 20;

/// Queries closer than this to `E` are treated as lying on `E`.
pub const ON_SET_TOLERANCE: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DyadicCube {
    generation: i32,
    anchor: Vec<i64>,
}

fn range_error(what: String) -> Error {
    Error::Range(format!("{what}; rescale the problem so that E and the queries fit the supported range"))
}

impl DyadicCube {
    pub fn new(generation: i32, anchor: Vec<i64>) -> Result<Self> {
        if generation.abs() > MAX_GENERATION {
            return Err(range_error(format!("cube generation {generation} outside ±{MAX_GENERATION}")));
        }
        if let Some(a) = anchor.iter().find(|a| a.abs() > MAX_ANCHOR) {
            return Err(range_error(format!("cube anchor {a} outside ±2^20")));
        }
        Ok(DyadicCube { generation, anchor })
    }

    /// The cube of generation `g` whose half-open body contains `x`.
    pub fn containing(x: &[f64], generation: i32) -> Result<Self> {
        let s = side_of(generation);
        let anchor = x
            .iter()
            .map(|&c| {
                let a = (c / s).floor();
                if a.abs() > MAX_ANCHOR as f64 {
                    i64::MAX
                } else {
                    a as i64
                }
            })
            .collect();
        DyadicCube::new(generation, anchor)
    }

    pub fn generation(&self) -> i32 {
        self.generation
    }

    pub fn anchor(&self) -> &[i64] {
        &self.anchor
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    pub fn side(&self) -> f64 {
        side_of(self.generation)
    }

    pub fn diam(&self) -> f64 {
        self.diam2().sqrt()
    }

    /// `n·4^g`, exact.
    pub fn diam2(&self) -> f64 {
        self.dim() as f64 * self.side() * self.side()
    }

    pub fn lo(&self) -> Vec<f64> {
        let s = self.side();
        self.anchor.iter().map(|&a| a as f64 * s).collect()
    }

    pub fn hi(&self) -> Vec<f64> {
        let s = self.side();
        self.anchor.iter().map(|&a| (a + 1) as f64 * s).collect()
    }

    pub fn center(&self) -> Vec<f64> {
        let s = self.side();
        self.anchor.iter().map(|&a| (a as f64 + 0.5) * s).collect()
    }

    /// Lower corner of `Q* = (9/8)Q`: `(16a − 1)·s/16`, exact.
    pub fn star_lo(&self) -> Vec<f64> {
        let t = self.side() / 16.0;
        self.anchor.iter().map(|&a| (16 * a - 1) as f64 * t).collect()
    }

    /// Upper corner of `Q*`: `(16a + 17)·s/16`, exact.
    pub fn star_hi(&self) -> Vec<f64> {
        let t = self.side() / 16.0;
        self.anchor.iter().map(|&a| (16 * a + 17) as f64 * t).collect()
    }

    pub fn parent(&self) -> Result<DyadicCube> {
        DyadicCube::new(self.generation + 1, self.anchor.iter().map(|a| a.div_euclid(2)).collect())
    }

    pub fn children(&self) -> Result<Vec<DyadicCube>> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| {
                let anchor = self
                    .anchor
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| 2 * a + ((mask >> i) & 1) as i64)
                    .collect();
                DyadicCube::new(self.generation - 1, anchor)
            })
            .collect()
    }

    pub fn contains_closed(&self, x: &[f64]) -> bool {
        let s = self.side();
        self.anchor
            .iter()
            .zip(x)
            .all(|(&a, &c)| a as f64 * s <= c && c <= (a + 1) as f64 * s)
    }

    pub fn contains_half_open(&self, x: &[f64]) -> bool {
        let s = self.side();
        self.anchor
            .iter()
            .zip(x)
            .all(|(&a, &c)| a as f64 * s <= c && c < (a + 1) as f64 * s)
    }

    /// `x ∈ Q*`, closed.
    pub fn star_contains(&self, x: &[f64]) -> bool {
        let t = self.side() / 16.0;
        self.anchor
            .iter()
            .zip(x)
            .all(|(&a, &c)| (16 * a - 1) as f64 * t <= c && c <= (16 * a + 17) as f64 * t)
    }

    pub fn is_ancestor_of(&self, other: &DyadicCube) -> bool {
        let k = self.generation - other.generation;
        k >= 0
            && self
                .anchor
                .iter()
                .zip(&other.anchor)
                .all(|(&a, &b)| b.div_euclid(1 << k) == a)
    }
}

fn side_of(generation: i32) -> f64 {
    2f64.powi(generation)
}

/// An accepted cube with its nearest point `p_Q` of `E` and `d(Q, E)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CubeRecord {
    pub cube: DyadicCube,
    pub p_q: usize,
    pub dist_q: f64,
}

/// CSV with columns `generation, a1..an, side, p_q, dist_q`; the cube is `2^g·(a + [0,1)ⁿ)`.
pub fn write_cubes_csv<W: std::io::Write>(out: W, records: &[CubeRecord]) -> Result<()> {
    let n = records.first().map_or(0, |r| r.cube.dim());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["generation".to_string()];
    header.extend((1..=n).map(|i| format!("a{i}")));
    header.extend(["side", "p_q", "dist_q"].map(String::from));
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.cube.generation().to_string()];
        row.extend(r.cube.anchor().iter().map(i64::to_string));
        row.push(format!("{:e}", r.cube.side()));
        row.push(r.p_q.to_string());
        row.push(format!("{:e}", r.dist_q));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// The Whitney decomposition of `ℝⁿ∖E`, materialized on demand.
#[derive(Debug)]
pub struct CubeCover {
    set: PointSet,
    tree: KdTree,
    distances: RwLock<HashMap<DyadicCube, (usize, f64)>>,
    accepted: RwLock<HashMap<DyadicCube, CubeRecord>>,
    max_overlap: AtomicUsize,
}

impl CubeCover {
    pub fn new(set: PointSet) -> Self {
        let tree = KdTree::new(&set);
        CubeCover {
            set,
            tree,
            distances: RwLock::new(HashMap::new()),
            accepted: RwLock::new(HashMap::new()),
            max_overlap: AtomicUsize::new(0),
        }
    }

    pub fn set(&self) -> &PointSet {
        &self.set
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    /// Nearest point of `E`: `(index, distance)`, smallest index on ties.
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        let (i, d2) = self.tree.nearest(x);
        (i, d2.sqrt())
    }

    /// `(p_Q, d(Q,E)²)` for any cube.
    fn box_distance(&self, cube: &DyadicCube) -> (usize, f64) {
        if let Some(v) = self.distances.read().expect("cube cache poisoned").get(cube) {
            return *v;
        }
        let v = self.tree.nearest_to_box(&cube.lo(), &cube.hi());
        self.distances
            .write()
            .expect("cube cache poisoned")
            .insert(cube.clone(), v);
        v
    }

    /// `diam(Q) ≤ d(Q, E)`.
    pub fn condition_one(&self, cube: &DyadicCube) -> bool {
        cube.diam2() <= self.box_distance(cube).1
    }

    pub fn accept(&self, cube: &DyadicCube) -> Result<bool> {
        if cube.dim() != self.dim() {
            return Err(Error::argument("cube dimension does not match E"));
        }
        let cube = DyadicCube::new(cube.generation, cube.anchor.clone())?;
        if !self.condition_one(&cube) {
            return Ok(false);
        }
        Ok(!self.condition_one(&cube.parent()?))
    }

    fn record(&self, cube: DyadicCube) -> CubeRecord {
        if let Some(r) = self.accepted.read().expect("cube cache poisoned").get(&cube) {
            return r.clone();
        }
        let (p_q, d2) = self.box_distance(&cube);
        let rec = CubeRecord {
            cube: cube.clone(),
            p_q,
            dist_q: d2.sqrt(),
        };
        self.accepted
            .write()
            .expect("cube cache poisoned")
            .insert(cube, rec.clone());
        rec
    }

    fn check_query(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::argument(format!("query has {} coordinates, expected {}", x.len(), self.dim())));
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(Error::argument("query coordinates must be finite"));
        }
        let (index, distance) = self.nearest(x);
        if distance <= ON_SET_TOLERANCE {
            return Err(Error::OnSet { index, distance });
        }
        Ok(distance)
    }

    /// The accepted cube whose half-open body contains `x`.
    pub fn cube_at(&self, x: &[f64]) -> Result<CubeRecord> {
        let r = self.check_query(x)?;
        let n = self.dim() as f64;
        let mut g = ((r / (2.0 * n.sqrt())).log2().floor() as i32).max(-MAX_GENERATION - 1);
        let mut cube = DyadicCube::containing(x, g)?;
        while !self.condition_one(&cube) {
            g -= 1;
            cube = DyadicCube::containing(x, g)?;
        }
        loop {
            let parent = cube.parent()?;
            if !self.condition_one(&parent) {
                break;
            }
            cube = parent;
        }
        Ok(self.record(cube))
    }

    /// All accepted cubes `Q` with `x ∈ Q*`, sorted by generation then anchor.
    pub fn cubes_near(&self, x: &[f64]) -> Result<Vec<CubeRecord>> {
        let home = self.cube_at(x)?;
        let g0 = home.cube.generation;
        let mut out = Vec::new();
        for g in (g0 - 3)..=(g0 + 3) {
            if g.abs() > MAX_GENERATION - 1 {
                continue;
            }
            let s = side_of(g);
            let ranges: Vec<(i64, i64)> = x
                .iter()
                .map(|&c| {
                    let lo = ((c - s - s / 16.0) / s).ceil() as i64 - 1;
                    let hi = ((c + s / 16.0) / s).floor() as i64 + 1;
                    (lo.max(-MAX_ANCHOR), hi.min(MAX_ANCHOR))
                })
                .collect();
            let mut anchor: Vec<i64> = ranges.iter().map(|r| r.0).collect();
            'grid: loop {
                let cube = DyadicCube {
                    generation: g,
                    anchor: anchor.clone(),
                };
                if cube.star_contains(x) && self.accept(&cube)? {
                    out.push(if cube == home.cube { home.clone() } else { self.record(cube) });
                }
                for i in 0..anchor.len() {
                    if anchor[i] < ranges[i].1 {
                        anchor[i] += 1;
                        continue 'grid;
                    }
                    anchor[i] = ranges[i].0;
                }
                break;
            }
        }
        out.sort_by(|a, b| a.cube.cmp(&b.cube));
        self.max_overlap.fetch_max(out.len(), Ordering::Relaxed);
        Ok(out)
    }

    /// Accepted cubes whose interiors meet the box `(lo, hi)`, stopping the
    /// descent at generation `min_generation` (cubes below it are omitted).
    pub fn cubes_in_box(&self, lo: &[f64], hi: &[f64], min_generation: i32, limit: usize) -> Result<Vec<CubeRecord>> {
        let n = self.dim();
        if lo.len() != n || hi.len() != n || lo.iter().zip(hi).any(|(a, b)| !(a < b)) {
            return Err(Error::argument("box must be nondegenerate with lo < hi in every coordinate"));
        }
        let extent = lo.iter().zip(hi).map(|(a, b)| b - a).fold(0.0, f64::max);
        let top = (extent.log2().ceil() as i32).clamp(-MAX_GENERATION + 1, MAX_GENERATION - 1);
        let s = side_of(top);
        let ranges: Vec<(i64, i64)> = lo
            .iter()
            .zip(hi)
            .map(|(&a, &b)| ((a / s).floor() as i64, (b / s).ceil() as i64 - 1))
            .collect();
        let mut stack = Vec::new();
        let mut anchor: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        'grid: loop {
            stack.push(DyadicCube::new(top, anchor.clone())?);
            for i in 0..n {
                if anchor[i] < ranges[i].1 {
                    anchor[i] += 1;
                    continue 'grid;
                }
                anchor[i] = ranges[i].0;
            }
            break;
        }
        let meets = |c: &DyadicCube| {
            let (clo, chi) = (c.lo(), c.hi());
            (0..n).all(|i| clo[i] < hi[i] && chi[i] > lo[i])
        };
        let mut found = BTreeSet::new();
        let mut visited = 0usize;
        while let Some(cube) = stack.pop() {
            visited += 1;
            if visited > limit {
                return Err(Error::Range(format!(
                    "box decomposition exceeded {limit} cubes; raise the minimum generation or shrink the box"
                )));
            }
            if self.condition_one(&cube) {
                let mut c = cube;
                loop {
                    let p = c.parent()?;
                    if !self.condition_one(&p) {
                        break;
                    }
                    c = p;
                }
                found.insert(c);
            } else if cube.generation > min_generation {
                stack.extend(cube.children()?.into_iter().filter(|c| meets(c)));
            }
        }
        Ok(found.into_iter().map(|c| self.record(c)).collect())
    }

    /// Largest `|cubes_near(x)|` seen so far.
    pub fn overlap_bound(&self) -> usize {
        self.max_overlap.load(Ordering::Relaxed)
    }

    /// Every accepted cube materialized so far, sorted.
    pub fn materialized(&self) -> Vec<CubeRecord> {
        let mut v: Vec<CubeRecord> = self
            .accepted
            .read()
            .expect("cube cache poisoned")
            .values()
            .cloned()
            .collect();
        v.sort_by(|a, b| a.cube.cmp(&b.cube));
        v
    }
}
