//! A static k-d tree over a point set answering nearest-point and
//! nearest-to-box queries, ties broken by the smallest index.

use crate::jet::PointSet;

const LEAF_SIZE: usize = 8;

#[derive(Debug)]
struct Node {
    lo: Vec<f64>,
    hi: Vec<f64>,
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

#[derive(Debug)]
pub struct KdTree {
    dim: usize,
    coords: Vec<f64>,
    perm: Vec<usize>,
    nodes: Vec<Node>,
}

/// Squared distance from `p` to the box `[lo, hi]`.
pub fn point_box_dist2(p: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..p.len() {
        let g = if p[i] < lo[i] {
            lo[i] - p[i]
        } else if p[i] > hi[i] {
            p[i] - hi[i]
        } else {
            0.0
        };
        s += g * g;
    }
    s
}

fn box_box_dist2(alo: &[f64], ahi: &[f64], blo: &[f64], bhi: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..alo.len() {
        let g = if ahi[i] < blo[i] {
            blo[i] - ahi[i]
        } else if bhi[i] < alo[i] {
            alo[i] - bhi[i]
        } else {
            0.0
        };
        s += g * g;
    }
    s
}

impl KdTree {
    pub fn new(set: &PointSet) -> Self {
        let dim = set.dim();
        let coords: Vec<f64> = set.iter().flatten().copied().collect();
        let mut tree = KdTree {
            dim,
            coords,
            perm: (0..set.len()).collect(),
            nodes: Vec::new(),
        };
        tree.build(0, set.len());
        tree
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for &i in &self.perm[start..end] {
            for (k, &c) in self.coords[i * self.dim..(i + 1) * self.dim].iter().enumerate() {
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            lo: lo.clone(),
            hi: hi.clone(),
            start,
            end,
            children: None,
        });
        if end - start > LEAF_SIZE {
            let axis = (0..self.dim)
                .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
                .unwrap_or(0);
            let mid = start + (end - start) / 2;
            let (dim, coords) = (self.dim, &self.coords);
            self.perm[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                coords[a * dim + axis].total_cmp(&coords[b * dim + axis]).then(a.cmp(&b))
            });
            let left = self.build(start, mid);
            let right = self.build(mid, end);
            self.nodes[id].children = Some((left, right));
        }
        id
    }

    /// Nearest point to `x`: `(index, squared distance)`.
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        self.nearest_to_box(x, x)
    }

    /// Point minimizing the point-to-box distance to `[lo, hi]`.
    pub fn nearest_to_box(&self, lo: &[f64], hi: &[f64]) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(0, lo, hi, &mut best);
        best
    }

    fn search(&self, node: usize, lo: &[f64], hi: &[f64], best: &mut (usize, f64)) {
        let n = &self.nodes[node];
        if box_box_dist2(&n.lo, &n.hi, lo, hi) > best.1 {
            return;
        }
        match n.children {
            None => {
                for &i in &self.perm[n.start..n.end] {
                    let d2 = point_box_dist2(self.point(i), lo, hi);
                    if d2 < best.1 || (d2 == best.1 && i < best.0) {
                        *best = (i, d2);
                    }
                }
            }
            Some((a, b)) => {
                let da = box_box_dist2(&self.nodes[a].lo, &self.nodes[a].hi, lo, hi);
                let db = box_box_dist2(&self.nodes[b].lo, &self.nodes[b].hi, lo, hi);
                let (first, second) = if da <= db { (a, b) } else { (b, a) };
                self.search(first, lo, hi, best);
                self.search(second, lo, hi, best);
            }
        }
    }
}
