//! Measures every frozen constant at the committed seed and rewrites
//! `constants/frozen.json` with the measured values times the safety factor.
//!
//! `cargo run --release -p whitney-core --example calibrate [-- output.json]`

use std::time::Instant;

use whitney_core::cube::CubeCover;
use whitney_core::verify::constants::{
    DimConstant, FrozenConstants, Lemma32Constant, LoadedConstants, OrderConstant, PartitionConstant,
};
use whitney_core::verify::fixtures::{
    bounding_box, cube_set, kappa_measure, lemma32_problem, near_set_samples, random_problems, rng, sincos,
    trace_decay, uniform_points, LEMMA32_BOX,
};
use whitney_core::verify::lemma32::{informative_samples, lemma32_check};
use whitney_core::verify::suites::{length_scale, nearest_point_ratio, partition_stats};
use whitney_core::{PointSet, Result};

const SAFETY: f64 = 2.0;

/// Uniform random points, a dyadic grid and a tight cluster in `[0,1]ⁿ`.
fn partition_sets(seed: u64, n: usize) -> Result<Vec<PointSet>> {
    let per_axis = [5usize, 5, 3][n - 1];
    let grid: Vec<Vec<f64>> = (0..per_axis.pow(n as u32))
        .map(|mut k| {
            (0..n)
                .map(|_| {
                    let c = k % per_axis;
                    k /= per_axis;
                    c as f64 / (per_axis - 1) as f64
                })
                .collect()
        })
        .collect();
    let cluster = uniform_points(&mut rng(seed, 40 + n as u64), 10, &vec![0.5; n], &vec![0.5 + 1.0 / 64.0; n]);
    Ok(vec![cube_set(seed, n)?, PointSet::new(n, grid)?, PointSet::new(n, cluster)?])
}

/// `max_Q ‖D^k φ_Q‖ d^k` after a shrinking random search around the 16 worst sample points.
fn climb(cover: &CubeCover, points: &[Vec<f64>], level: usize, g: &mut rand_chacha::ChaCha8Rng) -> Result<f64> {
    use rand::Rng;
    let score = |x: &[f64]| -> Result<f64> {
        let (_, d) = cover.nearest(x);
        if d <= 1e-12 {
            return Ok(0.0);
        }
        Ok(partition_stats(cover, &[x.to_vec()], level)?.level_bounds[level])
    };
    let mut scored = points
        .iter()
        .map(|x| Ok((score(x)?, x.clone())))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = 0.0f64;
    for (mut v, mut x) in scored.into_iter().take(16) {
        let (_, d) = cover.nearest(&x);
        let mut step = d / 16.0;
        for _ in 0..600 {
            let y: Vec<f64> = x.iter().map(|c| c + step * g.gen_range(-1.0..1.0)).collect();
            let w = score(&y)?;
            if w > v {
                v = w;
                x = y;
            } else {
                step *= 0.995;
            }
        }
        best = best.max(v);
    }
    Ok(best)
}

fn main() -> Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/constants/frozen.json").to_string());
    let seed = LoadedConstants::builtin()?.constants.seed;
    let clock = Instant::now();
    let mut c = FrozenConstants {
        seed,
        safety_factor: SAFETY,
        kappa: Vec::new(),
        lemma32: Vec::new(),
        nearest_point: Vec::new(),
        overlap: Vec::new(),
        partition: Vec::new(),
        trace_decay: 0.0,
    };

    for fx in random_problems(seed)? {
        let (n, m) = (fx.dim(), fx.order());
        let mut worst = 0.0f64;
        for density in [4, 8] {
            let (f, j) = kappa_measure(&fx, seed, density)?;
            println!("kappa n={n} m={m} density={density}: {f:e} / {j:e} = {:e}", f / j);
            worst = worst.max(f / j);
        }
        c.kappa.push(OrderConstant { n, m, value: SAFETY * worst });

        let field = fx.field()?;
        let s = length_scale(&fx.set);
        let (lo, hi) = bounding_box(&fx.set, 0.25 * s);
        let samples = informative_samples(&field, seed, 400, &lo, &hi)?;
        let r = lemma32_check(&field, &samples)?;
        let (mut a, mut b) = (r.max_ratio_a, r.max_ratio_b);
        if (n, m) == (1, 1) {
            let l = lemma32_problem(seed)?.field()?;
            let (blo, bhi) = LEMMA32_BOX;
            let r = lemma32_check(&l, &informative_samples(&l, seed, 400, &[blo], &[bhi])?)?;
            println!("lemma32 fixture box: a={:e} b={:e}", r.max_ratio_a, r.max_ratio_b);
            a = a.max(r.max_ratio_a);
            b = b.max(r.max_ratio_b);
        }
        println!("lemma32 n={n} m={m}: a={a:e} b={b:e}");
        c.lemma32.push(Lemma32Constant {
            n,
            m,
            a: SAFETY * a,
            b: SAFETY * b,
        });
        println!("  [{:.1} s]", clock.elapsed().as_secs_f64());
    }

    for n in 1..=3 {
        let mut overlap = 0usize;
        let mut nearest = 0.0f64;
        let mut levels = vec![0.0f64; 4];
        for (k, set) in partition_sets(seed, n)?.into_iter().enumerate() {
            let mut g = rng(seed, 30 + 10 * n as u64 + k as u64);
            let mut points = near_set_samples(&mut g, &set, 20000, 1e-3, 10.0);
            let (lo, hi) = bounding_box(&set, 1.0);
            points.extend(uniform_points(&mut g, 20000, &lo, &hi).into_iter().filter(|x| {
                set.iter().all(|y| whitney_core::jet::distance(x, y) > 1e-9)
            }));
            let cover = CubeCover::new(set);
            let st = partition_stats(&cover, &points, 3)?;
            for (lvl, v) in st.level_bounds.iter().enumerate() {
                let peak = climb(&cover, &points, lvl, &mut g)?;
                levels[lvl] = levels[lvl].max(*v).max(peak);
            }
            overlap = overlap.max(st.max_overlap);
            nearest = nearest.max(nearest_point_ratio(&cover, 4000));
            println!(
                "n={n} set {k}: overlap {} levels {:?} sum {:e} derivative sums {:e} denominator {}",
                st.max_overlap, st.level_bounds, st.sum_error, st.derivative_sum, st.min_denominator
            );
        }
        println!("n={n}: overlap {overlap} nearest {nearest:e} levels {levels:?}");
        c.overlap.push(DimConstant { n, value: SAFETY * overlap as f64 });
        c.nearest_point.push(DimConstant { n, value: SAFETY * nearest });
        for (k, v) in levels.iter().enumerate() {
            c.partition.push(PartitionConstant { n, k, value: SAFETY * v });
        }
    }

    let fx = sincos(seed)?;
    let mut decay = 0.0f64;
    for r in [1e-1, 1e-2, 1e-3, 1e-4] {
        let t = trace_decay(&fx, seed, r, 16)?;
        println!("trace decay r={r:e}: {t:e}");
        decay = decay.max(t);
    }
    c.trace_decay = SAFETY * decay;

    std::fs::write(&out, c.to_json())?;
    println!("wrote {out} in {:.1} s", clock.elapsed().as_secs_f64());
    Ok(())
}
