//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::{BTreeSet, HashSet};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Zero};
use rand::Rng;

use whitney_core::jet::distance;
use whitney_core::modulus::{logspace, validate};
use whitney_core::partition::phi_eval;
use whitney_core::seminorm::jet_vanishing_profile;
use whitney_core::verify::constants::{FrozenConstants, LoadedConstants};
use whitney_core::verify::field::{field_profiles_refined, hot_pairs};
use whitney_core::verify::fixtures::{
    bounding_box, bump_grid, bump_pairs, coarse_deltas, cube_set, far_deltas, kappa_measure, lemma32_problem,
    near_set_samples, random_problems, reproduction, rng, saturating_grid, sincos, small_deltas, smooth_small,
    smooth_small_pairs, sqrt_deltas, sqrt_jet, sqrt_pairs, unit_vector, LEMMA32_BOX,
};
use whitney_core::verify::lemma32::{informative_samples, lemma32_check};
use whitney_core::{CubeCover, DyadicCube, FarForm, Modulus, MultiIndex, PointSet, Scale, VanishingProfile};

type Outcome = Result<(bool, String), String>;

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Neumaier summation.
fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = s + v;
        c += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
        s = t;
    }
    s + c
}

fn multi_indices(n: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<usize>| (0..=max).map(move |k| [v.clone(), vec![k]].concat()))
            .collect();
    }
    out.retain(|v| v.iter().sum::<usize>() <= max);
    out.sort_by_key(|v| v.iter().sum::<usize>());
    out
}

fn dist_to_set(set: &PointSet, x: &[f64]) -> f64 {
    set.iter().map(|p| distance(x, p)).fold(f64::INFINITY, f64::min)
}

fn constants() -> FrozenConstants {
    LoadedConstants::builtin().expect("built-in constants").constants
}

fn fmt_err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// `p(x) = 1 + x₁ − 2x₂ + x₁x₂/2 + x₂²` and its derivatives up to order 2.
fn poly_oracle(alpha: &[usize], x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    match (alpha[0], alpha[1]) {
        (0, 0) => 1.0 + a - 2.0 * b + 0.5 * a * b + b * b,
        (1, 0) => 1.0 + 0.5 * b,
        (0, 1) => -2.0 + 0.5 * a + 2.0 * b,
        (2, 0) => 0.0,
        (1, 1) => 0.5,
        (0, 2) => 2.0,
        _ => unreachable!(),
    }
}

fn criterion_1(seed: u64) -> Outcome {
    let start = Instant::now();
    let fx = reproduction(seed).map_err(fmt_err)?;
    let field = fx.field().map_err(fmt_err)?;
    let (mut value_err, mut deriv_err) = (0.0f64, 0.0f64);
    for i in 0..32 {
        for j in 0..32 {
            let x = [-1.0 + 3.0 * i as f64 / 31.0, -1.0 + 3.0 * j as f64 / 31.0];
            let d = field.eval_derivatives(&x, 2).map_err(fmt_err)?;
            for alpha in multi_indices(2, 2) {
                let got = d.get(&MultiIndex::new(alpha.clone())).ok_or("missing derivative")?[0];
                let err = (got - poly_oracle(&alpha, &x)).abs();
                if alpha.iter().sum::<usize>() == 0 {
                    value_err = value_err.max(err);
                } else {
                    deriv_err = deriv_err.max(err);
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        value_err <= 1e-8 && deriv_err <= 1e-7 && secs <= 10.0,
        format!("max value error {value_err:.2e} (≤ 1e-8), max derivative error {deriv_err:.2e} (≤ 1e-7), {secs:.2} s (≤ 10 s)"),
    ))
}

fn criterion_2(seed: u64) -> Outcome {
    let set = reproduction(seed).map_err(fmt_err)?.set;
    let cover = CubeCover::new(set.clone());
    let samples = near_set_samples(&mut rng(seed, 50), &set, 10_000, 1e-3, 10.0);
    let betas = multi_indices(2, 3);
    let (mut sum_err, mut deriv_err, mut naive_err) = (0.0f64, 0.0f64, 0.0f64);
    for x in &samples {
        let d = dist_to_set(&set, x);
        let phis = phi_eval(&cover, x, 3).map_err(fmt_err)?;
        for beta in &betas {
            let b = MultiIndex::new(beta.clone());
            let k = beta.iter().sum::<usize>();
            let scale: f64 = beta.iter().map(|&c| factorial(c)).product();
            let total = scale * exact_sum(phis.iter().map(|(_, t)| t.coeff(&b)));
            let naive = scale * phis.iter().map(|(_, t)| t.coeff(&b)).sum::<f64>();
            naive_err = naive_err.max((naive - if k == 0 { 1.0 } else { 0.0 }).abs() * d.powi(k as i32));
            if k == 0 {
                sum_err = sum_err.max((total - 1.0).abs());
            } else {
                deriv_err = deriv_err.max(total.abs() * d.powi(k as i32));
            }
        }
    }
    Ok((
        sum_err <= 1e-10 && deriv_err <= 1e-8,
        format!("max |Σφ − 1| {sum_err:.2e} (≤ 1e-10), max |Σ D^β φ|·d^|β| {deriv_err:.2e} (≤ 1e-8) over 10⁴ points; plain float sums {naive_err:.2e}"),
    ))
}

fn box_dist2(set: &PointSet, lo: &[f64], hi: &[f64]) -> f64 {
    set.iter()
        .map(|p| {
            p.iter()
                .zip(lo.iter().zip(hi))
                .map(|(&c, (&a, &b))| {
                    let t = if c < a { a - c } else if c > b { c - b } else { 0.0 };
                    t * t
                })
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

fn side(g: i32) -> f64 {
    2f64.powi(g)
}

/// `diam(Q) ≤ d(Q, E)` for `Q = 2^g (a + [0,1]ⁿ)`.
fn oracle_condition(set: &PointSet, g: i32, a: &[i64]) -> bool {
    let s = side(g);
    let lo: Vec<f64> = a.iter().map(|&c| c as f64 * s).collect();
    let hi: Vec<f64> = a.iter().map(|&c| (c + 1) as f64 * s).collect();
    (a.len() as f64) * s * s <= box_dist2(set, &lo, &hi)
}

fn oracle_accepted(set: &PointSet, g: i32, a: &[i64]) -> bool {
    let parent: Vec<i64> = a.iter().map(|c| c.div_euclid(2)).collect();
    oracle_condition(set, g, a) && !oracle_condition(set, g + 1, &parent)
}

/// Every accepted cube over generations `-40..=20` whose `(9/8)`-enlargement contains `x`.
fn oracle_cubes_near(set: &PointSet, x: &[f64]) -> BTreeSet<(i32, Vec<i64>)> {
    let mut out = BTreeSet::new();
    for g in -40..=20 {
        let s = side(g);
        let ranges: Vec<Vec<i64>> = x
            .iter()
            .map(|&c| {
                let base = (c / s).floor() as i64;
                (base - 2..=base + 2)
                    .filter(|&a| (a as f64 - 1.0 / 16.0) * s <= c && c <= (a as f64 + 17.0 / 16.0) * s)
                    .collect()
            })
            .collect();
        let mut anchors = vec![vec![]];
        for r in &ranges {
            anchors = anchors
                .into_iter()
                .flat_map(|v: Vec<i64>| r.iter().map(move |&a| [v.clone(), vec![a]].concat()))
                .collect();
        }
        for a in anchors {
            if oracle_accepted(set, g, &a) {
                out.insert((g, a));
            }
        }
    }
    out
}

fn rational(v: f64) -> BigRational {
    BigRational::from_f64(v).expect("finite")
}

/// `diam² ≤ d(Q,E)² ≤ 16·diam²` with every quantity an exact rational.
fn exact_sandwich(set: &PointSet, cube: &DyadicCube) -> bool {
    let s = rational(cube.side());
    let lo: Vec<BigRational> = cube.anchor().iter().map(|&a| BigRational::from_integer(BigInt::from(a)) * &s).collect();
    let hi: Vec<BigRational> = lo.iter().map(|l| l + &s).collect();
    let mut best: Option<BigRational> = None;
    for p in set.iter() {
        let mut acc = BigRational::zero();
        for ((c, a), b) in p.iter().zip(&lo).zip(&hi) {
            let c = rational(*c);
            let t = if &c < a {
                a - &c
            } else if &c > b {
                &c - b
            } else {
                BigRational::zero()
            };
            acc += &t * &t;
        }
        best = Some(match best {
            Some(b) if b <= acc => b,
            _ => acc,
        });
    }
    let d2 = best.expect("nonempty set");
    let diam2 = BigRational::from_integer(BigInt::from(cube.dim())) * &s * &s;
    let sixteen = BigRational::from_integer(BigInt::from(16));
    diam2 <= d2 && d2 <= sixteen * diam2
}

fn criterion_3(seed: u64) -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut pass = true;
    for n in 1..=2 {
        let set = cube_set(seed, n).map_err(fmt_err)?;
        let cover = CubeCover::new(set.clone());
        let queries = near_set_samples(&mut rng(seed, 60 + n as u64), &set, 100, 1e-3, 10.0);
        let mut mismatches = 0;
        for x in &queries {
            let got: BTreeSet<(i32, Vec<i64>)> = cover
                .cubes_near(x)
                .map_err(fmt_err)?
                .into_iter()
                .map(|r| (r.cube.generation(), r.cube.anchor().to_vec()))
                .collect();
            if got != oracle_cubes_near(&set, x) {
                mismatches += 1;
            }
        }

        let (lo, hi) = (vec![-0.5; n], vec![1.5; n]);
        let min_generation = -12;
        let tiles = cover.cubes_in_box(&lo, &hi, min_generation, 1_000_000).map_err(fmt_err)?;
        let keys: HashSet<(i32, Vec<i64>)> = tiles
            .iter()
            .map(|r| (r.cube.generation(), r.cube.anchor().to_vec()))
            .collect();
        let top = keys.iter().map(|k| k.0).max().unwrap_or(0);
        let mut nested = 0;
        let mut rejected = 0;
        for (g, a) in &keys {
            if !oracle_accepted(&set, *g, a) {
                rejected += 1;
            }
            let mut anc = a.clone();
            for h in g + 1..=top {
                anc = anc.iter().map(|c| c.div_euclid(2)).collect();
                if keys.contains(&(h, anc.clone())) {
                    nested += 1;
                }
            }
        }
        let per_axis: usize = if n == 1 { 20_000 } else { 300 };
        let mut uncovered = 0;
        let mut doubly = 0;
        let total = per_axis.pow(n as u32);
        let floor = 5.0 * (n as f64).sqrt() * side(min_generation);
        for k in 0..total {
            let mut idx = k;
            let x: Vec<f64> = (0..n)
                .map(|i| {
                    let j = idx % per_axis;
                    idx /= per_axis;
                    lo[i] + (hi[i] - lo[i]) * (j as f64 + 0.5 + 0.1234567 * (i + 1) as f64 / 7.0) / per_axis as f64
                })
                .collect();
            let hits = (min_generation..=top)
                .filter(|&g| {
                    let a: Vec<i64> = x.iter().map(|c| (c / side(g)).floor() as i64).collect();
                    keys.contains(&(g, a))
                })
                .count();
            if hits > 1 {
                doubly += 1;
            }
            if hits == 0 && dist_to_set(&set, &x) >= floor {
                uncovered += 1;
            }
        }

        let materialized = cover.materialized();
        let bad_sandwich = materialized.iter().filter(|r| !exact_sandwich(&set, &r.cube)).count();
        let ok = mismatches == 0 && nested == 0 && rejected == 0 && uncovered == 0 && doubly == 0 && bad_sandwich == 0;
        pass &= ok;
        notes.push(format!(
            "n={n}: {mismatches}/100 query mismatches, {} tiles ({nested} nested, {rejected} not accepted, {uncovered} uncovered and {doubly} doubly covered scan points of {total}), {bad_sandwich}/{} sandwich failures",
            tiles.len(),
            materialized.len()
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    notes.push(format!("{secs:.1} s (≤ 30 s)"));
    Ok((pass && secs <= 30.0, notes.join("; ")))
}

fn criterion_4(seed: u64) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for n in 1..=2 {
        let set = cube_set(seed, n).map_err(fmt_err)?;
        let mut maxima = Vec::new();
        for (stream, count) in [(70, 100_000), (71, 400_000)] {
            let cover = CubeCover::new(set.clone());
            let samples = near_set_samples(&mut rng(seed, stream + 10 * n as u64), &set, count, 1e-3, 10.0);
            let mut most = 0usize;
            for x in &samples {
                most = most.max(cover.cubes_near(x).map_err(fmt_err)?.len());
            }
            maxima.push(most);
        }
        pass &= maxima[0] == maxima[1];
        notes.push(format!("n={n}: {} at 10⁵ vs {} at 4·10⁵", maxima[0], maxima[1]));
    }
    Ok((pass, notes.join("; ")))
}

/// `P_y(x) = Σ A_β(y) (x − y)^β / β!`, summed over every `|β| ≤ m` from the jet's own index list.
fn taylor_oracle(coeffs: &[f64], indices: &[MultiIndex], y: &[f64], x: &[f64]) -> f64 {
    indices
        .iter()
        .zip(coeffs)
        .map(|(beta, a)| {
            let mut term = *a;
            for (i, &k) in beta.components().iter().enumerate() {
                term *= (x[i] - y[i]).powi(k as i32) / factorial(k);
            }
            term
        })
        .sum()
}

fn criterion_5(seed: u64, c: &FrozenConstants) -> Outcome {
    let fx = sincos(seed).map_err(fmt_err)?;
    let field = fx.field().map_err(fmt_err)?;
    let indices = fx.jet.basis().indices().to_vec();
    let mut bitwise = 0;
    for i in 0..fx.set.len() {
        let v = field.eval(fx.set.point(i)).map_err(fmt_err)?;
        if v[0].to_bits() == fx.jet.coeff(i, 0)[0].to_bits() {
            bitwise += 1;
        }
    }
    let mut g = rng(seed, 80);
    let mut worst = Vec::new();
    for r in [1e-1, 1e-2, 1e-3, 1e-4] {
        let mut w = 0.0f64;
        for i in 0..fx.set.len() {
            let y = fx.set.point(i);
            for _ in 0..16 {
                let u = unit_vector(&mut g, 2);
                let x: Vec<f64> = y.iter().zip(&u).map(|(a, b)| a + r * b).collect();
                let f = field.eval(&x).map_err(fmt_err)?[0];
                let p = taylor_oracle(fx.jet.point_coeffs(i), &indices, y, &x);
                w = w.max((f - p).abs() / (r * r * r.sqrt()));
            }
        }
        worst.push(w);
    }
    let bound = c.trace_decay;
    let pass = bitwise == fx.set.len() && worst.iter().all(|w| *w <= bound);
    Ok((
        pass,
        format!(
            "{bitwise}/{} traces bitwise, decay ratios {:?} at r = 1e-1..1e-4 (≤ {bound:.4})",
            fx.set.len(),
            worst.iter().map(|w| format!("{w:.3e}")).collect::<Vec<_>>()
        ),
    ))
}

fn criterion_6(seed: u64) -> Outcome {
    let fx = sincos(seed).map_err(fmt_err)?;
    let field = fx.field().map_err(fmt_err)?;
    let m = fx.order();
    let h = 1e-5;
    let (lo, hi) = bounding_box(&fx.set, 0.5);
    let mut g = rng(seed, 90);
    let mut points = Vec::new();
    while points.len() < 100 {
        let x: Vec<f64> = (0..2).map(|i| g.gen_range(lo[i]..hi[i])).collect();
        if dist_to_set(&fx.set, &x) >= 0.1 {
            points.push(x);
        }
    }
    let alphas = multi_indices(2, m + 1);
    let (mut worst, mut worst_3) = (0.0f64, 0.0f64);
    for x in &points {
        let d = field.eval_derivatives(x, m + 1).map_err(fmt_err)?;
        let value = field.eval(x).map_err(fmt_err)?[0];
        worst = worst.max((value - d.get(&MultiIndex::zero(2)).ok_or("missing value")?[0]).abs() / value.abs().max(1.0));
        for alpha in alphas.iter().filter(|a| a.iter().sum::<usize>() > 0) {
            let k: usize = alpha.iter().sum();
            let exact = d.get(&MultiIndex::new(alpha.clone())).ok_or("missing derivative")?[0];
            let level = alphas
                .iter()
                .filter(|b| b.iter().sum::<usize>() == k)
                .map(|b| d.get(&MultiIndex::new(b.clone())).map_or(0.0, |v| v[0].abs()))
                .fold(1.0, f64::max);
            let i = alpha.iter().position(|&c| c > 0).expect("nonzero index");
            let mut gamma = alpha.clone();
            gamma[i] -= 1;
            let gamma = MultiIndex::new(gamma);
            let shifted = |t: f64| -> Result<f64, String> {
                let mut y = x.clone();
                y[i] += t;
                let dy = field.eval_derivatives(&y, k - 1).map_err(fmt_err)?;
                Ok(dy.get(&gamma).ok_or("missing derivative")?[0])
            };
            let diff = |j: f64| -> Result<f64, String> { Ok(shifted(j * h)? - shifted(-j * h)?) };
            let (d1, d2, d3) = (diff(1.0)?, diff(2.0)?, diff(3.0)?);
            let fd = (45.0 * d1 - 9.0 * d2 + d3) / (60.0 * h);
            worst = worst.max((fd - exact).abs() / level);
            worst_3 = worst_3.max((d1 / (2.0 * h) - exact).abs() / level);
        }
    }
    Ok((
        worst <= 1e-5,
        format!(
            "max error {worst:.2e} (≤ 1e-5) relative to max(1, ‖D^|α| F(x)‖) over 100 points, |α| ≤ {}, seven-point central stencil at h = 1e-5 (three-point: {worst_3:.2e})",
            m + 1
        ),
    ))
}

fn criterion_7(seed: u64, c: &FrozenConstants) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for fx in random_problems(seed).map_err(fmt_err)? {
        let (n, m) = (fx.dim(), fx.order());
        let bound = c.kappa(n, m).ok_or("missing kappa")?;
        let ratios: Vec<f64> = [4, 8]
            .iter()
            .map(|&density| kappa_measure(&fx, seed, density).map(|(f, j)| f / j).map_err(fmt_err))
            .collect::<Result<_, _>>()?;
        let drift = ratios[0].max(ratios[1]) / ratios[0].min(ratios[1]);
        pass &= ratios.iter().all(|r| *r <= bound) && drift <= 2.0;
        notes.push(format!("(n={n},m={m}) {:.4e}/{:.4e} ≤ {bound:.4e}, drift {drift:.3}", ratios[0], ratios[1]));
    }
    Ok((pass, notes.join("; ")))
}

fn pick(profiles: &[VanishingProfile], scale: Scale, form: Option<FarForm>) -> Result<&VanishingProfile, String> {
    profiles
        .iter()
        .find(|p| p.scale == scale && p.form == form)
        .ok_or_else(|| format!("missing {scale} profile"))
}

fn criterion_8(seed: u64) -> Outcome {
    let fx = smooth_small(seed).map_err(fmt_err)?;
    let field = fx.field().map_err(fmt_err)?;
    let (lo, hi) = bounding_box(&fx.set, 0.0);
    let mut pairs = smooth_small_pairs(&fx.set, seed, 4).map_err(fmt_err)?;
    pairs.extend(&hot_pairs(&field, &lo, &hi, 20_000, 32, seed).map_err(fmt_err)?);
    let profiles = field_profiles_refined(&field, &pairs, &small_deltas(), 8).map_err(fmt_err)?;
    let small = pick(&profiles, Scale::Small, None)?;
    let (s_lo, s_hi) = (small.first(), small.last());
    let small_ok = s_lo <= 0.1 * s_hi;

    let bump = bump_grid().map_err(fmt_err)?;
    let bump_field = bump.field().map_err(fmt_err)?;
    let pairs = bump_pairs(seed, 2).map_err(fmt_err)?;
    let profiles = field_profiles_refined(&bump_field, &pairs, &coarse_deltas(), 8).map_err(fmt_err)?;
    let large = pick(&profiles, Scale::Large, None)?;
    let (l1, l64) = (large.at(1.0).ok_or("missing L(1)")?, large.at(64.0).ok_or("missing L(64)")?);
    let far = pick(&profiles, Scale::Far, Some(FarForm::Max))?;
    let (f_first, f_last) = (far.first(), far.last());
    let large_ok = l64 <= 0.25 * l1;
    let far_ok = f_last <= 0.25 * f_first;
    Ok((
        small_ok && large_ok && far_ok,
        format!(
            "S(2^-10)/S(1) = {:.3} (≤ 0.1), L(64)/L(1) = {:.3} (≤ 0.25), far max-form last/first = {:.3} (≤ 0.25)",
            s_lo / s_hi,
            l64 / l1,
            f_last / f_first
        ),
    ))
}

fn criterion_9(seed: u64) -> Outcome {
    let fx = sqrt_jet().map_err(fmt_err)?;
    let field = fx.field().map_err(fmt_err)?;
    let pairs = sqrt_pairs(&fx.set, seed).map_err(fmt_err)?;
    let profiles = field_profiles_refined(&field, &pairs, &sqrt_deltas(), 8).map_err(fmt_err)?;
    let small = pick(&profiles, Scale::Small, None)?;
    let least = small.samples.iter().map(|s| s.sup_ratio).fold(f64::INFINITY, f64::min);
    let grid = logspace(1e-6, 1e6, 121);
    let linear = validate(&Modulus::linear_control(), &grid).map_err(fmt_err)?;
    let capped = validate(&Modulus::capped_control(), &grid).map_err(fmt_err)?;
    let linear_rejected = linear.admits(Scale::Small).is_err() && Modulus::linear_control().admits(Scale::Small).is_err();
    let capped_rejected = [Scale::Large, Scale::Far]
        .iter()
        .all(|&s| capped.admits(s).is_err() && Modulus::capped_control().admits(s).is_err());
    Ok((
        least >= 0.9 && linear_rejected && capped_rejected,
        format!(
            "min S(δ) = {least:.4} (≥ 0.9) over {} deltas, linear rejected for small: {linear_rejected}, capped rejected for large and far: {capped_rejected}",
            small.samples.len()
        ),
    ))
}

fn criterion_10(seed: u64, c: &FrozenConstants) -> Outcome {
    let fx = lemma32_problem(seed).map_err(fmt_err)?;
    let field = fx.field().map_err(fmt_err)?;
    let (a_bound, b_bound) = c.lemma32(1, 1).ok_or("missing lemma constants")?;
    let samples = informative_samples(&field, seed, 400, &[LEMMA32_BOX.0], &[LEMMA32_BOX.1]).map_err(fmt_err)?;
    if samples.len() < 400 {
        return Ok((false, format!("only {} informative samples", samples.len())));
    }
    let small = lemma32_check(&field, &samples[..100]).map_err(fmt_err)?;
    let large = lemma32_check(&field, &samples).map_err(fmt_err)?;
    let drift = |a: f64, b: f64| if a.min(b) > 0.0 { a.max(b) / a.min(b) } else if a == b { 1.0 } else { f64::INFINITY };
    let (da, db) = (drift(small.max_ratio_a, large.max_ratio_a), drift(small.max_ratio_b, large.max_ratio_b));
    let pass = small.max_ratio_a <= a_bound
        && small.max_ratio_b <= b_bound
        && large.max_ratio_a <= a_bound
        && large.max_ratio_b <= b_bound
        && da <= 2.0
        && db <= 2.0
        && small.zero_rhs_violations + large.zero_rhs_violations == 0;
    Ok((
        pass,
        format!(
            "(a) {:.4e} at 100, {:.4e} at 400 (≤ {a_bound:.4e}, drift {da:.3}); (b) {:.4e} at 100, {:.4e} at 400 (≤ {b_bound:.4e}, drift {db:.3}); {} zero-RHS violations",
            small.max_ratio_a,
            large.max_ratio_a,
            small.max_ratio_b,
            large.max_ratio_b,
            small.zero_rhs_violations + large.zero_rhs_violations
        ),
    ))
}

fn criterion_11() -> Outcome {
    let fx = saturating_grid().map_err(fmt_err)?;
    fx.modulus.admits(Scale::Far).map_err(fmt_err)?;
    let profiles = jet_vanishing_profile(&fx.jet, &fx.set, &fx.modulus, Scale::Far, &far_deltas()).map_err(fmt_err)?;
    let min = pick(&profiles, Scale::Far, Some(FarForm::Min))?.last();
    let max = pick(&profiles, Scale::Far, Some(FarForm::Max))?.last();
    let factor = if min.min(max) > 0.0 {
        min.max(max) / min.min(max)
    } else if min == max {
        1.0
    } else {
        f64::INFINITY
    };
    Ok((
        factor <= 4.0,
        format!("final far samples: min-form {min:.4e}, max-form {max:.4e}, factor {factor:.3} (≤ 4)"),
    ))
}

fn main() {
    let c = constants();
    let seed = c.seed;
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("polynomial reproduction", Box::new(move || criterion_1(seed))),
        ("partition of unity", Box::new(move || criterion_2(seed))),
        ("cube correctness", Box::new(move || criterion_3(seed))),
        ("overlap bound", Box::new(move || criterion_4(seed))),
        ("trace and Taylor decay", Box::new({
            let c = c.clone();
            move || criterion_5(seed, &c)
        })),
        ("derivative exactness", Box::new(move || criterion_6(seed))),
        ("seminorm boundedness", Box::new({
            let c = c.clone();
            move || criterion_7(seed, &c)
        })),
        ("vanishing preservation", Box::new(move || criterion_8(seed))),
        ("negative controls", Box::new(move || criterion_9(seed))),
        ("remainder ratios", Box::new({
            let c = c.clone();
            move || criterion_10(seed, &c)
        })),
        ("far-form consistency", Box::new(criterion_11)),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.1} s]",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
