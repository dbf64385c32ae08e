//! Seeded problem builders shared by the calibration run, the acceptance
//! suite and the command-line suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::extension::ExtensionField;
use crate::functions::{jet_from_smooth, Polynomial, Saturating, SinCos, Sine, SmoothBump, SqrtAbs};
use crate::jet::{distance, taylor_poly_eval, Jet, PointSet};
use crate::modulus::{logspace, Modulus};
use crate::multi_index::MultiIndex;
use crate::seminorm::jet_seminorm;
use crate::verify::field::{field_seminorm_refined, hot_pairs};
use crate::verify::sampler::{set_pairs, PairSampler, PairSet, Strategy};

/// A point set, a jet on it and a modulus.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub set: PointSet,
    pub jet: Jet,
    pub modulus: Modulus,
}

impl Fixture {
    pub fn field(&self) -> Result<ExtensionField> {
        ExtensionField::new(self.set.clone(), self.jet.clone(), self.modulus.clone())
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn order(&self) -> usize {
        self.jet.order()
    }
}

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn uniform_points(rng: &mut ChaCha8Rng, count: usize, lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| lo.iter().zip(hi).map(|(a, b)| rng.gen_range(*a..*b)).collect())
        .collect()
}

/// Uniform points in the box, pairwise at least `gap` apart.
///
/// # Panics
/// When `count` points cannot be placed within `1000·count` draws.
pub fn separated_points(rng: &mut ChaCha8Rng, count: usize, lo: &[f64], hi: &[f64], gap: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut draws = 0usize;
    while out.len() < count {
        draws += 1;
        assert!(draws <= 1000 * count.max(1), "cannot place {count} points {gap} apart");
        let p: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| rng.gen_range(*a..*b)).collect();
        if out.iter().all(|q| distance(&p, q) >= gap) {
            out.push(p);
        }
    }
    out
}

pub fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

/// Points `y + r·u` with `y ∈ E`, log-uniform `r`, kept when `d(x, E) ∈ [dmin, dmax]`.
pub fn near_set_samples(rng: &mut ChaCha8Rng, set: &PointSet, count: usize, dmin: f64, dmax: f64) -> Vec<Vec<f64>> {
    let (la, lb) = (dmin.ln(), dmax.ln());
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let y = set.point(rng.gen_range(0..set.len()));
        let u = unit_vector(rng, set.dim());
        let r = rng.gen_range(la..lb).exp();
        let x: Vec<f64> = y.iter().zip(&u).map(|(a, b)| a + r * b).collect();
        let d = set.iter().map(|p| distance(&x, p)).fold(f64::INFINITY, f64::min);
        if d >= dmin && d <= dmax {
            out.push(x);
        }
    }
    out
}

fn random_jet(rng: &mut ChaCha8Rng, set: &PointSet, order: usize, value_dim: usize) -> Result<Jet> {
    let mut jet = Jet::zeros(set.dim(), order, value_dim, set.len())?;
    let nb = jet.basis().len();
    for i in 0..set.len() {
        for b in 0..nb {
            for c in jet.coeff_mut(i, b) {
                *c = rng.gen_range(-1.0..1.0);
            }
        }
    }
    Ok(jet)
}

/// `1 + x₁ − 2x₂ + x₁x₂/2 + x₂²`.
pub fn reproduction_polynomial() -> Polynomial {
    let t = |c: f64, a: usize, b: usize| (c, MultiIndex::new(vec![a, b]));
    Polynomial::new(2, vec![t(1.0, 0, 0), t(1.0, 1, 0), t(-2.0, 0, 1), t(0.5, 1, 1), t(1.0, 0, 2)]).expect("valid terms")
}

/// Order-2 jet of [`reproduction_polynomial`] on 25 uniform points of `[0,1]²`.
pub fn reproduction(seed: u64) -> Result<Fixture> {
    let pts = uniform_points(&mut rng(seed, 1), 25, &[0.0, 0.0], &[1.0, 1.0]);
    let (set, jet) = jet_from_smooth(&reproduction_polynomial(), pts, 2)?;
    Ok(Fixture {
        name: "polynomial reproduction".into(),
        set,
        jet,
        modulus: Modulus::power(0.5)?,
    })
}

/// Order-2 jet of `sin x₁ cos x₂` on 20 points of `[0,π]²`.
pub fn sincos(seed: u64) -> Result<Fixture> {
    let pi = std::f64::consts::PI;
    let pts = separated_points(&mut rng(seed, 2), 20, &[0.0, 0.0], &[pi, pi], 0.05);
    let (set, jet) = jet_from_smooth(&SinCos, pts, 2)?;
    Ok(Fixture {
        name: "sin cos jet".into(),
        set,
        jet,
        modulus: Modulus::power(0.5)?,
    })
}

/// Random coefficients in `[-1,1]` on `count` points of `[0,1]ⁿ` at least `0.05` apart.
pub fn random_problem(seed: u64, stream: u64, n: usize, m: usize, count: usize) -> Result<Fixture> {
    let mut r = rng(seed, 100 + stream);
    let pts = separated_points(&mut r, count, &vec![0.0; n], &vec![1.0; n], 0.05);
    let set = PointSet::new(n, pts)?;
    let jet = random_jet(&mut r, &set, m, 1)?;
    Ok(Fixture {
        name: format!("random jet n={n} m={m}"),
        set,
        jet,
        modulus: Modulus::power(0.5)?,
    })
}

/// The five `(n, m)` shapes of the boundedness criterion.
pub const RANDOM_SHAPES: [(usize, usize); 5] = [(1, 0), (1, 1), (1, 2), (2, 1), (2, 2)];

pub fn random_problems(seed: u64) -> Result<Vec<Fixture>> {
    RANDOM_SHAPES
        .iter()
        .enumerate()
        .map(|(k, &(n, m))| random_problem(seed, k as u64, n, m, if n == 1 { 8 } else { 12 }))
        .collect()
}

/// The `n = 1, m = 1` random problem used for the Lemma 3.2 ratios.
pub fn lemma32_problem(seed: u64) -> Result<Fixture> {
    random_problem(seed, 1, 1, 1, 8)
}

/// Pairs for sampled field seminorms around a fixture: all pairs of `E`, rays
/// from each point of `E` at log-spaced radii, and a stratified annulus over
/// the enlarged bounding box. `density` scales the ray and annulus counts.
pub fn seminorm_pairs(set: &PointSet, seed: u64, density: usize) -> Result<PairSet> {
    let n = set.dim();
    let (lo, hi) = bounding_box(set, 0.5);
    let mut pairs = set_pairs(set);
    let radial = PairSampler::new(
        Strategy::Radial {
            centers: set.to_vecs(),
            radii: logspace(1e-3, 1.0, 10),
            directions: 2 * n * density,
        },
        seed,
    );
    pairs.extend(&radial.sample(n)?);
    let annulus = PairSampler::new(
        Strategy::Annulus {
            lo,
            hi,
            deltas: (0..=10).map(|k| 2f64.powi(k - 8)).collect(),
            count: 100 * density,
        },
        seed,
    );
    pairs.extend(&annulus.sample(n)?);
    Ok(pairs)
}

/// Bounding box of `E` widened by `pad` on every side.
pub fn bounding_box(set: &PointSet, pad: f64) -> (Vec<f64>, Vec<f64>) {
    let n = set.dim();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for p in set.iter() {
        for i in 0..n {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    (lo.iter().map(|v| v - pad).collect(), hi.iter().map(|v| v + pad).collect())
}

/// Order-1 jet of `sin(k·x)`, `|k| ≈ 1/spacing`, on a jittered `3 × 3` grid.
pub fn smooth_small_scaled(seed: u64, spacing: f64) -> Result<Fixture> {
    let mut r = rng(seed, 3);
    let pts: Vec<Vec<f64>> = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| {
            let jitter = [r.gen_range(-0.125..0.125), r.gen_range(-0.125..0.125)];
            vec![spacing * (i as f64 + jitter[0]), spacing * (j as f64 + jitter[1])]
        })
        .collect();
    let f = Sine {
        frequency: vec![0.9 / spacing, 0.6 / spacing],
        phase: 0.3,
    };
    let (set, jet) = jet_from_smooth(&f, pts, 1)?;
    Ok(Fixture {
        name: format!("sine jet, m = 1, grid spacing {spacing}"),
        set,
        jet,
        modulus: Modulus::power(0.5)?,
    })
}

/// Grid spacing of the small-scale decay fixture.
pub const SMOOTH_SMALL_SPACING: f64 = 128.0;

pub fn smooth_small(seed: u64) -> Result<Fixture> {
    smooth_small_scaled(seed, SMOOTH_SMALL_SPACING)
}

/// Deltas `2^{-10}, …, 1` for the small-scale decay.
pub fn small_deltas() -> Vec<f64> {
    (0..=10).map(|k| 2f64.powi(k - 10)).collect()
}

pub fn smooth_small_pairs(set: &PointSet, seed: u64, density: usize) -> Result<PairSet> {
    let (lo, hi) = bounding_box(set, 0.0);
    let mut pairs = set_pairs(set);
    pairs.extend(
        &PairSampler::new(
            Strategy::Radial {
                centers: set.to_vecs(),
                radii: (0..=12).map(|k| 2f64.powi(-k)).collect(),
                directions: 4 * density,
            },
            seed,
        )
        .sample(2)?,
    );
    pairs.extend(
        &PairSampler::new(
            Strategy::Annulus {
                lo,
                hi,
                deltas: (0..=11).map(|k| 2f64.powi(k - 11)).collect(),
                count: 200 * density,
            },
            seed,
        )
        .sample(2)?,
    );
    Ok(pairs)
}

pub fn bump() -> SmoothBump {
    SmoothBump {
        center: vec![0.0, 0.0],
        radius: 3.0,
    }
}

/// Order-1 jet of a bump of radius 3 on the integer grid of `[−10,10]²`.
pub fn bump_grid() -> Result<Fixture> {
    let pts: Vec<Vec<f64>> = (-10..=10)
        .flat_map(|a| (-10..=10).map(move |b| vec![a as f64, b as f64]))
        .collect();
    let (set, jet) = jet_from_smooth(&bump(), pts, 1)?;
    Ok(Fixture {
        name: "bump on integer grid".into(),
        set,
        jet,
        modulus: Modulus::power(0.5)?,
    })
}

/// Deltas `1, 2, …, 64` for the large and far windows.
pub fn coarse_deltas() -> Vec<f64> {
    (0..=6).map(|k| 2f64.powi(k)).collect()
}

/// Rays out to radius 128 from points near the bump, plus an annulus over `[−40,40]²`.
pub fn bump_pairs(seed: u64, density: usize) -> Result<PairSet> {
    let centers: Vec<Vec<f64>> = vec![
        vec![0.0, 0.0],
        vec![0.5, 0.5],
        vec![-1.2, 0.7],
        vec![1.5, -1.5],
        vec![0.3, -2.1],
        vec![2.4, 0.2],
        vec![20.0, 20.0],
        vec![-30.0, 5.0],
    ];
    let mut pairs = PairSampler::new(
        Strategy::Radial {
            centers,
            radii: [0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 96.0, 128.0].to_vec(),
            directions: 8 * density,
        },
        seed,
    )
    .sample(2)?;
    pairs.extend(
        &PairSampler::new(
            Strategy::Annulus {
                lo: vec![-40.0, -40.0],
                hi: vec![40.0, 40.0],
                deltas: coarse_deltas().into_iter().chain([96.0]).collect(),
                count: 200 * density,
            },
            seed,
        )
        .sample(2)?,
    );
    Ok(pairs)
}

/// Order-0 jet of `√|x|` on `{0} ∪ {2^{-j}: 0 ≤ j ≤ 12}`.
pub fn sqrt_jet() -> Result<Fixture> {
    let pts: Vec<Vec<f64>> = std::iter::once(vec![0.0]).chain((0..=12).map(|j| vec![2f64.powi(-j)])).collect();
    let (set, jet) = jet_from_smooth(&SqrtAbs, pts, 0)?;
    Ok(Fixture {
        name: "sqrt jet".into(),
        set,
        jet,
        modulus: Modulus::power(0.5)?,
    })
}

/// Deltas `2^{-12}, …, 1`.
pub fn sqrt_deltas() -> Vec<f64> {
    (0..=12).map(|k| 2f64.powi(k - 12)).collect()
}

pub fn sqrt_pairs(set: &PointSet, seed: u64) -> Result<PairSet> {
    let mut pairs = set_pairs(set);
    pairs.extend(
        &PairSampler::new(
            Strategy::Annulus {
                lo: vec![0.0],
                hi: vec![1.0],
                deltas: sqrt_deltas(),
                count: 200,
            },
            seed,
        )
        .sample(1)?,
    );
    Ok(pairs)
}

/// Order-0 jet of `x/√(1+x²)` on the integers of `[−20, 20]`.
pub fn saturating_grid() -> Result<Fixture> {
    let pts: Vec<Vec<f64>> = (-20..=20).map(|k| vec![k as f64]).collect();
    let (set, jet) = jet_from_smooth(&Saturating, pts, 0)?;
    Ok(Fixture {
        name: "saturating function on integer grid".into(),
        set,
        jet,
        modulus: Modulus::power(0.5)?,
    })
}

pub fn far_deltas() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 8.0, 16.0]
}

/// `30` uniform points of `[0,1]ⁿ` for the partition and cube measurements.
pub fn cube_set(seed: u64, n: usize) -> Result<PointSet> {
    PointSet::new(n, uniform_points(&mut rng(seed, 10 + n as u64), 30, &vec![0.0; n], &vec![1.0; n]))
}

/// Sampled field seminorm and exhaustive jet seminorm of a fixture: the pairs of
/// [`seminorm_pairs`] plus [`hot_pairs`], refined from the best 32.
pub fn kappa_measure(fx: &Fixture, seed: u64, density: usize) -> Result<(f64, f64)> {
    let field = fx.field()?;
    let (lo, hi) = bounding_box(&fx.set, 0.5);
    let mut pairs = seminorm_pairs(&fx.set, seed, density)?;
    pairs.extend(&hot_pairs(&field, &lo, &hi, 5000 * density, 32, seed)?);
    let f = field_seminorm_refined(&field, &pairs, 32)?.value;
    let j = jet_seminorm(&fx.jet, &fx.set, &fx.modulus)?.value;
    Ok((f, j))
}

/// Box for the pointwise remainder samples of [`lemma32_problem`].
pub const LEMMA32_BOX: (f64, f64) = (-0.5, 1.5);

/// `max ‖F(y + r·u) − P_y(y + r·u)‖ / (r^m ω(r))` over `y ∈ E` and `directions` random unit vectors `u`.
pub fn trace_decay(fx: &Fixture, seed: u64, r: f64, directions: usize) -> Result<f64> {
    let field = fx.field()?;
    let mut g = rng(seed, 20);
    let m = fx.order() as i32;
    let mut worst = 0.0f64;
    for i in 0..fx.set.len() {
        let y = fx.set.point(i);
        for _ in 0..directions {
            let u = unit_vector(&mut g, fx.dim());
            let x: Vec<f64> = y.iter().zip(&u).map(|(a, b)| a + r * b).collect();
            let f = field.eval(&x)?;
            let p = taylor_poly_eval(&fx.jet, &fx.set, i, &x)?;
            let diff = f.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            worst = worst.max(diff / (r.powi(m) * fx.modulus.eval(r)?));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_deterministic() {
        let a = random_problem(5, 0, 2, 1, 12).unwrap();
        let b = random_problem(5, 0, 2, 1, 12).unwrap();
        assert_eq!(a.set.to_vecs(), b.set.to_vecs());
        assert_eq!(a.jet.point_coeffs(3), b.jet.point_coeffs(3));
        let s = near_set_samples(&mut rng(1, 0), &a.set, 50, 1e-3, 10.0);
        for x in &s {
            let d = a.set.iter().map(|p| distance(x, p)).fold(f64::INFINITY, f64::min);
            assert!((1e-3..=10.0).contains(&d));
        }
    }

    #[test]
    fn fixture_shapes() {
        assert_eq!(bump_grid().unwrap().set.len(), 441);
        assert_eq!(sqrt_jet().unwrap().set.len(), 14);
        assert_eq!(saturating_grid().unwrap().set.len(), 41);
        assert_eq!(random_problems(1).unwrap().len(), 5);
    }
}
