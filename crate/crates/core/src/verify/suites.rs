//! Assertion suites run against a user problem.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::cube::CubeCover;
use crate::error::{Error, Result};
use crate::extension::ExtensionField;
use crate::functions::{Sine, SmoothBump, SmoothFunction};
use crate::jet::{distance, PointSet};
use crate::modulus::{logspace, Modulus};
use crate::partition::{bump_eval, compensated_sum, phi_eval, PartitionFunction};
use crate::problem::ProblemSpec;
use crate::profile::{Scale, VanishingProfile};
use crate::seminorm::jet_seminorm;
use crate::symnorm::sym_norm;
use crate::verify::constants::LoadedConstants;
use crate::verify::field::{field_profiles, field_seminorm_refined, hot_pairs};
use crate::verify::fixtures::{bounding_box, near_set_samples, rng};
use crate::verify::lemma32::{informative_samples, lemma32_check};
use crate::verify::necessity::necessity_check;
use crate::verify::sampler::{set_pairs, PairSampler, PairSet, Strategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Partition,
    Cubes,
    Lemma32,
    Profiles,
    Necessity,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Partition, Suite::Cubes, Suite::Lemma32, Suite::Profiles, Suite::Necessity];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Partition => "partition",
            Suite::Cubes => "cubes",
            Suite::Lemma32 => "lemma32",
            Suite::Profiles => "profiles",
            Suite::Necessity => "necessity",
        }
    }

    /// `all` or a single suite name.
    /// `all` or a comma-separated list of suite names, kept in canonical order.
    pub fn parse_list(s: &str) -> Result<Vec<Suite>> {
        if s == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        let named = s.split(',').map(|t| t.trim().parse()).collect::<Result<Vec<Suite>>>()?;
        Ok(Suite::ALL.into_iter().filter(|x| named.contains(x)).collect())
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::argument(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn upper(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound: Some(bound),
            pass: value <= bound,
            note: None,
        }
    }

    /// Against a frozen constant; an absent constant is reported, not asserted.
    pub fn frozen(name: impl Into<String>, value: f64, bound: Option<f64>) -> Self {
        match bound {
            Some(b) => Check::upper(name, value, b),
            None => Check {
                name: name.into(),
                value,
                bound: None,
                pass: value.is_finite(),
                note: Some("unfrozen".into()),
            },
        }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            bound: None,
            pass: ok,
            note: None,
        }
    }

    pub fn skipped(name: impl Into<String>, why: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            value: 0.0,
            bound: None,
            pass: true,
            note: Some(format!("skipped: {}", why.into())),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: Suite, checks: Vec<Check>) -> Self {
        SuiteReport {
            suite,
            pass: checks.iter().all(|c| c.pass),
            checks,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub constants_source: String,
    pub constants_sha256: String,
    pub pass: bool,
    pub suites: Vec<SuiteReport>,
    #[serde(skip)]
    pub profiles: Vec<VanishingProfile>,
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    /// Query points near `E` for the partition and cube suites.
    pub samples: usize,
    /// Informative points for the pointwise remainder check; a second pass uses four times as many.
    pub lemma_samples: usize,
    /// Pair density of the first seminorm pass; the second doubles it.
    pub density: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            samples: 2000,
            lemma_samples: 100,
            density: 1,
        }
    }
}

/// Diameter of `E`, or 1 for a singleton.
pub fn length_scale(set: &PointSet) -> f64 {
    let (lo, hi) = bounding_box(set, 0.0);
    let d = distance(&lo, &hi);
    if d > 0.0 {
        d
    } else {
        1.0
    }
}

/// Pairs of `E`, rays from `E` at radii `10^{-3}s … s` and a stratified annulus
/// over the bounding box widened by `s/2`, where `s` is the diameter of `E`.
pub fn problem_pairs(set: &PointSet, seed: u64, density: usize) -> Result<PairSet> {
    let n = set.dim();
    let s = length_scale(set);
    let (lo, hi) = bounding_box(set, 0.5 * s);
    let mut pairs = set_pairs(set);
    let radial = PairSampler::new(
        Strategy::Radial {
            centers: set.to_vecs(),
            radii: logspace(1e-3 * s, s, 10),
            directions: 2 * n * density,
        },
        seed,
    );
    pairs.extend(&radial.sample(n)?);
    let annulus = PairSampler::new(
        Strategy::Annulus {
            lo,
            hi,
            deltas: (0..=10).map(|k| s * 2f64.powi(k - 8)).collect(),
            count: 100 * density,
        },
        seed,
    );
    pairs.extend(&annulus.sample(n)?);
    Ok(pairs)
}

/// Powers of two from `2^{-10}s` to `4s`.
pub fn problem_deltas(set: &PointSet) -> Vec<f64> {
    let s = length_scale(set);
    (-10..=2).map(|k| s * 2f64.powi(k)).collect()
}

fn near_samples(problem: &ProblemSpec, seed: u64, stream: u64, count: usize) -> Vec<Vec<f64>> {
    let s = length_scale(&problem.set);
    near_set_samples(&mut rng(seed, stream), &problem.set, count, 1e-3 * s, 10.0 * s)
}

/// Partition measurements at the given points.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PartitionStats {
    pub sum_error: f64,
    /// `max |Σ_Q D^β φ_Q(x)| · d(x,E)^{|β|}` over `1 ≤ |β| ≤ order`.
    pub derivative_sum: f64,
    pub min_denominator: f64,
    /// `max_Q ‖D^k φ_Q(x)‖ · d(x,E)^k` for `k = 0..=order`.
    pub level_bounds: Vec<f64>,
    pub max_overlap: usize,
}

pub fn partition_stats(cover: &CubeCover, points: &[Vec<f64>], order: usize) -> Result<PartitionStats> {
    let mut st = PartitionStats {
        min_denominator: f64::INFINITY,
        level_bounds: vec![0.0; order + 1],
        ..Default::default()
    };
    for x in points {
        let (_, d) = cover.nearest(x);
        let phis = phi_eval(cover, x, order)?;
        st.max_overlap = st.max_overlap.max(phis.len());
        let denom: f64 = phis
            .iter()
            .map(|(r, _)| bump_eval(&PartitionFunction::new(r.cube.clone()), x, 0).map(|t| t.value()))
            .sum::<Result<f64>>()?;
        st.min_denominator = st.min_denominator.min(denom);
        let Some((_, first)) = phis.first() else {
            return Err(Error::Validation(format!("no enlarged cube contains {x:?}")));
        };
        let basis = first.basis().clone();
        let derivs: Vec<Vec<f64>> = phis.iter().map(|(_, t)| t.derivatives()).collect();
        for (b, beta) in basis.indices().iter().enumerate() {
            let total = compensated_sum(phis.iter().map(|(_, t)| t.coeffs()[b])) * beta.factorial();
            if b == 0 {
                st.sum_error = st.sum_error.max((total - 1.0).abs());
            } else {
                st.derivative_sum = st.derivative_sum.max(total.abs() * d.powi(beta.order() as i32));
            }
        }
        for k in 0..=order {
            let range = basis.level(k);
            let level = &basis.indices()[range.clone()];
            for v in &derivs {
                let norm = sym_norm(level, &v[range.clone()], 1).value() * d.powi(k as i32);
                st.level_bounds[k] = st.level_bounds[k].max(norm);
            }
        }
    }
    Ok(st)
}

/// Largest `|p_Q − y| / |x − y|` over vertices `x` of `Q*` and `y ∈ E`, for the
/// cubes materialized so far (at most `limit`, spread evenly).
pub fn nearest_point_ratio(cover: &CubeCover, limit: usize) -> f64 {
    let cubes = cover.materialized();
    let set = cover.set();
    let n = set.dim();
    let stride = cubes.len().div_ceil(limit.max(1)).max(1);
    let mut worst = 0.0f64;
    for rec in cubes.iter().step_by(stride) {
        let (lo, hi) = (rec.cube.star_lo(), rec.cube.star_hi());
        let p = set.point(rec.p_q);
        for mask in 0..(1usize << n) {
            let v: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }).collect();
            for y in set.iter() {
                let r = distance(&v, y);
                if r > 0.0 {
                    worst = worst.max(distance(p, y) / r);
                }
            }
        }
    }
    worst
}

fn partition_suite(problem: &ProblemSpec, seed: u64, c: &LoadedConstants, opts: &SuiteOptions) -> Result<SuiteReport> {
    let n = problem.dim();
    let cover = CubeCover::new(problem.set.clone());
    let points = near_samples(problem, seed, 1, opts.samples);
    let st = partition_stats(&cover, &points, 3)?;
    let mut checks = vec![
        Check::upper("sum_phi_minus_one", st.sum_error, 1e-10),
        Check::upper("derivative_sum_scaled", st.derivative_sum, 1e-8),
        Check::upper("one_minus_min_denominator", 0.5 - st.min_denominator, 0.0)
            .with_note(format!("min denominator {}", st.min_denominator)),
    ];
    for (k, v) in st.level_bounds.iter().enumerate() {
        checks.push(Check::frozen(format!("phi_level_{k}"), *v, c.constants.partition(n, k)));
    }
    Ok(SuiteReport::new(Suite::Partition, checks))
}

fn cubes_suite(problem: &ProblemSpec, seed: u64, c: &LoadedConstants, opts: &SuiteOptions) -> Result<SuiteReport> {
    let n = problem.dim();
    let cover = CubeCover::new(problem.set.clone());
    let points = near_samples(problem, seed, 2, opts.samples);
    let mut overlap = 0usize;
    let mut contained = true;
    let mut nested = false;
    for x in &points {
        let home = cover.cube_at(x)?;
        let near = cover.cubes_near(x)?;
        overlap = overlap.max(near.len());
        contained &= home.cube.contains_closed(x) && near.iter().any(|r| r.cube == home.cube);
        contained &= near.iter().all(|r| r.cube.star_contains(x));
        for (i, a) in near.iter().enumerate() {
            nested |= near[i + 1..]
                .iter()
                .any(|b| a.cube.is_ancestor_of(&b.cube) || b.cube.is_ancestor_of(&a.cube));
        }
    }
    let mut sandwich = 0.0f64;
    let mut sandwich_ok = true;
    for rec in cover.materialized() {
        let diam = rec.cube.diam();
        sandwich_ok &= rec.dist_q >= diam * (1.0 - 1e-12) && rec.dist_q <= 4.0 * diam * (1.0 + 1e-12);
        sandwich = sandwich.max(rec.dist_q / diam);
    }
    let checks = vec![
        Check::holds("cube_at_and_cubes_near_contain_query", contained),
        Check::holds("no_nested_cubes", !nested),
        Check::holds("diam_le_dist_le_4diam", sandwich_ok).with_note(format!("max d(Q,E)/diam = {sandwich}")),
        Check::frozen("overlap", overlap as f64, c.constants.overlap(n)),
        Check::frozen("nearest_point", nearest_point_ratio(&cover, 400), c.constants.nearest_point(n)),
    ];
    Ok(SuiteReport::new(Suite::Cubes, checks))
}

fn lemma32_suite(problem: &ProblemSpec, seed: u64, c: &LoadedConstants, opts: &SuiteOptions) -> Result<SuiteReport> {
    let (n, m) = (problem.dim(), problem.order());
    let field = ExtensionField::new(problem.set.clone(), problem.jet.clone(), problem.modulus.clone())?;
    let s = length_scale(&problem.set);
    let (lo, hi) = bounding_box(&problem.set, 0.25 * s);
    let many = informative_samples(&field, seed, 4 * opts.lemma_samples, &lo, &hi)?;
    if many.is_empty() {
        return Ok(SuiteReport::new(
            Suite::Lemma32,
            vec![Check::skipped("lemma32", "every cube near the samples has p_Q = ξ; both sides vanish")],
        ));
    }
    let few = &many[..many.len().min(opts.lemma_samples)];
    let a = lemma32_check(&field, few)?;
    let b = lemma32_check(&field, &many)?;
    let frozen = c.constants.lemma32(n, m);
    let drift = |x: f64, y: f64| if x > 0.0 { y / x } else if y > 0.0 { f64::INFINITY } else { 1.0 };
    let checks = vec![
        Check::upper("zero_rhs_violations", (a.zero_rhs_violations + b.zero_rhs_violations) as f64, 0.0),
        Check::frozen("ratio_a", a.max_ratio_a, frozen.map(|f| f.0)),
        Check::frozen("ratio_b", a.max_ratio_b, frozen.map(|f| f.1)),
        Check::upper("ratio_a_drift", drift(a.max_ratio_a, b.max_ratio_a), 2.0),
        Check::upper("ratio_b_drift", drift(a.max_ratio_b, b.max_ratio_b), 2.0),
    ];
    Ok(SuiteReport::new(Suite::Lemma32, checks))
}

fn field_sup(field: &ExtensionField, seed: u64, density: usize) -> Result<f64> {
    let set = field.set();
    let s = length_scale(set);
    let (lo, hi) = bounding_box(set, 0.5 * s);
    let mut pairs = problem_pairs(set, seed, density)?;
    pairs.extend(&hot_pairs(field, &lo, &hi, 2000 * density, 16, seed)?);
    Ok(field_seminorm_refined(field, &pairs, 8)?.value)
}

fn profiles_suite(
    problem: &ProblemSpec,
    seed: u64,
    c: &LoadedConstants,
    opts: &SuiteOptions,
) -> Result<(SuiteReport, Vec<VanishingProfile>)> {
    let (n, m) = (problem.dim(), problem.order());
    let (set, jet) = (&problem.set, &problem.jet);
    let field = ExtensionField::new(set.clone(), jet.clone(), problem.modulus.clone())?;
    let mut checks = Vec::new();

    let mut trace = true;
    for i in 0..set.len() {
        let v = field.eval(set.point(i))?;
        trace &= v.iter().zip(jet.coeff(i, 0)).all(|(a, b)| a.to_bits() == b.to_bits());
    }
    checks.push(Check::holds("trace_bitwise", trace));

    let anchor_bound = (0..set.len())
        .flat_map(|i| {
            let basis = jet.basis();
            let d = jet.value_dim();
            (0..=m).map(move |k| {
                let r = basis.level(k);
                sym_norm(&basis.indices()[r.clone()], &jet.point_coeffs(i)[r.start * d..r.end * d], d).value()
            })
        })
        .fold(0.0, f64::max);
    checks.push(Check::holds("jet_levels_finite", anchor_bound.is_finite()).with_note(format!("max_k ‖A_k‖ = {anchor_bound}")));

    let semi = jet_seminorm(jet, set, &problem.modulus)?.value;
    let f1 = field_sup(&field, seed, opts.density)?;
    let f2 = field_sup(&field, seed.wrapping_add(1), 2 * opts.density)?;
    let magnitude = (0..set.len())
        .flat_map(|i| jet.point_coeffs(i).iter().map(|c| c.abs()))
        .fold(1.0f64, f64::max);
    if semi > 1e-12 * magnitude {
        checks.push(Check::frozen("kappa", f1.max(f2) / semi, c.constants.kappa(n, m)));
        let drift = if f1.min(f2) > 0.0 { f1.max(f2) / f1.min(f2) } else { 1.0 };
        checks.push(Check::upper("kappa_drift", drift, 2.0));
    } else {
        checks.push(
            Check::upper("field_seminorm_of_zero_seminorm_jet", f1.max(f2), 1e-6 * magnitude)
                .with_note("jet seminorm is zero; the field should be one polynomial"),
        );
    }

    let pairs = problem_pairs(set, seed, opts.density)?;
    let profiles = field_profiles(&field, &pairs, &problem_deltas(set))?;
    let radius = set.radius();
    let vacuous = problem_deltas(set).iter().filter(|d| **d > radius).count();
    checks.push(
        Check::holds("profiles_finite", profiles.iter().all(|p| p.samples.iter().all(|s| s.sup_ratio.is_finite())))
            .with_note(format!("{vacuous} far windows lie beyond max|E| and are vacuous for this bounded set")),
    );
    Ok((SuiteReport::new(Suite::Profiles, checks), profiles))
}

/// Per-sample check `sup(δ) ≤ bound(δ)` over every profile; the value is the worst ratio.
fn profile_within(name: &str, profiles: &[VanishingProfile], only_last: bool, bound: impl Fn(f64) -> Result<f64>) -> Result<Check> {
    let mut worst = 0.0f64;
    for p in profiles {
        let samples = if only_last { &p.samples[p.samples.len() - 1..] } else { &p.samples[..] };
        for s in samples {
            let b = bound(s.delta)?;
            worst = worst.max(if b > 0.0 { s.sup_ratio / b } else { s.sup_ratio * f64::INFINITY });
        }
    }
    Ok(Check::upper(name, worst, 1.0))
}

fn necessity_suite(problem: &ProblemSpec) -> Result<SuiteReport> {
    let set = &problem.set;
    let n = problem.dim();
    let w: &Modulus = &problem.modulus;
    let s = length_scale(set);
    let points = set.to_vecs();
    let mut checks = Vec::new();

    match w.admits(Scale::Small) {
        Err(e) => checks.push(Check::skipped("small_sine", e.to_string())),
        Ok(()) => {
            let mut frequency = vec![0.0; n];
            frequency[0] = 1.0;
            let f = Sine { frequency, phase: 0.3 };
            let deltas: Vec<f64> = (-10..=0).map(|k| s * 2f64.powi(k)).collect();
            let r = necessity_check(&f, points.clone(), problem.order(), w, Scale::Small, &deltas, f64::INFINITY)?;
            let c = w.c_omega();
            checks.push(profile_within("small_sine", &r.profiles, false, |d| Ok(2.0 * c * d / w.eval(d)?))?);
        }
    }

    let bump = |center: Vec<f64>, radius: f64| SmoothBump { center, radius };
    let osc = (-1.0f64).exp();
    match w.admits(Scale::Large) {
        Err(e) => checks.push(Check::skipped("large_bump", e.to_string())),
        Ok(()) => {
            let (lo, hi) = bounding_box(set, 0.0);
            let center: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
            let f = bump(center, 0.5 * s);
            let deltas: Vec<f64> = (-3..=0).map(|k| s * 2f64.powi(k)).collect();
            let r = necessity_check(&f, points.clone(), 0, w, Scale::Large, &deltas, f64::INFINITY)?;
            checks.push(profile_within("large_bump", &r.profiles, false, |d| Ok(2.0 * osc / w.eval(d)?))?);
        }
    }

    match w.admits(Scale::Far) {
        Err(e) => checks.push(Check::skipped("far_bump", e.to_string())),
        Ok(()) => {
            let radius = if set.radius() > 0.0 { set.radius() } else { 1.0 };
            let deltas: Vec<f64> = (-2..=0).map(|k| radius * 2f64.powi(k)).collect();
            let last = radius;
            let f = bump(vec![0.0; n], 0.5 * last);
            debug_assert!(f.vanishing_scales(0).contains(&Scale::Far));
            let r = necessity_check(&f, points, 0, w, Scale::Far, &deltas, f64::INFINITY)?;
            let bound = 2.0 * osc / w.eval(0.5 * last)?;
            checks.push(profile_within("far_bump", &r.profiles, true, |_| Ok(bound))?);
        }
    }
    Ok(SuiteReport::new(Suite::Necessity, checks))
}

pub fn run_suites(
    problem: &ProblemSpec,
    suites: &[Suite],
    seed: u64,
    constants: &LoadedConstants,
    opts: &SuiteOptions,
) -> Result<VerifyReport> {
    let mut reports = Vec::new();
    let mut profiles = Vec::new();
    for &suite in suites {
        let r = match suite {
            Suite::Partition => partition_suite(problem, seed, constants, opts)?,
            Suite::Cubes => cubes_suite(problem, seed, constants, opts)?,
            Suite::Lemma32 => lemma32_suite(problem, seed, constants, opts)?,
            Suite::Profiles => {
                let (r, p) = profiles_suite(problem, seed, constants, opts)?;
                profiles = p;
                r
            }
            Suite::Necessity => necessity_suite(problem)?,
        };
        reports.push(r);
    }
    Ok(VerifyReport {
        seed,
        constants_source: constants.source.clone(),
        constants_sha256: constants.sha256.clone(),
        pass: reports.iter().all(|r| r.pass),
        suites: reports,
        profiles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{jet_from_smooth, Polynomial};
    use crate::multi_index::MultiIndex;

    fn polynomial_problem() -> ProblemSpec {
        let p = Polynomial::new(2, vec![(1.0, MultiIndex::new(vec![1, 0])), (-0.5, MultiIndex::new(vec![0, 2]))]).unwrap();
        let pts = vec![vec![0.0, 0.0], vec![0.4, 0.1], vec![0.9, 0.7], vec![0.2, 0.8]];
        let (set, jet) = jet_from_smooth(&p, pts, 2).unwrap();
        ProblemSpec::new(set, jet, Modulus::power(0.5).unwrap()).unwrap()
    }

    fn small() -> SuiteOptions {
        SuiteOptions {
            samples: 200,
            lemma_samples: 20,
            density: 1,
        }
    }

    #[test]
    fn polynomial_problem_passes_every_suite() {
        let c = LoadedConstants::builtin().unwrap();
        let r = run_suites(&polynomial_problem(), &Suite::ALL, 5, &c, &small()).unwrap();
        for s in &r.suites {
            assert!(s.pass, "{s:?}");
        }
        assert_eq!(r.constants_sha256, c.sha256);
        assert!(!r.profiles.is_empty());
    }

    #[test]
    fn suite_names_parse() {
        assert_eq!(Suite::parse_list("all").unwrap().len(), 5);
        assert_eq!(Suite::parse_list("lemma32").unwrap(), vec![Suite::Lemma32]);
        assert!(Suite::parse_list("everything").is_err());
    }

    #[test]
    fn runs_are_deterministic() {
        let c = LoadedConstants::builtin().unwrap();
        let p = polynomial_problem();
        let a = run_suites(&p, &[Suite::Partition, Suite::Cubes], 9, &c, &small()).unwrap();
        let b = run_suites(&p, &[Suite::Partition, Suite::Cubes], 9, &c, &small()).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
