//! Sampled `Ċ^{m,ω}` seminorms and vanishing profiles of a field on `ℝⁿ`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::extension::ExtensionField;
use crate::jet::{distance, norm};
use crate::modulus::Modulus;
use crate::multi_index::{Basis, MultiIndex};
use crate::profile::{check_deltas, reduce_profiles, FarForm, PairKey, Scale, VanishingProfile};
use crate::seminorm::SeminormReport;
use crate::symnorm::sym_norm;
use crate::verify::sampler::PairSet;

/// Access to the top derivative `D^m F` of a field, flattened over `|α| = m`.
pub trait TopDerivative: Sync {
    fn dim(&self) -> usize;
    fn order(&self) -> usize;
    fn value_dim(&self) -> usize;
    fn modulus(&self) -> &Modulus;
    fn top(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Level `m + 1`, when the field has one.
    fn next_level(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }
}

impl TopDerivative for ExtensionField {
    fn dim(&self) -> usize {
        ExtensionField::dim(self)
    }

    fn order(&self) -> usize {
        self.jet().order()
    }

    fn value_dim(&self) -> usize {
        ExtensionField::value_dim(self)
    }

    fn modulus(&self) -> &Modulus {
        ExtensionField::modulus(self)
    }

    fn top(&self, x: &[f64]) -> Result<Vec<f64>> {
        let m = self.jet().order();
        Ok(self.eval_derivatives(x, m)?.level(m).to_vec())
    }

    fn next_level(&self, x: &[f64]) -> Option<Vec<f64>> {
        let m = self.jet().order();
        self.eval_derivatives(x, m + 1).ok().map(|d| d.level(m + 1).to_vec())
    }
}

/// Pairs around the `hot` points of largest `‖D^{m+1}F‖` among `count` uniform
/// points of `[lo, hi]`: each hot point is joined to its shifts by `±t·e_i`
/// for `t = 2^{-4}, …, 2^{-16}` times the box diameter.
pub fn hot_pairs<F: TopDerivative + ?Sized>(field: &F, lo: &[f64], hi: &[f64], count: usize, hot: usize, seed: u64) -> Result<PairSet> {
    use rand::{Rng, SeedableRng};
    let n = field.dim();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<Vec<f64>> = (0..count)
        .map(|_| lo.iter().zip(hi).map(|(a, b)| rng.gen_range(*a..*b)).collect())
        .collect();
    let basis = Basis::shared(n, field.order() + 1);
    let level: Vec<MultiIndex> = basis.indices()[basis.level(field.order() + 1)].to_vec();
    let mut scored: Vec<(f64, usize)> = xs
        .par_iter()
        .enumerate()
        .filter_map(|(k, x)| field.next_level(x).map(|v| (sym_norm(&level, &v, field.value_dim()).lower, k)))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let diam = distance(lo, hi);
    let mut out = PairSet::new(n);
    for &(_, k) in scored.iter().take(hot) {
        let c = out.push_point(&xs[k]);
        for j in 4..=16 {
            let t = diam * 2f64.powi(-j);
            for i in 0..n {
                for sign in [1.0, -1.0] {
                    let mut y = xs[k].clone();
                    y[i] += sign * t;
                    let b = out.push_point(&y);
                    out.push_pair(c, b);
                }
            }
        }
    }
    Ok(out)
}

/// Per-pair ratios `‖D^mF(x) − D^mF(y)‖ / ω(|x − y|)` with the upper bracket.
pub(crate) fn pair_ratios<F: TopDerivative + ?Sized>(field: &F, pairs: &PairSet) -> Result<Vec<(PairKey, f64)>> {
    let tops: Vec<Vec<f64>> = (0..pairs.num_points())
        .into_par_iter()
        .map(|i| field.top(pairs.point(i)))
        .collect::<Result<_>>()?;
    let m = field.order();
    let basis = Basis::shared(field.dim(), m);
    let level: Vec<MultiIndex> = basis.indices()[basis.level(m)].to_vec();
    let d = field.value_dim();
    let modulus = field.modulus();
    Ok(pairs
        .pairs()
        .par_iter()
        .map(|&(a, b)| {
            let (x, y) = (pairs.point(a as usize), pairs.point(b as usize));
            let dist = distance(x, y);
            let (nx, ny) = (norm(x), norm(y));
            let diff: Vec<f64> = tops[a as usize].iter().zip(&tops[b as usize]).map(|(p, q)| p - q).collect();
            let (ratio, upper) = if dist > 0.0 {
                let w = modulus.value(dist);
                let nb = sym_norm(&level, &diff, d);
                (nb.lower / w, nb.upper / w)
            } else {
                (0.0, 0.0)
            };
            (
                PairKey {
                    dist,
                    min_norm: nx.min(ny),
                    max_norm: nx.max(ny),
                    ratio,
                },
                upper,
            )
        })
        .collect())
}

/// Sampled seminorm `max ‖D^mF(x) − D^mF(y)‖ / ω(|x−y|)`; `argmax` indexes the pair list.
pub fn field_seminorm<F: TopDerivative + ?Sized>(field: &F, pairs: &PairSet) -> Result<SeminormReport> {
    let ratios = pair_ratios(field, pairs)?;
    let mut report = SeminormReport {
        value: 0.0,
        upper: 0.0,
        argmax: None,
        vacuous: pairs.is_empty(),
    };
    for (k, (key, upper)) in ratios.iter().enumerate() {
        if report.argmax.is_none() || key.ratio > report.value {
            report.value = key.ratio;
            report.argmax = Some((k, k));
        }
        report.upper = report.upper.max(*upper);
    }
    Ok(report)
}

/// A pair and its ratio after local refinement.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinedSup {
    pub value: f64,
    /// Best ratio over the unrefined pairs.
    pub sampled: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

fn single_ratio<F: TopDerivative + ?Sized>(field: &F, level: &[MultiIndex], x: &[f64], tx: &[f64], y: &[f64]) -> Option<(f64, Vec<f64>)> {
    let dist = distance(x, y);
    if dist == 0.0 {
        return None;
    }
    let ty = field.top(y).ok()?;
    let diff: Vec<f64> = tx.iter().zip(&ty).map(|(p, q)| p - q).collect();
    Some((sym_norm(level, &diff, field.value_dim()).lower / field.modulus().value(dist), ty))
}

/// Compass search in `(x, y)` over admissible pairs, from step `|x − y|/4` down to
/// `|x − y|/1024`. Pairs never shrink below `|x − y|/16`.
fn refine<F: TopDerivative + ?Sized>(
    field: &F,
    level: &[MultiIndex],
    mut x: Vec<f64>,
    mut y: Vec<f64>,
    admissible: &(dyn Fn(&[f64], &[f64]) -> bool + Sync),
) -> Option<(f64, Vec<f64>, Vec<f64>)> {
    let n = x.len();
    let mut tx = field.top(&x).ok()?;
    let (mut best, _) = single_ratio(field, level, &x, &tx, &y)?;
    let scale = distance(&x, &y);
    let mut step = scale / 4.0;
    let mut iterations = 0;
    while step > scale / 1024.0 && iterations < 400 {
        iterations += 1;
        let mut improved = false;
        for coord in 0..2 * n {
            for sign in [1.0, -1.0] {
                let (mut px, mut py) = (x.clone(), y.clone());
                if coord < n {
                    px[coord] += sign * step;
                } else {
                    py[coord - n] += sign * step;
                }
                if distance(&px, &py) < scale / 16.0 || !admissible(&px, &py) {
                    continue;
                }
                let tpx = if coord < n {
                    match field.top(&px) {
                        Ok(t) => t,
                        Err(_) => continue,
                    }
                } else {
                    tx.clone()
                };
                if let Some((r, _)) = single_ratio(field, level, &px, &tpx, &py) {
                    if r > best {
                        best = r;
                        x = px;
                        y = py;
                        tx = tpx;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    Some((best, x, y))
}

fn top_level<F: TopDerivative + ?Sized>(field: &F) -> Vec<MultiIndex> {
    let basis = Basis::shared(field.dim(), field.order());
    basis.indices()[basis.level(field.order())].to_vec()
}

/// Sampled seminorm followed by [`refine`] from the `top_k` best pairs.
pub fn field_seminorm_refined<F: TopDerivative + ?Sized>(field: &F, pairs: &PairSet, top_k: usize) -> Result<RefinedSup> {
    let ratios = pair_ratios(field, pairs)?;
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    order.sort_by(|&a, &b| ratios[b].0.ratio.total_cmp(&ratios[a].0.ratio).then(a.cmp(&b)));
    let sampled = order.first().map_or(0.0, |&k| ratios[k].0.ratio);
    let level = top_level(field);
    let mut out = RefinedSup {
        value: sampled,
        sampled,
        x: Vec::new(),
        y: Vec::new(),
    };
    if let Some(&k) = order.first() {
        let (a, b) = pairs.pairs()[k];
        out.x = pairs.point(a as usize).to_vec();
        out.y = pairs.point(b as usize).to_vec();
    }
    let always = |_: &[f64], _: &[f64]| true;
    let results: Vec<_> = order
        .iter()
        .take(top_k)
        .collect::<Vec<_>>()
        .into_par_iter()
        .filter_map(|&k| {
            let (a, b) = pairs.pairs()[k];
            refine(field, &level, pairs.point(a as usize).to_vec(), pairs.point(b as usize).to_vec(), &always)
        })
        .collect();
    for (v, x, y) in results {
        if v > out.value {
            out.value = v;
            out.x = x;
            out.y = y;
        }
    }
    Ok(out)
}

fn in_window(scale: Scale, form: Option<FarForm>, delta: f64, x: &[f64], y: &[f64]) -> bool {
    let dist = distance(x, y);
    let (nx, ny) = (norm(x), norm(y));
    match (scale, form) {
        (Scale::Small, _) => dist > 0.0 && dist <= delta,
        (Scale::Large, _) => dist >= delta,
        (Scale::Far, Some(FarForm::Max)) => nx.max(ny) >= delta,
        (Scale::Far, _) => nx.min(ny) >= delta,
    }
}

/// Profiles for all three scales in which every window's sup is additionally
/// refined from its `top_k` best pairs without leaving the window.
pub fn field_profiles_refined<F: TopDerivative + ?Sized>(
    field: &F,
    pairs: &PairSet,
    deltas: &[f64],
    top_k: usize,
) -> Result<Vec<VanishingProfile>> {
    check_deltas(deltas)?;
    let ratios = pair_ratios(field, pairs)?;
    let keys: Vec<PairKey> = ratios.iter().map(|k| k.0).collect();
    let level = top_level(field);
    let mut profiles: Vec<VanishingProfile> = Scale::ALL
        .iter()
        .flat_map(|&s| reduce_profiles(&keys, s, deltas, false))
        .collect();
    for p in &mut profiles {
        let (scale, form) = (p.scale, p.form);
        for sample in &mut p.samples {
            let delta = sample.delta;
            let mut inside: Vec<usize> = (0..keys.len())
                .filter(|&k| {
                    let (a, b) = pairs.pairs()[k];
                    in_window(scale, form, delta, pairs.point(a as usize), pairs.point(b as usize))
                })
                .collect();
            inside.sort_by(|&a, &b| keys[b].ratio.total_cmp(&keys[a].ratio).then(a.cmp(&b)));
            let admissible = move |x: &[f64], y: &[f64]| in_window(scale, form, delta, x, y);
            let best = inside
                .iter()
                .take(top_k)
                .collect::<Vec<_>>()
                .into_par_iter()
                .filter_map(|&k| {
                    let (a, b) = pairs.pairs()[k];
                    refine(field, &level, pairs.point(a as usize).to_vec(), pairs.point(b as usize).to_vec(), &admissible)
                })
                .map(|r| r.0)
                .reduce(|| 0.0, f64::max);
            sample.sup_ratio = sample.sup_ratio.max(best);
        }
        // windows are nested, so a pair found in one window bounds every wider window
        let mut envelope = 0.0f64;
        let samples: Box<dyn Iterator<Item = &mut crate::profile::ProfileSample>> = match scale {
            Scale::Small => Box::new(p.samples.iter_mut()),
            _ => Box::new(p.samples.iter_mut().rev()),
        };
        for sample in samples {
            envelope = envelope.max(sample.sup_ratio);
            sample.sup_ratio = envelope;
        }
    }
    Ok(profiles)
}

/// Sampled profile of a field; the far scale yields the min-form then the max-form.
pub fn field_vanishing_profile<F: TopDerivative + ?Sized>(
    field: &F,
    pairs: &PairSet,
    scale: Scale,
    deltas: &[f64],
) -> Result<Vec<VanishingProfile>> {
    check_deltas(deltas)?;
    let keys: Vec<PairKey> = pair_ratios(field, pairs)?.into_iter().map(|k| k.0).collect();
    Ok(reduce_profiles(&keys, scale, deltas, false))
}

/// All three scales from one pass of derivative evaluations.
pub fn field_profiles<F: TopDerivative + ?Sized>(
    field: &F,
    pairs: &PairSet,
    deltas: &[f64],
) -> Result<Vec<VanishingProfile>> {
    check_deltas(deltas)?;
    let keys: Vec<PairKey> = pair_ratios(field, pairs)?.into_iter().map(|k| k.0).collect();
    Ok(Scale::ALL
        .iter()
        .flat_map(|&s| reduce_profiles(&keys, s, deltas, false))
        .collect())
}
