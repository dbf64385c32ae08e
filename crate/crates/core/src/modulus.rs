//! Moduli of continuity and sample-based checks of their structural conditions.
//!
//! Every modulus is non-decreasing, positive on `(0, ∞)` and quasi-concave:
//! `s/ω(s) ≤ C_ω · t/ω(t)` for `0 < s ≤ t`. Two further conditions gate the
//! vanishing scales: *regularity* (`t/ω(t) → 0` as `t → 0`, needed for the small
//! scale) and *coercivity* (`ω(t) → ∞`, needed for the large and far scales).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::Scale;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModulusKind {
    /// `ω(t) = t^α`, `α ∈ (0,1)`.
    Power { alpha: f64 },
    /// `ω(t) = min(t^α, cap)`; bounded, hence not coercive.
    CappedPower { alpha: f64, cap: f64 },
    /// `ω(t) = t`; fails regularity.
    Linear,
    /// Log-linear interpolation through `(t, ω(t))` breakpoints.
    Table { points: Vec<[f64; 2]> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModulusFlags {
    pub regularity_holds: bool,
    pub coercivity_holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Modulus {
    kind: ModulusKind,
    c_omega: f64,
    flags: ModulusFlags,
}

/// JSON form: the kind's fields plus an optional `c_omega`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModulusSpec", into = "RawModulusSpec")]
pub struct ModulusSpec {
    pub kind: ModulusKind,
    pub c_omega: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum KindTag {
    Power,
    CappedPower,
    Linear,
    Table,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModulusSpec {
    #[serde(rename = "type")]
    tag: KindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    points: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c_omega: Option<f64>,
}

impl TryFrom<RawModulusSpec> for ModulusSpec {
    type Error = String;

    fn try_from(raw: RawModulusSpec) -> std::result::Result<Self, String> {
        let name = match raw.tag {
            KindTag::Power => "power",
            KindTag::CappedPower => "capped_power",
            KindTag::Linear => "linear",
            KindTag::Table => "table",
        };
        let need = |v: Option<f64>, field: &str| v.ok_or_else(|| format!("missing field `{field}` for type `{name}`"));
        let reject = |present: bool, field: &str| {
            if present {
                Err(format!("field `{field}` is not allowed for type `{name}`"))
            } else {
                Ok(())
            }
        };
        let kind = match raw.tag {
            KindTag::Power => {
                reject(raw.cap.is_some(), "cap")?;
                reject(raw.points.is_some(), "points")?;
                ModulusKind::Power { alpha: need(raw.alpha, "alpha")? }
            }
            KindTag::CappedPower => {
                reject(raw.points.is_some(), "points")?;
                ModulusKind::CappedPower {
                    alpha: need(raw.alpha, "alpha")?,
                    cap: need(raw.cap, "cap")?,
                }
            }
            KindTag::Linear => {
                reject(raw.alpha.is_some(), "alpha")?;
                reject(raw.cap.is_some(), "cap")?;
                reject(raw.points.is_some(), "points")?;
                ModulusKind::Linear
            }
            KindTag::Table => {
                reject(raw.alpha.is_some(), "alpha")?;
                reject(raw.cap.is_some(), "cap")?;
                ModulusKind::Table {
                    points: raw.points.ok_or_else(|| format!("missing field `points` for type `{name}`"))?,
                }
            }
        };
        Ok(ModulusSpec { kind, c_omega: raw.c_omega })
    }
}

impl From<ModulusSpec> for RawModulusSpec {
    fn from(spec: ModulusSpec) -> Self {
        let mut raw = RawModulusSpec {
            tag: KindTag::Linear,
            alpha: None,
            cap: None,
            points: None,
            c_omega: spec.c_omega,
        };
        match spec.kind {
            ModulusKind::Power { alpha } => {
                raw.tag = KindTag::Power;
                raw.alpha = Some(alpha);
            }
            ModulusKind::CappedPower { alpha, cap } => {
                raw.tag = KindTag::CappedPower;
                raw.alpha = Some(alpha);
                raw.cap = Some(cap);
            }
            ModulusKind::Linear => {}
            ModulusKind::Table { points } => {
                raw.tag = KindTag::Table;
                raw.points = Some(points);
            }
        }
        raw
    }
}

impl Modulus {
    pub fn power(alpha: f64) -> Result<Self> {
        Self::new(ModulusKind::Power { alpha }, None)
    }

    pub fn capped_power(alpha: f64, cap: f64) -> Result<Self> {
        Self::new(ModulusKind::CappedPower { alpha, cap }, None)
    }

    pub fn linear() -> Self {
        Self::new(ModulusKind::Linear, None).expect("linear modulus is valid")
    }

    pub fn table(points: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(ModulusKind::Table { points }, None)
    }

    /// Negative control: satisfies coercivity but not regularity.
    pub fn linear_control() -> Self {
        Self::linear()
    }

    /// Negative control: `min(√t, 1)`, regular but bounded.
    pub fn capped_control() -> Self {
        Self::capped_power(0.5, 1.0).expect("valid capped modulus")
    }

    pub fn new(kind: ModulusKind, c_omega: Option<f64>) -> Result<Self> {
        let (analytic_c, flags) = match &kind {
            ModulusKind::Power { alpha } => {
                check_alpha(*alpha)?;
                (1.0, ModulusFlags { regularity_holds: true, coercivity_holds: true })
            }
            ModulusKind::CappedPower { alpha, cap } => {
                check_alpha(*alpha)?;
                if !(cap.is_finite() && *cap > 0.0) {
                    return Err(Error::schema("modulus.cap", "cap must be a positive finite number"));
                }
                (1.0, ModulusFlags { regularity_holds: true, coercivity_holds: false })
            }
            ModulusKind::Linear => (1.0, ModulusFlags { regularity_holds: false, coercivity_holds: true }),
            ModulusKind::Table { points } => table_properties(points)?,
        };
        let c_omega = match c_omega {
            None => analytic_c,
            Some(c) if !(c.is_finite() && c >= 1.0) => {
                return Err(Error::schema("modulus.c_omega", "c_omega must be a finite number ≥ 1"))
            }
            Some(c) if c < analytic_c * (1.0 - 1e-12) => {
                return Err(Error::schema(
                    "modulus.c_omega",
                    format!("declared c_omega {c} is below the exact constant {analytic_c}"),
                ))
            }
            Some(c) => c,
        };
        Ok(Modulus { kind, c_omega, flags })
    }

    pub fn from_spec(spec: &ModulusSpec) -> Result<Self> {
        Self::new(spec.kind.clone(), spec.c_omega)
    }

    pub fn to_spec(&self) -> ModulusSpec {
        ModulusSpec {
            kind: self.kind.clone(),
            c_omega: Some(self.c_omega),
        }
    }

    /// Overrides the declared regularity/coercivity flags.
    pub fn with_flags(mut self, flags: ModulusFlags) -> Self {
        self.flags = flags;
        self
    }

    pub fn kind(&self) -> &ModulusKind {
        &self.kind
    }

    pub fn c_omega(&self) -> f64 {
        self.c_omega
    }

    pub fn flags(&self) -> ModulusFlags {
        self.flags
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("modulus evaluated at t = {t}; need 0 < t < ∞")));
        }
        Ok(self.value(t))
    }

    /// Unchecked evaluation for `t > 0`.
    pub(crate) fn value(&self, t: f64) -> f64 {
        debug_assert!(t > 0.0);
        match &self.kind {
            ModulusKind::Power { alpha } => t.powf(*alpha),
            ModulusKind::CappedPower { alpha, cap } => t.powf(*alpha).min(*cap),
            ModulusKind::Linear => t,
            ModulusKind::Table { points } => table_eval(points, t),
        }
    }

    /// Whether the declared flags allow the theorem's hypotheses for `scale`.
    pub fn admits(&self, scale: Scale) -> Result<()> {
        match scale {
            Scale::Small if !self.flags.regularity_holds => Err(Error::ModulusRejected {
                scale: scale.name(),
                reason: "t/ω(t) does not tend to 0 as t → 0".into(),
            }),
            Scale::Large | Scale::Far if !self.flags.coercivity_holds => Err(Error::ModulusRejected {
                scale: scale.name(),
                reason: "ω is bounded at large t".into(),
            }),
            _ => Ok(()),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::schema("modulus.alpha", "alpha must lie in (0,1)"))
    }
}

fn segment_slope(a: [f64; 2], b: [f64; 2]) -> f64 {
    (b[1] / a[1]).ln() / (b[0] / a[0]).ln()
}

fn table_eval(points: &[[f64; 2]], t: f64) -> f64 {
    let last = points.len() - 1;
    let seg = if t <= points[0][0] {
        0
    } else if t >= points[last][0] {
        last - 1
    } else {
        points.partition_point(|p| p[0] <= t) - 1
    };
    let (a, b) = (points[seg], points[seg + 1]);
    let slope = segment_slope(a, b);
    a[1] * (t / a[0]).powf(slope)
}

/// Exact quasi-concavity constant and flags of a breakpoint table.
fn table_properties(points: &[[f64; 2]]) -> Result<(f64, ModulusFlags)> {
    if points.len() < 2 {
        return Err(Error::schema("modulus.points", "table needs at least two breakpoints"));
    }
    for (i, p) in points.iter().enumerate() {
        if !(p[0] > 0.0 && p[0].is_finite() && p[1] > 0.0 && p[1].is_finite()) {
            return Err(Error::schema(format!("modulus.points[{i}]"), "breakpoints must be positive and finite"));
        }
        if i > 0 {
            let q = points[i - 1];
            if p[0] <= q[0] {
                return Err(Error::schema(format!("modulus.points[{i}]"), "t values must be strictly increasing"));
            }
            if p[1] < q[1] {
                return Err(Error::schema(format!("modulus.points[{i}]"), "ω values must be non-decreasing"));
            }
        }
    }
    let first = segment_slope(points[0], points[1]);
    let n = points.len();
    let last = segment_slope(points[n - 2], points[n - 1]);
    if !(first > 0.0 && first <= 1.0) {
        return Err(Error::schema(
            "modulus.points",
            format!("first segment log-slope {first} must lie in (0,1] so that ω(0+) = 0 and s/ω(s) stays bounded"),
        ));
    }
    if last > 1.0 {
        return Err(Error::schema(
            "modulus.points",
            format!("last segment log-slope {last} exceeds 1; quasi-concavity fails at infinity"),
        ));
    }
    // s/ω(s) is a power on every segment, so its extremes sit on breakpoints.
    let ratio: Vec<f64> = points.iter().map(|p| p[0] / p[1]).collect();
    let mut c = 1.0f64;
    let mut running = 0.0f64;
    for r in &ratio {
        running = running.max(*r);
        c = c.max(running / r);
    }
    Ok((
        c,
        ModulusFlags {
            regularity_holds: first < 1.0,
            coercivity_holds: last > 0.0,
        },
    ))
}

#[derive(Clone, Debug)]
pub struct ValidationOptions {
    /// `ω(t_min)` at or below this counts as witnessed `ω(0+) = 0`.
    pub zero_tolerance: f64,
    /// Relative slack when comparing against the declared `c_omega`.
    pub c_omega_slack: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            zero_tolerance: 1e-2,
            c_omega_slack: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub monotone: bool,
    pub vanishes_at_zero: bool,
    /// Smallest `C` with `s/ω(s) ≤ C·t/ω(t)` for all grid `s ≤ t`.
    pub witnessed_c_omega: f64,
    pub c_omega_witness: (f64, f64),
    /// `t/ω(t)` strictly decreases toward the smallest grid point.
    pub regularity: bool,
    pub regularity_witness: (f64, f64),
    /// `ω` strictly increases toward the largest grid point.
    pub coercivity: bool,
    pub coercivity_witness: (f64, f64),
}

impl ValidationReport {
    pub fn admits(&self, scale: Scale) -> Result<()> {
        match scale {
            Scale::Small if !self.regularity => Err(Error::ModulusRejected {
                scale: scale.name(),
                reason: format!(
                    "t/ω(t) is not decreasing toward 0 (t = {:e} vs t = {:e})",
                    self.regularity_witness.0, self.regularity_witness.1
                ),
            }),
            Scale::Large | Scale::Far if !self.coercivity => Err(Error::ModulusRejected {
                scale: scale.name(),
                reason: format!(
                    "ω does not grow at large t (t = {:e} vs t = {:e})",
                    self.coercivity_witness.0, self.coercivity_witness.1
                ),
            }),
            _ => Ok(()),
        }
    }
}

/// Log-spaced grid of `count` points from `lo` to `hi`.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

pub fn validate(m: &Modulus, grid: &[f64]) -> Result<ValidationReport> {
    validate_with(m, grid, &ValidationOptions::default())
}

pub fn validate_with(m: &Modulus, grid: &[f64], opts: &ValidationOptions) -> Result<ValidationReport> {
    if grid.len() < 2 {
        return Err(Error::argument("validation grid needs at least two points"));
    }
    if grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::argument("validation grid must be positive and finite"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::argument("validation grid must be sorted strictly ascending"));
    }
    let (t_min, t_max) = (grid[0], grid[grid.len() - 1]);
    if t_max / t_min < 1e6 * (1.0 - 1e-12) {
        return Err(Error::argument("validation grid must span at least six decades"));
    }

    let w: Vec<f64> = grid.iter().map(|&t| m.value(t)).collect();
    let ratio: Vec<f64> = grid.iter().zip(&w).map(|(t, w)| t / w).collect();

    let mut monotone_witness = None;
    for i in 1..grid.len() {
        if w[i] < w[i - 1] {
            monotone_witness = Some((grid[i - 1], grid[i]));
            break;
        }
    }

    let mut c = 1.0f64;
    let mut witness = (grid[0], grid[0]);
    let mut best = 0usize;
    for j in 0..grid.len() {
        if ratio[j] > ratio[best] {
            best = j;
        }
        let cj = ratio[best] / ratio[j];
        if cj > c {
            c = cj;
            witness = (grid[best], grid[j]);
        }
    }

    let mid = grid.len() / 2;
    let lower_monotone = ratio[..=mid].windows(2).all(|p| p[0] <= p[1] * (1.0 + 1e-12));
    let regularity = lower_monotone && ratio[0] < ratio[mid] * (1.0 - 1e-6);
    let upper_monotone = w[mid..].windows(2).all(|p| p[0] <= p[1]);
    let last = grid.len() - 1;
    let coercivity = upper_monotone && w[last] > w[mid] * (1.0 + 1e-6);

    let report = ValidationReport {
        monotone: monotone_witness.is_none(),
        vanishes_at_zero: w[0] <= opts.zero_tolerance,
        witnessed_c_omega: c,
        c_omega_witness: witness,
        regularity,
        regularity_witness: (grid[0], grid[mid]),
        coercivity,
        coercivity_witness: (grid[mid], grid[last]),
    };

    if let Some((s, t)) = monotone_witness {
        return Err(Error::Validation(format!("ω decreases between t = {s:e} and t = {t:e}")));
    }
    if c > m.c_omega() * (1.0 + opts.c_omega_slack) {
        return Err(Error::Validation(format!(
            "witnessed C_ω = {c} exceeds declared {} at (s, t) = ({:e}, {:e})",
            m.c_omega(),
            witness.0,
            witness.1
        )));
    }
    let flags = m.flags();
    if flags.regularity_holds && !regularity {
        return Err(Error::Validation(format!(
            "regularity declared but t/ω(t) is not decreasing at (t_min, t_mid) = ({:e}, {:e})",
            grid[0], grid[mid]
        )));
    }
    if flags.coercivity_holds && !coercivity {
        return Err(Error::Validation(format!(
            "coercivity declared but ω does not grow at (t_mid, t_max) = ({:e}, {:e})",
            grid[mid], grid[last]
        )));
    }
    Ok(report)
}
