use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use whitney_core::cube::write_cubes_csv;
use whitney_core::problem::{load_problem, ProblemSpec};
use whitney_core::profile::write_profiles_csv;
use whitney_core::seminorm::{jet_seminorm, jet_vanishing_profile};
use whitney_core::verify::constants::LoadedConstants;
use whitney_core::verify::field::{field_profiles, field_profiles_refined};
use whitney_core::verify::fixtures::bounding_box;
use whitney_core::verify::infconv::compare_operators;
use whitney_core::verify::suites::{length_scale, problem_deltas, problem_pairs, run_suites, Suite, SuiteOptions};
use whitney_core::{CubeCover, Error, ExtensionField, Scale, VanishingProfile};

/// Whitney extension of Hölder jets from finite sets.
#[derive(Parser)]
#[command(name = "whitney", version)]
struct Cli {
    /// Frozen-constants file; overrides the problem's entry, the WHITNEY_CONSTANTS variable and the built-in file.
    #[arg(long, global = true)]
    constants: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Whitney cubes meeting the bounding box of E (widened by --pad times its diameter).
    Decompose {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        pad: f64,
        /// Generations below this are not descended into.
        #[arg(long, default_value_t = -12, allow_hyphen_values = true)]
        min_generation: i32,
        #[arg(long, default_value_t = 1_000_000)]
        limit: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Values and derivatives of the extension at listed points or on a grid.
    Extend {
        #[arg(long)]
        problem: PathBuf,
        /// JSON array of points.
        #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
        points: Option<PathBuf>,
        /// `lo1,..,lon:hi1,..,hin:r1,..,rn`
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        /// Highest derivative order, at most m + 1.
        #[arg(long, default_value_t = 0)]
        order: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace seminorm of the jet over all pairs of E.
    JetSeminorm {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vanishing profiles of the jet (exhaustive) or of the extension (sampled).
    Profile {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, value_enum, default_value_t = ScaleArg::All)]
        scale: ScaleArg,
        #[arg(long, value_enum, default_value_t = Source::Jet)]
        source: Source,
        /// Comma-separated ascending δ values; defaults to powers of two around the diameter of E.
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1)]
        density: usize,
        /// Refine each window's sup from its best pairs (field source only).
        #[arg(long, default_value_t = 0)]
        refine: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run assertion suites; exits with 1 when an assertion fails.
    Verify {
        #[arg(long)]
        problem: PathBuf,
        /// all, or a comma-separated subset of partition, cubes, lemma32, profiles and necessity.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV of the extension's profiles (profiles suite).
        #[arg(long)]
        profiles: Option<PathBuf>,
    },
    /// Profiles of the Whitney extension next to the infimal convolution (m = 0, d = 1).
    Compare {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
        /// Constant M of the infimal convolution; defaults to the data seminorm.
        #[arg(long)]
        lipschitz: Option<f64>,
        #[arg(long, default_value_t = 1)]
        density: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Small,
    Large,
    Far,
    All,
}

impl ScaleArg {
    fn scales(self) -> Vec<Scale> {
        match self {
            ScaleArg::Small => vec![Scale::Small],
            ScaleArg::Large => vec![Scale::Large],
            ScaleArg::Far => vec![Scale::Far],
            ScaleArg::All => Scale::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Source {
    Jet,
    Field,
}

struct Session {
    problem: ProblemSpec,
    problem_path: PathBuf,
    constants: LoadedConstants,
}

impl Session {
    fn load(problem: &Path, constants: Option<&Path>) -> anyhow::Result<Self> {
        let spec = load_problem(problem).with_context(|| format!("loading {}", problem.display()))?;
        let constants = spec.load_constants(constants).context("loading constants")?;
        Ok(Session {
            problem: spec,
            problem_path: problem.to_path_buf(),
            constants,
        })
    }

    fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.problem.seed).unwrap_or(self.constants.constants.seed)
    }

    fn meta(&self, command: &str, seed: u64) -> Value {
        json!({
            "command": command,
            "problem": self.problem_path.display().to_string(),
            "seed": seed,
            "constants_source": self.constants.source,
            "constants_sha256": self.constants.sha256,
        })
    }

    fn stamp(&self, seed: u64) -> String {
        format!("seed {seed}, constants {}", &self.constants.sha256[..12])
    }
}

/// CSV goes to `out` with a `.meta.json` sidecar, or to stdout.
fn write_csv(
    out: Option<&Path>,
    meta: Value,
    body: impl FnOnce(&mut dyn Write) -> whitney_core::Result<()>,
) -> anyhow::Result<()> {
    match out {
        Some(p) => {
            let mut f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            body(&mut f)?;
            let mut side = p.as_os_str().to_owned();
            side.push(".meta.json");
            std::fs::write(PathBuf::from(side), serde_json::to_string_pretty(&meta)? + "\n")?;
        }
        None => body(&mut io::stdout().lock())?,
    }
    Ok(())
}

fn write_json(out: Option<&Path>, value: &Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// The summary goes to stderr when stdout carries the data.
fn summary(out: Option<&Path>, line: String) {
    if out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn parse_list(s: &str, what: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("bad {what} entry `{v}`")))
        .collect()
}

fn parse_grid(s: &str) -> anyhow::Result<(Vec<f64>, Vec<f64>, Vec<usize>)> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        bail!("grid must be `lo1,..:hi1,..:r1,..`");
    }
    let res = parts[2]
        .split(',')
        .map(|v| v.trim().parse::<usize>().with_context(|| format!("bad resolution `{v}`")))
        .collect::<anyhow::Result<_>>()?;
    Ok((parse_list(parts[0], "grid lo")?, parse_list(parts[1], "grid hi")?, res))
}

fn field(ctx: &Session) -> whitney_core::Result<ExtensionField> {
    let p = &ctx.problem;
    ExtensionField::new(p.set.clone(), p.jet.clone(), p.modulus.clone())
}

/// Number of far windows that no pair of E can enter.
fn vacuous_far(profiles: &[VanishingProfile], radius: f64) -> usize {
    profiles
        .iter()
        .filter(|p| p.scale == Scale::Far)
        .flat_map(|p| &p.samples)
        .filter(|s| s.delta > radius)
        .count()
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let constants = cli.constants.as_deref();
    match cli.command {
        Command::Decompose {
            problem,
            pad,
            min_generation,
            limit,
            out,
        } => {
            let ctx = Session::load(&problem, constants)?;
            let set = &ctx.problem.set;
            let (lo, hi) = bounding_box(set, pad * length_scale(set));
            let cover = CubeCover::new(set.clone());
            let cubes = cover.cubes_in_box(&lo, &hi, min_generation, limit)?;
            let seed = ctx.seed(None);
            write_csv(out.as_deref(), ctx.meta("decompose", seed), |w| write_cubes_csv(w, &cubes))?;
            summary(out.as_deref(), format!("decompose: {} cubes ({})", cubes.len(), ctx.stamp(seed)));
        }
        Command::Extend {
            problem,
            points,
            grid,
            order,
            out,
        } => {
            let ctx = Session::load(&problem, constants)?;
            let f = field(&ctx)?;
            let table = match (points, grid) {
                (Some(p), _) => {
                    let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                    let pts: Vec<Vec<f64>> = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
                    f.eval_points(&pts, order)?
                }
                (None, Some(g)) => {
                    let (lo, hi, res) = parse_grid(&g)?;
                    f.eval_grid(&lo, &hi, &res, order)?
                }
                (None, None) => bail!("one of --points or --grid is required"),
            };
            let seed = ctx.seed(None);
            write_csv(out.as_deref(), ctx.meta("extend", seed), |w| table.write_csv(w))?;
            summary(out.as_deref(), format!("extend: {} rows, order {order} ({})", table.rows.len(), ctx.stamp(seed)));
        }
        Command::JetSeminorm { problem, out } => {
            let ctx = Session::load(&problem, constants)?;
            let p = &ctx.problem;
            let r = jet_seminorm(&p.jet, &p.set, &p.modulus)?;
            let seed = ctx.seed(None);
            if let Some(o) = out.as_deref() {
                let mut v = ctx.meta("jet-seminorm", seed);
                v["seminorm"] = json!(r.value);
                v["upper"] = json!(r.upper);
                v["argmax"] = json!(r.argmax);
                v["vacuous"] = json!(r.vacuous);
                write_json(Some(o), &v)?;
            }
            println!("{:?}", r.value);
            eprintln!("jet-seminorm over {} points ({})", p.set.len(), ctx.stamp(seed));
        }
        Command::Profile {
            problem,
            scale,
            source,
            deltas,
            density,
            refine,
            seed,
            out,
        } => {
            let ctx = Session::load(&problem, constants)?;
            let seed = ctx.seed(seed);
            let p = &ctx.problem;
            let deltas = deltas.unwrap_or_else(|| problem_deltas(&p.set));
            let scales = scale.scales();
            let profiles: Vec<VanishingProfile> = match source {
                Source::Jet => {
                    let mut all = Vec::new();
                    for s in &scales {
                        all.extend(jet_vanishing_profile(&p.jet, &p.set, &p.modulus, *s, &deltas)?);
                    }
                    all
                }
                Source::Field => {
                    let f = field(&ctx)?;
                    let pairs = problem_pairs(&p.set, seed, density)?;
                    let all = if refine > 0 {
                        field_profiles_refined(&f, &pairs, &deltas, refine)?
                    } else {
                        field_profiles(&f, &pairs, &deltas)?
                    };
                    all.into_iter().filter(|v| scales.contains(&v.scale)).collect()
                }
            };
            let vacuous = vacuous_far(&profiles, p.set.radius());
            let empty: usize = profiles.iter().map(VanishingProfile::empty_windows).sum();
            let mut meta = ctx.meta("profile", seed);
            meta["empty_windows"] = json!(empty);
            meta["vacuous_far_windows"] = json!(vacuous);
            write_csv(out.as_deref(), meta, |w| write_profiles_csv(w, &profiles))?;
            if vacuous > 0 {
                eprintln!("warning: {vacuous} far windows lie beyond max|E| = {}; E is bounded, so they are vacuous and report 0", p.set.radius());
            }
            let finals: Vec<String> = profiles
                .iter()
                .map(|v| format!("{}{}={:e}", v.scale, if v.form.is_some() { format!("/{}", v.form_label()) } else { String::new() }, v.last()))
                .collect();
            summary(out.as_deref(), format!("profile: final {} ({})", finals.join(" "), ctx.stamp(seed)));
        }
        Command::Verify {
            problem,
            suite,
            seed,
            samples,
            out,
            profiles,
        } => {
            let ctx = Session::load(&problem, constants)?;
            let seed = ctx.seed(seed);
            let suites = Suite::parse_list(&suite)?;
            let opts = SuiteOptions {
                samples,
                ..SuiteOptions::default()
            };
            let report = run_suites(&ctx.problem, &suites, seed, &ctx.constants, &opts)?;
            let mut v = serde_json::to_value(&report)?;
            v["problem"] = json!(ctx.problem_path.display().to_string());
            write_json(out.as_deref(), &v)?;
            if let Some(pp) = profiles.as_deref() {
                write_csv(Some(pp), ctx.meta("verify", seed), |w| write_profiles_csv(w, &report.profiles))?;
            }
            let failed: Vec<String> = report
                .suites
                .iter()
                .flat_map(|s| s.checks.iter().filter(|c| !c.pass).map(move |c| format!("{}.{}", s.suite, c.name)))
                .collect();
            let line = if report.pass {
                format!("verify: PASS {} ({})", suite, ctx.stamp(seed))
            } else {
                format!("verify: FAIL {} [{}] ({})", suite, failed.join(", "), ctx.stamp(seed))
            };
            summary(out.as_deref(), line);
            if !report.pass {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Compare {
            problem,
            deltas,
            lipschitz,
            density,
            seed,
            out,
        } => {
            let ctx = Session::load(&problem, constants)?;
            let seed = ctx.seed(seed);
            let p = &ctx.problem;
            let deltas = deltas.unwrap_or_else(|| problem_deltas(&p.set));
            let pairs = problem_pairs(&p.set, seed, density)?;
            let table = compare_operators(&p.set, &p.jet, &p.modulus, lipschitz, &pairs, &deltas)?;
            let mut meta = ctx.meta("compare", seed);
            meta["lipschitz"] = json!(table.lipschitz);
            meta["warning"] = json!(table.warning);
            if let Some(w) = &table.warning {
                eprintln!("warning: {w}");
            }
            write_csv(out.as_deref(), meta, |w| table.write_csv(w))?;
            summary(out.as_deref(), format!("compare: {} rows, M = {:e} ({})", table.rows.len(), table.lipschitz, ctx.stamp(seed)));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = matches!(
                e.downcast_ref::<Error>(),
                Some(Error::Schema { .. } | Error::Argument(_) | Error::ModulusRejected { .. })
            );
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
