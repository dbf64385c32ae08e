//! Problem files: a point set, a jet on it and a modulus, as canonical JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, PointSet};
use crate::modulus::{Modulus, ModulusSpec};
use crate::multi_index::MultiIndex;
use crate::verify::constants::LoadedConstants;

pub const MAX_DIMENSION: usize = 6;
pub const MAX_ORDER: usize = 10;
pub const MAX_VALUE_DIM: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoefficient {
    point: usize,
    beta: Vec<usize>,
    value: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    dimension: usize,
    order: usize,
    value_dim: usize,
    modulus: ModulusSpec,
    points: Vec<Vec<f64>>,
    coefficients: Vec<RawCoefficient>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constants: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

/// A validated problem.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub set: PointSet,
    pub jet: Jet,
    pub modulus: Modulus,
    /// The modulus exactly as written, so that saving reproduces the input.
    pub modulus_spec: ModulusSpec,
    /// Constants file as written in the problem; relative paths resolve against `base_dir`.
    pub constants: Option<String>,
    pub seed: Option<u64>,
    pub base_dir: Option<PathBuf>,
}

fn check_range(path: &str, value: usize, lo: usize, hi: usize) -> Result<()> {
    if value < lo || value > hi {
        return Err(Error::schema(path, format!("{path} = {value} must lie in [{lo}, {hi}]")));
    }
    Ok(())
}

impl ProblemSpec {
    pub fn new(set: PointSet, jet: Jet, modulus: Modulus) -> Result<Self> {
        check_range("dimension", set.dim(), 1, MAX_DIMENSION)?;
        check_range("order", jet.order(), 0, MAX_ORDER)?;
        check_range("value_dim", jet.value_dim(), 1, MAX_VALUE_DIM)?;
        jet.check_compatible(&set)?;
        Ok(ProblemSpec {
            set,
            jet,
            modulus_spec: modulus.to_spec(),
            modulus,
            constants: None,
            seed: None,
            base_dir: None,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawProblem = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::schema(if path == "." { String::new() } else { path }, e.inner().to_string())
        })?;
        check_range("dimension", raw.dimension, 1, MAX_DIMENSION)?;
        check_range("order", raw.order, 0, MAX_ORDER)?;
        check_range("value_dim", raw.value_dim, 1, MAX_VALUE_DIM)?;
        let modulus = Modulus::from_spec(&raw.modulus)?;
        let set = PointSet::new(raw.dimension, raw.points)?;
        let jet = Jet::from_entries(
            raw.dimension,
            raw.order,
            raw.value_dim,
            set.len(),
            raw.coefficients.into_iter().map(|c| (c.point, MultiIndex::new(c.beta), c.value)),
        )?;
        let mut spec = ProblemSpec::new(set, jet, modulus)?;
        spec.modulus_spec = raw.modulus;
        spec.constants = raw.constants;
        spec.seed = raw.seed;
        Ok(spec)
    }

    /// Canonical JSON: fixed key order, coefficients by point then graded index, trailing newline.
    pub fn to_json(&self) -> String {
        let basis = self.jet.basis();
        let coefficients = (0..self.set.len())
            .flat_map(|i| {
                basis.indices().iter().enumerate().map(move |(b, beta)| RawCoefficient {
                    point: i,
                    beta: beta.components().to_vec(),
                    value: self.jet.coeff(i, b).to_vec(),
                })
            })
            .collect();
        let raw = RawProblem {
            dimension: self.set.dim(),
            order: self.jet.order(),
            value_dim: self.jet.value_dim(),
            modulus: self.modulus_spec.clone(),
            points: self.set.to_vecs(),
            coefficients,
            constants: self.constants.clone(),
            seed: self.seed,
        };
        let mut s = serde_json::to_string_pretty(&raw).expect("problem serializes");
        s.push('\n');
        s
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn order(&self) -> usize {
        self.jet.order()
    }

    pub fn constants_path(&self) -> Option<PathBuf> {
        let c = self.constants.as_ref()?;
        let p = PathBuf::from(c);
        Some(match &self.base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p,
        })
    }

    /// Explicit path, then the problem's own entry, then the environment and built-in defaults.
    pub fn load_constants(&self, explicit: Option<&Path>) -> Result<LoadedConstants> {
        match explicit.map(Path::to_path_buf).or_else(|| self.constants_path()) {
            Some(p) => LoadedConstants::from_path(&p),
            None => LoadedConstants::resolve(None),
        }
    }
}

pub fn load_problem(path: &Path) -> Result<ProblemSpec> {
    let text = std::fs::read_to_string(path)?;
    let mut spec = ProblemSpec::from_json(&text)?;
    spec.base_dir = path.parent().map(Path::to_path_buf);
    Ok(spec)
}

pub fn save_problem(spec: &ProblemSpec, path: &Path) -> Result<()> {
    std::fs::write(path, spec.to_json())?;
    Ok(())
}
