//! The order-zero extension `x ↦ min_y f(y) + M·ω(|x − y|)` and a side-by-side
//! profile table against the Whitney extension.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::ExtensionField;
use crate::jet::{distance, Jet, PointSet};
use crate::modulus::Modulus;
use crate::profile::{FarForm, Scale};
use crate::seminorm::jet_seminorm;
use crate::verify::field::{field_profiles, TopDerivative};
use crate::verify::sampler::PairSet;

#[derive(Clone, Debug)]
pub struct InfConvField {
    set: PointSet,
    values: Vec<f64>,
    modulus: Modulus,
    lipschitz: f64,
    warning: Option<String>,
}

impl InfConvField {
    /// Requires an order-zero scalar jet. A constant `M` below the data seminorm is accepted with a warning.
    pub fn new(set: PointSet, jet: &Jet, modulus: Modulus, lipschitz: f64) -> Result<Self> {
        jet.check_compatible(&set)?;
        if jet.order() != 0 || jet.value_dim() != 1 {
            return Err(Error::argument("infimal convolution needs m = 0 and d = 1"));
        }
        if !(lipschitz >= 0.0 && lipschitz.is_finite()) {
            return Err(Error::argument("infimal convolution constant M must be non-negative"));
        }
        let seminorm = jet_seminorm(jet, &set, &modulus)?.value;
        let warning = (lipschitz < seminorm).then(|| {
            format!("M = {lipschitz:e} is below the data seminorm {seminorm:e}; the extension may not interpolate")
        });
        let values = (0..set.len()).map(|i| jet.coeff(i, 0)[0]).collect();
        Ok(InfConvField {
            set,
            values,
            modulus,
            lipschitz,
            warning,
        })
    }

    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.set
            .iter()
            .zip(&self.values)
            .map(|(y, &f)| {
                let r = distance(x, y);
                if r == 0.0 || self.lipschitz == 0.0 {
                    f
                } else {
                    f + self.lipschitz * self.modulus.value(r)
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

impl TopDerivative for InfConvField {
    fn dim(&self) -> usize {
        self.set.dim()
    }

    fn order(&self) -> usize {
        0
    }

    fn value_dim(&self) -> usize {
        1
    }

    fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    fn top(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![self.eval(x)])
    }
}

/// `min_{y∈E} f(y) + M·ω(|x − y|)` for an order-zero scalar jet.
pub fn infconv_extend(set: &PointSet, jet: &Jet, modulus: &Modulus, lipschitz: f64, x: &[f64]) -> Result<f64> {
    let f = InfConvField::new(set.clone(), jet, modulus.clone(), lipschitz)?;
    if x.len() != set.dim() {
        return Err(Error::argument("query has the wrong dimension"));
    }
    Ok(f.eval(x))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub scale: Scale,
    pub form: Option<FarForm>,
    pub delta: f64,
    pub whitney: f64,
    pub infconv: f64,
    pub pairs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonTable {
    pub lipschitz: f64,
    pub warning: Option<String>,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["scale", "form", "delta", "whitney", "infconv", "pairs"])?;
        for r in &self.rows {
            let form = match r.form {
                Some(FarForm::Min) => "min",
                Some(FarForm::Max) => "max",
                None => "-",
            };
            w.write_record([
                r.scale.name().to_string(),
                form.to_string(),
                r.delta.to_string(),
                r.whitney.to_string(),
                r.infconv.to_string(),
                r.pairs.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Profiles of both extensions on the same pairs. `lipschitz` defaults to the data seminorm.
pub fn compare_operators(
    set: &PointSet,
    jet: &Jet,
    modulus: &Modulus,
    lipschitz: Option<f64>,
    pairs: &PairSet,
    deltas: &[f64],
) -> Result<ComparisonTable> {
    let seminorm = jet_seminorm(jet, set, modulus)?.value;
    let m_const = lipschitz.unwrap_or(seminorm);
    let inf = InfConvField::new(set.clone(), jet, modulus.clone(), m_const)?;
    let whitney = ExtensionField::new(set.clone(), jet.clone(), modulus.clone())?;
    let pw = field_profiles(&whitney, pairs, deltas)?;
    let pi = field_profiles(&inf, pairs, deltas)?;
    let mut rows = Vec::new();
    for (a, b) in pw.iter().zip(&pi) {
        for (sa, sb) in a.samples.iter().zip(&b.samples) {
            rows.push(ComparisonRow {
                scale: a.scale,
                form: a.form,
                delta: sa.delta,
                whitney: sa.sup_ratio,
                infconv: sb.sup_ratio,
                pairs: sa.pairs,
            });
        }
    }
    Ok(ComparisonTable {
        lipschitz: m_const,
        warning: inf.warning.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multi_index::MultiIndex;
    use crate::verify::sampler::{PairSampler, Strategy};

    fn scalar_jet(values: &[f64]) -> Jet {
        Jet::from_entries(
            1,
            0,
            1,
            values.len(),
            values.iter().enumerate().map(|(i, v)| (i, MultiIndex::new(vec![0]), vec![*v])),
        )
        .unwrap()
    }

    #[test]
    fn interpolates_with_large_constant() {
        let set = PointSet::new(1, vec![vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let jet = scalar_jet(&[0.0, 0.5, -0.2]);
        let w = Modulus::power(0.5).unwrap();
        for (i, v) in [0.0, 0.5, -0.2].iter().enumerate() {
            assert_eq!(infconv_extend(&set, &jet, &w, 2.0, set.point(i)).unwrap(), *v);
        }
        let f = InfConvField::new(set.clone(), &jet, w.clone(), 0.01).unwrap();
        assert!(f.warning().is_some());
    }

    #[test]
    fn singleton_gives_modulus() {
        let set = PointSet::new(1, vec![vec![0.0]]).unwrap();
        let jet = scalar_jet(&[0.0]);
        let w = Modulus::power(0.5).unwrap();
        for x in [-4.0, -0.25, 0.0, 0.5, 9.0] {
            assert_eq!(infconv_extend(&set, &jet, &w, 1.0, &[x]).unwrap(), f64::abs(x).sqrt());
        }
    }

    #[test]
    fn constant_data_compares_to_zero_profiles() {
        let set = PointSet::new(1, vec![vec![0.0], vec![1.0], vec![2.5]]).unwrap();
        let w = Modulus::power(0.5).unwrap();
        let pairs = PairSampler::new(
            Strategy::Annulus {
                lo: vec![-2.0],
                hi: vec![4.0],
                deltas: vec![0.1, 1.0, 4.0],
                count: 30,
            },
            3,
        )
        .sample(1)
        .unwrap();
        for c in [0.0, 2.5] {
            let jet = scalar_jet(&[c, c, c]);
            assert_eq!(infconv_extend(&set, &jet, &w, 0.0, &[7.0]).unwrap(), c);
            let t = compare_operators(&set, &jet, &w, None, &pairs, &[0.1, 1.0]).unwrap();
            assert_eq!(t.rows.len(), 2 * 4);
            assert!(t.rows.iter().all(|r| r.whitney == 0.0 && r.infconv == 0.0), "{t:?}");
        }
    }
}
