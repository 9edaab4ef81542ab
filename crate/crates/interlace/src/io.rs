//! JSON interchange: ensemble files and run reports.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::engine::FiniteDistribution;
use crate::error::{Error, Result};
use crate::linalg::{HermitianMatrix, MatrixEnsemble};

pub const SCHEMA_VERSION: &str = "1";
const HERMITIAN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

/// Matrices are row-major `dim x dim` arrays of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleFile {
    pub schema_version: String,
    pub dim: usize,
    pub matrices: Vec<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distributions: Option<Vec<DistributionSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proportions: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_override: Option<f64>,
}

fn invalid(invariant: &str, detail: String) -> Error {
    Error::Validation { invariant: invariant.to_string(), detail }
}

impl EnsembleFile {
    pub fn from_ensemble(e: &MatrixEnsemble) -> Self {
        let matrices = e
            .matrices()
            .iter()
            .map(|a| a.entries().iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect())
            .collect();
        EnsembleFile {
            schema_version: SCHEMA_VERSION.to_string(),
            dim: e.dim(),
            matrices,
            weights: None,
            distributions: None,
            proportions: None,
            epsilon_override: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: EnsembleFile = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        file.validate()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("ensemble file serializes");
        s.push('\n');
        s
    }

    /// Shape, finiteness, hermiticity and section-length checks.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid("SchemaVersion", format!("unsupported schema_version {:?}", self.schema_version)));
        }
        if self.dim == 0 {
            return Err(invalid("EmptyMatrix", "dim must be positive".into()));
        }
        if self.matrices.is_empty() {
            return Err(invalid("EmptyEnsemble", "no matrices".into()));
        }
        for (i, m) in self.matrices.iter().enumerate() {
            if m.len() != self.dim {
                return Err(invalid("DimensionMismatch", format!("matrices[{i}] has {} rows, expected {}", m.len(), self.dim)));
            }
            for (r, row) in m.iter().enumerate() {
                if row.len() != self.dim {
                    return Err(invalid(
                        "DimensionMismatch",
                        format!("matrices[{i}] row {r} has {} entries, expected {}", row.len(), self.dim),
                    ));
                }
                if let Some(c) = row.iter().position(|z| !z[0].is_finite() || !z[1].is_finite()) {
                    return Err(invalid("Finite", format!("matrices[{i}][{r}][{c}] is not finite")));
                }
            }
        }
        let m = self.matrices.len();
        let lengths = [
            ("weights", self.weights.as_ref().map(|w| w.len())),
            ("distributions", self.distributions.as_ref().map(|d| d.len())),
        ];
        for (name, len) in lengths {
            if let Some(len) = len {
                if len != m {
                    return Err(invalid("LengthMismatch", format!("{name} has {len} entries for {m} matrices")));
                }
            }
        }
        self.ensemble().map(|_| ())
    }

    pub fn ensemble(&self) -> Result<MatrixEnsemble> {
        let mats = self
            .matrices
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let entries: Vec<Vec<Complex64>> =
                    m.iter().map(|row| row.iter().map(|z| Complex64::new(z[0], z[1])).collect()).collect();
                HermitianMatrix::make_hermitian(&entries, HERMITIAN_TOL).map_err(|e| match e {
                    Error::NotHermitian { deviation, tolerance } => invalid(
                        "NotHermitian",
                        format!("matrices[{i}]: max |M - M*| = {deviation:.3e} exceeds {tolerance:.1e}"),
                    ),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        MatrixEnsemble::new(mats)
    }

    pub fn dists(&self) -> Result<Option<Vec<FiniteDistribution>>> {
        self.distributions
            .as_ref()
            .map(|ds| {
                ds.iter()
                    .enumerate()
                    .map(|(i, d)| FiniteDistribution::validated(d.values.clone(), d.probs.clone(), i))
                    .collect()
            })
            .transpose()
    }

    pub fn with_distributions(mut self, dists: &[FiniteDistribution]) -> Self {
        self.distributions = Some(
            dists.iter().map(|d| DistributionSpec { values: d.values().to_vec(), probs: d.probs().to_vec() }).collect(),
        );
        self
    }
}

pub fn parse_ensemble(path: &Path) -> Result<EnsembleFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    EnsembleFile::from_json(&text)
}

pub fn write_ensemble(path: &Path, file: &EnsembleFile) -> Result<()> {
    std::fs::write(path, file.to_json()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceStats {
    pub d: usize,
    pub m: usize,
    pub epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

/// One asserted inequality `achieved <= bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub achieved: f64,
    pub bound: f64,
    pub holds: bool,
}

impl BoundCheck {
    pub fn new(name: impl Into<String>, achieved: f64, bound: f64, slack: f64) -> Self {
        BoundCheck { name: name.into(), achieved, bound, holds: achieved <= bound + slack }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<InstanceStats>,
    pub result: serde_json::Value,
    pub checks: Vec<BoundCheck>,
    pub maxroot_trace: Vec<f64>,
    pub wall_time_ms: f64,
}

impl RunReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let f = EnsembleFile::from_json(r#"{"schema_version":"1","dim":1,"matrices":[[[[2,0]]]]}"#).unwrap();
        let e = f.ensemble().unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e.get(0), &HermitianMatrix::diag(&[2.0]));
    }

    #[test]
    fn rejects_bad_files() {
        let mismatched = r#"{"schema_version":"1","dim":2,"matrices":[[[[1,0],[0,0]],[[0,0]]]]}"#;
        assert!(matches!(EnsembleFile::from_json(mismatched), Err(Error::Validation { ref invariant, .. }) if invariant == "DimensionMismatch"));
        let skew = r#"{"schema_version":"1","dim":2,"matrices":[[[[1,0],[1,0]],[[0,0],[1,0]]]]}"#;
        assert!(matches!(EnsembleFile::from_json(skew), Err(Error::Validation { ref invariant, .. }) if invariant == "NotHermitian"));
        let broken = "{\"schema_version\":\"1\",\n\"dim\":";
        match EnsembleFile::from_json(broken) {
            Err(Error::Parse(msg)) => assert!(msg.starts_with("line 2"), "{msg}"),
            other => panic!("{other:?}"),
        }
        let lengths = r#"{"schema_version":"1","dim":1,"matrices":[[[[1,0]]]],"weights":[0.5,0.5]}"#;
        assert!(matches!(EnsembleFile::from_json(lengths), Err(Error::Validation { .. })));
        let unknown = r#"{"schema_version":"1","dim":1,"matrices":[[[[1,0]]]],"extra":1}"#;
        assert!(matches!(EnsembleFile::from_json(unknown), Err(Error::Parse(_))));
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let e = MatrixEnsemble::new(vec![
            HermitianMatrix::from_real(&[vec![0.1, 0.2], vec![0.2, 0.7]]).unwrap(),
            HermitianMatrix::diag(&[1.0 / 3.0, 0.0]),
        ])
        .unwrap();
        let mut f = EnsembleFile::from_ensemble(&e).with_distributions(&[
            FiniteDistribution::fair_signs(),
            FiniteDistribution::bernoulli(0.3).unwrap(),
        ]);
        f.proportions = Some(vec![0.25, 0.75]);
        let text = f.to_json();
        let back = EnsembleFile::from_json(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_json(), text);
    }
}
