//! JSON problem descriptions.
//!
//! ```json
//! {"problem": "l1_quadratic", "dim": 5, "params": {"L": 2.0, "lambda": 0.1},
//!  "psi": {"type": "l1", "lambda": 0.1}, "q": null, "x0": null}
//! ```
//!
//! `geometry` optionally selects the norm and prox function:
//! `{"prox": "entropy_on_simplex"}` or `{"metric": [1.0, 4.0]}` (diagonal) or
//! `{"metric": [[2.0, 0.5], [0.5, 1.0]]}` (dense).

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::catalog::{build, Overrides, Params};
use super::{CompositeProblem, ProxKind, PsiSpec, QSet};
use crate::error::{Error, Result};
use crate::linalg::Metric;

/// A bound given either as one number for every coordinate or as a full vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Bound {
    fn expand(&self, dim: usize, what: &str) -> Result<Vec<f64>> {
        match self {
            Bound::Scalar(v) => Ok(vec![*v; dim]),
            Bound::Vector(v) if v.len() == dim => Ok(v.clone()),
            Bound::Vector(v) => Err(Error::Config(format!("{what} has {} entries, expected {dim}", v.len()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiSpecFile {
    Zero,
    L1 {
        #[serde(alias = "λ")]
        lambda: f64,
    },
    #[serde(alias = "indicator_box")]
    Box { lo: Bound, hi: Bound },
    #[serde(alias = "indicator_ball")]
    Ball {
        #[serde(default)]
        center: Option<Bound>,
        radius: f64,
    },
    #[serde(alias = "indicator_simplex")]
    Simplex,
}

impl PsiSpecFile {
    pub fn resolve(&self, dim: usize) -> Result<PsiSpec> {
        let psi = match self {
            PsiSpecFile::Zero => PsiSpec::Zero,
            PsiSpecFile::L1 { lambda } => PsiSpec::L1 { lambda: *lambda },
            PsiSpecFile::Box { lo, hi } => PsiSpec::IndicatorBox {
                lo: lo.expand(dim, "box lower bound")?,
                hi: hi.expand(dim, "box upper bound")?,
            },
            PsiSpecFile::Ball { center, radius } => PsiSpec::IndicatorBall {
                center: match center {
                    Some(c) => c.expand(dim, "ball center")?,
                    None => vec![0.0; dim],
                },
                radius: *radius,
            },
            PsiSpecFile::Simplex => PsiSpec::IndicatorSimplex,
        };
        psi.validate(dim)?;
        Ok(psi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum QSpecFile {
    All,
    Box { lo: Bound, hi: Bound },
    Ball {
        #[serde(default)]
        center: Option<Bound>,
        radius: f64,
    },
    Simplex,
}

impl QSpecFile {
    pub fn resolve(&self, dim: usize) -> Result<QSet> {
        let q = match self {
            QSpecFile::All => QSet::All,
            QSpecFile::Box { lo, hi } => QSet::Box {
                lo: lo.expand(dim, "Q lower bound")?,
                hi: hi.expand(dim, "Q upper bound")?,
            },
            QSpecFile::Ball { center, radius } => QSet::Ball {
                center: match center {
                    Some(c) => c.expand(dim, "Q center")?,
                    None => vec![0.0; dim],
                },
                radius: *radius,
            },
            QSpecFile::Simplex => QSet::Simplex,
        };
        q.as_psi().validate(dim)?;
        Ok(q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    #[serde(default)]
    pub prox: Option<ProxKind>,
    /// Diagonal weights (`[b₁, …, bₙ]`) or a dense symmetric matrix (`[[…], …]`).
    #[serde(default)]
    pub metric: Option<Value>,
}

impl GeometrySpec {
    fn metric(&self, dim: usize) -> Result<Option<Metric>> {
        let Some(v) = &self.metric else { return Ok(None) };
        let bad = || Error::Config("metric must be a list of weights or a square matrix".into());
        let rows = v.as_array().ok_or_else(bad)?;
        if rows.iter().all(|r| r.is_number()) {
            let w: Vec<f64> = rows.iter().map(|r| r.as_f64().unwrap()).collect();
            if w.len() != dim {
                return Err(Error::Config(format!("metric has {} weights, expected {dim}", w.len())));
            }
            return Metric::diagonal(w).map(Some);
        }
        let matrix: Vec<Vec<f64>> = serde_json::from_value(v.clone()).map_err(|_| bad())?;
        if matrix.len() != dim {
            return Err(Error::Config(format!("metric has {} rows, expected {dim}", matrix.len())));
        }
        Metric::dense(&matrix).map(Some)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub problem: String,
    pub dim: usize,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub psi: Option<PsiSpecFile>,
    #[serde(default)]
    pub q: Option<QSpecFile>,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub geometry: Option<GeometrySpec>,
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("problem spec: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn build(&self) -> Result<CompositeProblem> {
        let dim = self.dim;
        let ov = Overrides {
            psi: self.psi.as_ref().map(|p| p.resolve(dim)).transpose()?,
            q: self.q.as_ref().map(|q| q.resolve(dim)).transpose()?,
            x0: self.x0.clone(),
            metric: match &self.geometry {
                Some(g) => g.metric(dim)?,
                None => None,
            },
            prox: self.geometry.as_ref().and_then(|g| g.prox),
        };
        build(&self.problem, dim, &self.params, ov)
    }
}
