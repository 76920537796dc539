//! Composite problems `min f(x) + Ψ(x)`: smooth oracle, simple part and prox geometry.

mod catalog;
mod functions;
mod spec;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::curvature::CurvatureModel;
use crate::error::{Error, Result};
use crate::linalg::{self, Metric};

pub use catalog::{builtin_problem, Params, CATALOG};
pub use functions::{Cosine, Linear, PowerSum, SeparableQuadratic, SmoothFunction, SumFunction};
pub use spec::{GeometrySpec, ProblemSpec, PsiSpecFile, QSpecFile};

/// Feasibility tolerance used when testing membership of a point in `dom Ψ` or `Q`.
pub const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxKind {
    /// `d(x) = ½‖x - x₀‖²`
    EuclideanHalfSquare,
    /// `d(x) = Σ xᵢ ln(xᵢ / x₀ᵢ)` on the standard simplex.
    EntropyOnSimplex,
}

/// Norm and prox function `d` with `d(x₀) = 0`, 1-strongly convex in `‖·‖`.
#[derive(Debug, Clone)]
pub struct ProxGeometry {
    pub metric: Metric,
    pub prox: ProxKind,
    pub center: Vec<f64>,
}

impl ProxGeometry {
    pub fn euclidean(center: Vec<f64>) -> Self {
        ProxGeometry {
            metric: Metric::Identity,
            prox: ProxKind::EuclideanHalfSquare,
            center,
        }
    }

    /// Entropy prox centered at `center`, which must lie in the relative interior of the simplex.
    pub fn entropy(center: Vec<f64>) -> Result<Self> {
        let sum: f64 = center.iter().sum();
        if center.iter().any(|c| !(*c > 0.0)) || (sum - 1.0).abs() > FEAS_TOL {
            return Err(Error::Config("entropy prox center must be a positive point of the simplex".into()));
        }
        Ok(ProxGeometry {
            metric: Metric::Identity,
            prox: ProxKind::EntropyOnSimplex,
            center,
        })
    }

    pub fn d(&self, x: &[f64]) -> f64 {
        self.bregman(&self.center, x)
    }

    pub fn grad_d(&self, x: &[f64]) -> Vec<f64> {
        match self.prox {
            ProxKind::EuclideanHalfSquare => self.metric.apply(&linalg::sub(x, &self.center)),
            ProxKind::EntropyOnSimplex => x
                .iter()
                .zip(&self.center)
                .map(|(xi, ci)| (xi / ci).ln() + 1.0)
                .collect(),
        }
    }

    /// `β_d(z, y) = d(y) - d(z) - ⟨∇d(z), y - z⟩`
    pub fn bregman(&self, z: &[f64], y: &[f64]) -> f64 {
        match self.prox {
            ProxKind::EuclideanHalfSquare => 0.5 * self.metric.norm_sq(&linalg::sub(y, z)),
            ProxKind::EntropyOnSimplex => y
                .iter()
                .zip(z)
                .map(|(&yi, &zi)| {
                    let lg = if yi > 0.0 { yi * (yi / zi).ln() } else { 0.0 };
                    lg - yi + zi
                })
                .sum(),
        }
    }
}

/// The simple convex part `Ψ`.
#[derive(Debug, Clone, PartialEq)]
pub enum PsiSpec {
    Zero,
    L1 { lambda: f64 },
    IndicatorBox { lo: Vec<f64>, hi: Vec<f64> },
    /// Ball in the primal norm `‖·‖`.
    IndicatorBall { center: Vec<f64>, radius: f64 },
    IndicatorSimplex,
}

impl PsiSpec {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            PsiSpec::L1 { lambda } if !(*lambda >= 0.0 && lambda.is_finite()) => {
                Err(Error::Config(format!("l1 weight must be non-negative, got {lambda}")))
            }
            PsiSpec::IndicatorBox { lo, hi } => {
                if lo.len() != dim || hi.len() != dim {
                    return Err(Error::Config("box bounds have the wrong dimension".into()));
                }
                if lo.iter().zip(hi).any(|(l, h)| !(l <= h)) {
                    return Err(Error::Config("box needs lo ≤ hi componentwise".into()));
                }
                Ok(())
            }
            PsiSpec::IndicatorBall { center, radius } => {
                if center.len() != dim {
                    return Err(Error::Config("ball center has the wrong dimension".into()));
                }
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::Config("ball radius must be positive".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn is_indicator(&self) -> bool {
        matches!(
            self,
            PsiSpec::IndicatorBox { .. } | PsiSpec::IndicatorBall { .. } | PsiSpec::IndicatorSimplex
        )
    }

    pub fn contains(&self, x: &[f64], metric: &Metric) -> bool {
        match self {
            PsiSpec::Zero | PsiSpec::L1 { .. } => linalg::all_finite(x),
            PsiSpec::IndicatorBox { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| *v >= l - FEAS_TOL && *v <= h + FEAS_TOL),
            PsiSpec::IndicatorBall { center, radius } => {
                metric.dist(x, center) <= radius * (1.0 + FEAS_TOL) + FEAS_TOL
            }
            PsiSpec::IndicatorSimplex => {
                x.iter().all(|v| *v >= -FEAS_TOL) && (x.iter().sum::<f64>() - 1.0).abs() <= FEAS_TOL * (1.0 + x.len() as f64)
            }
        }
    }

    /// `Ψ(x)`, `+∞` outside the domain.
    pub fn value(&self, x: &[f64], metric: &Metric) -> f64 {
        match self {
            PsiSpec::Zero => 0.0,
            PsiSpec::L1 { lambda } => lambda * linalg::norm1(x),
            _ if self.contains(x, metric) => 0.0,
            _ => f64::INFINITY,
        }
    }

    /// `inf_y ⟨g, y⟩ + Ψ(y)`, possibly `-∞`.
    pub fn linear_minimum(&self, g: &[f64], metric: &Metric) -> f64 {
        match self {
            PsiSpec::Zero => {
                if g.iter().all(|v| *v == 0.0) {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            PsiSpec::L1 { lambda } => {
                if linalg::norm_inf(g) <= *lambda {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            PsiSpec::IndicatorBox { lo, hi } => g
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(gi, (l, h))| (gi * l).min(gi * h))
                .sum(),
            PsiSpec::IndicatorBall { center, radius } => linalg::dot(g, center) - radius * metric.dual_norm(g),
            PsiSpec::IndicatorSimplex => g.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.is_indicator()
    }
}

impl fmt::Display for PsiSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsiSpec::Zero => write!(f, "zero"),
            PsiSpec::L1 { lambda } => write!(f, "l1({lambda})"),
            PsiSpec::IndicatorBox { .. } => write!(f, "box"),
            PsiSpec::IndicatorBall { radius, .. } => write!(f, "ball({radius})"),
            PsiSpec::IndicatorSimplex => write!(f, "simplex"),
        }
    }
}

/// Feasible set for the nonconvex gradient method; projections use the primal norm.
#[derive(Debug, Clone, PartialEq)]
pub enum QSet {
    All,
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Simplex,
}

impl QSet {
    pub fn as_psi(&self) -> PsiSpec {
        match self {
            QSet::All => PsiSpec::Zero,
            QSet::Box { lo, hi } => PsiSpec::IndicatorBox {
                lo: lo.clone(),
                hi: hi.clone(),
            },
            QSet::Ball { center, radius } => PsiSpec::IndicatorBall {
                center: center.clone(),
                radius: *radius,
            },
            QSet::Simplex => PsiSpec::IndicatorSimplex,
        }
    }

    pub fn contains(&self, x: &[f64], metric: &Metric) -> bool {
        self.as_psi().contains(x, metric)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnownOptimum {
    pub x: Vec<f64>,
    pub f_tilde: f64,
}

/// One oracle answer together with the composite value.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub f: f64,
    pub grad: Vec<f64>,
    pub psi: f64,
    pub f_tilde: f64,
}

#[derive(Clone)]
pub struct CompositeProblem {
    pub name: String,
    pub dim: usize,
    pub f: Arc<dyn SmoothFunction>,
    pub psi: PsiSpec,
    pub geometry: ProxGeometry,
    pub q_set: QSet,
    pub known_model: Option<CurvatureModel>,
    /// Minimizer of `f + Ψ`.
    pub known_optimum: Option<KnownOptimum>,
    /// Minimizer of `f` over `Q`.
    pub known_q_optimum: Option<KnownOptimum>,
    /// Box used when sampling pairs for the empirical curvature estimate.
    pub sample_box: (Vec<f64>, Vec<f64>),
    pub convex: bool,
}

impl fmt::Debug for CompositeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompositeProblem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("psi", &self.psi)
            .field("q_set", &self.q_set)
            .field("known_model", &self.known_model.as_ref().map(|m| m.to_string()))
            .finish()
    }
}

impl CompositeProblem {
    /// Starting point; always the center of the prox function.
    pub fn x0(&self) -> &[f64] {
        &self.geometry.center
    }

    pub fn metric(&self) -> &Metric {
        &self.geometry.metric
    }

    /// `(f, ∇f, Ψ, f̃)` at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<Evaluation> {
        if x.len() != self.dim {
            return Err(Error::Domain(format!("point has dimension {}, expected {}", x.len(), self.dim)));
        }
        let (f, grad) = self.f.eval(x);
        let psi = self.psi.value(x, self.metric());
        if psi.is_finite() && (!f.is_finite() || !linalg::all_finite(&grad)) {
            return Err(Error::Oracle { point: x.to_vec() });
        }
        Ok(Evaluation {
            f,
            grad,
            psi,
            f_tilde: f + psi,
        })
    }

    pub fn f_tilde(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval(x)?.f_tilde)
    }

    /// `β_f(x, y) = f(y) - f(x) - ⟨∇f(x), y - x⟩`; sign-indefinite for nonconvex `f`.
    pub fn bregman_of_f(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let (fx, gx) = self.f.eval(x);
        let (fy, _) = self.f.eval(y);
        if !fx.is_finite() || !linalg::all_finite(&gx) {
            return Err(Error::Oracle { point: x.to_vec() });
        }
        if !fy.is_finite() {
            return Err(Error::Oracle { point: y.to_vec() });
        }
        Ok(fy - fx - linalg::dot(&gx, &linalg::sub(y, x)))
    }

    /// `β_d(x₀, x*)` when the optimum is known.
    pub fn initial_distance(&self) -> Option<f64> {
        self.known_optimum.as_ref().map(|o| self.geometry.bregman(self.x0(), &o.x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn params(v: serde_json::Value) -> Params {
        v.as_object().unwrap().clone()
    }

    #[test]
    fn eval_examples() {
        let p = builtin_problem("quadratic", 2, &params(json!({"L": 1.0}))).unwrap();
        let e = p.eval(&[3.0, 4.0]).unwrap();
        assert_eq!((e.f, e.grad.clone(), e.f_tilde), (12.5, vec![3.0, 4.0], 12.5));

        let psi = PsiSpec::L1 { lambda: 2.0 };
        assert_eq!(psi.value(&[1.0, -1.0], &Metric::Identity), 4.0);

        let p = builtin_problem("example_1_1", 1, &Params::new()).unwrap();
        let e = p.eval(&[1.0]).unwrap();
        assert!((e.f - 7.0 / 6.0).abs() < 1e-15);
        assert!((e.grad[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn bregman_of_f_examples() {
        let p = builtin_problem("quadratic", 1, &params(json!({"L": 1.0}))).unwrap();
        assert_eq!(p.bregman_of_f(&[0.0], &[2.0]).unwrap(), 2.0);
        assert_eq!(p.bregman_of_f(&[0.7], &[0.7]).unwrap(), 0.0);
        let e = builtin_problem("example_1_1", 1, &Params::new()).unwrap();
        assert!((e.bregman_of_f(&[1.0], &[0.0]).unwrap() - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn indicator_value_outside_is_infinite() {
        let b = PsiSpec::IndicatorBox {
            lo: vec![0.0],
            hi: vec![1.0],
        };
        assert_eq!(b.value(&[2.0], &Metric::Identity), f64::INFINITY);
        assert_eq!(b.value(&[0.5], &Metric::Identity), 0.0);
        assert_eq!(PsiSpec::IndicatorSimplex.value(&[0.5, 0.6], &Metric::Identity), f64::INFINITY);
    }

    #[test]
    fn linear_minimum_matches_vertices() {
        let g = [1.0, -2.0, 0.5];
        assert_eq!(PsiSpec::IndicatorSimplex.linear_minimum(&g, &Metric::Identity), -2.0);
        let b = PsiSpec::IndicatorBox {
            lo: vec![-1.0; 3],
            hi: vec![1.0; 3],
        };
        assert_eq!(b.linear_minimum(&g, &Metric::Identity), -3.5);
        assert_eq!(PsiSpec::L1 { lambda: 2.0 }.linear_minimum(&g, &Metric::Identity), 0.0);
        assert_eq!(PsiSpec::Zero.linear_minimum(&g, &Metric::Identity), f64::NEG_INFINITY);
    }

    #[test]
    fn entropy_bregman_is_kl() {
        let geo = ProxGeometry::entropy(vec![0.25; 4]).unwrap();
        let y = [0.1, 0.2, 0.3, 0.4];
        let kl: f64 = y.iter().map(|v| v * (v / 0.25f64).ln()).sum();
        assert!((geo.d(&y) - kl).abs() < 1e-15);
        assert!(ProxGeometry::entropy(vec![0.5, 0.6]).is_err());
    }
}
