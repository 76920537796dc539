//! The four universal methods: GGM (nonconvex, over `Q`), PGM and DGM (simple), UFGM (fast).
//!
//! Every solver returns a [`RunReport`] and a [`Trace`] with one row per completed
//! iteration. Row `k` always stores the curvature estimate *after* the update rule
//! (`L_{k+1}` or `M_{k+1}`), so the doubling history can be replayed from the file.
//!
//! | column          | GGM            | PGM            | DGM            | UFGM               |
//! |-----------------|----------------|----------------|----------------|--------------------|
//! | `f`, `f_tilde`  | at `x_{k+1}`   | at `x_{k+1}`   | at `y_k`       | at `y_{k+1}`       |
//! | `grad_map_norm` | `‖g^{i_k}_k‖*` |                |                |                    |
//! | `tau`, `a`, `A` |                |                |                | `τ_k, a_{k+1}, A_{k+1}` |
//! | `phi_star`      |                |                | `φ*_{k+1}`     | `φ*_{k+1}`         |
//! | `step_norm`     | `‖x_{k+1}-x_k‖`| `‖x_{k+1}-x_k‖`| `‖y_k-x_{k+1}‖`| `‖y_{k+1}-x_{k+1}‖`|

mod dgm;
mod ggm;
mod pgm;
mod trace;
mod ufgm;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::mappings::solve_composite_prox;
use crate::problems::{CompositeProblem, Evaluation};

pub use dgm::dgm_solve;
pub use ggm::ggm_solve;
pub use pgm::pgm_solve;
pub use trace::{IterationRecord, Trace, TRACE_HEADER};
pub use ufgm::{ufgm_solve, ufgm_step_coefficient};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ggm,
    Pgm,
    Dgm,
    Ufgm,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Ggm, Method::Pgm, Method::Dgm, Method::Ufgm];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ggm => "ggm",
            Method::Pgm => "pgm",
            Method::Dgm => "dgm",
            Method::Ufgm => "ufgm",
        }
    }

    pub fn solve(self, problem: &CompositeProblem, cfg: &SolverConfig) -> Result<(RunReport, Trace)> {
        match self {
            Method::Ggm => ggm_solve(problem, cfg),
            Method::Pgm => pgm_solve(problem, cfg),
            Method::Dgm => dgm_solve(problem, cfg),
            Method::Ufgm => ufgm_solve(problem, cfg),
        }
    }

    /// Whether the update rule is `2^{i_k - 1}` (halving) rather than `2^{i_k}`.
    pub fn halves(self, aggressive_l: bool) -> bool {
        match self {
            Method::Ufgm => aggressive_l,
            _ => true,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ggm" => Ok(Method::Ggm),
            "pgm" => Ok(Method::Pgm),
            "dgm" => Ok(Method::Dgm),
            "ufgm" => Ok(Method::Ufgm),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub eps: f64,
    /// Gradient-mapping target for GGM.
    pub delta: Option<f64>,
    /// Initial `L₀` (or `M₀` for GGM).
    pub l0: f64,
    pub max_iters: usize,
    pub max_doublings_per_iter: u32,
    /// UFGM only: use `L_{k+1} = 2^{i_k-1} L_k` instead of `2^{i_k} L_k`.
    pub aggressive_l: bool,
    /// DGM only: run the line search at the point where the new model term is linearized.
    pub proof_indexing: bool,
    /// Override for `D = β(x₀, x*)` used by the stopping rules.
    pub d_hint: Option<f64>,
    /// Relative tolerance of the online certificates.
    pub cert_rel_tol: f64,
    /// Abort with [`Error::Invariant`] when an online certificate fails.
    pub abort_on_violation: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps: 1e-3,
            delta: None,
            l0: 1e-3,
            max_iters: 100_000,
            max_doublings_per_iter: 60,
            aggressive_l: false,
            proof_indexing: false,
            d_hint: None,
            cert_rel_tol: 1e-9,
            abort_on_violation: true,
        }
    }
}

impl SolverConfig {
    pub fn with_eps(eps: f64) -> Self {
        SolverConfig {
            eps,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive(self.eps, "eps")?;
        positive(self.l0, "L0")?;
        positive(self.cert_rel_tol, "certificate tolerance")?;
        if let Some(d) = self.delta {
            positive(d, "delta")?;
        }
        if let Some(d) = self.d_hint {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::Config(format!("D must be non-negative, got {d}")));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if self.max_doublings_per_iter == 0 {
            return Err(Error::Config("max_doublings_per_iter must be at least 1".into()));
        }
        Ok(())
    }

    /// `D` for the stopping rule: the hint, else `β(x₀, x*)` from the known optimum.
    pub fn distance(&self, problem: &CompositeProblem) -> Option<f64> {
        self.d_hint.or_else(|| problem.initial_distance())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    /// The `D`-based rule guarantees accuracy `ε`.
    AccuracyReached,
    /// A computable duality-gap bound fell below `ε`.
    GapCertified,
    /// GGM: `‖g‖* ≤ δ`.
    GradientNormReached,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: Method,
    pub x: Vec<f64>,
    /// Smallest `f̃` over the points the method reports (`f` for GGM).
    pub best_f_tilde: f64,
    /// The quantity the method's guarantee is about: the weighted average `f̃*_k` for
    /// PGM/DGM, `f̃(y_{k+1})` for UFGM, `f(x̄)` for GGM.
    pub certified_value: f64,
    /// Upper bound on `certified_value - f̃*` available at termination, if any.
    pub gap_bound: Option<f64>,
    pub iterations: usize,
    /// Iteration index compared with the sufficient-iteration bounds.
    pub achieved_k: usize,
    pub oracle_calls: usize,
    /// `Σ i_k`
    pub doublings: u64,
    pub l0: f64,
    pub l_final: f64,
    pub termination: TerminationReason,
}

/// Oracle wrapper that counts calls.
pub(crate) struct Oracle<'a> {
    pub problem: &'a CompositeProblem,
    pub calls: usize,
}

impl<'a> Oracle<'a> {
    pub fn new(problem: &'a CompositeProblem) -> Self {
        Oracle { problem, calls: 0 }
    }

    pub fn eval(&mut self, x: &[f64]) -> Result<Evaluation> {
        self.calls += 1;
        let e = self.problem.eval(x)?;
        if !e.f.is_finite() || !linalg::all_finite(&e.grad) {
            return Err(Error::Oracle { point: x.to_vec() });
        }
        Ok(e)
    }
}

/// `φ(x) = β_d(x₀, x) + offset + ⟨lin, x⟩ + psi_weight·Ψ(x)`, accumulated from
/// weighted linearizations `w [f(xᵢ) + ⟨∇f(xᵢ), x - xᵢ⟩ + Ψ(x)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateFunction {
    pub lin: Vec<f64>,
    pub offset: f64,
    pub psi_weight: f64,
}

impl EstimateFunction {
    pub fn new(dim: usize) -> Self {
        EstimateFunction {
            lin: vec![0.0; dim],
            offset: 0.0,
            psi_weight: 0.0,
        }
    }

    pub fn add(&mut self, weight: f64, x: &[f64], f: f64, grad: &[f64]) {
        linalg::axpy(&mut self.lin, weight, grad);
        self.offset += weight * (f - linalg::dot(grad, x));
        self.psi_weight += weight;
    }

    pub fn with_term(&self, weight: f64, x: &[f64], f: f64, grad: &[f64]) -> Self {
        let mut next = self.clone();
        next.add(weight, x, f, grad);
        next
    }

    pub fn value(&self, problem: &CompositeProblem, x: &[f64]) -> f64 {
        let psi = if self.psi_weight > 0.0 {
            self.psi_weight * problem.psi.value(x, problem.metric())
        } else {
            0.0
        };
        problem.geometry.d(x) + self.offset + linalg::dot(&self.lin, x) + psi
    }

    /// `(argmin φ, min φ)`
    pub fn minimize(&self, problem: &CompositeProblem) -> Result<(Vec<f64>, f64)> {
        let v = solve_composite_prox(
            &problem.geometry,
            &problem.psi,
            problem.x0(),
            &self.lin,
            1.0,
            self.psi_weight,
        )?;
        let phi = self.value(problem, &v);
        Ok((v, phi))
    }

    /// `min_y (offset + ⟨lin, y⟩)/w + Ψ(y)`: a lower bound on `f̃*` for convex `f`
    /// (possibly `-∞` when `dom Ψ` is unbounded).
    pub fn model_lower_bound(&self, problem: &CompositeProblem) -> f64 {
        let w = self.psi_weight;
        if !(w > 0.0) {
            return f64::NEG_INFINITY;
        }
        let g = linalg::scale(&self.lin, 1.0 / w);
        self.offset / w + problem.psi.linear_minimum(&g, problem.metric())
    }
}

/// `2^i · base`
pub(crate) fn pow2(i: u32, base: f64) -> f64 {
    base * 2f64.powi(i as i32)
}

pub(crate) fn line_search_failure(iteration: usize, last_i: u32, cfg: &SolverConfig) -> Error {
    Error::LineSearch {
        iteration,
        last_i,
        max_doublings: cfg.max_doublings_per_iter,
    }
}

/// `lhs ≤ rhs + tol·(1 + |rhs|)`
pub(crate) fn within(lhs: f64, rhs: f64, tol: f64) -> bool {
    lhs <= rhs + tol * (1.0 + rhs.abs())
}

pub(crate) fn check_invariant(
    cfg: &SolverConfig,
    name: &str,
    iteration: usize,
    lhs: f64,
    rhs: f64,
) -> Result<()> {
    if cfg.abort_on_violation && !within(lhs, rhs, cfg.cert_rel_tol) {
        return Err(Error::Invariant {
            name: name.to_string(),
            iteration,
            lhs,
            rhs,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::builtin_problem;
    use serde_json::json;

    #[test]
    fn method_parsing() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("sgd".parse::<Method>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        assert!(SolverConfig::with_eps(0.0).validate().is_err());
        let cfg = SolverConfig {
            delta: Some(-1.0),
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn estimate_function_minimum_matches_prox() {
        let p = builtin_problem("l1_quadratic", 4, json!({"L": 2.0, "lambda": 0.3}).as_object().unwrap()).unwrap();
        let mut phi = EstimateFunction::new(4);
        let x = [0.5, -0.5, 1.0, 0.0];
        let e = p.eval(&x).unwrap();
        phi.add(0.7, &x, e.f, &e.grad);
        let (v, best) = phi.minimize(&p).unwrap();
        // the minimizer beats random perturbations
        for s in [-1e-3, 1e-3] {
            for i in 0..4 {
                let mut y = v.clone();
                y[i] += s;
                assert!(phi.value(&p, &y) >= best - 1e-12);
            }
        }
        assert!(phi.model_lower_bound(&p).is_finite() || phi.model_lower_bound(&p) == f64::NEG_INFINITY);
    }
}
