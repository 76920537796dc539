//! Replays a trace against every inequality the methods promise.
//!
//! Violation names:
//!
//! | name                   | method     | inequality                                            |
//! |------------------------|------------|-------------------------------------------------------|
//! | `l_update`             | all        | `L_{k+1} = 2^{i_k} L_k` (halved for GGM/PGM/DGM and the aggressive UFGM rule) |
//! | `doubling_count`       | all        | `Σ (i_k - h) = log₂(L_final / L₀)`, `h = 1` for halving rules |
//! | `descent`              | GGM        | `f(x_{k+1}) ≤ f(x_k) - 2^{i_k-2} M_k ‖x_{k+1} - x_k‖²` |
//! | `stop_criterion`       | GGM        | `‖g‖* ≤ δ` on the stopping row                        |
//! | `m_bound`              | GGM        | `M_k ≤ γ̂_f(2Δ₀/N)`                                     |
//! | `l_bound`              | PGM, DGM   | `L_{k+1} ≤ γ_f(ε)`                                     |
//! | `l_bound`              | UFGM       | `L_{k+1} ≤ 2γ_f(ε τ_k)`                                |
//! | `primal_rate`          | PGM        | `f̃*_k - f̃* ≤ ε/2 + 2D/S_k`                            |
//! | `dual_rate`            | DGM        | `Σ f̃(y_i)/(2L_{i+1}) ≤ φ*_{k+1} + S_k ε/4`            |
//! | `l_tau_identity`       | UFGM       | `1/(A_{k+1} τ_k²) = L_{k+1}` (`2L_{k+1}` aggressive)   |
//! | `a_sum`                | UFGM       | `A_{k+1} = A_k + a_{k+1}`                              |
//! | `tau_monotone`         | UFGM       | `τ_k ≤ τ_{k-1}`                                        |
//! | `tau_rate`             | UFGM       | `τ_k ≤ 2/(k+1)`                                        |
//! | `estimate_certificate` | UFGM       | `A_{k+1}(f̃(y_{k+1}) - ε/2) ≤ φ*_{k+1}`                |
//! | `a_growth`             | UFGM       | `A_{k+1} ≥ (k+1)²/(4L_{k+1})`                          |
//! | `doubling_budget`      | UFGM       | `log₂(L_{k+1}/L₀) ≤ 1 + log₂ γ_f(ε³/(4μ̂²(2√D))) - log₂ L₀` while `A_{k+1} ≤ 2D/ε` |
//! | `stop_bound`           | all        | achieved iteration ≤ sufficient iterations            |
//!
//! Checks that need a curvature model, `D`, `δ` or `f*` are skipped when those are unknown.
//! The monotonicity-based UFGM checks assume the default (non-decreasing) `L` rule.

use serde::{Deserialize, Serialize};

use super::{BoundMethod, BoundReport};
use crate::curvature::CurvatureModel;
use crate::error::{Error, Result};
use crate::problems::CompositeProblem;
use crate::solvers::{Method, Trace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub name: String,
    pub iteration: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub eps: f64,
    /// Inferred from the populated columns when absent.
    pub method: Option<Method>,
    pub delta: Option<f64>,
    /// Inferred from the first row when absent (the first update is then not checked).
    pub l0: Option<f64>,
    pub aggressive_l: bool,
    /// `D = β(x₀, x*)`; taken from the problem's known optimum when absent.
    pub d: Option<f64>,
    pub rel_tol: f64,
    pub identity_tol: f64,
}

impl VerifyConfig {
    pub fn new(eps: f64) -> Self {
        VerifyConfig {
            eps,
            method: None,
            delta: None,
            l0: None,
            aggressive_l: false,
            d: None,
            rel_tol: 1e-9,
            identity_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub method: Method,
    pub bound: Option<BoundReport>,
    pub violations: Vec<Violation>,
}

/// `tau` → UFGM, `grad_map_norm` → GGM, `phi_star` → DGM, otherwise PGM.
pub fn infer_method(trace: &Trace) -> Method {
    let first = match trace.records.first() {
        Some(r) => r,
        None => return Method::Pgm,
    };
    if first.tau.is_some() {
        Method::Ufgm
    } else if first.grad_map_norm.is_some() {
        Method::Ggm
    } else if first.phi_star.is_some() {
        Method::Dgm
    } else {
        Method::Pgm
    }
}

struct Checker {
    tol: f64,
    out: Vec<Violation>,
}

impl Checker {
    fn push(&mut self, name: &str, iteration: usize, lhs: f64, rhs: f64) {
        self.out.push(Violation {
            name: name.to_string(),
            iteration,
            lhs,
            rhs,
        });
    }

    /// `lhs ≤ rhs` up to the relative tolerance.
    fn leq(&mut self, name: &str, k: usize, lhs: f64, rhs: f64) {
        if !(lhs <= rhs + self.tol * (1.0 + rhs.abs())) {
            self.push(name, k, lhs, rhs);
        }
    }

    fn equal(&mut self, name: &str, k: usize, lhs: f64, rhs: f64, tol: f64) {
        if !((lhs - rhs).abs() <= tol * rhs.abs().max(lhs.abs())) {
            self.push(name, k, lhs, rhs);
        }
    }
}

pub fn verify_trace(
    trace: &Trace,
    problem: &CompositeProblem,
    model: Option<&CurvatureModel>,
    cfg: &VerifyConfig,
) -> Result<VerifyOutcome> {
    if !(cfg.eps > 0.0) {
        return Err(Error::Config("eps must be positive".into()));
    }
    if trace.is_empty() {
        return Err(Error::Parse {
            row: 0,
            message: "trace has no rows".into(),
        });
    }
    let method = cfg.method.unwrap_or_else(|| infer_method(trace));
    check_shape(trace, method)?;
    let model = model.or(problem.known_model.as_ref());
    let halving = method.halves(cfg.aggressive_l);
    let rows = &trace.records;
    let first = &rows[0];
    let l0 = cfg.l0.unwrap_or_else(|| {
        let base = first.l / 2f64.powi(first.i_k as i32);
        if halving && !(method == Method::Ggm && rows.len() == 1 && is_ggm_stop(first, cfg.delta, true)) {
            2.0 * base
        } else {
            base
        }
    });
    let mut c = Checker {
        tol: cfg.rel_tol,
        out: Vec::new(),
    };
    let d = cfg.d.or_else(|| problem.initial_distance());

    let bound = match method {
        Method::Ggm => verify_ggm(trace, problem, model, cfg, l0, &mut c)?,
        Method::Pgm | Method::Dgm => verify_simple(trace, problem, model, cfg, method, l0, d, &mut c)?,
        Method::Ufgm => verify_fast(trace, model, cfg, l0, d, &mut c)?,
    };
    if let Some(b) = &bound {
        if let Some(a) = b.achieved_k {
            if a > b.sufficient_k {
                c.push("stop_bound", a, a as f64, b.sufficient_k as f64);
            }
        }
    }
    Ok(VerifyOutcome {
        method,
        bound,
        violations: c.out,
    })
}

fn check_shape(trace: &Trace, method: Method) -> Result<()> {
    for (j, r) in trace.records.iter().enumerate() {
        let row = j + 1;
        if r.k != j {
            return Err(Error::Parse {
                row,
                message: format!("expected k = {j}, found {}", r.k),
            });
        }
        let missing = match method {
            Method::Ufgm => [("tau", r.tau), ("a", r.a), ("A", r.a_total), ("phi_star", r.phi_star)]
                .iter()
                .find(|(_, v)| v.is_none())
                .map(|(n, _)| *n),
            Method::Ggm => r.grad_map_norm.is_none().then_some("grad_map_norm"),
            Method::Dgm => r.phi_star.is_none().then_some("phi_star"),
            Method::Pgm => None,
        };
        if let Some(col) = missing {
            return Err(Error::Parse {
                row,
                message: format!("column `{col}` is required for {method} traces"),
            });
        }
        if !(r.l > 0.0 && r.l.is_finite()) {
            return Err(Error::Parse {
                row,
                message: format!("L must be positive, found {}", r.l),
            });
        }
    }
    Ok(())
}

fn is_ggm_stop(r: &crate::solvers::IterationRecord, delta: Option<f64>, last: bool) -> bool {
    match (delta, r.grad_map_norm) {
        (Some(d), Some(g)) => g <= d,
        // without δ only the final row can be the stopping row
        _ => last,
    }
}

fn pow2(i: u32, base: f64) -> f64 {
    base * 2f64.powi(i as i32)
}

fn check_doubling_count(c: &mut Checker, k: usize, sum: f64, l_final: f64, l0: f64) {
    let expected = (l_final / l0).log2();
    if (sum - expected).abs() > 1e-9 * (1.0 + expected.abs()) {
        c.push("doubling_count", k, sum, expected);
    }
}

fn verify_ggm(
    trace: &Trace,
    problem: &CompositeProblem,
    model: Option<&CurvatureModel>,
    cfg: &VerifyConfig,
    l0: f64,
    c: &mut Checker,
) -> Result<Option<BoundReport>> {
    let rows = &trace.records;
    let n = rows.len();
    let x0 = problem.x0();
    let mut f_prev = problem.f.value(x0);
    let f0 = f_prev;
    let mut m_prev = l0;
    let mut ms = vec![l0];
    let mut doublings = 0.0;
    let mut stop_k = None;
    for (j, r) in rows.iter().enumerate() {
        let last = j + 1 == n;
        let stop = last && is_ggm_stop(r, cfg.delta, true);
        let trial_m = pow2(r.i_k, m_prev);
        if stop {
            c.equal("l_update", r.k, r.l, trial_m, cfg.identity_tol);
            if let (Some(d), Some(g)) = (cfg.delta, r.grad_map_norm) {
                c.leq("stop_criterion", r.k, g, d);
            }
            stop_k = Some(r.k);
            break;
        }
        if j > 0 || cfg.l0.is_some() {
            c.equal("l_update", r.k, r.l, 0.5 * trial_m, cfg.identity_tol);
        }
        c.leq("descent", r.k, r.f, f_prev - 0.25 * trial_m * r.step_norm * r.step_norm);
        doublings += r.i_k as f64 - 1.0;
        f_prev = r.f;
        m_prev = r.l;
        ms.push(r.l);
    }
    check_doubling_count(c, rows.len() - 1, doublings, m_prev, l0);

    let (Some(model), Some(delta), Some(opt)) = (model, cfg.delta, problem.known_q_optimum.as_ref()) else {
        return Ok(None);
    };
    let delta0 = f0 - opt.f_tilde;
    if !(delta0 > 0.0) {
        return Ok(None);
    }
    let report = match BoundReport::new(model, BoundMethod::Ggm, delta0, cfg.eps, Some(delta), stop_k) {
        Ok(r) => r,
        Err(Error::Unattainable { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    // M₀ ≤ γ̂(Δ₀) is the theorem's precondition
    if l0 <= model.gamma_hat(delta0)? {
        let eps_n = 2.0 * delta0 / report.sufficient_k as f64;
        let cap = model.gamma_hat(eps_n)?;
        for (k, m) in ms.iter().enumerate() {
            c.leq("m_bound", k, *m, cap);
        }
    }
    Ok(Some(report))
}

#[allow(clippy::too_many_arguments)]
fn verify_simple(
    trace: &Trace,
    problem: &CompositeProblem,
    model: Option<&CurvatureModel>,
    cfg: &VerifyConfig,
    method: Method,
    l0: f64,
    d: Option<f64>,
    c: &mut Checker,
) -> Result<Option<BoundReport>> {
    let eps = cfg.eps;
    let rows = &trace.records;
    let gamma = model.map(|m| m.gamma_simple(eps)).transpose()?;
    let mut l_prev = l0;
    let mut s = 0.0;
    let mut weighted = 0.0;
    let mut doublings = 0.0;
    for (j, r) in rows.iter().enumerate() {
        if j > 0 || cfg.l0.is_some() {
            c.equal("l_update", r.k, r.l, 0.5 * pow2(r.i_k, l_prev), cfg.identity_tol);
        }
        if let Some(g) = gamma {
            if l0 <= g {
                c.leq("l_bound", r.k, r.l, g);
            }
        }
        s += 1.0 / r.l;
        weighted += r.f_tilde / r.l;
        doublings += r.i_k as f64 - 1.0;
        match method {
            Method::Dgm => {
                let phi = r.phi_star.expect("checked by shape");
                c.leq("dual_rate", r.k, 0.5 * weighted, phi + s * eps / 4.0);
            }
            _ => {
                if let (Some(d), Some(opt)) = (d, problem.known_optimum.as_ref()) {
                    c.leq("primal_rate", r.k, weighted / s - opt.f_tilde, 0.5 * eps + 2.0 * d / s);
                }
            }
        }
        l_prev = r.l;
    }
    check_doubling_count(c, rows.len() - 1, doublings, l_prev, l0);
    match (model, d) {
        (Some(m), Some(d)) => bound_or_none(BoundReport::new(m, BoundMethod::Simple, d, eps, None, Some(rows.len()))),
        _ => Ok(None),
    }
}

fn verify_fast(
    trace: &Trace,
    model: Option<&CurvatureModel>,
    cfg: &VerifyConfig,
    l0: f64,
    d: Option<f64>,
    c: &mut Checker,
) -> Result<Option<BoundReport>> {
    let eps = cfg.eps;
    let rows = &trace.records;
    let monotone_rule = !cfg.aggressive_l;
    let identity_factor = if cfg.aggressive_l { 2.0 } else { 1.0 };
    let l_precondition = match model {
        Some(m) => l0 <= 2.0 * m.gamma_simple(eps)?,
        None => false,
    };
    let budget = match (model, d) {
        (Some(m), Some(d)) if monotone_rule && m.convex_full_domain && d > 0.0 => {
            let mu = m.mu_hat(2.0 * d.sqrt())?;
            let t = eps.powi(3) / (4.0 * mu * mu);
            m.gamma_simple(t).ok().map(|g| 1.0 + g.log2() - l0.log2())
        }
        _ => None,
    };
    let mut l_prev = l0;
    let mut a_prev = 0.0;
    let mut tau_prev = f64::INFINITY;
    let mut doublings = 0.0;
    for (j, r) in rows.iter().enumerate() {
        let k = r.k;
        let (tau, a, a_total, phi) = (r.tau.unwrap(), r.a.unwrap(), r.a_total.unwrap(), r.phi_star.unwrap());
        let factor = if cfg.aggressive_l { 0.5 } else { 1.0 };
        if j > 0 || cfg.l0.is_some() {
            c.equal("l_update", k, r.l, factor * pow2(r.i_k, l_prev), cfg.identity_tol);
        }
        c.equal(
            "l_tau_identity",
            k,
            1.0 / (a_total * tau * tau),
            identity_factor * r.l,
            cfg.identity_tol,
        );
        c.equal("a_sum", k, a_total, a_prev + a, cfg.identity_tol);
        c.leq("estimate_certificate", k, a_total * (r.f_tilde - 0.5 * eps), phi);
        if monotone_rule {
            if j > 0 {
                c.leq("tau_monotone", k, tau, tau_prev);
            }
            c.leq("tau_rate", k, tau, 2.0 / (k as f64 + 1.0));
            let kk = (k + 1) as f64;
            c.leq("a_growth", k, kk * kk / (4.0 * r.l), a_total);
        }
        if let (Some(m), true) = (model, l_precondition) {
            if let Ok(g) = m.gamma_simple(eps * tau) {
                c.leq("l_bound", k, r.l, 2.0 * g);
            }
        }
        doublings += r.i_k as f64 - if cfg.aggressive_l { 1.0 } else { 0.0 };
        if let (Some(b), Some(d)) = (budget, d) {
            if a_total <= 2.0 * d / eps {
                c.leq("doubling_budget", k, (r.l / l0).log2(), b);
            }
        }
        l_prev = r.l;
        a_prev = a_total;
        tau_prev = tau;
    }
    check_doubling_count(c, rows.len() - 1, doublings, l_prev, l0);
    match (model, d) {
        (Some(m), Some(d)) => bound_or_none(BoundReport::new(m, BoundMethod::Fast, d, eps, None, Some(rows.len() - 1))),
        _ => Ok(None),
    }
}

fn bound_or_none(r: Result<BoundReport>) -> Result<Option<BoundReport>> {
    match r {
        Ok(b) => Ok(Some(b)),
        Err(Error::Unattainable { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::builtin_problem;
    use crate::solvers::{dgm_solve, ggm_solve, pgm_solve, ufgm_solve, SolverConfig};
    use serde_json::json;

    fn quad() -> CompositeProblem {
        builtin_problem("quadratic", 4, json!({"L": 2.0, "center": 0.3}).as_object().unwrap()).unwrap()
    }

    #[test]
    fn clean_traces_have_no_violations() {
        let p = quad();
        let cfg = SolverConfig {
            eps: 1e-3,
            delta: Some(1e-2),
            ..Default::default()
        };
        let mut v = VerifyConfig::new(cfg.eps);
        v.l0 = Some(cfg.l0);
        v.delta = cfg.delta;
        for solve in [ggm_solve, pgm_solve, dgm_solve, ufgm_solve] {
            let (rep, tr) = solve(&p, &cfg).unwrap();
            let out = verify_trace(&tr, &p, None, &v).unwrap();
            assert_eq!(out.method, rep.method);
            assert!(out.violations.is_empty(), "{:?}: {:?}", rep.method, out.violations);
            assert!(out.bound.unwrap().pass);
        }
    }

    #[test]
    fn inferred_l0_matches() {
        let p = quad();
        let (_, tr) = pgm_solve(&p, &SolverConfig::with_eps(1e-3)).unwrap();
        let out = verify_trace(&tr, &p, None, &VerifyConfig::new(1e-3)).unwrap();
        assert!(out.violations.is_empty(), "{:?}", out.violations);
    }

    #[test]
    fn corrupted_tau_is_flagged() {
        let p = quad();
        let (_, mut tr) = ufgm_solve(&p, &SolverConfig::with_eps(1e-6)).unwrap();
        assert!(tr.len() > 6);
        tr.records[5].tau = Some(tr.records[4].tau.unwrap() * 1.5);
        let out = verify_trace(&tr, &p, None, &VerifyConfig::new(1e-6)).unwrap();
        assert!(out.violations.iter().any(|v| v.name == "tau_monotone" && v.iteration == 5));
    }

    #[test]
    fn malformed_traces_are_rejected() {
        let p = quad();
        let (_, mut tr) = ufgm_solve(&p, &SolverConfig::with_eps(1e-3)).unwrap();
        tr.records[1].a = None;
        assert!(matches!(
            verify_trace(&tr, &p, None, &VerifyConfig::new(1e-3)),
            Err(Error::Parse { row: 2, .. })
        ));
        assert!(verify_trace(&Trace::default(), &p, None, &VerifyConfig::new(1e-3)).is_err());
    }
}
