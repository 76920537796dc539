use super::{
    check_invariant, line_search_failure, pow2, EstimateFunction, IterationRecord, Method, Oracle, RunReport,
    SolverConfig, TerminationReason, Trace,
};
use crate::error::{Error, Result};
use crate::linalg;
use crate::mappings::solve_composite_prox;
use crate::problems::CompositeProblem;

/// Positive root of `L a² = A + a`.
pub fn ufgm_step_coefficient(l: f64, a_total: f64) -> Result<f64> {
    if !(l > 0.0 && l.is_finite()) || !(a_total >= 0.0 && a_total.is_finite()) {
        return Err(Error::Domain(format!("need L > 0 and A ≥ 0, got L = {l}, A = {a_total}")));
    }
    Ok((1.0 + (1.0 + 4.0 * l * a_total).sqrt()) / (2.0 * l))
}

/// Fast gradient method. Iteration `k`:
///
/// 1. `v_k = argmin φ_k`;
/// 2. for `M = 2^i L_k`: `a = (1 + √(1 + 4MA_k))/(2M)`, `τ = a/(A_k + a)`,
///    `x = τ v_k + (1-τ) y_k`, `x̂ = argmin β(v_k, ·) + a[⟨∇f(x), ·⟩ + Ψ]`,
///    `y = τ x̂ + (1-τ) y_k`, accepted at the first `i` with
///    `f(y) ≤ f(x) + ⟨∇f(x), y - x⟩ + (M/2)‖y - x‖² + (ε/2)τ`;
/// 3. `L_{k+1} = M` (or `M/2` with `aggressive_l`), `A_{k+1} = A_k + a`, and `φ` gains
///    `a[f(x) + ⟨∇f(x), · - x⟩ + Ψ]`.
///
/// The certificate `A_{k+1}(f̃(y_{k+1}) - ε/2) ≤ φ*_{k+1}` is checked online, and with the
/// default rule also `τ_k ≤ τ_{k-1}` and `τ_k ≤ 2/(k+1)`. With `D` known the method stops
/// once `A_{k+1} ≥ 2D/ε`, which guarantees `f̃(y_{k+1}) - f̃* ≤ ε`.
///
/// Requires `f` finite on the whole space (checked at every point the method queries).
pub fn ufgm_solve(problem: &CompositeProblem, cfg: &SolverConfig) -> Result<(RunReport, Trace)> {
    cfg.validate()?;
    let eps = cfg.eps;
    let metric = problem.metric();
    let d = cfg.distance(problem);
    let mut oracle = Oracle::new(problem);
    let mut phi = EstimateFunction::new(problem.dim);
    let mut y = problem.x0().to_vec();
    let mut v = phi.minimize(problem)?.0;
    let mut a_total = 0.0;
    let mut l = cfg.l0;
    let mut prev_tau = f64::INFINITY;
    let mut best = f64::INFINITY;
    let mut best_y = y.clone();
    let mut last_f_tilde = f64::NAN;
    let mut trace = Trace::default();
    let mut gap_bound = None;
    let mut termination = TerminationReason::MaxIters;

    for k in 0..cfg.max_iters {
        let mut i = 0u32;
        let (m, a, tau, xk, ex, yp, ey) = loop {
            let m = pow2(i, l);
            let a = ufgm_step_coefficient(m, a_total)?;
            let tau = a / (a_total + a);
            let xk = linalg::lerp(tau, &v, &y);
            let ex = oracle.eval(&xk)?;
            let ag = linalg::scale(&ex.grad, a);
            let xhat = solve_composite_prox(&problem.geometry, &problem.psi, &v, &ag, 1.0, a)?;
            let yp = linalg::lerp(tau, &xhat, &y);
            let ey = oracle.eval(&yp)?;
            let dy = linalg::sub(&yp, &xk);
            let rhs = ex.f + linalg::dot(&ex.grad, &dy) + 0.5 * m * metric.norm_sq(&dy) + 0.5 * eps * tau;
            if ey.f <= rhs {
                break (m, a, tau, xk, ex, yp, ey);
            }
            i += 1;
            if i > cfg.max_doublings_per_iter {
                return Err(line_search_failure(k, i - 1, cfg));
            }
        };
        a_total += a;
        let l_next = if cfg.aggressive_l { m / 2.0 } else { m };
        phi.add(a, &xk, ex.f, &ex.grad);
        let (v_next, phi_star) = phi.minimize(problem)?;

        check_invariant(cfg, "estimate_certificate", k, a_total * (ey.f_tilde - 0.5 * eps), phi_star)?;
        if !cfg.aggressive_l {
            check_invariant(cfg, "tau_monotone", k, tau, prev_tau)?;
            check_invariant(cfg, "tau_rate", k, tau, 2.0 / (k as f64 + 1.0))?;
        }

        let mut row = IterationRecord::basic(k, i, l_next, ey.f, ey.f_tilde, metric.dist(&yp, &xk));
        row.tau = Some(tau);
        row.a = Some(a);
        row.a_total = Some(a_total);
        row.phi_star = Some(phi_star);
        trace.records.push(row);
        if ey.f_tilde < best {
            best = ey.f_tilde;
            best_y = yp.clone();
        }
        last_f_tilde = ey.f_tilde;
        y = yp;
        v = v_next;
        l = l_next;
        prev_tau = tau;

        if let Some(d) = d {
            if a_total >= 2.0 * d / eps {
                gap_bound = Some(0.5 * eps + d / a_total);
                termination = TerminationReason::AccuracyReached;
                break;
            }
        }
        let gap = ey.f_tilde - phi.model_lower_bound(problem);
        if gap <= eps {
            gap_bound = Some(gap);
            termination = TerminationReason::GapCertified;
            break;
        }
    }

    let iterations = trace.len();
    let report = RunReport {
        method: Method::Ufgm,
        x: if termination == TerminationReason::MaxIters { best_y } else { y },
        best_f_tilde: best,
        certified_value: last_f_tilde,
        gap_bound,
        iterations,
        achieved_k: iterations.saturating_sub(1),
        oracle_calls: oracle.calls,
        doublings: trace.total_doublings(),
        l0: cfg.l0,
        l_final: l,
        termination,
    };
    Ok((report, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::builtin_problem;
    use approx::assert_relative_eq;
    use serde_json::json;

    #[test]
    fn step_coefficient_examples() {
        assert_eq!(ufgm_step_coefficient(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(ufgm_step_coefficient(1.0, 2.0).unwrap(), 2.0);
        let a = ufgm_step_coefficient(0.25, 3.0).unwrap();
        assert_eq!(a, 6.0);
        assert!(ufgm_step_coefficient(0.0, 1.0).is_err());
        assert!(ufgm_step_coefficient(1.0, -1.0).is_err());
    }

    #[test]
    fn first_iteration_has_unit_tau() {
        let p = builtin_problem("quadratic", 3, &Default::default()).unwrap();
        let (_, tr) = ufgm_solve(&p, &SolverConfig::with_eps(1e-3)).unwrap();
        let r = &tr.records[0];
        assert_eq!(r.tau, Some(1.0));
        assert_eq!(r.a, r.a_total);
    }

    #[test]
    fn l_tau_identity_and_doubling_count() {
        let p = builtin_problem("quadratic", 5, json!({"L": 3.0}).as_object().unwrap()).unwrap();
        let (rep, tr) = ufgm_solve(&p, &SolverConfig::with_eps(1e-6)).unwrap();
        for r in &tr.records {
            let (tau, a_total) = (r.tau.unwrap(), r.a_total.unwrap());
            assert_relative_eq!(1.0 / (a_total * tau * tau), r.l, max_relative = 1e-12);
        }
        assert_eq!(rep.doublings as f64, (rep.l_final / rep.l0).log2());
        assert_eq!(rep.oracle_calls, 2 * tr.records.iter().map(|r| r.i_k as usize + 1).sum::<usize>());
    }
}
