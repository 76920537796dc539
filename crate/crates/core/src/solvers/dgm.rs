use super::{
    check_invariant, line_search_failure, pow2, EstimateFunction, IterationRecord, Method, Oracle, RunReport,
    SolverConfig, TerminationReason, Trace,
};
use crate::error::Result;
use crate::mappings::bregman_mapping_with;
use crate::problems::CompositeProblem;

/// Dual gradient method with estimate function
/// `φ_{k+1} = φ_k + (1/(2L_{k+1})) [f(x_k) + ⟨∇f(x_k), · - x_k⟩ + Ψ]`, `φ₀ = β(x₀, ·)`.
///
/// Default (as stated): trial `x_{k,i} = argmin φ_k + (1/M)[linearization at x_k]` with
/// `M = 2^i L_k`, accepted when `f̃(B_M(x_{k,i})) ≤ ψ*_M(x_{k,i}) + ε/2`; then
/// `x_{k+1} = x_{k,i}`, `y_k = B_M(x_{k,i})`.
///
/// With `proof_indexing` the test runs at the linearization point itself:
/// `y_k = B_M(x_k)` accepted when `f̃(y_k) ≤ ψ*_M(x_k) + ε/2`, after which the
/// `x_k`-term joins `φ` and `x_{k+1} = argmin φ_{k+1}`. This is the indexing under which
/// the running inequality `Σ f̃(y_i)/(2L_{i+1}) ≤ φ*_{k+1} + S_k ε/4` follows directly.
///
/// Both variants check that inequality online and stop like the primal method,
/// using the average `f̃*_k = (1/S_k) Σ f̃(y_i)/L_{i+1}`.
pub fn dgm_solve(problem: &CompositeProblem, cfg: &SolverConfig) -> Result<(RunReport, Trace)> {
    cfg.validate()?;
    let eps = cfg.eps;
    let metric = problem.metric();
    let d = cfg.distance(problem);
    let mut oracle = Oracle::new(problem);
    let mut x = problem.x0().to_vec();
    let start = oracle.eval(&x)?;
    let (mut fx, mut gx) = (start.f, start.grad);
    let mut phi = EstimateFunction::new(problem.dim);
    let mut l = cfg.l0;
    let mut s = 0.0;
    let mut lhs = 0.0;
    let mut weighted = 0.0;
    let mut best = f64::INFINITY;
    let mut best_y = x.clone();
    let mut trace = Trace::default();
    let mut gap_bound = None;
    let mut termination = TerminationReason::MaxIters;

    for k in 0..cfg.max_iters {
        let mut i = 0u32;
        let accepted = loop {
            let m = pow2(i, l);
            let trial = if cfg.proof_indexing {
                let map = bregman_mapping_with(problem, &x, fx, &gx, m)?;
                let ey = oracle.eval(&map.point_t)?;
                (ey.f_tilde <= map.model_value + 0.5 * eps).then_some((map.point_t, ey, None))
            } else {
                let candidate = phi.with_term(1.0 / m, &x, fx, &gx);
                let (xi, _) = candidate.minimize(problem)?;
                let exi = oracle.eval(&xi)?;
                let map = bregman_mapping_with(problem, &xi, exi.f, &exi.grad, m)?;
                let ey = oracle.eval(&map.point_t)?;
                (ey.f_tilde <= map.model_value + 0.5 * eps).then_some((map.point_t, ey, Some((xi, exi))))
            };
            if let Some(t) = trial {
                break t;
            }
            i += 1;
            if i > cfg.max_doublings_per_iter {
                return Err(line_search_failure(k, i - 1, cfg));
            }
        };
        let (y, ey, next) = accepted;
        let m = pow2(i, l);
        phi.add(1.0 / m, &x, fx, &gx);
        let (x_next, e_next) = match next {
            Some(pair) => pair,
            None => {
                let (v, _) = phi.minimize(problem)?;
                let e = oracle.eval(&v)?;
                (v, e)
            }
        };
        let phi_star = phi.value(problem, &x_next);
        let l_next = m / 2.0;
        s += 1.0 / l_next;
        lhs += ey.f_tilde / (2.0 * l_next);
        weighted += ey.f_tilde / l_next;
        check_invariant(cfg, "dual_rate", k, lhs, phi_star + s * eps / 4.0)?;
        if ey.f_tilde < best {
            best = ey.f_tilde;
            best_y = y.clone();
        }
        let mut row = IterationRecord::basic(k, i, l_next, ey.f, ey.f_tilde, metric.dist(&y, &x_next));
        row.phi_star = Some(phi_star);
        trace.records.push(row);
        x = x_next;
        fx = e_next.f;
        gx = e_next.grad;
        l = l_next;

        if let Some(d) = d {
            if s >= 4.0 * d / eps {
                gap_bound = Some(0.5 * eps + 2.0 * d / s);
                termination = TerminationReason::AccuracyReached;
                break;
            }
        }
        let gap = weighted / s - phi.model_lower_bound(problem);
        if gap <= eps {
            gap_bound = Some(gap);
            termination = TerminationReason::GapCertified;
            break;
        }
    }

    let iterations = trace.len();
    let report = RunReport {
        method: Method::Dgm,
        x: best_y,
        best_f_tilde: best,
        certified_value: weighted / s,
        gap_bound,
        iterations,
        achieved_k: iterations,
        oracle_calls: oracle.calls,
        doublings: trace.total_doublings(),
        l0: cfg.l0,
        l_final: l,
        termination,
    };
    Ok((report, trace))
}
