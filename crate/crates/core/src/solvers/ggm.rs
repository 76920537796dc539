use super::{line_search_failure, pow2, IterationRecord, Oracle, RunReport, SolverConfig, TerminationReason, Trace};
use crate::error::{Error, Result};
use crate::mappings::gradient_mapping_with;
use crate::problems::CompositeProblem;

/// General gradient method for (possibly nonconvex) `min_{x∈Q} f(x)`.
///
/// Iteration `k` tries `M = 2^i M_k`, `i = 0, 1, …`: it stops as soon as the gradient
/// mapping satisfies `‖g‖* ≤ δ` (output `x̄ = T_M(x_k)`), and otherwise accepts the
/// first `i` with `f(x_k) - f(x_k^i) ≥ 2^{i-2} M_k ‖x_k^i - x_k‖²`, then sets
/// `M_{k+1} = 2^{i_k-1} M_k`. The last trace row is the stopping row; its `L` column
/// holds `M̄`.
pub fn ggm_solve(problem: &CompositeProblem, cfg: &SolverConfig) -> Result<(RunReport, Trace)> {
    cfg.validate()?;
    let delta = cfg
        .delta
        .ok_or_else(|| Error::Config("the general gradient method needs delta".into()))?;
    let metric = problem.metric();
    let mut x = problem.x0().to_vec();
    if !problem.q_set.contains(&x, metric) {
        return Err(Error::Domain("starting point lies outside Q".into()));
    }
    let mut oracle = Oracle::new(problem);
    let start = oracle.eval(&x)?;
    let (mut fx, mut gx) = (start.f, start.grad);
    let mut m = cfg.l0;
    let mut best = fx;
    let mut trace = Trace::default();

    for k in 0..cfg.max_iters {
        let mut i = 0u32;
        loop {
            let mi = pow2(i, m);
            let map = gradient_mapping_with(problem, &x, &gx, mi)?;
            let t = map.point_t;
            let gnorm = metric.dual_norm(&map.mapped_gradient);
            let step = metric.dist(&t, &x);
            let et = oracle.eval(&t)?;
            if gnorm <= delta {
                let mut row = IterationRecord::basic(k, i, mi, et.f, et.f, step);
                row.grad_map_norm = Some(gnorm);
                trace.records.push(row);
                let report = RunReport {
                    method: super::Method::Ggm,
                    x: t,
                    best_f_tilde: best.min(et.f),
                    certified_value: et.f,
                    gap_bound: None,
                    iterations: k + 1,
                    achieved_k: k,
                    oracle_calls: oracle.calls,
                    doublings: trace.total_doublings(),
                    l0: cfg.l0,
                    l_final: m,
                    termination: TerminationReason::GradientNormReached,
                };
                return Ok((report, trace));
            }
            if fx - et.f >= 0.25 * mi * step * step {
                m = 0.5 * mi;
                let mut row = IterationRecord::basic(k, i, m, et.f, et.f, step);
                row.grad_map_norm = Some(gnorm);
                trace.records.push(row);
                x = t;
                fx = et.f;
                gx = et.grad;
                best = best.min(fx);
                break;
            }
            i += 1;
            if i > cfg.max_doublings_per_iter {
                return Err(line_search_failure(k, i - 1, cfg));
            }
        }
    }

    let report = RunReport {
        method: super::Method::Ggm,
        x,
        best_f_tilde: best,
        certified_value: fx,
        gap_bound: None,
        iterations: cfg.max_iters,
        achieved_k: cfg.max_iters,
        oracle_calls: oracle.calls,
        doublings: trace.total_doublings(),
        l0: cfg.l0,
        l_final: m,
        termination: TerminationReason::MaxIters,
    };
    Ok((report, trace))
}
