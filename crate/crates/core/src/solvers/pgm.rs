use super::{
    line_search_failure, pow2, EstimateFunction, IterationRecord, Method, Oracle, RunReport, SolverConfig,
    TerminationReason, Trace,
};
use crate::error::Result;
use crate::linalg;
use crate::mappings::bregman_mapping_with;
use crate::problems::CompositeProblem;

/// Primal gradient method: `x_{k+1} = B_{2^{i_k} L_k}(x_k)` with the smallest `i_k` such that
/// `f(x_{k+1}) ≤ f(x_k) + ⟨∇f(x_k), x_{k+1} - x_k⟩ + 2^{i_k-1} L_k ‖x_{k+1} - x_k‖² + ε/2`,
/// then `L_{k+1} = 2^{i_k-1} L_k`.
///
/// The guarantee is about `f̃*_k = (1/S_k) Σ f̃(x_{i+1}) / L_{i+1}` with `S_k = Σ 1/L_{i+1}`:
/// `f̃*_k - f̃* ≤ ε/2 + 2D/S_k`, so the method stops once `S_k ≥ 4D/ε` when `D` is known,
/// and otherwise when the same average of linear models certifies a gap of `ε`.
pub fn pgm_solve(problem: &CompositeProblem, cfg: &SolverConfig) -> Result<(RunReport, Trace)> {
    cfg.validate()?;
    let eps = cfg.eps;
    let metric = problem.metric();
    let d = cfg.distance(problem);
    let mut oracle = Oracle::new(problem);
    let mut x = problem.x0().to_vec();
    let start = oracle.eval(&x)?;
    let (mut fx, mut gx) = (start.f, start.grad);
    let mut l = cfg.l0;
    let mut s = 0.0;
    let mut weighted = 0.0;
    let mut models = EstimateFunction::new(problem.dim);
    let mut best = f64::INFINITY;
    let mut trace = Trace::default();
    let mut gap_bound = None;
    let mut termination = TerminationReason::MaxIters;

    for k in 0..cfg.max_iters {
        let mut i = 0u32;
        let (x_next, e_next) = loop {
            let m = pow2(i, l);
            let map = bregman_mapping_with(problem, &x, fx, &gx, m)?;
            let xp = map.point_t;
            let e = oracle.eval(&xp)?;
            let dx = linalg::sub(&xp, &x);
            let rhs = fx + linalg::dot(&gx, &dx) + 0.5 * m * metric.norm_sq(&dx) + 0.5 * eps;
            if e.f <= rhs {
                break (xp, e);
            }
            i += 1;
            if i > cfg.max_doublings_per_iter {
                return Err(line_search_failure(k, i - 1, cfg));
            }
        };
        let l_next = pow2(i, l) / 2.0;
        let step = metric.dist(&x_next, &x);
        models.add(1.0 / l_next, &x, fx, &gx);
        s += 1.0 / l_next;
        weighted += e_next.f_tilde / l_next;
        best = best.min(e_next.f_tilde);
        trace
            .records
            .push(IterationRecord::basic(k, i, l_next, e_next.f, e_next.f_tilde, step));
        x = x_next;
        fx = e_next.f;
        gx = e_next.grad;
        l = l_next;

        let average = weighted / s;
        if let Some(d) = d {
            if s >= 4.0 * d / eps {
                gap_bound = Some(0.5 * eps + 2.0 * d / s);
                termination = TerminationReason::AccuracyReached;
                break;
            }
        }
        let gap = average - models.model_lower_bound(problem);
        if gap <= eps {
            gap_bound = Some(gap);
            termination = TerminationReason::GapCertified;
            break;
        }
    }

    let iterations = trace.len();
    let report = RunReport {
        method: Method::Pgm,
        x,
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
