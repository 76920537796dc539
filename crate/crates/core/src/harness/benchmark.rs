use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{verify_trace, BoundReport, VerifyConfig, Violation};
use crate::curvature::CurvatureModel;
use crate::error::Result;
use crate::problems::CompositeProblem;
use crate::solvers::{Method, SolverConfig, TerminationReason};

/// A `methods × eps` sweep on one problem.
#[derive(Debug, Clone)]
pub struct BenchmarkPlan {
    pub methods: Vec<Method>,
    pub eps: Vec<f64>,
    /// Template for every cell; `eps` is overwritten and GGM's `delta` defaults to `eps`.
    pub base: SolverConfig,
    /// Falls back to the problem's known model.
    pub model: Option<CurvatureModel>,
    /// Where `<problem>_<method>_<eps>.csv` traces and `report.json` go.
    pub out_dir: Option<PathBuf>,
}

impl BenchmarkPlan {
    pub fn new(methods: Vec<Method>, eps: Vec<f64>) -> Self {
        BenchmarkPlan {
            methods,
            eps,
            base: SolverConfig::default(),
            model: None,
            out_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkCell {
    pub problem: String,
    pub method: Method,
    pub eps: f64,
    pub sufficient_k: Option<usize>,
    pub achieved_k: Option<usize>,
    pub iterations: usize,
    pub oracle_calls: usize,
    pub doublings: u64,
    pub l_final: Option<f64>,
    pub certified_value: Option<f64>,
    pub gap_bound: Option<f64>,
    pub termination: Option<TerminationReason>,
    pub bound: Option<BoundReport>,
    pub violations: Vec<Violation>,
    pub trace_file: Option<String>,
    pub error: Option<String>,
}

impl BenchmarkCell {
    fn failed(problem: &str, method: Method, eps: f64, error: String) -> Self {
        BenchmarkCell {
            problem: problem.to_string(),
            method,
            eps,
            sufficient_k: None,
            achieved_k: None,
            iterations: 0,
            oracle_calls: 0,
            doublings: 0,
            l_final: None,
            certified_value: None,
            gap_bound: None,
            termination: None,
            bound: None,
            violations: Vec::new(),
            trace_file: None,
            error: Some(error),
        }
    }
}

/// Runs every cell in parallel. Solver errors are recorded per cell; only I/O failures on
/// `out_dir` abort the sweep.
pub fn run_benchmark(problem: &CompositeProblem, plan: &BenchmarkPlan) -> Result<Vec<BenchmarkCell>> {
    if let Some(dir) = &plan.out_dir {
        fs::create_dir_all(dir)?;
    }
    let jobs: Vec<(Method, f64)> = plan
        .methods
        .iter()
        .flat_map(|m| plan.eps.iter().map(move |e| (*m, *e)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(method, eps)| run_cell(problem, plan, method, eps))
        .collect::<Result<Vec<_>>>()?;
    if let Some(dir) = &plan.out_dir {
        let json = serde_json::to_string_pretty(&cells)?;
        fs::write(dir.join("report.json"), json)?;
    }
    Ok(cells)
}

fn run_cell(problem: &CompositeProblem, plan: &BenchmarkPlan, method: Method, eps: f64) -> Result<BenchmarkCell> {
    let mut cfg = plan.base.clone();
    cfg.eps = eps;
    if method == Method::Ggm && cfg.delta.is_none() {
        cfg.delta = Some(eps);
    }
    let (report, trace) = match method.solve(problem, &cfg) {
        Ok(r) => r,
        Err(e) => return Ok(BenchmarkCell::failed(&problem.name, method, eps, e.to_string())),
    };
    let trace_file = match &plan.out_dir {
        Some(dir) => {
            let name = format!("{}_{}_{:e}.csv", problem.name, method, eps);
            trace.save(&dir.join(&name))?;
            Some(name)
        }
        None => None,
    };
    let vcfg = VerifyConfig {
        method: Some(method),
        delta: cfg.delta,
        l0: Some(cfg.l0),
        aggressive_l: cfg.aggressive_l,
        d: cfg.d_hint,
        ..VerifyConfig::new(eps)
    };
    let (bound, violations, error) = match verify_trace(&trace, problem, plan.model.as_ref(), &vcfg) {
        Ok(o) => (o.bound, o.violations, None),
        Err(e) => (None, Vec::new(), Some(e.to_string())),
    };
    Ok(BenchmarkCell {
        problem: problem.name.clone(),
        method,
        eps,
        sufficient_k: bound.as_ref().map(|b| b.sufficient_k),
        achieved_k: Some(report.achieved_k),
        iterations: report.iterations,
        oracle_calls: report.oracle_calls,
        doublings: report.doublings,
        l_final: Some(report.l_final),
        certified_value: Some(report.certified_value),
        gap_bound: report.gap_bound,
        termination: Some(report.termination),
        bound,
        violations,
        trace_file,
        error,
    })
}
