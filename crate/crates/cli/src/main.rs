use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use unigrad::curvature::estimate_gcb;
use unigrad::harness::{named_model, run_benchmark, BenchmarkPlan, ModelArgs, VerifyConfig};
use unigrad::problems::ProblemSpec;
use unigrad::{
    BoundMethod, BoundReport, CompositeProblem, CurvatureModel, EmpiricalCurve, GaugeConfig, Method, SolverConfig,
    Trace,
};

/// Universal gradient methods with curvature-bound certificates.
///
/// Exit status: 0 on success, 1 when a check fails (violations, failed bound), 2 on usage or
/// input errors.
#[derive(Parser)]
#[command(name = "unigrad", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one method on a problem and write its trace.
    Solve(SolveArgs),
    /// Print the gauges s_f, ŝ_f, γ_f and γ̂_f of a curvature model at ε.
    Gauge(GaugeArgs),
    /// Print the sufficient number of iterations for a bound.
    Bound(BoundArgs),
    /// Estimate μ̂ of a problem by sampling and write the curve as CSV.
    EstimateGcb(EstimateArgs),
    /// Check a trace against every inequality its method guarantees.
    Verify(VerifyArgs),
    /// Sweep methods × accuracies on one problem.
    Benchmark(BenchmarkArgs),
}

#[derive(Args, Clone, Default)]
struct ModelOpts {
    /// quadratic, hoelder, sum, example_1_1 or curve.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    l: Option<f64>,
    /// Linear coefficient of the sum model.
    #[arg(long)]
    l0: Option<f64>,
    /// Quadratic coefficient of the sum model.
    #[arg(long)]
    l1: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    /// Tabulated curve (`t,mu_hat` CSV) for `--model curve`.
    #[arg(long)]
    curve: Option<PathBuf>,
    #[arg(long)]
    diameter: Option<f64>,
}

impl ModelOpts {
    fn build(&self) -> Result<Option<CurvatureModel>> {
        let Some(name) = &self.model else {
            return Ok(None);
        };
        let curve = match &self.curve {
            Some(p) => Some(
                EmpiricalCurve::read_csv(File::open(p).with_context(|| format!("opening {}", p.display()))?)
                    .with_context(|| format!("reading {}", p.display()))?,
            ),
            None => None,
        };
        let args = ModelArgs {
            nu: self.nu,
            l: self.l,
            l0: self.l0,
            l1: self.l1,
            dim: self.dim,
            curve,
            diameter: self.diameter,
        };
        Ok(Some(named_model(name, &args)?))
    }

    fn require(&self) -> Result<CurvatureModel> {
        self.build()?.context("--model is required")
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    method: Method,
    /// Problem spec (JSON).
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    eps: f64,
    /// Gradient-mapping target for GGM (defaults to eps).
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    l0: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    aggressive_l: bool,
    #[arg(long)]
    proof_indexing: bool,
    /// Distance D = β(x₀, x*) when the problem has no known optimum.
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    trace: PathBuf,
}

#[derive(Args)]
struct GaugeArgs {
    #[command(flatten)]
    model: ModelOpts,
    #[arg(long)]
    eps: f64,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    method: BoundMethod,
    #[command(flatten)]
    model: ModelOpts,
    /// D for simple/fast, Δ₀ for ggm.
    #[arg(long)]
    d: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    delta: Option<f64>,
    /// Compare against an achieved iteration count; exits 1 if it exceeds the bound.
    #[arg(long)]
    achieved: Option<usize>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    tmax: f64,
    /// Grid points, including t = 0.
    #[arg(long, default_value_t = 33)]
    grid: usize,
    /// Total sampled pairs, split evenly over the grid bins.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 4)]
    alphas: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    trace: PathBuf,
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    eps: f64,
    /// Inferred from the trace columns when omitted.
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    delta: Option<f64>,
    /// Initial constant of the run; inferred from the first row when omitted.
    #[arg(long)]
    l_init: Option<f64>,
    #[arg(long)]
    aggressive_l: bool,
    #[arg(long)]
    d: Option<f64>,
    /// Falls back to the problem's known model.
    #[command(flatten)]
    model: ModelOpts,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long)]
    problem: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "ggm,pgm,dgm,ufgm")]
    methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', default_value = "1e-1,1e-2,1e-3")]
    eps: Vec<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    l0: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

fn load_problem(path: &Path) -> Result<CompositeProblem> {
    let spec = ProblemSpec::load(path).with_context(|| format!("loading {}", path.display()))?;
    Ok(spec.build()?)
}

/// `println!` that treats a closed pipe as success.
fn emit(line: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match writeln!(out, "{line}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print(v: &impl serde::Serialize) -> Result<()> {
    emit(&serde_json::to_string_pretty(v)?)
}

/// `Ok(true)` when every check passed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve(a) => {
            let problem = load_problem(&a.problem)?;
            let mut cfg = SolverConfig::with_eps(a.eps);
            cfg.delta = a.delta.or((a.method == Method::Ggm).then_some(a.eps));
            if let Some(l0) = a.l0 {
                cfg.l0 = l0;
            }
            if let Some(n) = a.max_iters {
                cfg.max_iters = n;
            }
            cfg.aggressive_l = a.aggressive_l;
            cfg.proof_indexing = a.proof_indexing;
            cfg.d_hint = a.d;
            let (report, trace) = a.method.solve(&problem, &cfg)?;
            trace.save(&a.trace).with_context(|| format!("writing {}", a.trace.display()))?;
            print(&report)?;
            Ok(true)
        }
        Command::Gauge(a) => {
            let m = a.model.require()?;
            let cfg = GaugeConfig::default();
            print(&json!({
                "model": m.to_string(),
                "eps": a.eps,
                "s_f": m.invert_mu(a.eps, &cfg)?,
                "s_hat_f": m.invert_sigma(a.eps, &cfg)?,
                "gamma_f": m.gamma_simple(a.eps)?,
                "gamma_hat_f": m.gamma_hat(a.eps)?,
            }))?;
            Ok(true)
        }
        Command::Bound(a) => {
            let m = a.model.require()?;
            let report = BoundReport::new(&m, a.method, a.d, a.eps, a.delta, a.achieved)?;
            print(&report)?;
            Ok(report.pass)
        }
        Command::EstimateGcb(a) => {
            let problem = load_problem(&a.problem)?;
            if a.grid < 2 || a.tmax.is_nan() || a.tmax <= 0.0 {
                bail!("need --grid ≥ 2 and --tmax > 0");
            }
            let bins = a.grid - 1;
            let grid: Vec<f64> = (0..a.grid).map(|j| a.tmax * j as f64 / bins as f64).collect();
            let pairs = a.samples.div_ceil(bins).max(1);
            let curve = estimate_gcb(&problem, &grid, pairs, a.alphas, a.seed)?;
            let file = File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
            curve.write_csv(file)?;
            eprintln!("{} points, {} samples -> {}", grid.len(), curve.sample_budget, a.out.display());
            Ok(true)
        }
        Command::Verify(a) => {
            let problem = load_problem(&a.problem)?;
            let trace = Trace::load(&a.trace).with_context(|| format!("reading {}", a.trace.display()))?;
            let model = a.model.build()?;
            let cfg = VerifyConfig {
                method: a.method,
                delta: a.delta,
                l0: a.l_init,
                aggressive_l: a.aggressive_l,
                d: a.d,
                ..VerifyConfig::new(a.eps)
            };
            let out = unigrad::harness::verify_trace(&trace, &problem, model.as_ref(), &cfg)?;
            print(&out)?;
            Ok(out.violations.is_empty() && out.bound.as_ref().is_none_or(|b| b.pass))
        }
        Command::Benchmark(a) => {
            let problem = load_problem(&a.problem)?;
            let mut plan = BenchmarkPlan::new(a.methods, a.eps);
            plan.base.delta = a.delta;
            if let Some(l0) = a.l0 {
                plan.base.l0 = l0;
            }
            if let Some(n) = a.max_iters {
                plan.base.max_iters = n;
            }
            fs::create_dir_all(&a.out)?;
            plan.out_dir = Some(a.out.clone());
            let cells = run_benchmark(&problem, &plan)?;
            let mut clean = true;
            for c in &cells {
                let status = match (&c.error, c.violations.len()) {
                    (Some(e), _) => format!("error: {e}"),
                    (None, 0) => "ok".to_string(),
                    (None, n) => format!("{n} violations"),
                };
                clean &= c.error.is_none() && c.violations.is_empty() && c.bound.as_ref().is_none_or(|b| b.pass);
                emit(&format!(
                    "{:<5} eps={:<8e} achieved={:<8} sufficient={:<10} {status}",
                    c.method,
                    c.eps,
                    c.achieved_k.map_or("-".into(), |k| k.to_string()),
                    c.sufficient_k.map_or("-".into(), |k| k.to_string()),
                ))?;
            }
            eprintln!("report: {}", a.out.join("report.json").display());
            Ok(clean)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
