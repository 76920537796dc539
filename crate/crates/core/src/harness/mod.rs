//! Complexity bounds, trace verification and benchmark sweeps.
//!
//! Bounds are stated in direct form, as "a curvature value at a shrinking radius is ≤ ε":
//!
//! * simple methods (PGM, DGM) after `k` iterations: `2 μ̂(2 √(D/k)) ≤ ε`;
//! * the fast method at iteration `k`: `(k+1) μ̂(2 (2/(k+1))^{3/2} √D) ≤ ε`;
//! * GGM stops within `N` iterations when `Δ₀ > N σ̂(2^{5/2} Δ₀ / (N δ))`.
//!
//! `sufficient_iterations` inverts them over the integers.

mod benchmark;
mod verify;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::curvature::{CurvatureModel, EmpiricalCurve};
use crate::error::{Error, Result};

pub use benchmark::{run_benchmark, BenchmarkCell, BenchmarkPlan};
pub use verify::{infer_method, verify_trace, VerifyConfig, VerifyOutcome, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMethod {
    Simple,
    Fast,
    Ggm,
}

impl FromStr for BoundMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "simple" => Ok(BoundMethod::Simple),
            "fast" => Ok(BoundMethod::Fast),
            "ggm" => Ok(BoundMethod::Ggm),
            other => Err(Error::Config(format!("unknown bound `{other}` (simple, fast, ggm)"))),
        }
    }
}

impl fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundMethod::Simple => "simple",
            BoundMethod::Fast => "fast",
            BoundMethod::Ggm => "ggm",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub method: BoundMethod,
    pub model: String,
    /// `D` for the convex bounds, `Δ₀` for GGM.
    pub d: f64,
    pub eps: f64,
    /// Bound evaluated at `sufficient_k` (the GGM right-hand side `N σ̂(…)` for GGM).
    pub bound_value_at_k: f64,
    pub sufficient_k: usize,
    pub achieved_k: Option<usize>,
    pub pass: bool,
}

impl BoundReport {
    pub fn new(
        model: &CurvatureModel,
        method: BoundMethod,
        d: f64,
        eps: f64,
        delta: Option<f64>,
        achieved_k: Option<usize>,
    ) -> Result<Self> {
        let k = sufficient_iterations(model, method, d, eps, delta)?;
        let bound_value_at_k = match method {
            BoundMethod::Simple => direct_bound_simple(model, d, k)?,
            BoundMethod::Fast => direct_bound_fast(model, d, k)?,
            BoundMethod::Ggm => ggm_bound_rhs(model, d, delta.unwrap_or(f64::NAN), k)?,
        };
        Ok(BoundReport {
            method,
            model: model.to_string(),
            d,
            eps,
            bound_value_at_k,
            sufficient_k: k,
            achieved_k,
            pass: achieved_k.is_none_or(|a| a <= k),
        })
    }
}

/// `2 μ̂(2 √(D/k))`
pub fn direct_bound_simple(model: &CurvatureModel, d: f64, k: usize) -> Result<f64> {
    check_d(d)?;
    if k == 0 {
        return Err(Error::Domain("the simple bound needs k ≥ 1".into()));
    }
    Ok(2.0 * model.mu_hat(2.0 * (d / k as f64).sqrt())?)
}

/// `(k+1) μ̂(2 (2/(k+1))^{3/2} √D)`
pub fn direct_bound_fast(model: &CurvatureModel, d: f64, k: usize) -> Result<f64> {
    check_d(d)?;
    let kp = k as f64 + 1.0;
    Ok(kp * model.mu_hat(2.0 * (2.0 / kp).powf(1.5) * d.sqrt())?)
}

/// `N σ̂(2^{5/2} Δ₀ / (N δ))`; GGM is guaranteed to stop within `N` iterations once `Δ₀` exceeds it.
pub fn ggm_bound_rhs(model: &CurvatureModel, delta0: f64, delta: f64, n: usize) -> Result<f64> {
    if !(delta0 > 0.0 && delta0.is_finite()) {
        return Err(Error::Domain(format!("Δ₀ must be positive, got {delta0}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!("δ must be positive, got {delta}")));
    }
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    let nf = n as f64;
    Ok(nf * model.sigma_hat(2f64.powf(2.5) * delta0 / (nf * delta))?)
}

fn check_d(d: f64) -> Result<()> {
    if d >= 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("D must be non-negative and finite, got {d}")))
    }
}

/// Relative slack in the bound comparisons, so that cases that hold with equality in exact
/// arithmetic (e.g. `4 μ̂(2^{-1/2}) = 1` for `μ̂ = t²/2`) are decided as in exact arithmetic.
pub const BOUND_REL_TOL: f64 = 1e-12;

/// Smallest `k` whose direct bound certifies `eps` (smallest `N` for GGM).
///
/// Exponential search followed by bisection; radii outside the model's domain count as
/// "not yet satisfied".
pub fn sufficient_iterations(
    model: &CurvatureModel,
    method: BoundMethod,
    d_or_delta0: f64,
    eps: f64,
    delta: Option<f64>,
) -> Result<usize> {
    let delta = match method {
        BoundMethod::Ggm => {
            let delta = delta.ok_or_else(|| Error::Config("the GGM bound needs delta".into()))?;
            if !(d_or_delta0 > 0.0 && d_or_delta0.is_finite() && delta > 0.0 && delta.is_finite()) {
                return Err(Error::Domain(format!("need Δ₀ > 0 and δ > 0, got {d_or_delta0}, {delta}")));
            }
            delta
        }
        _ => {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::Domain(format!("eps must be positive, got {eps}")));
            }
            check_d(d_or_delta0)?;
            f64::NAN
        }
    };
    // inputs are valid from here on, so a domain error means the radius left Γ
    let holds = |k: usize| -> Result<bool> {
        let r = match method {
            BoundMethod::Simple => direct_bound_simple(model, d_or_delta0, k).map(|v| v <= eps * (1.0 + BOUND_REL_TOL)),
            BoundMethod::Fast => direct_bound_fast(model, d_or_delta0, k).map(|v| v <= eps * (1.0 + BOUND_REL_TOL)),
            BoundMethod::Ggm => {
                ggm_bound_rhs(model, d_or_delta0, delta, k).map(|v| d_or_delta0 > v * (1.0 + BOUND_REL_TOL))
            }
        };
        match r {
            Err(Error::Domain(_)) => Ok(false),
            r => r,
        }
    };
    let first = if method == BoundMethod::Fast { 0 } else { 1 };
    if holds(first)? {
        return Ok(first);
    }
    let mut lo = first;
    let mut hi = first.max(1);
    loop {
        if holds(hi)? {
            break;
        }
        lo = hi;
        if hi >= 1 << 52 {
            return Err(Error::Unattainable {
                eps,
                reason: format!("{method} bound not reached for k up to 2^52"),
            });
        }
        hi *= 2;
    }
    // holds(hi), !holds(lo)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if holds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Curvature models reachable by name from the command line.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModelArgs {
    pub nu: Option<f64>,
    pub l: Option<f64>,
    pub l0: Option<f64>,
    pub l1: Option<f64>,
    pub dim: Option<usize>,
    pub curve: Option<EmpiricalCurve>,
    pub diameter: Option<f64>,
}

/// `quadratic` (`l`), `hoelder` (`nu`, `l`), `sum` (`l0 t + ½ l1 t²`), `example_1_1`
/// (the catalog model in dimension `dim`), `curve` (a tabulated estimate).
pub fn named_model(name: &str, args: &ModelArgs) -> Result<CurvatureModel> {
    let need = |v: Option<f64>, what: &str| v.ok_or_else(|| Error::Config(format!("model `{name}` needs --{what}")));
    let model = match name {
        "quadratic" => CurvatureModel::quadratic(args.l.unwrap_or(1.0))?,
        "hoelder" => CurvatureModel::hoelder(need(args.nu, "nu")?, args.l.unwrap_or(1.0))?,
        "sum" => CurvatureModel::sum_class(need(args.l0, "l0")?, need(args.l1, "l1")?)?,
        "example_1_1" => crate::problems::builtin_problem("example_1_1", args.dim.unwrap_or(1), &Default::default())?
            .known_model
            .expect("catalog entry carries a model"),
        "curve" => CurvatureModel::empirical(
            args.curve
                .clone()
                .ok_or_else(|| Error::Config("model `curve` needs --curve".into()))?,
        )?,
        other => {
            return Err(Error::Config(format!(
                "unknown model `{other}` (quadratic, hoelder, sum, example_1_1, curve)"
            )))
        }
    };
    Ok(match args.diameter {
        Some(d) => model.with_diameter(d),
        None => model,
    })
}
