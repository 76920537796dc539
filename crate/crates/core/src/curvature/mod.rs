//! Global curvature bound `μ̂(t)` and the quantities derived from it.
//!
//! `μ̂(t)` is the supremum of `|αf(x) + (1-α)f(y) - f(αx + (1-α)y)| / (α(1-α))`
//! over pairs with `‖x - y‖ ≤ t`. Everything else here is a functional of it:
//!
//! * `σ̂(r) = ∫₀ʳ μ̂(τ)/τ dτ`
//! * `δ⁺(r) = 2σ̂(r) - μ̂(r)` and `L_f(r) = 2μ̂(r)/r²`, the shift and slope of the
//!   quadratic upper bound `|β_f(x, y)| ≤ δ⁺(r) + ½ L_f(r) ‖y - x‖²`
//! * the complexity gauges `s_f = μ̂⁻¹` and `ŝ_f = σ̂⁻¹`
//! * `γ_f(t) = t / s_f²(t/2)` and `γ̂_f(t) = 2t / ŝ_f²(t/2)`
//!
//! Analytic models use the integral bound `μ̂(t) ≤ ∫₀ᵗ μ̂₁(τ) dτ`, so a gradient that is
//! Hölder with exponent `ν` and constant `L_ν` gives `μ̂(t) ≤ L_ν t^{1+ν} / (1+ν)`.
//! (A looser variant without the `1/(1+ν)` factor also appears in the literature; it
//! is not used here.)

mod estimate;

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use estimate::estimate_gcb;

/// Tolerances for inverting `μ̂` and `σ̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeConfig {
    pub rel_tol: f64,
    pub max_bisection_steps: usize,
}

impl Default for GaugeConfig {
    fn default() -> Self {
        GaugeConfig {
            rel_tol: 1e-10,
            max_bisection_steps: 200,
        }
    }
}

impl GaugeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::Config("rel_tol must be positive".into()));
        }
        Ok(())
    }
}

/// A sampled lower estimate of `μ̂` on an ascending grid starting at `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCurve {
    pub t_grid: Vec<f64>,
    pub mu_values: Vec<f64>,
    pub sample_budget: usize,
    pub seed: u64,
}

impl EmpiricalCurve {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "mu_hat"]).map_err(csv_err)?;
        for (t, m) in self.t_grid.iter().zip(&self.mu_values) {
            wr.write_record([t.to_string(), m.to_string()]).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads a `t,mu_hat` table. Budget and seed are not stored in the file.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let headers = rd.headers().map_err(csv_err)?.clone();
        if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "mu_hat" {
            return Err(Error::Parse {
                row: 0,
                message: format!("expected header `t,mu_hat`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut t_grid = Vec::new();
        let mut mu_values = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|e| Error::Parse {
                    row: i + 1,
                    message: e.to_string(),
                })
            };
            t_grid.push(parse(&rec[0])?);
            mu_values.push(parse(&rec[1])?);
        }
        Ok(EmpiricalCurve {
            t_grid,
            mu_values,
            sample_budget: 0,
            seed: 0,
        })
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse {
        row,
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurvatureKind {
    /// `μ̂(t) = ½ L t²`
    Quadratic { l: f64 },
    /// `μ̂(t) = L_ν t^{1+ν} / (1+ν)`
    Hoelder { nu: f64, l: f64 },
    Sum(Vec<CurvatureModel>),
    Empirical(EmpiricalCurve),
    /// Monotone table of `(t, μ̂(t))`, interpolated piecewise-linearly.
    Custom(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureModel {
    pub kind: CurvatureKind,
    /// Diameter of `dom f`; `Γ = [0, diameter]`.
    pub diameter: f64,
    /// `f` convex with `dom f = E`.
    pub convex_full_domain: bool,
}

impl CurvatureModel {
    pub fn quadratic(l: f64) -> Result<Self> {
        if !(l >= 0.0 && l.is_finite()) {
            return Err(Error::Config(format!("quadratic constant must be non-negative, got {l}")));
        }
        Ok(Self::analytic(CurvatureKind::Quadratic { l }))
    }

    pub fn hoelder(nu: f64, l: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&nu) {
            return Err(Error::Config(format!("Hölder exponent must lie in [0, 1], got {nu}")));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Config(format!("Hölder constant must be positive, got {l}")));
        }
        Ok(Self::analytic(CurvatureKind::Hoelder { nu, l }))
    }

    pub fn sum(members: Vec<CurvatureModel>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Config("sum model needs at least one member".into()));
        }
        let diameter = members.iter().map(|m| m.effective_diameter()).fold(f64::INFINITY, f64::min);
        let convex = members.iter().all(|m| m.convex_full_domain);
        Ok(CurvatureModel {
            kind: CurvatureKind::Sum(members),
            diameter,
            convex_full_domain: convex,
        })
    }

    /// `L₀ t + ½ L₁ t²`, the bound for a sum of a Lipschitz and a smooth function.
    pub fn sum_class(l0: f64, l1: f64) -> Result<Self> {
        Self::sum(vec![Self::hoelder(0.0, l0)?, Self::quadratic(l1)?])
    }

    pub fn custom(table: Vec<(f64, f64)>) -> Result<Self> {
        let table = normalize_table(table)?;
        let diameter = table.last().map(|p| p.0).unwrap_or(0.0);
        Ok(CurvatureModel {
            kind: CurvatureKind::Custom(table),
            diameter,
            convex_full_domain: false,
        })
    }

    pub fn empirical(curve: EmpiricalCurve) -> Result<Self> {
        if curve.t_grid.len() != curve.mu_values.len() {
            return Err(Error::Config("curve grid and values differ in length".into()));
        }
        let table = normalize_table(curve.t_grid.iter().copied().zip(curve.mu_values.iter().copied()).collect())?;
        let (t_grid, mu_values) = table.into_iter().unzip();
        let curve = EmpiricalCurve {
            t_grid,
            mu_values,
            ..curve
        };
        let diameter = *curve.t_grid.last().unwrap();
        Ok(CurvatureModel {
            kind: CurvatureKind::Empirical(curve),
            diameter,
            convex_full_domain: false,
        })
    }

    fn analytic(kind: CurvatureKind) -> Self {
        CurvatureModel {
            kind,
            diameter: f64::INFINITY,
            convex_full_domain: true,
        }
    }

    pub fn with_diameter(mut self, diameter: f64) -> Self {
        self.diameter = diameter;
        self
    }

    pub fn with_convexity(mut self, convex_full_domain: bool) -> Self {
        self.convex_full_domain = convex_full_domain;
        self
    }

    /// Upper end of `Γ`, taking tabulated ranges into account.
    pub fn effective_diameter(&self) -> f64 {
        let own = match &self.kind {
            CurvatureKind::Sum(ms) => ms.iter().map(|m| m.effective_diameter()).fold(f64::INFINITY, f64::min),
            CurvatureKind::Empirical(c) => *c.t_grid.last().unwrap_or(&0.0),
            CurvatureKind::Custom(t) => t.last().map(|p| p.0).unwrap_or(0.0),
            _ => f64::INFINITY,
        };
        own.min(self.diameter)
    }

    fn check_domain(&self, t: f64, what: &str) -> Result<()> {
        let d = self.effective_diameter();
        if !(t >= 0.0) || t.is_infinite() {
            return Err(Error::Domain(format!("{what}: argument {t} is not in [0, ∞)")));
        }
        if t > d * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("{what}: argument {t} exceeds the diameter {d}")));
        }
        Ok(())
    }

    /// `μ̂(t)`
    pub fn mu_hat(&self, t: f64) -> Result<f64> {
        self.check_domain(t, "mu_hat")?;
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(match &self.kind {
            CurvatureKind::Quadratic { l } => 0.5 * l * t * t,
            CurvatureKind::Hoelder { nu, l } => l * t.powf(1.0 + nu) / (1.0 + nu),
            CurvatureKind::Sum(ms) => {
                let mut s = 0.0;
                for m in ms {
                    s += m.mu_hat(t)?;
                }
                s
            }
            CurvatureKind::Empirical(c) => interp(&c.t_grid, &c.mu_values, t),
            CurvatureKind::Custom(tab) => {
                let (ts, vs): (Vec<f64>, Vec<f64>) = tab.iter().copied().unzip();
                interp(&ts, &vs, t)
            }
        })
    }

    /// `σ̂(r) = ∫₀ʳ μ̂(τ)/τ dτ`
    pub fn sigma_hat(&self, r: f64) -> Result<f64> {
        self.check_domain(r, "sigma_hat")?;
        if r == 0.0 {
            return Ok(0.0);
        }
        Ok(match &self.kind {
            CurvatureKind::Quadratic { l } => 0.25 * l * r * r,
            CurvatureKind::Hoelder { nu, l } => l * r.powf(1.0 + nu) / ((1.0 + nu) * (1.0 + nu)),
            CurvatureKind::Sum(ms) => {
                let mut s = 0.0;
                for m in ms {
                    s += m.sigma_hat(r)?;
                }
                s
            }
            CurvatureKind::Empirical(c) => integrate_over_t(&c.t_grid, &c.mu_values, r),
            CurvatureKind::Custom(tab) => {
                let (ts, vs): (Vec<f64>, Vec<f64>) = tab.iter().copied().unzip();
                integrate_over_t(&ts, &vs, r)
            }
        })
    }

    /// `(δ⁺(r), L_f(r))`
    pub fn delta_plus_and_lip(&self, r: f64) -> Result<(f64, f64)> {
        if r == 0.0 {
            return Err(Error::Domain("L_f(r) is singular at r = 0".into()));
        }
        let mu = self.mu_hat(r)?;
        let sigma = self.sigma_hat(r)?;
        // δ⁺ ≥ 0 holds exactly; clamp rounding noise
        let delta = (2.0 * sigma - mu).max(0.0);
        Ok((delta, 2.0 * mu / (r * r)))
    }

    /// Complexity gauge `s_f(ε)`: the `r` with `μ̂(r) = ε`.
    pub fn invert_mu(&self, eps: f64, cfg: &GaugeConfig) -> Result<f64> {
        cfg.validate()?;
        let closed = match &self.kind {
            CurvatureKind::Quadratic { l } if *l > 0.0 => Some((2.0 * eps / l).sqrt()),
            CurvatureKind::Hoelder { nu, l } => Some(((1.0 + nu) * eps / l).powf(1.0 / (1.0 + nu))),
            _ => None,
        };
        self.invert(eps, cfg, closed, "mu_hat", |r| self.mu_hat(r))
    }

    /// `ŝ_f(ε)`: the `r` with `σ̂(r) = ε`.
    pub fn invert_sigma(&self, eps: f64, cfg: &GaugeConfig) -> Result<f64> {
        cfg.validate()?;
        let closed = match &self.kind {
            CurvatureKind::Quadratic { l } if *l > 0.0 => Some(2.0 * (eps / l).sqrt()),
            CurvatureKind::Hoelder { nu, l } => {
                Some(((1.0 + nu) * (1.0 + nu) * eps / l).powf(1.0 / (1.0 + nu)))
            }
            _ => None,
        };
        self.invert(eps, cfg, closed, "sigma_hat", |r| self.sigma_hat(r))
    }

    fn invert(
        &self,
        eps: f64,
        cfg: &GaugeConfig,
        closed: Option<f64>,
        what: &str,
        f: impl Fn(f64) -> Result<f64>,
    ) -> Result<f64> {
        if !(eps >= 0.0) || eps.is_infinite() {
            return Err(Error::Domain(format!("cannot invert {what} at {eps}")));
        }
        if eps == 0.0 {
            return Ok(0.0);
        }
        let upper = self.effective_diameter();
        if let Some(r) = closed {
            if r > upper * (1.0 + 1e-12) {
                return Err(Error::Unattainable {
                    eps,
                    reason: format!("{what}(diameter = {upper}) is below the target"),
                });
            }
            return Ok(r.min(upper));
        }
        bisect_monotone(f, eps, upper, cfg, what)
    }

    /// `γ_f(t) = t / s_f²(t/2)`
    pub fn gamma_simple(&self, t: f64) -> Result<f64> {
        self.gamma_simple_with(t, &GaugeConfig::default())
    }

    pub fn gamma_simple_with(&self, t: f64, cfg: &GaugeConfig) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("gamma_f needs t > 0, got {t}")));
        }
        if let CurvatureKind::Quadratic { l } = self.kind {
            if l > 0.0 {
                return Ok(l);
            }
        }
        let s = self.invert_mu(0.5 * t, cfg)?;
        Ok(t / (s * s))
    }

    /// `γ̂_f(t) = 2t / ŝ_f²(t/2)`
    pub fn gamma_hat(&self, t: f64) -> Result<f64> {
        self.gamma_hat_with(t, &GaugeConfig::default())
    }

    pub fn gamma_hat_with(&self, t: f64, cfg: &GaugeConfig) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("gamma_hat needs t > 0, got {t}")));
        }
        if let CurvatureKind::Quadratic { l } = self.kind {
            if l > 0.0 {
                return Ok(l);
            }
        }
        let s = self.invert_sigma(0.5 * t, cfg)?;
        Ok(2.0 * t / (s * s))
    }
}

impl fmt::Display for CurvatureModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            CurvatureKind::Quadratic { l } => write!(f, "quadratic(L={l})"),
            CurvatureKind::Hoelder { nu, l } => write!(f, "hoelder(nu={nu}, L={l})"),
            CurvatureKind::Sum(ms) => {
                write!(f, "sum[")?;
                for (i, m) in ms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{m}")?;
                }
                write!(f, "]")
            }
            CurvatureKind::Empirical(c) => write!(f, "empirical({} points, seed {})", c.t_grid.len(), c.seed),
            CurvatureKind::Custom(t) => write!(f, "custom({} points)", t.len()),
        }
    }
}

/// Positive root of `L₀ r + ½ L₁ r² = ε`, written without cancellation.
pub fn sum_class_radius(l0: f64, l1: f64, eps: f64) -> Result<f64> {
    if !(l0 > 0.0) || !(l1 >= 0.0) || !(eps > 0.0) {
        return Err(Error::Domain(format!(
            "sum_class_radius needs L0 > 0, L1 ≥ 0, eps > 0 (got {l0}, {l1}, {eps})"
        )));
    }
    Ok(2.0 * eps / (l0 + (2.0 * eps * l1 + l0 * l0).sqrt()))
}

fn normalize_table(mut table: Vec<(f64, f64)>) -> Result<Vec<(f64, f64)>> {
    if table.is_empty() {
        return Err(Error::Config("curvature table is empty".into()));
    }
    if table.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
        return Err(Error::Config("curvature table contains non-finite entries".into()));
    }
    if table[0].0 > 0.0 {
        table.insert(0, (0.0, 0.0));
    }
    if table[0].0 < 0.0 || table[0].1 != 0.0 {
        return Err(Error::Config("curvature table must start at (0, 0)".into()));
    }
    for w in table.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::Config("curvature table grid must be strictly ascending".into()));
        }
        if w[1].1 < w[0].1 {
            return Err(Error::Config("curvature table values must be non-decreasing".into()));
        }
    }
    if table.len() < 2 {
        return Err(Error::Config("curvature table needs a point beyond t = 0".into()));
    }
    Ok(table)
}

fn segment(ts: &[f64], t: f64) -> usize {
    // index j with ts[j] ≤ t ≤ ts[j+1]
    let j = ts.partition_point(|&x| x <= t);
    j.saturating_sub(1).min(ts.len() - 2)
}

fn interp(ts: &[f64], vs: &[f64], t: f64) -> f64 {
    let j = segment(ts, t);
    let (t0, t1, v0, v1) = (ts[j], ts[j + 1], vs[j], vs[j + 1]);
    let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
    v0 + w * (v1 - v0)
}

/// `∫ (a + bτ)/τ dτ` on one piece of a piecewise-linear `μ̂`.
fn piece_integral(t0: f64, t1: f64, v0: f64, v1: f64, upto: f64) -> f64 {
    let b = (v1 - v0) / (t1 - t0);
    let a = v0 - b * t0;
    if t0 == 0.0 {
        // μ̂(0) = 0 forces a = 0 on the first piece
        b * upto
    } else {
        a * (upto / t0).ln() + b * (upto - t0)
    }
}

fn integrate_over_t(ts: &[f64], vs: &[f64], r: f64) -> f64 {
    let mut total = 0.0;
    for j in 0..ts.len() - 1 {
        let (t0, t1) = (ts[j], ts[j + 1]);
        if t0 >= r {
            break;
        }
        total += piece_integral(t0, t1, vs[j], vs[j + 1], r.min(t1));
    }
    total
}

/// Bracket by doubling from `rel_tol`, then bisect a non-decreasing function.
fn bisect_monotone(
    f: impl Fn(f64) -> Result<f64>,
    eps: f64,
    upper: f64,
    cfg: &GaugeConfig,
    what: &str,
) -> Result<f64> {
    let close = |v: f64| (v - eps).abs() <= cfg.rel_tol * eps;
    if upper.is_finite() {
        let top = f(upper)?;
        if top < eps && !close(top) {
            return Err(Error::Unattainable {
                eps,
                reason: format!("{what}({upper}) = {top} is below the target"),
            });
        }
    }
    let mut lo = 0.0;
    let mut hi = cfg.rel_tol;
    loop {
        if hi >= upper {
            hi = upper;
            break;
        }
        let v = f(hi)?;
        if close(v) {
            return Ok(hi);
        }
        if v > eps {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Unattainable {
                eps,
                reason: format!("{what} stays below the target on [0, 1e300]"),
            });
        }
    }
    let mut best = hi;
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_bisection_steps {
        let mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        let res = (v - eps).abs();
        if res < residual {
            residual = res;
            best = mid;
        }
        if close(v) {
            return Ok(mid);
        }
        if v < eps {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let v_hi = f(hi)?;
    if close(v_hi) {
        return Ok(hi);
    }
    Err(Error::Numerical {
        message: format!("inversion of {what} at {eps} did not converge (best r = {best})"),
        residual: residual / eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> GaugeConfig {
        GaugeConfig::default()
    }

    fn quadratic_table(l: f64, tmax: f64, n: usize) -> CurvatureModel {
        let table = (0..n)
            .map(|i| {
                let t = tmax * i as f64 / (n - 1) as f64;
                (t, 0.5 * l * t * t)
            })
            .collect();
        CurvatureModel::custom(table).unwrap()
    }

    #[test]
    fn mu_hat_examples() {
        assert_eq!(CurvatureModel::quadratic(2.0).unwrap().mu_hat(3.0).unwrap(), 9.0);
        assert_eq!(CurvatureModel::hoelder(1.0, 1.0).unwrap().mu_hat(2.0).unwrap(), 2.0);
        for m in [
            CurvatureModel::quadratic(2.0).unwrap(),
            CurvatureModel::hoelder(0.3, 1.0).unwrap(),
            quadratic_table(1.0, 2.0, 8),
        ] {
            assert_eq!(m.mu_hat(0.0).unwrap(), 0.0);
            assert_eq!(m.sigma_hat(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn mu_hat_errors() {
        let m = quadratic_table(1.0, 2.0, 8);
        assert!(matches!(m.mu_hat(2.5), Err(Error::Domain(_))));
        assert!(matches!(m.mu_hat(-1.0), Err(Error::Domain(_))));
        assert!(matches!(CurvatureModel::custom(vec![]), Err(Error::Config(_))));
        let finite = CurvatureModel::quadratic(1.0).unwrap().with_diameter(1.0);
        assert!(finite.mu_hat(1.5).is_err());
    }

    #[test]
    fn sigma_hat_examples() {
        assert_eq!(CurvatureModel::quadratic(4.0).unwrap().sigma_hat(1.0).unwrap(), 1.0);
        assert_relative_eq!(
            CurvatureModel::hoelder(0.5, 3.0).unwrap().sigma_hat(1.0).unwrap(),
            4.0 / 3.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn delta_plus_examples() {
        let (d, l) = CurvatureModel::quadratic(5.0).unwrap().delta_plus_and_lip(2.0).unwrap();
        assert_eq!((d, l), (0.0, 5.0));
        let (d, l) = CurvatureModel::hoelder(0.0, 1.0).unwrap().delta_plus_and_lip(2.0).unwrap();
        assert_eq!((d, l), (2.0, 1.0));
        assert!(matches!(
            CurvatureModel::quadratic(1.0).unwrap().delta_plus_and_lip(0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn tabulated_quadratic_matches_closed_form() {
        // 64 nodes on [0, 2]; linear interpolation of t²/2 overshoots by at most h²/8
        let m = quadratic_table(1.0, 2.0, 64);
        let h: f64 = 2.0 / 63.0;
        let (d, l) = m.delta_plus_and_lip(1.0).unwrap();
        assert!(d.abs() < 4.0 * h * h, "delta {d}");
        assert!((l - 1.0).abs() < h * h, "lip {l}");
        // exact σ̂ for a node-aligned r compared with brute-force midpoint quadrature
        let r = 40.0 * h;
        let n = 200_000;
        let dt = r / n as f64;
        let brute: f64 = (0..n)
            .map(|i| {
                let tau = (i as f64 + 0.5) * dt;
                m.mu_hat(tau).unwrap() / tau * dt
            })
            .sum();
        assert_relative_eq!(m.sigma_hat(r).unwrap(), brute, max_relative = 1e-8);
    }

    #[test]
    fn invert_mu_examples() {
        let q = CurvatureModel::quadratic(2.0).unwrap();
        assert_eq!(q.invert_mu(4.0, &cfg()).unwrap(), 2.0);
        let h = CurvatureModel::hoelder(0.0, 2.0).unwrap();
        assert_eq!(h.invert_mu(1.0, &cfg()).unwrap(), 0.5);
        let finite = CurvatureModel::quadratic(2.0).unwrap().with_diameter(1.0);
        assert!(matches!(finite.invert_mu(4.0, &cfg()), Err(Error::Unattainable { .. })));
        let flat = CurvatureModel::quadratic(0.0).unwrap();
        assert!(matches!(flat.invert_mu(1.0, &cfg()), Err(Error::Unattainable { .. })));
    }

    #[test]
    fn invert_sigma_examples() {
        assert_eq!(CurvatureModel::quadratic(4.0).unwrap().invert_sigma(9.0, &cfg()).unwrap(), 3.0);
        assert_eq!(CurvatureModel::hoelder(1.0, 1.0).unwrap().invert_sigma(1.0, &cfg()).unwrap(), 2.0);
    }

    #[test]
    fn bisection_agrees_with_closed_form() {
        let q = CurvatureModel::quadratic(3.0).unwrap();
        let table = quadratic_table(3.0, 4.0, 400);
        let sum = CurvatureModel::sum(vec![q.clone()]).unwrap();
        for eps in [1e-3, 0.1, 1.0, 5.0] {
            let exact = q.invert_mu(eps, &cfg()).unwrap();
            let bis = sum.invert_mu(eps, &cfg()).unwrap();
            assert_relative_eq!(bis, exact, max_relative = 1e-9);
            assert!((sum.mu_hat(bis).unwrap() - eps).abs() <= 1e-10 * eps);
            let tab = table.invert_mu(eps, &cfg()).unwrap();
            assert!((table.mu_hat(tab).unwrap() - eps).abs() <= 1e-10 * eps);
            // linear interpolation of t² is coarse relative to μ̂ on the first few cells
            if eps >= 0.1 {
                assert_relative_eq!(tab, exact, max_relative = 1e-3);
            }
            let ts = table.invert_sigma(eps, &cfg()).unwrap();
            assert!((table.sigma_hat(ts).unwrap() - eps).abs() <= 1e-10 * eps);
            if eps >= 0.1 {
                assert_relative_eq!(ts, q.invert_sigma(eps, &cfg()).unwrap(), max_relative = 1e-3);
            }
        }
    }

    #[test]
    fn gamma_examples() {
        for l in [0.5, 1.0, 7.0] {
            let q = CurvatureModel::quadratic(l).unwrap();
            let s = CurvatureModel::sum(vec![q.clone()]).unwrap();
            for t in [1e-4, 0.3, 10.0] {
                assert_eq!(q.gamma_simple(t).unwrap(), l);
                assert_eq!(q.gamma_hat(t).unwrap(), l);
                assert_relative_eq!(s.gamma_simple(t).unwrap(), l, max_relative = 1e-9);
                assert_relative_eq!(s.gamma_hat(t).unwrap(), l, max_relative = 1e-9);
            }
        }
        let h = CurvatureModel::hoelder(0.0, 2.0).unwrap();
        for t in [0.1, 1.0, 4.0] {
            assert_relative_eq!(h.gamma_simple(t).unwrap(), 4.0 * 4.0 / t, max_relative = 1e-14);
            assert_relative_eq!(h.gamma_hat(t).unwrap(), 8.0 * 4.0 / t, max_relative = 1e-14);
        }
        let table = quadratic_table(1.0, 2.0, 400);
        assert_relative_eq!(table.gamma_simple(0.1).unwrap(), 1.0, max_relative = 1e-2);
        assert_relative_eq!(table.gamma_hat(0.1).unwrap(), 1.0, max_relative = 1e-2);
    }

    #[test]
    fn sum_class_radius_examples() {
        assert_relative_eq!(
            sum_class_radius(1.0, 2.0, 1.0).unwrap(),
            0.6180339887498949,
            max_relative = 1e-14
        );
        assert_relative_eq!(sum_class_radius(1.0, 1e-300, 1.0).unwrap(), 1.0, max_relative = 1e-14);
        let r = sum_class_radius(0.5, 4.0, 2.0).unwrap();
        assert_relative_eq!(0.5 * r + 0.5 * 4.0 * r * r, 2.0, max_relative = 1e-14);
        assert!(sum_class_radius(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn curve_csv_round_trip() {
        let curve = EmpiricalCurve {
            t_grid: vec![0.0, 0.1, 0.30000000000000004, 1.0],
            mu_values: vec![0.0, 1e-20, 0.045, 0.5],
            sample_budget: 10,
            seed: 1,
        };
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"t,mu_hat\n"));
        let back = EmpiricalCurve::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.t_grid, curve.t_grid);
        assert_eq!(back.mu_values, curve.mu_values);
        assert!(EmpiricalCurve::read_csv("x,y\n1,2\n".as_bytes()).is_err());
    }
}
