//! Closed-form prox subproblems, the gradient mapping over `Q` and the Bregman mapping over `dom Ψ`.
//!
//! Supported `(prox, Ψ)` pairs:
//!
//! | prox                       | metric `B`   | Ψ                            |
//! |----------------------------|--------------|------------------------------|
//! | `½‖y - z‖²`                | any          | zero, ball                   |
//! | `½‖y - z‖²`                | diagonal     | l1, box                      |
//! | `½‖y - z‖²`                | `cI`         | simplex                      |
//! | entropy                    | `I`          | simplex (zero and l1 are constant on it) |
//!
//! Anything else is a [`Error::Capability`]; there is no inner iterative solver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, Metric};
use crate::problems::{CompositeProblem, ProxGeometry, ProxKind, PsiSpec};

const PROBE_SEED: u64 = 0x0005_eed0_ff0b;
const RANDOM_PROBES: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct MappingResult {
    pub point_t: Vec<f64>,
    /// `g_M(x̄) = M B(x̄ - T)`; empty for the Bregman mapping.
    pub mapped_gradient: Vec<f64>,
    /// `ψ*_M(x)`; NaN for the gradient mapping.
    pub model_value: f64,
    pub step_m: f64,
    pub fop_residual: f64,
}

pub fn soft_threshold(v: f64, level: f64) -> f64 {
    if v > level {
        v - level
    } else if v < -level {
        v + level
    } else {
        0.0
    }
}

pub fn project_box(x: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    x.iter().zip(lo.iter().zip(hi)).map(|(v, (l, h))| v.clamp(*l, *h)).collect()
}

/// Projection onto `{y : ‖y - center‖ ≤ radius}` in the metric's own norm (radial scaling).
pub fn project_ball(x: &[f64], center: &[f64], radius: f64, metric: &Metric) -> Vec<f64> {
    let d = linalg::sub(x, center);
    let r = metric.norm(&d);
    if r <= radius {
        return x.to_vec();
    }
    let s = radius / r;
    center.iter().zip(&d).map(|(c, di)| c + s * di).collect()
}

/// Euclidean projection onto the standard simplex by sorting; ties keep index order.
pub fn project_simplex(x: &[f64]) -> Vec<f64> {
    let mut u = x.to_vec();
    // stable sort, descending
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    x.iter().map(|v| (v - theta).max(0.0)).collect()
}

/// `argmin_y ⟨c, y⟩ + M β_d(z, y) + w Ψ(y)`.
///
/// Indicators are enforced for every `w ≥ 0` (the convention `0·ι = ι`).
pub fn solve_composite_prox(
    geometry: &ProxGeometry,
    psi: &PsiSpec,
    z: &[f64],
    c: &[f64],
    m: f64,
    w: f64,
) -> Result<Vec<f64>> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Domain(format!("prox weight M must be positive, got {m}")));
    }
    if !(w >= 0.0) {
        return Err(Error::Domain(format!("Ψ weight must be non-negative, got {w}")));
    }
    let n = z.len();
    match geometry.prox {
        ProxKind::EuclideanHalfSquare => {
            let metric = &geometry.metric;
            let step = metric.solve(c);
            let u: Vec<f64> = z.iter().zip(&step).map(|(zi, si)| zi - si / m).collect();
            match psi {
                PsiSpec::Zero => Ok(u),
                PsiSpec::IndicatorBall { center, radius } => Ok(project_ball(&u, center, *radius, metric)),
                PsiSpec::L1 { lambda } => {
                    let b = metric
                        .diagonal_weights(n)
                        .ok_or_else(|| unsupported("l1 with a non-diagonal metric"))?;
                    Ok(u.iter().zip(&b).map(|(ui, bi)| soft_threshold(*ui, w * lambda / (m * bi))).collect())
                }
                PsiSpec::IndicatorBox { lo, hi } => {
                    metric
                        .diagonal_weights(n)
                        .ok_or_else(|| unsupported("box with a non-diagonal metric"))?;
                    Ok(project_box(&u, lo, hi))
                }
                PsiSpec::IndicatorSimplex => {
                    metric.scalar().ok_or_else(|| unsupported("simplex with a non-scalar metric"))?;
                    Ok(project_simplex(&u))
                }
            }
        }
        ProxKind::EntropyOnSimplex => match psi {
            // Σ|yᵢ| = 1 on the simplex, so l1 only shifts the objective
            PsiSpec::Zero | PsiSpec::IndicatorSimplex | PsiSpec::L1 { .. } => {
                let logits: Vec<f64> = z
                    .iter()
                    .zip(c)
                    .map(|(zi, ci)| if *zi > 0.0 { zi.ln() - ci / m } else { f64::NEG_INFINITY })
                    .collect();
                let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if !top.is_finite() {
                    return Err(Error::Numerical {
                        message: "entropy prox center has no positive entry".into(),
                        residual: f64::NAN,
                    });
                }
                let e: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
                let s: f64 = e.iter().sum();
                Ok(e.iter().map(|v| v / s).collect())
            }
            other => Err(unsupported(&format!("entropy prox with Ψ = {other}"))),
        },
    }
}

fn unsupported(what: &str) -> Error {
    Error::Capability(format!("no closed-form prox for {what}"))
}

/// Gradient mapping over `Q`: `T = argmin_{y∈Q} ⟨∇f(x̄), y - x̄⟩ + (M/2)‖y - x̄‖²`.
pub fn gradient_mapping(problem: &CompositeProblem, x_bar: &[f64], m: f64) -> Result<MappingResult> {
    let (_, grad) = problem.f.eval(x_bar);
    gradient_mapping_with(problem, x_bar, &grad, m)
}

pub(crate) fn gradient_mapping_with(
    problem: &CompositeProblem,
    x_bar: &[f64],
    grad: &[f64],
    m: f64,
) -> Result<MappingResult> {
    if !linalg::all_finite(grad) {
        return Err(Error::Oracle { point: x_bar.to_vec() });
    }
    let metric = problem.metric().clone();
    let geo = ProxGeometry {
        metric: metric.clone(),
        prox: ProxKind::EuclideanHalfSquare,
        center: x_bar.to_vec(),
    };
    let q = problem.q_set.as_psi();
    let t = solve_composite_prox(&geo, &q, x_bar, grad, m, 1.0)?;
    let g = linalg::scale(&metric.apply(&linalg::sub(x_bar, &t)), m);
    let fop_residual = fop_violation(&geo, &q, x_bar, grad, m, &t, &problem.sample_box);
    Ok(MappingResult {
        point_t: t,
        mapped_gradient: g,
        model_value: f64::NAN,
        step_m: m,
        fop_residual,
    })
}

/// Bregman mapping `B_M(x) = argmin_y ⟨∇f(x), y - x⟩ + M β_d(x, y) + Ψ(y)`.
pub fn bregman_mapping(problem: &CompositeProblem, x: &[f64], m: f64) -> Result<MappingResult> {
    let (fx, grad) = problem.f.eval(x);
    if !fx.is_finite() || !linalg::all_finite(&grad) {
        return Err(Error::Oracle { point: x.to_vec() });
    }
    bregman_mapping_with(problem, x, fx, &grad, m)
}

pub(crate) fn bregman_mapping_with(
    problem: &CompositeProblem,
    x: &[f64],
    fx: f64,
    grad: &[f64],
    m: f64,
) -> Result<MappingResult> {
    let geo = &problem.geometry;
    let t = solve_composite_prox(geo, &problem.psi, x, grad, m, 1.0)?;
    let model_value = fx
        + linalg::dot(grad, &linalg::sub(&t, x))
        + m * geo.bregman(x, &t)
        + problem.psi.value(&t, &geo.metric);
    let fop_residual = fop_violation(geo, &problem.psi, x, grad, m, &t, &problem.sample_box);
    Ok(MappingResult {
        point_t: t,
        mapped_gradient: Vec::new(),
        model_value,
        step_m: m,
        fop_residual,
    })
}

/// Largest violation over a probe set of
/// `⟨c + M(∇d(T) - ∇d(z)), y - T⟩ + Ψ(y) ≥ Ψ(T)` for `y ∈ dom Ψ`,
/// where `d` is centered anywhere (only the gradient difference matters).
fn fop_violation(
    geo: &ProxGeometry,
    psi: &PsiSpec,
    z: &[f64],
    c: &[f64],
    m: f64,
    t: &[f64],
    sample_box: &(Vec<f64>, Vec<f64>),
) -> f64 {
    let grad_d = |x: &[f64]| -> Vec<f64> {
        match geo.prox {
            ProxKind::EuclideanHalfSquare => geo.metric.apply(x),
            ProxKind::EntropyOnSimplex => x.iter().map(|v| v.max(1e-300).ln() + 1.0).collect(),
        }
    };
    let dt = grad_d(t);
    let dz = grad_d(z);
    let slope: Vec<f64> = c
        .iter()
        .zip(dt.iter().zip(&dz))
        .map(|(ci, (a, b))| ci + m * (a - b))
        .collect();
    let psi_t = psi.value(t, &geo.metric);
    let scale = 1.0 + linalg::norm_inf(c) + m * linalg::norm_inf(t);
    let mut worst = 0.0f64;
    for y in feasible_probes(psi, t, &geo.metric, sample_box) {
        let rhs = linalg::dot(&slope, &linalg::sub(&y, t)) + psi.value(&y, &geo.metric);
        if rhs.is_finite() {
            worst = worst.max((psi_t - rhs) / scale);
        }
    }
    worst
}

/// Coordinate steps `T ± h eᵢ` and random points, all mapped into `dom Ψ`.
fn feasible_probes(psi: &PsiSpec, t: &[f64], metric: &Metric, sample_box: &(Vec<f64>, Vec<f64>)) -> Vec<Vec<f64>> {
    let n = t.len();
    let into = |y: Vec<f64>| match psi {
        PsiSpec::IndicatorBox { lo, hi } => project_box(&y, lo, hi),
        PsiSpec::IndicatorBall { center, radius } => project_ball(&y, center, *radius, metric),
        PsiSpec::IndicatorSimplex => project_simplex(&y),
        _ => y,
    };
    let h = 1e-3 * (1.0 + linalg::norm_inf(t));
    let mut out = Vec::with_capacity(2 * n + RANDOM_PROBES);
    for i in 0..n {
        for s in [h, -h] {
            let mut y = t.to_vec();
            y[i] += s;
            out.push(into(y));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    let (lo, hi) = sample_box;
    for _ in 0..RANDOM_PROBES {
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let (a, b) = (lo[i].min(t[i] - 1.0), hi[i].max(t[i] + 1.0));
                rng.random_range(a..=b)
            })
            .collect();
        out.push(into(y));
    }
    out
}

/// Lower estimate of the first-order stationarity of `T = T_M(x̄)` over `probes ⊆ Q`:
///
/// `min_x ⟨∇f(T), x - T⟩ + (3/2)ε + (2/M)‖g_M(x̄)‖*² + 2M‖x - T‖²`.
///
/// A non-negative value certifies the inequality on the probe set. The guarantee
/// behind it needs `M ≥ γ̂_f(ε)`; see [`certificate_precondition`].
pub fn stationarity_certificate(
    problem: &CompositeProblem,
    x_bar: &[f64],
    m: f64,
    eps: f64,
    probes: &[Vec<f64>],
) -> Result<f64> {
    let map = gradient_mapping(problem, x_bar, m)?;
    let t = &map.point_t;
    let (_, grad_t) = problem.f.eval(t);
    let metric = problem.metric();
    let g_sq = metric.dual_norm_sq(&map.mapped_gradient);
    let mut best = f64::INFINITY;
    for x in probes {
        if x.len() != problem.dim || !problem.q_set.contains(x, metric) {
            return Err(Error::Domain(format!("probe {x:?} lies outside Q")));
        }
        let d = linalg::sub(x, t);
        let v = linalg::dot(&grad_t, &d) + 1.5 * eps + 2.0 / m * g_sq + 2.0 * m * metric.norm_sq(&d);
        best = best.min(v);
    }
    Ok(best)
}

/// `Some(M ≥ γ̂_f(ε))` when the problem carries a curvature model, `None` otherwise.
pub fn certificate_precondition(problem: &CompositeProblem, m: f64, eps: f64) -> Option<bool> {
    let model = problem.known_model.as_ref()?;
    if !(eps > 0.0) {
        return None;
    }
    let g = model.gamma_hat(eps).ok()?;
    Some(m >= g * (1.0 - 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{builtin_problem, Params, ProblemSpec};
    use serde_json::json;

    fn quad(dim: usize) -> CompositeProblem {
        builtin_problem("quadratic", dim, json!({"L": 1.0}).as_object().unwrap()).unwrap()
    }

    #[test]
    fn soft_threshold_and_projections() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-0.5, 1.0), 0.0);
        assert_eq!(project_box(&[-2.0, 0.5, 3.0], &[0.0; 3], &[1.0; 3]), vec![0.0, 0.5, 1.0]);
        let p = project_simplex(&[0.5, 0.5, 0.5]);
        for v in &p {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(project_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        assert_eq!(project_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        let b = project_ball(&[3.0, 4.0], &[0.0, 0.0], 1.0, &Metric::Identity);
        assert!((b[0] - 0.6).abs() < 1e-15 && (b[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn composite_prox_examples() {
        let geo = ProxGeometry::euclidean(vec![0.0; 2]);
        let y = solve_composite_prox(&geo, &PsiSpec::Zero, &[1.0, 1.0], &[2.0, -4.0], 2.0, 1.0).unwrap();
        assert_eq!(y, vec![0.0, 3.0]);
        let y = solve_composite_prox(&geo, &PsiSpec::L1 { lambda: 1.0 }, &[1.0, 1.0], &[2.0, -4.0], 2.0, 1.0).unwrap();
        // soft(z - c/M, λ/M)
        assert_eq!(y, vec![0.0, 2.5]);

        let ent = ProxGeometry::entropy(vec![1.0 / 3.0; 3]).unwrap();
        let z = [0.2, 0.3, 0.5];
        let c = [1.0, 0.0, -1.0];
        let y = solve_composite_prox(&ent, &PsiSpec::IndicatorSimplex, &z, &c, 2.0, 1.0).unwrap();
        let raw: Vec<f64> = z.iter().zip(&c).map(|(zi, ci)| zi * (-ci / 2.0f64).exp()).collect();
        let s: f64 = raw.iter().sum();
        for (a, b) in y.iter().zip(&raw) {
            assert!((a - b / s).abs() < 1e-15);
        }
    }

    #[test]
    fn dense_metric_rejects_box() {
        let m = Metric::dense(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let geo = ProxGeometry {
            metric: m,
            prox: ProxKind::EuclideanHalfSquare,
            center: vec![0.0; 2],
        };
        let psi = PsiSpec::IndicatorBox {
            lo: vec![0.0; 2],
            hi: vec![1.0; 2],
        };
        assert!(matches!(
            solve_composite_prox(&geo, &psi, &[0.0; 2], &[1.0; 2], 1.0, 1.0),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn gradient_mapping_unconstrained_and_box() {
        let p = quad(2);
        let r = gradient_mapping(&p, &[1.0, -2.0], 4.0).unwrap();
        assert_eq!(r.mapped_gradient, vec![1.0, -2.0]);
        assert_eq!(r.point_t, vec![0.75, -1.5]);

        let s = ProblemSpec::from_json(r#"{"problem":"quadratic","dim":1,"q":{"type":"box","lo":0,"hi":1}}"#)
            .unwrap()
            .build()
            .unwrap();
        let r = gradient_mapping(&s, &[0.0], 2.0).unwrap();
        assert_eq!((r.point_t[0], r.mapped_gradient[0]), (0.0, 0.0));
        assert!(r.fop_residual <= 1e-12);
    }

    #[test]
    fn bregman_mapping_example() {
        let p = quad(1);
        let r = bregman_mapping(&p, &[1.0], 1.0).unwrap();
        assert_eq!(r.point_t, vec![0.0]);
        assert_eq!(r.model_value, 0.0);

        let p = builtin_problem("l1_quadratic", 5, json!({"L": 2.0, "lambda": 0.1}).as_object().unwrap()).unwrap();
        let x = vec![0.3, -0.2, 0.05, 1.0, -1.0];
        let r = bregman_mapping(&p, &x, 3.0).unwrap();
        let (_, g) = p.f.eval(&x);
        for i in 0..5 {
            assert!((r.point_t[i] - soft_threshold(x[i] - g[i] / 3.0, 0.1 / 3.0)).abs() < 1e-15);
        }
        assert!(r.fop_residual <= 1e-12);
    }

    #[test]
    fn stationarity_examples() {
        let p = quad(1);
        let v = stationarity_certificate(&p, &[0.1], 1.0, 0.0, &[vec![1.0]]).unwrap();
        assert!((v - 2.02).abs() < 1e-12);
        let e = builtin_problem("example_1_1", 1, &Params::new()).unwrap();
        assert_eq!(certificate_precondition(&e, 1e6, 0.1), Some(true));
        assert_eq!(certificate_precondition(&e, 1e-6, 0.1), Some(false));

        let s = ProblemSpec::from_json(r#"{"problem":"quadratic","dim":1,"q":{"type":"box","lo":0,"hi":1}}"#)
            .unwrap()
            .build()
            .unwrap();
        assert!(matches!(
            stationarity_certificate(&s, &[0.5], 1.0, 0.1, &[vec![2.0]]),
            Err(Error::Domain(_))
        ));
    }
}
