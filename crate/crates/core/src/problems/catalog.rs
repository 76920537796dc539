//! Built-in problem instances.
//!
//! | name                | f                                   | default Ψ          |
//! |---------------------|-------------------------------------|--------------------|
//! | `quadratic`         | `½ Σ Lᵢ (xᵢ - cᵢ)²`                 | zero               |
//! | `hoelder`           | `L/(1+ν) Σ |xᵢ - cᵢ|^{1+ν}`          | zero               |
//! | `example_1_1`       | `Σ ½xᵢ² + ⅔|xᵢ|^{3/2}`              | zero               |
//! | `l1_quadratic`      | `½ L ‖x - c‖²`                      | `λ‖x‖₁`            |
//! | `box_quadratic`     | `½ L ‖x - c‖²`                      | box indicator      |
//! | `simplex_quadratic` | `½ L ‖x - c‖²`                      | simplex indicator  |
//! | `linear`            | `⟨c, x⟩`                            | zero               |
//! | `cosine`            | `Σ cos xᵢ` (nonconvex)              | zero               |
//!
//! Curvature models are stated for the Euclidean norm. For the separable power
//! `(L/(1+ν))|s|^{1+ν}` the derivative `L sign(s)|s|^ν` is Hölder with constant
//! `2^{1-ν} L`, and summing over `n` coordinates under `‖s‖₂ ≤ t` costs a factor
//! `n^{(1-ν)/2}`; the `hoelder` and `example_1_1` models carry both factors.

use std::f64::consts::PI;
use std::sync::Arc;

use serde_json::Value;

use super::functions::{Cosine, Linear, PowerSum, SeparableQuadratic, SmoothFunction, SumFunction};
use super::{CompositeProblem, KnownOptimum, ProxGeometry, ProxKind, PsiSpec, QSet};
use crate::curvature::CurvatureModel;
use crate::error::{Error, Result};
use crate::linalg::Metric;
use crate::mappings::{project_ball, project_box, project_simplex, soft_threshold};

pub type Params = serde_json::Map<String, Value>;

pub const CATALOG: &[&str] = &[
    "quadratic",
    "hoelder",
    "example_1_1",
    "l1_quadratic",
    "box_quadratic",
    "simplex_quadratic",
    "linear",
    "cosine",
];

#[derive(Debug, Clone)]
enum Smooth {
    Quadratic { curv: Vec<f64>, center: Vec<f64> },
    Power { nu: f64, l: f64, center: Vec<f64> },
    Example,
    Linear { c: Vec<f64> },
    Cosine,
}

/// Optional replacements applied on top of a catalog entry.
#[derive(Debug, Clone, Default)]
pub(crate) struct Overrides {
    pub psi: Option<PsiSpec>,
    pub q: Option<QSet>,
    pub x0: Option<Vec<f64>>,
    pub metric: Option<Metric>,
    pub prox: Option<ProxKind>,
}

pub fn builtin_problem(name: &str, dim: usize, params: &Params) -> Result<CompositeProblem> {
    build(name, dim, params, Overrides::default())
}

pub(crate) fn build(name: &str, dim: usize, params: &Params, ov: Overrides) -> Result<CompositeProblem> {
    if dim == 0 {
        return Err(Error::Config("dimension must be positive".into()));
    }
    let allowed: &[&str] = match name {
        "quadratic" => &["L", "curvatures", "center", "radius"],
        "hoelder" => &["nu", "L", "center", "radius"],
        "example_1_1" => &["radius"],
        "l1_quadratic" => &["L", "lambda", "center", "radius"],
        "box_quadratic" => &["L", "lo", "hi", "center", "radius"],
        "simplex_quadratic" => &["L", "center", "radius"],
        "linear" => &["c", "radius"],
        "cosine" => &["radius"],
        other => return Err(Error::Catalog(other.to_string())),
    };
    for key in params.keys() {
        let canonical = if key == "λ" || key == "l" { canon(key) } else { key.as_str() };
        if !allowed.contains(&canonical) {
            return Err(Error::Config(format!("unknown parameter `{key}` for problem `{name}`")));
        }
    }

    let l = num(params, "L", 1.0)?;
    let radius = num(params, "radius", 1.0)?;
    if !(radius > 0.0) {
        return Err(Error::Config("radius must be positive".into()));
    }
    let alternating = |i: usize| if i.is_multiple_of(2) { 1.0 } else { -1.0 };

    let (smooth, default_psi) = match name {
        "quadratic" => {
            let curv = match params.get("curvatures") {
                Some(_) => vector(params, "curvatures", dim, 0.0)?,
                None => vec![l; dim],
            };
            if curv.iter().any(|c| !(*c >= 0.0)) {
                return Err(Error::Config("curvatures must be non-negative".into()));
            }
            let center = vector(params, "center", dim, 0.0)?;
            (Smooth::Quadratic { curv, center }, PsiSpec::Zero)
        }
        "hoelder" => {
            let nu = num(params, "nu", 0.5)?;
            if !(0.0..=1.0).contains(&nu) {
                return Err(Error::Config(format!("nu must lie in [0, 1], got {nu}")));
            }
            let center = vector(params, "center", dim, 0.0)?;
            (Smooth::Power { nu, l, center }, PsiSpec::Zero)
        }
        "example_1_1" => (Smooth::Example, PsiSpec::Zero),
        "l1_quadratic" => {
            let lambda = num(params, "lambda", 0.1)?;
            let default: Vec<f64> = (0..dim).map(|i| alternating(i) * i as f64 / dim as f64).collect();
            let center = vector_or(params, "center", dim, default)?;
            (Smooth::Quadratic { curv: vec![l; dim], center }, PsiSpec::L1 { lambda })
        }
        "box_quadratic" => {
            let lo = vector(params, "lo", dim, 0.0)?;
            let hi = vector(params, "hi", dim, 1.0)?;
            let default: Vec<f64> = (0..dim).map(|i| 2.0 * i as f64 / dim as f64 - 0.5).collect();
            let center = vector_or(params, "center", dim, default)?;
            (
                Smooth::Quadratic { curv: vec![l; dim], center },
                PsiSpec::IndicatorBox { lo, hi },
            )
        }
        "simplex_quadratic" => {
            let default: Vec<f64> = (0..dim).map(|i| (i + 1) as f64 / dim as f64).collect();
            let center = vector_or(params, "center", dim, default)?;
            (Smooth::Quadratic { curv: vec![l; dim], center }, PsiSpec::IndicatorSimplex)
        }
        "linear" => {
            let c = vector(params, "c", dim, 1.0)?;
            (Smooth::Linear { c }, PsiSpec::Zero)
        }
        "cosine" => (Smooth::Cosine, PsiSpec::Zero),
        _ => unreachable!(),
    };
    if l < 0.0 || (l == 0.0 && !matches!(smooth, Smooth::Quadratic { .. })) {
        return Err(Error::Config(format!("L must be positive, got {l}")));
    }

    let psi = ov.psi.unwrap_or(default_psi);
    psi.validate(dim)?;
    let q_set = ov.q.unwrap_or(QSet::All);
    q_set.as_psi().validate(dim)?;
    let metric = ov.metric.unwrap_or(Metric::Identity);
    if let Some(n) = metric.dim() {
        if n != dim {
            return Err(Error::Config(format!("metric has dimension {n}, expected {dim}")));
        }
    }
    let prox = ov.prox.unwrap_or(ProxKind::EuclideanHalfSquare);

    let x0 = match ov.x0 {
        Some(x0) => {
            if x0.len() != dim {
                return Err(Error::Config(format!("x0 has dimension {}, expected {dim}", x0.len())));
            }
            x0
        }
        None => default_start(dim, &psi, &q_set, &metric, prox),
    };
    let geometry = match prox {
        ProxKind::EuclideanHalfSquare => ProxGeometry {
            metric: metric.clone(),
            prox,
            center: x0,
        },
        ProxKind::EntropyOnSimplex => {
            if psi != PsiSpec::IndicatorSimplex {
                return Err(Error::Config("entropy prox requires the simplex indicator as Ψ".into()));
            }
            if !metric.is_identity() {
                return Err(Error::Config("entropy prox is defined for the Euclidean norm only".into()));
            }
            ProxGeometry::entropy(x0)?
        }
    };
    if !psi.contains(&geometry.center, &metric) {
        return Err(Error::Config("starting point lies outside dom Ψ".into()));
    }

    let f = make_function(&smooth, dim);
    let convex = !matches!(smooth, Smooth::Cosine);
    let known_model = model_for(&smooth, dim, &metric)?;
    let lo = vec![-radius; dim];
    let hi = vec![radius; dim];
    let sample_box = match &psi {
        PsiSpec::IndicatorBox { lo, hi } => (lo.clone(), hi.clone()),
        _ => (lo, hi),
    };

    let optimum_of = |set: &PsiSpec| -> Option<KnownOptimum> {
        let x = optimum(&smooth, dim, set, &metric)?;
        let (fv, _) = f.eval(&x);
        Some(KnownOptimum {
            f_tilde: fv + set.value(&x, &metric),
            x,
        })
    };
    let known_optimum = optimum_of(&psi);
    let known_q_optimum = optimum_of(&q_set.as_psi());

    Ok(CompositeProblem {
        name: name.to_string(),
        dim,
        f,
        psi,
        geometry,
        q_set,
        known_model,
        known_optimum,
        known_q_optimum,
        sample_box,
        convex,
    })
}

fn canon(key: &str) -> &'static str {
    match key {
        "λ" => "lambda",
        "l" => "L",
        _ => "",
    }
}

fn lookup<'a>(params: &'a Params, key: &str) -> Option<&'a Value> {
    params.get(key).or_else(|| match key {
        "lambda" => params.get("λ"),
        "L" => params.get("l"),
        _ => None,
    })
}

fn num(params: &Params, key: &str, default: f64) -> Result<f64> {
    match lookup(params, key) {
        None => Ok(default),
        Some(v) => v
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::Config(format!("parameter `{key}` must be a finite number"))),
    }
}

fn vector(params: &Params, key: &str, dim: usize, default: f64) -> Result<Vec<f64>> {
    vector_or(params, key, dim, vec![default; dim])
}

fn vector_or(params: &Params, key: &str, dim: usize, default: Vec<f64>) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("parameter `{key}` must be a number or a list of {dim} numbers"));
    match lookup(params, key) {
        None => Ok(default),
        Some(Value::Number(n)) => Ok(vec![n.as_f64().ok_or_else(bad)?; dim]),
        Some(Value::Array(items)) if items.len() == dim => {
            items.iter().map(|v| v.as_f64().ok_or_else(bad)).collect()
        }
        Some(_) => Err(bad()),
    }
}

fn default_start(dim: usize, psi: &PsiSpec, q: &QSet, metric: &Metric, prox: ProxKind) -> Vec<f64> {
    if prox == ProxKind::EntropyOnSimplex {
        return vec![1.0 / dim as f64; dim];
    }
    let ones = vec![1.0; dim];
    let into = |set: &PsiSpec, x: Vec<f64>| match set {
        PsiSpec::IndicatorBox { lo, hi } => project_box(&x, lo, hi),
        PsiSpec::IndicatorBall { center, radius } => project_ball(&x, center, *radius, metric),
        PsiSpec::IndicatorSimplex => project_simplex(&x),
        _ => x,
    };
    if psi.is_indicator() {
        into(psi, ones)
    } else {
        into(&q.as_psi(), ones)
    }
}

fn make_function(smooth: &Smooth, dim: usize) -> Arc<dyn SmoothFunction> {
    match smooth {
        Smooth::Quadratic { curv, center } => Arc::new(SeparableQuadratic {
            curvatures: curv.clone(),
            center: center.clone(),
        }),
        Smooth::Power { nu, l, center } => Arc::new(PowerSum {
            nu: *nu,
            l: *l,
            center: center.clone(),
        }),
        Smooth::Example => Arc::new(SumFunction(vec![
            Arc::new(SeparableQuadratic {
                curvatures: vec![1.0; dim],
                center: vec![0.0; dim],
            }),
            Arc::new(PowerSum {
                nu: 0.5,
                l: 1.0,
                center: vec![0.0; dim],
            }),
        ])),
        Smooth::Linear { c } => Arc::new(Linear { c: c.clone() }),
        Smooth::Cosine => Arc::new(Cosine { dim }),
    }
}

/// Hölder constant of the gradient of `L/(1+ν) Σ|xᵢ|^{1+ν}` in the Euclidean norm.
pub(crate) fn separable_power_constant(nu: f64, l: f64, dim: usize) -> f64 {
    l * 2f64.powf(1.0 - nu) * (dim as f64).powf(0.5 * (1.0 - nu))
}

fn model_for(smooth: &Smooth, dim: usize, metric: &Metric) -> Result<Option<CurvatureModel>> {
    if let Smooth::Quadratic { curv, .. } = smooth {
        // L = λ_max(B^{-1/2} A B^{-1/2}) for diagonal A and B
        return match metric.diagonal_weights(dim) {
            Some(w) => {
                let l = curv.iter().zip(&w).map(|(c, b)| c / b).fold(0.0, f64::max);
                Ok(Some(CurvatureModel::quadratic(l)?))
            }
            None => Ok(None),
        };
    }
    if !metric.is_identity() {
        return Ok(None);
    }
    Ok(Some(match smooth {
        Smooth::Power { nu, l, .. } => CurvatureModel::hoelder(*nu, separable_power_constant(*nu, *l, dim))?,
        Smooth::Example => CurvatureModel::sum(vec![
            CurvatureModel::quadratic(1.0)?,
            CurvatureModel::hoelder(0.5, separable_power_constant(0.5, 1.0, dim))?,
        ])?,
        Smooth::Linear { .. } => CurvatureModel::quadratic(0.0)?,
        Smooth::Cosine => CurvatureModel::quadratic(1.0)?.with_convexity(false),
        Smooth::Quadratic { .. } => unreachable!(),
    }))
}

/// Closed-form minimizer of `f + set` where one is available.
fn optimum(smooth: &Smooth, dim: usize, set: &PsiSpec, metric: &Metric) -> Option<Vec<f64>> {
    match smooth {
        Smooth::Quadratic { curv, center } => {
            if curv.iter().any(|c| *c <= 0.0) {
                return None;
            }
            let isotropic = curv.iter().all(|c| *c == curv[0]);
            match set {
                PsiSpec::Zero => Some(center.clone()),
                PsiSpec::L1 { lambda } => Some(
                    center
                        .iter()
                        .zip(curv)
                        .map(|(c, l)| soft_threshold(*c, lambda / l))
                        .collect(),
                ),
                PsiSpec::IndicatorBox { lo, hi } => Some(project_box(center, lo, hi)),
                PsiSpec::IndicatorBall { center: bc, radius } if isotropic && metric.is_identity() => {
                    Some(project_ball(center, bc, *radius, metric))
                }
                PsiSpec::IndicatorSimplex if isotropic => Some(project_simplex(center)),
                _ => None,
            }
        }
        Smooth::Power { nu, l, center } => match set {
            PsiSpec::Zero => Some(center.clone()),
            PsiSpec::IndicatorBox { lo, hi } => Some(project_box(center, lo, hi)),
            PsiSpec::L1 { lambda } if *nu > 0.0 => {
                let shift = (lambda / l).powf(1.0 / nu);
                Some(center.iter().map(|c| soft_threshold(*c, shift)).collect())
            }
            PsiSpec::L1 { lambda } if lambda != l => {
                Some(if l > lambda { center.clone() } else { vec![0.0; center.len()] })
            }
            _ => None,
        },
        Smooth::Example => {
            let origin = vec![0.0; dim];
            let holds = match set {
                PsiSpec::Zero | PsiSpec::L1 { .. } => true,
                PsiSpec::IndicatorBox { .. } | PsiSpec::IndicatorBall { .. } => set.contains(&origin, metric),
                PsiSpec::IndicatorSimplex => false,
            };
            holds.then_some(origin)
        }
        Smooth::Cosine => match set {
            PsiSpec::Zero => Some(vec![PI; dim]),
            PsiSpec::IndicatorBox { lo, hi } => Some(lo.iter().zip(hi).map(|(a, b)| cosine_argmin(*a, *b)).collect()),
            _ => None,
        },
        Smooth::Linear { .. } => None,
    }
}

/// Minimizer of `cos` on `[a, b]`: an odd multiple of π if one lies inside, else the better endpoint.
fn cosine_argmin(a: f64, b: f64) -> f64 {
    let k = ((a - PI) / (2.0 * PI)).ceil();
    let cand = PI + 2.0 * PI * k;
    if cand <= b {
        cand
    } else if a.cos() <= b.cos() {
        a
    } else {
        b
    }
}
