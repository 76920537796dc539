use std::fmt::Debug;
use std::sync::Arc;

use crate::linalg;

/// First-order oracle of the smooth part `f`.
pub trait SmoothFunction: Send + Sync + Debug {
    fn dim(&self) -> usize;

    /// `(f(x), ∇f(x))`
    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>);

    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x).0
    }
}

/// `½ Σ Lᵢ (xᵢ - cᵢ)²`
#[derive(Debug, Clone)]
pub struct SeparableQuadratic {
    pub curvatures: Vec<f64>,
    pub center: Vec<f64>,
}

impl SmoothFunction for SeparableQuadratic {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let mut f = 0.0;
        let grad = x
            .iter()
            .zip(&self.center)
            .zip(&self.curvatures)
            .map(|((xi, ci), li)| {
                let d = xi - ci;
                f += 0.5 * li * d * d;
                li * d
            })
            .collect();
        (f, grad)
    }
}

/// `L/(1+ν) Σ |xᵢ - cᵢ|^{1+ν}`. The derivative `L sign(d)|d|^ν` is taken as 0 at `d = 0`,
/// which is the true derivative for `ν > 0` and a subgradient for `ν = 0`.
#[derive(Debug, Clone)]
pub struct PowerSum {
    pub nu: f64,
    pub l: f64,
    pub center: Vec<f64>,
}

impl SmoothFunction for PowerSum {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let p = 1.0 + self.nu;
        let mut f = 0.0;
        let grad = x
            .iter()
            .zip(&self.center)
            .map(|(xi, ci)| {
                let d = xi - ci;
                let a = d.abs();
                f += self.l * a.powf(p) / p;
                if a == 0.0 {
                    0.0
                } else {
                    self.l * d.signum() * a.powf(self.nu)
                }
            })
            .collect();
        (f, grad)
    }
}

/// `⟨c, x⟩`
#[derive(Debug, Clone)]
pub struct Linear {
    pub c: Vec<f64>,
}

impl SmoothFunction for Linear {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (linalg::dot(&self.c, x), self.c.clone())
    }
}

/// `Σ cos(xᵢ)`, a nonconvex function with 1-Lipschitz gradient.
#[derive(Debug, Clone)]
pub struct Cosine {
    pub dim: usize,
}

impl SmoothFunction for Cosine {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (x.iter().map(|v| v.cos()).sum(), x.iter().map(|v| -v.sin()).collect())
    }
}

#[derive(Debug, Clone)]
pub struct SumFunction(pub Vec<Arc<dyn SmoothFunction>>);

impl SmoothFunction for SumFunction {
    fn dim(&self) -> usize {
        self.0[0].dim()
    }

    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let mut f = 0.0;
        let mut g = vec![0.0; x.len()];
        for part in &self.0 {
            let (fv, gv) = part.eval(x);
            f += fv;
            linalg::axpy(&mut g, 1.0, &gv);
        }
        (f, g)
    }
}
