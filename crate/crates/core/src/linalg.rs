//! Dense vector helpers and the primal metric `‖x‖ = ⟨Bx, x⟩^{1/2}`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `y += s * x`
pub fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

/// `t * a + (1 - t) * b`
pub fn lerp(t: f64, a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| t * x + (1.0 - t) * y).collect()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Symmetric positive-definite operator `B: E → E*` defining the primal norm.
#[derive(Debug, Clone, Default)]
pub enum Metric {
    #[default]
    Identity,
    Diagonal(Vec<f64>),
    Dense {
        matrix: DMatrix<f64>,
        chol: Cholesky<f64, Dyn>,
    },
}

impl Metric {
    pub fn diagonal(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Config("metric weights must be finite and positive".into()));
        }
        if weights.iter().all(|w| *w == 1.0) {
            return Ok(Metric::Identity);
        }
        Ok(Metric::Diagonal(weights))
    }

    pub fn dense(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Config("metric matrix must be square".into()));
        }
        let matrix = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (matrix[(i, j)], matrix[(j, i)]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::Config("metric matrix must be symmetric".into()));
                }
            }
        }
        let chol = Cholesky::new(matrix.clone())
            .ok_or_else(|| Error::Config("metric matrix must be positive definite".into()))?;
        Ok(Metric::Dense { matrix, chol })
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Metric::Identity => None,
            Metric::Diagonal(w) => Some(w.len()),
            Metric::Dense { matrix, .. } => Some(matrix.nrows()),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Metric::Identity)
    }

    /// Per-coordinate weights when `B` is diagonal (identity included).
    pub fn diagonal_weights(&self, n: usize) -> Option<Vec<f64>> {
        match self {
            Metric::Identity => Some(vec![1.0; n]),
            Metric::Diagonal(w) => Some(w.clone()),
            Metric::Dense { .. } => None,
        }
    }

    /// `Some(c)` when `B = c I`.
    pub fn scalar(&self) -> Option<f64> {
        match self {
            Metric::Identity => Some(1.0),
            Metric::Diagonal(w) => {
                let c = w[0];
                w.iter().all(|v| *v == c).then_some(c)
            }
            Metric::Dense { .. } => None,
        }
    }

    /// `B x`
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Metric::Identity => x.to_vec(),
            Metric::Diagonal(w) => x.iter().zip(w).map(|(a, b)| a * b).collect(),
            Metric::Dense { matrix, .. } => {
                (matrix * DVector::from_column_slice(x)).iter().copied().collect()
            }
        }
    }

    /// `B⁻¹ g`
    pub fn solve(&self, g: &[f64]) -> Vec<f64> {
        match self {
            Metric::Identity => g.to_vec(),
            Metric::Diagonal(w) => g.iter().zip(w).map(|(a, b)| a / b).collect(),
            Metric::Dense { chol, .. } => chol
                .solve(&DVector::from_column_slice(g))
                .iter()
                .copied()
                .collect(),
        }
    }

    pub fn norm_sq(&self, x: &[f64]) -> f64 {
        dot(&self.apply(x), x)
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        self.norm_sq(x).max(0.0).sqrt()
    }

    pub fn dist(&self, x: &[f64], y: &[f64]) -> f64 {
        self.norm(&sub(x, y))
    }

    pub fn dual_norm_sq(&self, g: &[f64]) -> f64 {
        dot(&self.solve(g), g)
    }

    pub fn dual_norm(&self, g: &[f64]) -> f64 {
        self.dual_norm_sq(g).max(0.0).sqrt()
    }

    pub fn dense_matrix(&self) -> Option<&DMatrix<f64>> {
        match self {
            Metric::Dense { matrix, .. } => Some(matrix),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_metric_norms_are_dual() {
        let m = Metric::dense(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let g = [1.0, -2.0];
        let x = m.solve(&g);
        // ‖B⁻¹g‖ = ‖g‖*
        assert!((m.norm(&x) - m.dual_norm(&g)).abs() < 1e-14);
        let back = m.apply(&x);
        assert!((back[0] - 1.0).abs() < 1e-14 && (back[1] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_indefinite_and_asymmetric() {
        assert!(Metric::dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        assert!(Metric::dense(&[vec![1.0, 0.1], vec![0.0, 1.0]]).is_err());
        assert!(Metric::diagonal(vec![1.0, 0.0]).is_err());
        assert!(Metric::diagonal(vec![1.0, 1.0]).unwrap().is_identity());
    }
}
