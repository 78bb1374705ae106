//! Dense symmetric solves used by the conjugate posteriors.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Cholesky factor of a symmetric positive definite matrix, possibly after
/// adding a ridge to the diagonal.
#[derive(Debug, Clone)]
pub struct StabilizedCholesky {
    pub factor: Cholesky<f64, Dyn>,
    /// Ridge added to the diagonal; zero when the plain factorization succeeded.
    pub ridge: f64,
}

impl StabilizedCholesky {
    /// Factorizes `a`; on failure retries with ridge `rel_ridge · trace / dim`,
    /// growing it tenfold until the factorization succeeds.
    pub fn new(a: &DMatrix<f64>, rel_ridge: f64) -> Self {
        if let Some(factor) = Cholesky::new(a.clone()) {
            if min_diag(&factor) > 1e-14 * max_diag(&factor) {
                return Self { factor, ridge: 0.0 };
            }
        }
        let dim = a.nrows().max(1) as f64;
        let base = (a.trace().abs() / dim).max(f64::MIN_POSITIVE);
        let mut ridge = rel_ridge * base;
        loop {
            let mut b = a.clone();
            for i in 0..b.nrows() {
                b[(i, i)] += ridge;
            }
            if let Some(factor) = Cholesky::new(b) {
                return Self { factor, ridge };
            }
            ridge *= 10.0;
        }
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.factor.solve(b)
    }

    /// log det of the (possibly ridged) matrix.
    pub fn log_det(&self) -> f64 {
        let l = self.factor.l_dirty();
        (0..l.nrows()).map(|i| 2.0 * l[(i, i)].ln()).sum()
    }

    /// Solves Lᵀ x = z, turning standard normal `z` into a draw with covariance A⁻¹.
    pub fn sample_inverse(&self, z: &DVector<f64>) -> DVector<f64> {
        let l = self.factor.l();
        l.transpose().solve_upper_triangular(z).expect("triangular factor has a nonzero diagonal")
    }
}

fn min_diag(c: &Cholesky<f64, Dyn>) -> f64 {
    let l = c.l_dirty();
    (0..l.nrows()).map(|i| l[(i, i)]).fold(f64::INFINITY, f64::min)
}

fn max_diag(c: &Cholesky<f64, Dyn>) -> f64 {
    let l = c.l_dirty();
    (0..l.nrows()).map(|i| l[(i, i)]).fold(0.0, f64::max)
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn eigen_extremes(a: &DMatrix<f64>) -> (f64, f64) {
    let eig = a.clone().symmetric_eigen();
    let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// log of Σ exp(x_i), stable for large magnitudes.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
