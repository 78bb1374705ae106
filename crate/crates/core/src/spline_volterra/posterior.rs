//! Exact conjugate posterior for y = Kf(x) + σε with the spline prior,
//! averaged over a finite grid of dimensions J.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::basis::BSplineBasis;
use super::design::{RegressionDesign, SplineDesign};
use super::prior::SplinePrior;
use crate::numeric::linalg::{log_sum_exp, StabilizedCholesky};
use crate::rng;

/// Relative ridge for near-singular precision matrices (times trace/dim).
pub const RIDGE: f64 = 1e-10;

/// y-independent part of the posterior for one J.
#[derive(Debug, Clone)]
pub struct SplineComponent {
    pub j: usize,
    pub design: SplineDesign,
    /// Precision XᵀX/σ² + I/τ².
    chol: StabilizedCholesky,
    /// Upper factor Lᵀ, kept for repeated sampling.
    lt: DMatrix<f64>,
    /// log det(I + τ² XᵀX/σ²).
    log_det_ratio: f64,
    log_prior: f64,
}

impl SplineComponent {
    pub fn ridge(&self) -> Option<f64> {
        (self.chol.ridge > 0.0).then_some(self.chol.ridge)
    }

    /// Draw from N(mean, P⁻¹).
    pub fn sample<R: Rng + ?Sized>(&self, mean: &DVector<f64>, rng: &mut R) -> DVector<f64> {
        let k = mean.len();
        let mut z = DVector::zeros(k);
        for v in z.iter_mut() {
            *v = rng::normal(rng);
        }
        let x = self.lt.solve_upper_triangular(&z).expect("nonzero diagonal");
        mean + x
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        self.chol.factor.inverse()
    }
}

/// Precomputed per-J factorizations for one design and prior.
#[derive(Debug, Clone)]
pub struct SplineModelSet {
    pub q: usize,
    pub sigma: f64,
    pub tau: f64,
    pub n: usize,
    pub components: Vec<SplineComponent>,
}

impl SplineModelSet {
    pub fn new(design: &RegressionDesign, prior: &SplinePrior, q: usize, j_grid: &[usize]) -> Self {
        assert!(!j_grid.is_empty());
        let (s2, t2) = (design.sigma * design.sigma, prior.tau * prior.tau);
        let components = j_grid
            .iter()
            .map(|&j| {
                let sd = SplineDesign::new(design, BSplineBasis::with_dim(q, j));
                let k = sd.free_dim();
                let prec = &sd.xtx / s2 + DMatrix::identity(k, k) / t2;
                let chol = StabilizedCholesky::new(&prec, RIDGE);
                let lt = chol.factor.l().transpose();
                let log_det_ratio = chol.log_det() + k as f64 * t2.ln();
                SplineComponent { j, design: sd, chol, lt, log_det_ratio, log_prior: prior.j_prior.log_pmf(j) }
            })
            .collect();
        Self { q, sigma: design.sigma, tau: prior.tau, n: design.len(), components }
    }

    pub fn posterior(&self, y: &[f64]) -> SplineMixturePosterior<'_> {
        assert_eq!(y.len(), self.n, "one observation per design point");
        let s2 = self.sigma * self.sigma;
        let yy: f64 = y.iter().map(|v| v * v).sum();
        let mut means = Vec::with_capacity(self.components.len());
        let mut log_ml = Vec::with_capacity(self.components.len());
        for c in &self.components {
            let b = c.design.xt(y) / s2;
            let mean = c.chol.solve(&b);
            let quad = yy / s2 - b.dot(&mean);
            log_ml.push(
                -0.5 * self.n as f64 * (2.0 * std::f64::consts::PI * s2).ln() - 0.5 * c.log_det_ratio - 0.5 * quad,
            );
            means.push(mean);
        }
        let logw: Vec<f64> = self.components.iter().zip(&log_ml).map(|(c, l)| c.log_prior + l).collect();
        let norm = log_sum_exp(&logw);
        let weights = logw.iter().map(|l| (l - norm).exp()).collect();
        SplineMixturePosterior { set: self, means, log_ml, weights }
    }
}

/// Mixture over J of Gaussian posteriors on the free coefficients a₂..a_J.
#[derive(Debug, Clone)]
pub struct SplineMixturePosterior<'a> {
    pub set: &'a SplineModelSet,
    pub means: Vec<DVector<f64>>,
    pub log_ml: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SplineMixturePosterior<'_> {
    pub fn ridge_flagged(&self) -> bool {
        self.set.components.iter().any(|c| c.ridge().is_some())
    }

    /// Index of a component drawn according to the weights.
    pub fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        self.weights.len() - 1
    }

    /// Draws (component index, free coefficients).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, DVector<f64>) {
        let i = self.pick(rng);
        (i, self.set.components[i].sample(&self.means[i], rng))
    }

    pub fn j_weight_at_least(&self, j: usize) -> f64 {
        self.set.components.iter().zip(&self.weights).filter(|(c, _)| c.j >= j).map(|(_, w)| w).sum()
    }
}

/// Builds the per-J factorizations and conditions on y in one step.
pub fn spline_posterior<'a>(set: &'a SplineModelSet, y: &[f64]) -> SplineMixturePosterior<'a> {
    set.posterior(y)
}

/// Quadratic form pieces for ‖g_a − h‖ₙ² = aᵀGa − 2aᵀc + ‖h‖ₙ².
#[derive(Debug, Clone)]
pub struct ProjectedTarget {
    pub gram: DMatrix<f64>,
    pub cross: DVector<f64>,
    pub norm_sq: f64,
}

impl ProjectedTarget {
    pub fn dist(&self, a: &DVector<f64>) -> f64 {
        (a.dot(&(&self.gram * a)) - 2.0 * a.dot(&self.cross) + self.norm_sq).max(0.0).sqrt()
    }
}

/// Targets for the inverse (f vs f₀) and direct (Kf vs Kf₀) empirical norms.
pub fn project_truth(c: &SplineComponent, f0: &[f64], kf0: &[f64]) -> (ProjectedTarget, ProjectedTarget) {
    let n = f0.len() as f64;
    let inverse = ProjectedTarget {
        gram: c.design.dtd_n.clone(),
        cross: c.design.dt(f0) / n,
        norm_sq: f0.iter().map(|v| v * v).sum::<f64>() / n,
    };
    let direct = ProjectedTarget {
        gram: c.design.xtx_n.clone(),
        cross: c.design.xt(kf0) / n,
        norm_sq: kf0.iter().map(|v| v * v).sum::<f64>() / n,
    };
    (inverse, direct)
}
