//! Fixed regression designs, empirical Gram matrices and the D1/D2 checks.

use nalgebra::{DMatrix, DVector};

use super::basis::BSplineBasis;
use crate::numeric::linalg::eigen_extremes;

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionDesign {
    pub points: Vec<f64>,
    pub sigma: f64,
}

impl RegressionDesign {
    pub fn new(mut points: Vec<f64>, sigma: f64) -> Self {
        assert!(!points.is_empty() && sigma > 0.0);
        assert!(points.iter().all(|x| (0.0..=1.0).contains(x)), "design points must lie in [0, 1]");
        points.sort_by(f64::total_cmp);
        Self { points, sigma }
    }

    /// x_i = i/n, i = 1..n.
    pub fn uniform(n: usize, sigma: f64) -> Self {
        Self::new((1..=n).map(|i| i as f64 / n as f64).collect(), sigma)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// ‖f − g‖ₙ = (n⁻¹ Σ (f(x_i) − g(x_i))²)^(1/2).
pub fn empirical_norm<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(f: F, g: G, design: &RegressionDesign) -> f64 {
    let s: f64 = design.points.iter().map(|&x| (f(x) - g(x)).powi(2)).sum();
    (s / design.len() as f64).sqrt()
}

/// Empirical Gram matrix of order-`order` B-splines, (1/n) Σ_l B_i(x_l) B_j(x_l).
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub order: usize,
    pub entries: DMatrix<f64>,
}

impl GramMatrix {
    pub fn eigen_extremes(&self) -> (f64, f64) {
        eigen_extremes(&self.entries)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

/// Accumulates (1/n) Σ_l r_l r_lᵀ from sparse rows (first index, values).
fn banded_gram<R: Fn(f64) -> (usize, Vec<f64>)>(
    design: &RegressionDesign,
    dim: usize,
    offset: usize,
    row: R,
) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(dim, dim);
    for &x in &design.points {
        let (first, vals) = row(x);
        for (a, va) in vals.iter().enumerate() {
            let Some(i) = (first + a).checked_sub(offset).filter(|&i| i < dim) else { continue };
            for (b, vb) in vals.iter().enumerate() {
                if let Some(j) = (first + b).checked_sub(offset).filter(|&j| j < dim) {
                    g[(i, j)] += va * vb;
                }
            }
        }
    }
    g / design.len() as f64
}

/// Σₙ^q over all J order-q functions.
pub fn gram_matrix(design: &RegressionDesign, basis: &BSplineBasis) -> GramMatrix {
    let q = basis.order();
    GramMatrix { order: q, entries: banded_gram(design, basis.dim(), 0, |x| basis.nonzero(q, x)) }
}

/// Σₙ^(q−1) over the J − 1 nondegenerate order-(q−1) functions.
pub fn gram_matrix_low(design: &RegressionDesign, basis: &BSplineBasis) -> GramMatrix {
    let q = basis.order();
    GramMatrix { order: q - 1, entries: banded_gram(design, basis.low_order_dim(), 1, |x| basis.nonzero(q - 1, x)) }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignConditions {
    /// Extreme eigenvalues of J·Σₙ^q.
    pub d1: (f64, f64),
    /// Extreme eigenvalues of (J−1)·Σₙ^(q−1).
    pub d2: (f64, f64),
    pub threshold: f64,
    pub pass: bool,
    /// Set when n < 4J, outside the J = o(n) regime the conditions target.
    pub dimension_warning: bool,
}

/// Default conditioning window [1/κ, κ] for the D1/D2 eigenvalues.
pub const DEFAULT_COND_THRESHOLD: f64 = 100.0;

pub fn check_design_conditions(design: &RegressionDesign, basis: &BSplineBasis, threshold: f64) -> DesignConditions {
    assert!(threshold >= 1.0);
    let j = basis.dim() as f64;
    let (a, b) = gram_matrix(design, basis).eigen_extremes();
    let (c, d) = gram_matrix_low(design, basis).eigen_extremes();
    let d1 = (a * j, b * j);
    let d2 = (c * (j - 1.0), d * (j - 1.0));
    let ok = |(lo, hi): (f64, f64)| lo >= 1.0 / threshold && hi <= threshold;
    DesignConditions { d1, d2, threshold, pass: ok(d1) && ok(d2), dimension_warning: design.len() < 4 * basis.dim() }
}

/// Regression and derivative quantities for one basis on one design, with
/// the first coefficient pinned to zero (so Kf(0) = 0): J − 1 free columns.
#[derive(Debug, Clone)]
pub struct SplineDesign {
    pub basis: BSplineBasis,
    /// XᵀX with X_{l,i} = B_{i+1,q}(x_l), i = 1..J−1 (0-based columns).
    pub xtx: DMatrix<f64>,
    /// DᵀD/n with D_{l,i} = B'_{i+1,q}(x_l).
    pub dtd_n: DMatrix<f64>,
    /// XᵀX/n.
    pub xtx_n: DMatrix<f64>,
    rows: Vec<(usize, Vec<f64>)>,
    drows: Vec<(usize, Vec<f64>)>,
}

impl SplineDesign {
    pub fn new(design: &RegressionDesign, basis: BSplineBasis) -> Self {
        let q = basis.order();
        let rows: Vec<_> = design.points.iter().map(|&x| basis.nonzero(q, x)).collect();
        let drows: Vec<_> = design.points.iter().map(|&x| basis.nonzero_derivative(x)).collect();
        let k = basis.dim() - 1;
        let n = design.len() as f64;
        let accumulate = |rs: &[(usize, Vec<f64>)]| {
            let mut g = DMatrix::zeros(k, k);
            for (first, vals) in rs {
                for (a, va) in vals.iter().enumerate() {
                    let Some(i) = (first + a).checked_sub(1) else { continue };
                    for (b, vb) in vals.iter().enumerate() {
                        if let Some(j) = (first + b).checked_sub(1) {
                            g[(i, j)] += va * vb;
                        }
                    }
                }
            }
            g
        };
        let xtx = accumulate(&rows);
        let dtd_n = accumulate(&drows) / n;
        let xtx_n = &xtx / n;
        Self { basis, xtx, dtd_n, xtx_n, rows, drows }
    }

    pub fn free_dim(&self) -> usize {
        self.basis.dim() - 1
    }

    fn project(rows: &[(usize, Vec<f64>)], k: usize, v: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(k);
        for ((first, vals), y) in rows.iter().zip(v) {
            for (a, va) in vals.iter().enumerate() {
                if let Some(i) = (first + a).checked_sub(1) {
                    out[i] += va * y;
                }
            }
        }
        out
    }

    /// Xᵀv.
    pub fn xt(&self, v: &[f64]) -> DVector<f64> {
        Self::project(&self.rows, self.free_dim(), v)
    }

    /// Dᵀv.
    pub fn dt(&self, v: &[f64]) -> DVector<f64> {
        Self::project(&self.drows, self.free_dim(), v)
    }

    /// Full coefficient vector (a₁ = 0, then the free part).
    pub fn full_coefficients(&self, free: &DVector<f64>) -> Vec<f64> {
        std::iter::once(0.0).chain(free.iter().cloned()).collect()
    }
}

/// sup over a of ‖f_a‖ₙ / (J‖Kf_a‖ₙ), from the generalized eigenproblem
/// DᵀD v = λ XᵀX v, together with the largest ratio seen on random draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusCalibration {
    pub j: usize,
    pub exact_sup: f64,
    pub sampled_max: f64,
}

pub fn calibrate_modulus_constant(sd: &SplineDesign, draws: usize, seed: u64) -> ModulusCalibration {
    let j = sd.basis.dim();
    let chol = crate::numeric::linalg::StabilizedCholesky::new(&sd.xtx_n, 1e-12);
    let l = chol.factor.l();
    let linv = l.clone().try_inverse().expect("triangular factor is invertible");
    let m = &linv * &sd.dtd_n * linv.transpose();
    let (_, lmax) = eigen_extremes(&((&m + m.transpose()) * 0.5));
    let exact_sup = lmax.max(0.0).sqrt() / j as f64;
    let mut rng = crate::rng::stream(seed, crate::rng::Purpose::Calibration, &[j as u64]);
    let mut sampled_max: f64 = 0.0;
    let k = sd.free_dim();
    for _ in 0..draws {
        let mut z = vec![0.0; k];
        crate::rng::fill_normal(&mut rng, &mut z);
        let a = DVector::from_vec(z);
        let f2 = a.dot(&(&sd.dtd_n * &a));
        let kf2 = a.dot(&(&sd.xtx_n * &a));
        sampled_max = sampled_max.max((f2 / kf2).sqrt() / j as f64);
    }
    ModulusCalibration { j, exact_sup, sampled_max }
}

/// ω(δ) ≤ C·J·δ with the calibrated constant C.
pub fn spline_modulus_report(j: usize, delta: f64, constant: f64) -> f64 {
    assert!(delta >= 0.0 && constant >= 0.0);
    constant * j as f64 * delta
}
