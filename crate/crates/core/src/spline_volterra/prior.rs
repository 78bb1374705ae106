//! Prior on spline dimension and coefficients; spline functions f and Kf.

use rand::Rng;

use super::basis::BSplineBasis;
use crate::error::Result;
use crate::numeric::adaptive_gk;
use crate::numeric::linalg::log_sum_exp;
use crate::rng::{self, Purpose};

/// Prior on the number J of basis functions (support J ≥ 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JPrior {
    /// Π(J = j) = ρ(1−ρ)^(j−1); tail exponent t = 0.
    Geometric { rate: f64 },
    /// Zero-truncated Poisson, Π(J = j) ∝ μʲ/j!; tail exponent t = 1.
    Poisson { mean: f64 },
}

impl JPrior {
    pub fn log_pmf(&self, j: usize) -> f64 {
        assert!(j >= 1);
        let x = j as f64;
        match *self {
            JPrior::Geometric { rate } => rate.ln() + (x - 1.0) * (-rate).ln_1p(),
            JPrior::Poisson { mean } => x * mean.ln() - libm::lgamma(x + 1.0) - mean.exp_m1().ln(),
        }
    }

    pub fn tail_exponent(&self) -> f64 {
        match self {
            JPrior::Geometric { .. } => 0.0,
            JPrior::Poisson { .. } => 1.0,
        }
    }

    /// log Π(lo ≤ J ≤ hi).
    pub fn log_mass(&self, lo: usize, hi: usize) -> f64 {
        let terms: Vec<f64> = (lo.max(1)..=hi).map(|j| self.log_pmf(j)).collect();
        log_sum_exp(&terms)
    }

    /// log Π(J > j).
    pub fn log_tail(&self, j: usize) -> f64 {
        match *self {
            JPrior::Geometric { rate } => j as f64 * (-rate).ln_1p(),
            JPrior::Poisson { .. } => {
                // Terms decay faster than geometrically past the mean.
                let mut terms = Vec::new();
                let mut i = j + 1;
                loop {
                    let t = self.log_pmf(i);
                    terms.push(t);
                    if i > j + 50 && t < terms[0] - 60.0 {
                        break;
                    }
                    i += 1;
                }
                log_sum_exp(&terms)
            }
        }
    }
}

/// Tightest constants in exp(−c_d j(log j)^t) ≤ Π(j ≤ J ≤ 2j) and
/// Π(J > j) ≤ exp(−c_u j(log j)^t) over 2 ≤ j ≤ j_max.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JPriorConstants {
    pub c_d: f64,
    pub c_u: f64,
    pub t: f64,
}

pub fn j_prior_constants(prior: &JPrior, j_max: usize) -> JPriorConstants {
    let t = prior.tail_exponent();
    let mut c_d: f64 = 0.0;
    let mut c_u = f64::INFINITY;
    for j in 2..=j_max {
        let scale = j as f64 * (j as f64).ln().powf(t);
        c_d = c_d.max(-prior.log_mass(j, 2 * j) / scale);
        c_u = c_u.min(-prior.log_tail(j) / scale);
    }
    JPriorConstants { c_d, c_u, t }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplinePrior {
    pub j_prior: JPrior,
    /// Standard deviation of the iid Gaussian coefficients.
    pub tau: f64,
}

impl Default for SplinePrior {
    fn default() -> Self {
        Self { j_prior: JPrior::Geometric { rate: 0.3 }, tau: 1.0 }
    }
}

/// A spline Kf = Σ a_j B_{j,q} together with its derivative f.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineFunction {
    pub basis: BSplineBasis,
    pub a: Vec<f64>,
}

impl SplineFunction {
    pub fn new(basis: BSplineBasis, a: Vec<f64>) -> Self {
        assert_eq!(a.len(), basis.dim(), "need one coefficient per basis function");
        Self { basis, a }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    /// Kf(x) = Σ a_j B_{j,q}(x).
    pub fn kf(&self, x: f64) -> f64 {
        let (first, vals) = self.basis.nonzero(self.basis.order(), x);
        vals.iter().enumerate().map(|(r, v)| self.a[first + r] * v).sum()
    }

    /// f(x) = Σ_j c_j (a_{j+1} − a_j) B_{j,q−1}(x), c_j the knot-span weights.
    pub fn f(&self, x: f64) -> f64 {
        let (first, vals) = self.basis.nonzero_derivative(x);
        vals.iter().enumerate().map(|(r, v)| self.a[first + r] * v).sum()
    }
}

/// Kf as a closure over the order-q expansion.
pub fn volterra_apply_spline<'a>(a: &'a [f64], basis: &'a BSplineBasis) -> impl Fn(f64) -> f64 + 'a {
    assert_eq!(a.len(), basis.dim());
    move |x| {
        let (first, vals) = basis.nonzero(basis.order(), x);
        vals.iter().enumerate().map(|(r, v)| a[first + r] * v).sum()
    }
}

/// ∫₀ˣ f(t) dt by adaptive quadrature to 1e-10.
pub fn volterra_apply_numeric<F: Fn(f64) -> f64>(f: F, x: f64) -> Result<f64> {
    adaptive_gk(f, 0.0, x, 1e-10)
}

/// Same, splitting at known break points of f (e.g. spline knots). Kinks that
/// fall between the outer Kronrod nodes of a panel are otherwise invisible to
/// the error estimate.
pub fn volterra_apply_numeric_with_breaks<F: Fn(f64) -> f64>(f: F, x: f64, breaks: &[f64]) -> Result<f64> {
    let mut cuts: Vec<f64> = breaks.iter().cloned().filter(|&b| b > 0.0 && b < x).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = vec![0.0];
    edges.extend(cuts);
    edges.push(x);
    let tol = 1e-10 / (edges.len() - 1) as f64;
    edges.windows(2).map(|w| adaptive_gk(&f, w[0], w[1], tol)).sum()
}

/// Greville abscissae; Σ g_j B_{j,q}(x) = x.
pub fn greville(basis: &BSplineBasis) -> Vec<f64> {
    let t = basis.knots();
    let q = basis.order();
    (0..basis.dim()).map(|i| t[i + 1..i + q].iter().sum::<f64>() / (q - 1) as f64).collect()
}

/// a₁ = 0 and a₂..a_J iid N(0, τ²).
pub fn draw_coefficients<R: Rng + ?Sized>(tau: f64, j: usize, rng: &mut R) -> Vec<f64> {
    let mut a = vec![0.0; j];
    for v in a[1..].iter_mut() {
        *v = tau * rng::normal(rng);
    }
    a
}

/// J ∼ Π_J restricted to [q, j_max], then coefficients with Kf(0) = 0.
pub fn draw_spline_prior(prior: &SplinePrior, q: usize, j_max: usize, seed: u64) -> SplineFunction {
    assert!(j_max >= q);
    let mut rng = rng::stream(seed, Purpose::PriorDraws, &[q as u64, j_max as u64]);
    let logs: Vec<f64> = (q..=j_max).map(|j| prior.j_prior.log_pmf(j)).collect();
    let norm = log_sum_exp(&logs);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut j = j_max;
    for (k, l) in logs.iter().enumerate() {
        acc += (l - norm).exp();
        if u < acc {
            j = q + k;
            break;
        }
    }
    let a = draw_coefficients(prior.tau, j, &mut rng);
    SplineFunction::new(BSplineBasis::with_dim(q, j), a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_function_integrates_to_x() {
        for q in 2..=5 {
            let b = BSplineBasis::new(q, 7);
            let s = SplineFunction::new(b.clone(), greville(&b));
            for k in 0..=50 {
                let x = k as f64 / 50.0;
                assert!((s.kf(x) - x).abs() < 1e-10);
                assert!((s.f(x.clamp(1e-9, 1.0 - 1e-9)) - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_and_constant_coefficients() {
        let b = BSplineBasis::new(3, 5);
        let kf = volterra_apply_spline(&[0.0; 7], &b);
        assert_eq!(kf(0.37), 0.0);
        let ones = SplineFunction::new(b.clone(), vec![1.0; 7]);
        for k in 0..20 {
            assert!(ones.f(k as f64 / 19.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_difference_gives_one_low_order_function() {
        let b = BSplineBasis::new(3, 6);
        let j = b.dim();
        let mut a = vec![0.0; j];
        a[j - 1] = 1.0;
        let s = SplineFunction::new(b.clone(), a);
        // f = c·B_{J−1,q−1} (0-based index J−1 among the order-(q−1) functions).
        let c = b.derivative_weight(j - 1);
        assert!((c - 12.0).abs() < 1e-12);
        for k in 0..50 {
            let x = k as f64 / 49.0;
            assert!((s.f(x) - c * b.eval_order(2, j - 1, x)).abs() < 1e-12);
        }
    }

    #[test]
    fn operator_identity_on_prior_draws() {
        let prior = SplinePrior::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in 0..100u64 {
            let s = draw_spline_prior(&prior, 3, 24, d);
            for _ in 0..100 {
                let x: f64 = rng.random();
                let num = volterra_apply_numeric_with_breaks(|t| s.f(t), x, s.basis.knots()).unwrap();
                assert!((num - s.kf(x)).abs() < 1e-9, "draw {d} x {x}: {num} vs {}", s.kf(x));
            }
        }
    }

    #[test]
    fn numeric_operator_examples() {
        for x in [0.1, 0.5, 0.93] {
            assert!((volterra_apply_numeric(|t| 2.0 * t, x).unwrap() - x * x).abs() < 1e-12);
            let tau = 2.0 * std::f64::consts::PI;
            let v = volterra_apply_numeric(|t| (tau * t).cos(), x).unwrap();
            assert!((v - (tau * x).sin() / tau).abs() < 1e-10);
        }
    }

    #[test]
    fn prior_is_centred() {
        let b = BSplineBasis::with_dim(3, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let vals: Vec<f64> =
            (0..100_000).map(|_| SplineFunction::new(b.clone(), draw_coefficients(1.0, 10, &mut rng)).f(0.5)).collect();
        let (m, se) = crate::numeric::stats::mean_se(&vals);
        assert!(m.abs() < 4.0 * se, "{m} ± {se}");
    }

    #[test]
    fn j_prior_normalizes_and_meets_conditions() {
        for p in [JPrior::Geometric { rate: 0.3 }, JPrior::Poisson { mean: 5.0 }] {
            let total = p.log_mass(1, 400).exp();
            assert!((total - 1.0).abs() < 1e-12, "{p:?}: {total}");
            assert!((p.log_tail(10).exp() - (1.0 - p.log_mass(1, 10).exp())).abs() < 1e-12);
            let c = j_prior_constants(&p, 1000);
            assert!(c.c_d.is_finite() && c.c_u > 0.0 && c.c_u <= c.c_d, "{p:?}: {c:?}");
        }
    }

    #[test]
    fn draws_are_reproducible() {
        let p = SplinePrior::default();
        assert_eq!(draw_spline_prior(&p, 3, 30, 5), draw_spline_prior(&p, 3, 30, 5));
    }
}
