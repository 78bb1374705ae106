//! Gaussian white-noise sequence model Y_i = κ_i f_i + n^(−1/2) Z_i.
//!
//! Everything is expressed in the singular basis of the operator: the
//! operator is the diagonal sequence κ, the prior is a product of centred
//! normals with variances λ_i, and the posterior is again a product of
//! normals, available in closed form for both f and Kf.

mod posterior;
mod prior;
mod sequence;

pub use posterior::{
    credible_radius, expected_risk_components, posterior, posterior_risk_direct, radius_draws,
    DiagonalGaussianPosterior, RiskComponents, Space,
};
pub use prior::{GaussianProductPrior, PriorStyle};
pub use sequence::{kl_divergence, make_truth, sobolev_norm, CoefficientSequence, NormReport, Tail};

use crate::rng::{self, Purpose};

/// Singular-value profile of the forward operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IllPosedSpec {
    /// κ_i = C · i^(−p).
    Mild { p: f64, c: f64 },
    /// κ_i = exp(−γ · i^p).
    Severe { gamma: f64, p: f64 },
}

impl IllPosedSpec {
    pub fn mild(p: f64, c: f64) -> Self {
        assert!(p >= 0.0 && c >= 1.0, "mild operator needs p ≥ 0 and C ≥ 1");
        IllPosedSpec::Mild { p, c }
    }

    pub fn severe(gamma: f64, p: f64) -> Self {
        assert!(gamma > 0.0 && p >= 1.0, "severe operator needs γ > 0 and p ≥ 1");
        IllPosedSpec::Severe { gamma, p }
    }

    #[inline]
    pub fn kappa(&self, i: usize) -> f64 {
        debug_assert!(i >= 1);
        let x = i as f64;
        match *self {
            IllPosedSpec::Mild { p, c } => c * x.powf(-p),
            IllPosedSpec::Severe { gamma, p } => (-gamma * x.powf(p)).exp(),
        }
    }

    /// Exponent p (polynomial for mild, in the exponent for severe).
    pub fn p(&self) -> f64 {
        match *self {
            IllPosedSpec::Mild { p, .. } | IllPosedSpec::Severe { p, .. } => p,
        }
    }
}

/// κ_i for the pinned operator profile.
pub fn kappa(spec: &IllPosedSpec, i: usize) -> f64 {
    spec.kappa(i)
}

/// Observed coordinates y_1..y_N at noise precision n.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceObservation {
    pub y: Vec<f64>,
    pub n: u64,
    pub seed: u64,
}

impl SequenceObservation {
    /// y_i = κ_i f₀,i + n^(−1/2) z_i with caller-supplied noise `z`.
    pub fn from_noise(f0: &CoefficientSequence, spec: &IllPosedSpec, n: u64, z: &[f64], seed: u64) -> Self {
        let scale = (n as f64).powf(-0.5);
        let y = z.iter().enumerate().map(|(k, zk)| spec.kappa(k + 1) * f0.coeff(k + 1) + scale * zk).collect();
        Self { y, n, seed }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Draws N observed coordinates; the noise stream depends only on (seed, N).
pub fn observe(f0: &CoefficientSequence, spec: &IllPosedSpec, n: u64, head: usize, seed: u64) -> SequenceObservation {
    let mut rng = rng::stream(seed, Purpose::Observation, &[head as u64]);
    let mut z = vec![0.0; head];
    rng::fill_normal(&mut rng, &mut z);
    SequenceObservation::from_noise(f0, spec, n, &z, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa(&IllPosedSpec::mild(1.0, 1.0), 4), 0.25);
        assert_eq!(kappa(&IllPosedSpec::mild(0.0, 1.0), 917), 1.0);
        assert!((kappa(&IllPosedSpec::severe(1.0, 1.0), 3) - (-3f64).exp()).abs() < 1e-17);
        assert!((kappa(&IllPosedSpec::severe(1.0, 1.0), 3) - 0.049787).abs() < 1e-6);
    }

    #[test]
    fn kappa_strictly_decreasing() {
        for spec in [IllPosedSpec::mild(0.7, 2.0), IllPosedSpec::severe(0.3, 2.0)] {
            for i in 1..40 {
                assert!(spec.kappa(i + 1) < spec.kappa(i));
            }
        }
    }

    #[test]
    fn zero_noise_gives_exact_image() {
        let f0 = make_truth(1.0, 1.0, 0.05, 64);
        let spec = IllPosedSpec::mild(1.0, 1.0);
        let obs = SequenceObservation::from_noise(&f0, &spec, 1000, &[0.0; 64], 0);
        for i in 1..=64 {
            assert_eq!(obs.y[i - 1], spec.kappa(i) * f0.coeff(i));
        }
    }

    #[test]
    fn observation_is_reproducible() {
        let f0 = make_truth(1.0, 1.0, 0.05, 32);
        let spec = IllPosedSpec::mild(1.0, 1.0);
        let a = observe(&f0, &spec, 100, 32, 11);
        let b = observe(&f0, &spec, 100, 32, 11);
        assert_eq!(a, b);
        let c = observe(&f0, &spec, 100, 32, 12);
        assert_ne!(a.y, c.y);
    }

    #[test]
    fn null_signal_mean_is_within_clt_band() {
        let f0 = CoefficientSequence::zeros(1);
        let spec = IllPosedSpec::mild(1.0, 1.0);
        let n = 16u64;
        let reps = 100_000u64;
        let mean: f64 = (0..reps).map(|s| observe(&f0, &spec, n, 1, s).y[0]).sum::<f64>() / reps as f64;
        let band = 4.0 * (reps as f64).powf(-0.5) * (n as f64).powf(-0.5);
        assert!(mean.abs() < band, "{mean} outside ±{band}");
    }
}
