use crate::numeric::hurwitz_zeta;

use super::IllPosedSpec;

/// Shape of the prior variance sequence λ_i.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorStyle {
    /// λ_i = scale · i^(−1−2α).
    Polynomial { alpha: f64 },
    /// λ_i = scale · i^(−α) · exp(−ξ i^p).
    Exponential { alpha: f64, xi: f64, p: f64 },
}

/// Product prior ⊗ N(0, λ_i), optionally truncated after k coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianProductPrior {
    pub style: PriorStyle,
    pub truncation: Option<usize>,
    pub scale: f64,
}

impl GaussianProductPrior {
    pub fn mild(alpha: f64) -> Self {
        assert!(alpha >= 0.0);
        Self { style: PriorStyle::Polynomial { alpha }, truncation: None, scale: 1.0 }
    }

    pub fn severe(alpha: f64, xi: f64, p: f64) -> Self {
        assert!(alpha >= 0.0 && p > 0.0);
        Self { style: PriorStyle::Exponential { alpha, xi, p }, truncation: None, scale: 1.0 }
    }

    pub fn truncated(mut self, k: usize) -> Self {
        assert!(k >= 1, "truncation level must be positive");
        self.truncation = Some(k);
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        assert!(scale > 0.0);
        self.scale = scale;
        self
    }

    pub fn alpha(&self) -> f64 {
        match self.style {
            PriorStyle::Polynomial { alpha } | PriorStyle::Exponential { alpha, .. } => alpha,
        }
    }

    /// Whether the pairing with `spec` gives a proper prior on Kf (ξ > −2γ for severe operators).
    pub fn compatible_with(&self, spec: &IllPosedSpec) -> bool {
        match (self.style, spec) {
            (PriorStyle::Exponential { xi, p, .. }, IllPosedSpec::Severe { gamma, p: q }) => {
                xi + 2.0 * gamma > 0.0 && (p - q).abs() < 1e-12
            }
            _ => true,
        }
    }

    /// λ_i, zero beyond the truncation level.
    #[inline]
    pub fn variance(&self, i: usize) -> f64 {
        if self.truncation.is_some_and(|k| i > k) {
            return 0.0;
        }
        let x = i as f64;
        self.scale
            * match self.style {
                PriorStyle::Polynomial { alpha } => x.powf(-1.0 - 2.0 * alpha),
                PriorStyle::Exponential { alpha, xi, p } => x.powf(-alpha) * (-xi * x.powf(p)).exp(),
            }
    }

    /// Σ_{i>from} λ_i · w_i where w_i = κ_i² if `spec` is given, else 1.
    /// Returns +∞ when the series diverges.
    pub fn tail_variance(&self, from: usize, spec: Option<&IllPosedSpec>) -> f64 {
        let last = match self.truncation {
            Some(k) if k <= from => return 0.0,
            Some(k) => Some(k),
            None => None,
        };
        if last.is_none() {
            // Pure power laws in closed form.
            let power = match (self.style, spec) {
                (PriorStyle::Polynomial { alpha }, None) => Some((1.0 + 2.0 * alpha, 1.0)),
                (PriorStyle::Polynomial { alpha }, Some(IllPosedSpec::Mild { p, c })) => {
                    Some((1.0 + 2.0 * alpha + 2.0 * p, c * c))
                }
                (PriorStyle::Exponential { alpha, xi: 0.0, .. }, None) => Some((alpha, 1.0)),
                _ => None,
            };
            if let Some((s, factor)) = power {
                if s <= 1.0 {
                    return f64::INFINITY;
                }
                return self.scale * factor * hurwitz_zeta(s, (from + 1) as f64).value;
            }
        }
        let weight = |i: usize| {
            let k = spec.map_or(1.0, |s| s.kappa(i).powi(2));
            self.variance(i) * k
        };
        let mut sum = 0.0;
        let mut i = from + 1;
        loop {
            if last.is_some_and(|k| i > k) {
                return sum;
            }
            let t = weight(i);
            sum += t;
            if t <= 1e-18 * sum || t < 1e-300 {
                return sum;
            }
            if i > from + 50_000_000 {
                return f64::INFINITY;
            }
            i += 1;
        }
    }
}
