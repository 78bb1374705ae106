//! Coefficient sequences with an explicit head and an analytic tail.

use crate::error::{Error, Result};
use crate::numeric::hurwitz_zeta;

use super::IllPosedSpec;

/// Description of the coordinates beyond the explicit head.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    Zero,
    /// f_i = amplitude · i^(−exponent).
    PowerDecay {
        amplitude: f64,
        exponent: f64,
    },
    /// f_i = amplitude · i^(−exponent) · exp(−gamma · i^p); arises when a
    /// severely ill-posed operator is applied to a power-decay tail.
    Damped {
        amplitude: f64,
        exponent: f64,
        gamma: f64,
        p: f64,
    },
}

impl Tail {
    fn value(&self, i: usize) -> f64 {
        let x = i as f64;
        match *self {
            Tail::Zero => 0.0,
            Tail::PowerDecay { amplitude, exponent } => amplitude * x.powf(-exponent),
            Tail::Damped { amplitude, exponent, gamma, p } => {
                amplitude * x.powf(-exponent) * (-gamma * x.powf(p)).exp()
            }
        }
    }
}

/// Sum of squares with its certified remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub value: f64,
    /// Contribution of the analytic tail to the squared norm.
    pub tail_sq: f64,
    /// Bound on the numerical error of `tail_sq`.
    pub remainder_bound: f64,
}

/// A square-summable sequence: explicit coordinates 1..=N followed by an analytic tail.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence {
    coeffs: Vec<f64>,
    tail: Tail,
}

impl CoefficientSequence {
    pub fn new(coeffs: Vec<f64>, tail: Tail) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("coefficient head must be nonempty".into()));
        }
        if let Tail::PowerDecay { amplitude, exponent } = tail {
            if amplitude != 0.0 && exponent <= 0.5 {
                return Err(Error::DivergentNorm { exponent, required: 0.5 });
            }
        }
        Ok(Self { coeffs, tail })
    }

    pub fn zeros(n: usize) -> Self {
        Self { coeffs: vec![0.0; n.max(1)], tail: Tail::Zero }
    }

    pub fn from_head(coeffs: Vec<f64>) -> Self {
        Self::new(coeffs, Tail::Zero).expect("nonempty head")
    }

    pub fn head(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn head_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    /// Coordinate i (1-based), reading the tail past the head.
    pub fn coeff(&self, i: usize) -> f64 {
        assert!(i >= 1, "coordinates are 1-based");
        if i <= self.coeffs.len() {
            self.coeffs[i - 1]
        } else {
            self.tail.value(i)
        }
    }

    /// Σ_{i>k} f_i² i^(2β) over the tail only, for k ≥ N.
    fn tail_weighted_sq(&self, k: usize, beta: f64) -> Result<(f64, f64)> {
        debug_assert!(k >= self.coeffs.len());
        match self.tail {
            Tail::Zero => Ok((0.0, 0.0)),
            Tail::PowerDecay { amplitude, exponent } => {
                if amplitude == 0.0 {
                    return Ok((0.0, 0.0));
                }
                let s = 2.0 * exponent - 2.0 * beta;
                if s <= 1.0 {
                    return Err(Error::DivergentNorm { exponent, required: beta + 0.5 });
                }
                let z = hurwitz_zeta(s, (k + 1) as f64);
                let a2 = amplitude * amplitude;
                Ok((a2 * z.value, a2 * z.error_bound))
            }
            Tail::Damped { .. } => {
                let mut sum = 0.0;
                let mut i = k + 1;
                loop {
                    let v = self.tail.value(i);
                    let term = v * v * (i as f64).powf(2.0 * beta);
                    sum += term;
                    if term <= 1e-20 * sum || term < 1e-300 || i > k + 10_000_000 {
                        return Ok((sum, term));
                    }
                    i += 1;
                }
            }
        }
    }

    /// Σ f_i² i^(2β), head plus analytic tail.
    pub fn weighted_sq_norm(&self, beta: f64) -> Result<NormReport> {
        let head: f64 = self.coeffs.iter().enumerate().map(|(i, &c)| c * c * ((i + 1) as f64).powf(2.0 * beta)).sum();
        let (tail_sq, remainder_bound) = self.tail_weighted_sq(self.coeffs.len(), beta)?;
        Ok(NormReport { value: head + tail_sq, tail_sq, remainder_bound })
    }

    /// Squared ℓ₂ norm.
    pub fn l2_sq(&self) -> f64 {
        self.weighted_sq_norm(0.0).map(|r| r.value).expect("tail exponent exceeds 1/2")
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_sq().sqrt()
    }

    /// Σ_{i>k} f_i².
    pub fn tail_sq_from(&self, k: usize) -> f64 {
        let n = self.coeffs.len();
        if k >= n {
            self.tail_weighted_sq(k, 0.0).expect("tail exponent exceeds 1/2").0
        } else {
            let head: f64 = self.coeffs[k..].iter().map(|c| c * c).sum();
            head + self.tail_weighted_sq(n, 0.0).expect("tail exponent exceeds 1/2").0
        }
    }

    /// ‖self − other‖², with the tail cross terms in closed form when both tails are power laws.
    pub fn distance_sq(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        let head: f64 = (1..=n).map(|i| (self.coeff(i) - other.coeff(i)).powi(2)).sum();
        let tail = match (self.tail, other.tail) {
            (Tail::Zero, _) => other.tail_sq_from(n),
            (_, Tail::Zero) => self.tail_sq_from(n),
            (Tail::PowerDecay { amplitude: a, exponent: e1 }, Tail::PowerDecay { amplitude: b, exponent: e2 }) => {
                let from = (n + 1) as f64;
                let aa = a * a * hurwitz_zeta(2.0 * e1, from).value;
                let bb = b * b * hurwitz_zeta(2.0 * e2, from).value;
                let ab = a * b * hurwitz_zeta(e1 + e2, from).value;
                (aa + bb - 2.0 * ab).max(0.0)
            }
            _ => {
                let mut sum = 0.0;
                let mut i = n + 1;
                loop {
                    let d = self.coeff(i) - other.coeff(i);
                    sum += d * d;
                    if (d * d <= 1e-20 * sum && i > n + 64) || i > n + 10_000_000 {
                        break sum;
                    }
                    i += 1;
                }
            }
        };
        head + tail
    }

    /// The image K f in the singular basis: coordinates κ_i f_i.
    pub fn apply_operator(&self, spec: &IllPosedSpec) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, &c)| spec.kappa(i + 1) * c).collect();
        let tail = match (self.tail, *spec) {
            (Tail::Zero, _) => Tail::Zero,
            (Tail::PowerDecay { amplitude, exponent }, IllPosedSpec::Mild { p, c }) => {
                Tail::PowerDecay { amplitude: c * amplitude, exponent: exponent + p }
            }
            (Tail::PowerDecay { amplitude, exponent }, IllPosedSpec::Severe { gamma, p }) => {
                Tail::Damped { amplitude, exponent, gamma, p }
            }
            (Tail::Damped { amplitude, exponent, gamma: g0, p: p0 }, IllPosedSpec::Mild { p, c }) => {
                Tail::Damped { amplitude: c * amplitude, exponent: exponent + p, gamma: g0, p: p0 }
            }
            (Tail::Damped { amplitude, exponent, gamma: g0, p: p0 }, IllPosedSpec::Severe { gamma, p })
                if (p - p0).abs() < 1e-15 =>
            {
                Tail::Damped { amplitude, exponent, gamma: g0 + gamma, p }
            }
            (Tail::Damped { .. }, IllPosedSpec::Severe { .. }) => {
                // Mixed damping exponents do not occur in practice; fold the
                // tail into the head far enough that the rest underflows.
                let mut head = self.coeffs.clone();
                let mut i = head.len() + 1;
                loop {
                    let v = self.tail.value(i);
                    if v.abs() < 1e-300 {
                        break;
                    }
                    head.push(v);
                    i += 1;
                }
                return Self::from_head(head).apply_operator(spec);
            }
        };
        Self { coeffs, tail }
    }
}

/// Sobolev norm ‖f‖_β = (Σ f_i² i^(2β))^(1/2), analytic tail included.
pub fn sobolev_norm(f: &CoefficientSequence, beta: f64) -> Result<f64> {
    Ok(f.weighted_sq_norm(beta)?.value.sqrt())
}

/// Canonical truth f₀,i = A · i^(−β−1/2−η) scaled so that ‖f₀‖_β = radius.
pub fn make_truth(beta: f64, radius: f64, eta: f64, head: usize) -> CoefficientSequence {
    assert!(eta > 0.0, "eta must be positive");
    if radius == 0.0 {
        return CoefficientSequence::zeros(head);
    }
    let exponent = beta + 0.5 + eta;
    // Σ_{i≥1} (i^(−exponent))² i^(2β) = ζ(1 + 2η).
    let amplitude = radius / hurwitz_zeta(1.0 + 2.0 * eta, 1.0).value.sqrt();
    let coeffs = (1..=head.max(1)).map(|i| amplitude * (i as f64).powf(-exponent)).collect();
    CoefficientSequence::new(coeffs, Tail::PowerDecay { amplitude, exponent }).expect("exponent exceeds 1/2")
}

/// Gaussian white-noise Kullback–Leibler divergence (n/2)‖kf1 − kf2‖².
pub fn kl_divergence(kf1: &CoefficientSequence, kf2: &CoefficientSequence, n: u64) -> f64 {
    0.5 * n as f64 * kf1.distance_sq(kf2)
}
