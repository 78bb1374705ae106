//! Polynomial (and log-power) contraction exponents per regime.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    MildSeq,
    SevereSeq,
    Volterra,
    Deconv,
}

impl Regime {
    pub const ALL: [Regime; 4] = [Regime::MildSeq, Regime::SevereSeq, Regime::Volterra, Regime::Deconv];

    pub fn name(self) -> &'static str {
        match self {
            Regime::MildSeq => "MildSeq",
            Regime::SevereSeq => "SevereSeq",
            Regime::Volterra => "Volterra",
            Regime::Deconv => "Deconv",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Regime::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown regime `{s}`")))
    }
}

/// Model parameters entering the exponents. Unused fields are ignored per regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub gamma: f64,
    pub xi: f64,
    /// Hyper-parameter of the spline-dimension prior (Volterra log power).
    pub t: f64,
    /// Log power of the deconvolution rate; not pinned down, treated as a nuisance.
    pub r: f64,
}

impl Default for RateParams {
    fn default() -> Self {
        Self { alpha: 1.0, beta: 1.0, p: 1.0, gamma: 1.0, xi: 0.0, t: 1.0, r: 0.0 }
    }
}

/// Rates n^(−e)(log n)^(l) for the inverse and direct problems.
///
/// For `SevereSeq` the inverse rate is purely logarithmic, (log n)^(−β/p);
/// `inverse_exponent` then stores β/p and `inverse_log_power` is −β/p.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateExponents {
    pub regime: Regime,
    pub inverse_exponent: f64,
    pub direct_exponent: f64,
    pub inverse_log_power: f64,
    pub direct_log_power: f64,
}

impl RateExponents {
    /// Slope of log(inverse radius) against log n, ignoring log factors.
    pub fn inverse_slope(&self) -> f64 {
        match self.regime {
            Regime::SevereSeq => 0.0,
            _ => -self.inverse_exponent,
        }
    }

    pub fn direct_slope(&self) -> f64 {
        -self.direct_exponent
    }
}

pub fn rate_exponent(regime: Regime, prm: &RateParams) -> RateExponents {
    let RateParams { alpha, beta, p, gamma, xi, t, r } = *prm;
    assert!(beta > 0.0, "β must be positive");
    match regime {
        Regime::MildSeq => {
            assert!(alpha > 0.0 && p >= 0.0);
            let m = alpha.min(beta);
            let d = 1.0 + 2.0 * alpha + 2.0 * p;
            RateExponents {
                regime,
                inverse_exponent: m / d,
                direct_exponent: (m + p) / d,
                inverse_log_power: 0.0,
                direct_log_power: 0.0,
            }
        }
        Regime::SevereSeq => {
            assert!(p > 0.0 && gamma > 0.0 && xi >= 0.0 && alpha >= 0.0);
            let b = xi + 2.0 * gamma;
            RateExponents {
                regime,
                inverse_exponent: beta / p,
                direct_exponent: gamma / b,
                inverse_log_power: -beta / p,
                direct_log_power: -beta / p + gamma * alpha / (p * b),
            }
        }
        Regime::Volterra => {
            let d = 2.0 * beta + 3.0;
            let rr = t.max(1.0) * (beta + 1.0) / d;
            RateExponents {
                regime,
                inverse_exponent: beta / d,
                direct_exponent: (beta + 1.0) / d,
                inverse_log_power: 3.0 * rr,
                direct_log_power: rr,
            }
        }
        Regime::Deconv => {
            assert!(p > 0.0);
            let d = 1.0 + 2.0 * beta + 2.0 * p;
            RateExponents {
                regime,
                inverse_exponent: beta / d,
                direct_exponent: (beta + p) / d,
                inverse_log_power: r,
                direct_log_power: r,
            }
        }
    }
}
