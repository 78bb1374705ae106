//! Tail sets, modulus-of-continuity bounds, rate exponents and Monte Carlo
//! checks of the prior-mass bounds in the sequence model.

mod lambert;
mod rates;

pub use lambert::{lambert_w, lambert_w_exp, severe_k_n, SevereTruncation};
pub use rates::{rate_exponent, RateExponents, RateParams, Regime};

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{self, Purpose};
use crate::seq_model::{CoefficientSequence, GaussianProductPrior, IllPosedSpec};

/// 𝒮ₙ = { f : Σ_{i>k} f_i² ≤ c ρ² }.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSet {
    pub k_n: usize,
    pub rho_n: f64,
    pub c: f64,
}

impl TailSet {
    pub fn new(k_n: usize, rho_n: f64, c: f64) -> Self {
        assert!(k_n >= 1 && rho_n > 0.0 && c >= 0.0);
        Self { k_n, rho_n, c }
    }

    /// c ρ².
    pub fn threshold(&self) -> f64 {
        self.c * self.rho_n * self.rho_n
    }

    pub fn contains(&self, f: &CoefficientSequence) -> bool {
        f.tail_sq_from(self.k_n) <= self.threshold()
    }
}

/// Three-term bound ‖f − f₀‖ ≤ δ/κ_k + √c ρ + 2‖f₀‖_s k^(−β).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusBound {
    pub inversion_term: f64,
    pub tail_term: f64,
    pub bias_term: f64,
}

impl ModulusBound {
    pub fn total(&self) -> f64 {
        self.inversion_term + self.tail_term + self.bias_term
    }
}

pub fn modulus_upper_bound(ts: &TailSet, spec: &IllPosedSpec, f0_norm_s: f64, beta: f64, delta: f64) -> ModulusBound {
    assert!(delta >= 0.0, "δ must be nonnegative");
    ModulusBound {
        inversion_term: delta / spec.kappa(ts.k_n),
        tail_term: ts.c.sqrt() * ts.rho_n,
        bias_term: 2.0 * f0_norm_s * (ts.k_n as f64).powf(-beta),
    }
}

/// Evaluates a modulus bound at δ = `direct_radius`.
pub fn implied_inverse_radius<F: Fn(f64) -> ModulusBound>(mod_bound_fn: F, direct_radius: f64) -> f64 {
    assert!(direct_radius >= 0.0);
    mod_bound_fn(direct_radius).total()
}

/// Outcome of sampling the inequality ‖g‖² ≤ κ_k^(−2)‖Kg‖² + cρ² on 𝒮ₙ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainReport {
    pub samples: usize,
    pub violations: usize,
    /// Smallest and largest rhs − lhs over the draws.
    pub min_slack: f64,
    pub max_slack: f64,
}

/// ‖g‖² and κ_k^(−2)‖Kg‖² + cρ² for an explicit vector g.
pub fn modulus_chain_sides(ts: &TailSet, spec: &IllPosedSpec, g: &[f64]) -> (f64, f64) {
    let kk = spec.kappa(ts.k_n);
    let lhs: f64 = g.iter().map(|x| x * x).sum();
    let kg: f64 = g.iter().enumerate().map(|(i, x)| (spec.kappa(i + 1) * x).powi(2)).sum();
    (lhs, kg / (kk * kk) + ts.threshold())
}

/// Draws random members of 𝒮ₙ and checks the chain inequality on each.
pub fn check_modulus_chain(ts: &TailSet, spec: &IllPosedSpec, samples: usize, seed: u64) -> Result<ChainReport> {
    let mut rng = rng::stream(seed, Purpose::ChainSamples, &[ts.k_n as u64]);
    let k = ts.k_n;
    let len = k + (4 * k).max(16);
    let mut report = ChainReport { samples, violations: 0, min_slack: f64::INFINITY, max_slack: f64::NEG_INFINITY };
    let mut g = vec![0.0; len];
    for s in 0..samples {
        let head_scale = 10f64.powf(rng.random_range(-3.0..1.0));
        for x in g[..k].iter_mut() {
            *x = head_scale * rng::normal(&mut rng);
        }
        // Tail part: random direction (every fourth draw a single spike),
        // squared norm uniform in [0, cρ²].
        for x in g[k..].iter_mut() {
            *x = 0.0;
        }
        if s % 4 == 3 {
            let j = rng.random_range(k..len);
            g[j] = 1.0;
        } else {
            for x in g[k..].iter_mut() {
                *x = rng::normal(&mut rng);
            }
        }
        let norm: f64 = g[k..].iter().map(|x| x * x).sum::<f64>().sqrt();
        let target = (rng.random::<f64>() * ts.threshold()).sqrt();
        for x in g[k..].iter_mut() {
            *x *= target / norm;
        }
        let (lhs, rhs) = modulus_chain_sides(ts, spec, &g);
        let slack = rhs - lhs;
        if lhs > rhs * (1.0 + 1e-12) {
            return Err(Error::ChainViolation { lhs, rhs, detail: format!("sample {s}: g = {g:?}") });
        }
        report.min_slack = report.min_slack.min(slack);
        report.max_slack = report.max_slack.max(slack);
    }
    Ok(report)
}

/// Upper bound exp(−(c/8) ρ² k^(1+2α)) on the prior mass outside 𝒮ₙ,
/// valid when k^(2α) ≥ 2(1+2α)/(α c ρ²).
pub fn prior_mass_tail_bound(alpha: f64, k_n: usize, rho_n: f64, c: f64) -> Result<f64> {
    let k = k_n as f64;
    let needed = 2.0 * (1.0 + 2.0 * alpha) / (alpha * c * rho_n * rho_n);
    if !(alpha > 0.0 && c > 0.0) || k.powf(2.0 * alpha) < needed {
        return Err(Error::HypothesisUnmet(format!(
            "k^(2α) = {:.6e} < 2(1+2α)/(αcρ²) = {:.6e}",
            k.powf(2.0 * alpha),
            needed
        )));
    }
    Ok((-(c / 8.0) * rho_n * rho_n * k.powf(1.0 + 2.0 * alpha)).exp())
}

/// Monte Carlo probability with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub draws: usize,
}

impl McEstimate {
    fn from_hits(hits: usize, draws: usize) -> Self {
        let p = hits as f64 / draws as f64;
        Self { estimate: p, stderr: (p * (1.0 - p) / draws as f64).sqrt(), draws }
    }

    fn exact(p: f64, draws: usize) -> Self {
        Self { estimate: p, stderr: 0.0, draws }
    }
}

/// Estimates Π(𝒮ₙᶜ) = Pr(Σ_{i>k} λ_i W_i² > cρ²) from coordinates k < i ≤ N.
/// The omitted coordinates i > N enter through their mean Σ_{i>N} λ_i, which
/// can only raise the estimate.
pub fn prior_mass_tail_mc(
    prior: &GaussianProductPrior,
    ts: &TailSet,
    draws: usize,
    head: usize,
    seed: u64,
) -> Result<McEstimate> {
    let k = ts.k_n;
    if head < k {
        return Err(Error::InvalidArgument(format!("head {head} shorter than k_n = {k}")));
    }
    if prior.truncation.is_some_and(|t| t <= k) {
        return Ok(McEstimate::exact(0.0, draws));
    }
    if ts.threshold() == 0.0 {
        return Ok(McEstimate::exact(1.0, draws));
    }
    let omitted = prior.tail_variance(head, None);
    let allowed = 1e-3 * ts.threshold();
    if omitted > allowed {
        return Err(Error::TruncationTooCoarse { omitted, allowed });
    }
    let sd: Vec<f64> = (k + 1..=head).map(|i| prior.variance(i).sqrt()).collect();
    let mut rng = rng::stream(seed, Purpose::PriorDraws, &[k as u64, head as u64]);
    let thr = ts.threshold();
    let hits = (0..draws)
        .filter(|_| {
            let mut s = omitted;
            for d in &sd {
                let z = d * rng::normal(&mut rng);
                s += z * z;
            }
            s > thr
        })
        .count();
    Ok(McEstimate::from_hits(hits, draws))
}

/// Prior mass of a Kf-ball around Kf₀ plus the exponent of the matching lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallBallEstimate {
    pub mc: McEstimate,
    /// Set when the estimate is below 100/draws.
    pub low_confidence: bool,
    /// ε^(−(1+2α−2(α∧β))/((α∧β)+p)).
    pub lemma_exponent: f64,
}

impl SmallBallEstimate {
    /// log of the estimate minus the log of exp(−lemma_exponent); bounded
    /// below across ε when the lower bound holds with some constants.
    pub fn log_ratio_to_bound(&self) -> f64 {
        self.mc.estimate.ln() + self.lemma_exponent
    }
}

/// ε^(−(1+2α−2(α∧β))/((α∧β)+p)).
pub fn kl_smallball_exponent(alpha: f64, beta: f64, p: f64, epsilon: f64) -> f64 {
    let m = alpha.min(beta);
    epsilon.powf(-(1.0 + 2.0 * alpha - 2.0 * m) / (m + p))
}

/// Estimates Π(‖Kf − Kf₀‖ ≤ ε) by prior sampling of the first N coordinates;
/// coordinates beyond N contribute their expected squared deviation.
#[allow(clippy::too_many_arguments)]
pub fn kl_smallball_mc(
    prior: &GaussianProductPrior,
    f0: &CoefficientSequence,
    spec: &IllPosedSpec,
    beta: f64,
    epsilon: f64,
    head: usize,
    draws: usize,
    seed: u64,
) -> SmallBallEstimate {
    let kf0 = f0.apply_operator(spec);
    let sd: Vec<f64> = (1..=head).map(|i| (prior.variance(i)).sqrt() * spec.kappa(i)).collect();
    let fixed = prior.tail_variance(head, Some(spec)) + kf0.tail_sq_from(head);
    let eps2 = epsilon * epsilon;
    let mut rng = rng::stream(seed, Purpose::PriorDraws, &[head as u64, epsilon.to_bits()]);
    let hits = (0..draws)
        .filter(|_| {
            let mut s = fixed;
            for (i, d) in sd.iter().enumerate() {
                let e = d * rng::normal(&mut rng) - kf0.coeff(i + 1);
                s += e * e;
                if s > eps2 {
                    // Remaining coordinates still have to be consumed so the
                    // stream position does not depend on the outcome.
                    for _ in i + 1..sd.len() {
                        rng::normal(&mut rng);
                    }
                    return false;
                }
            }
            true
        })
        .count();
    let mc = McEstimate::from_hits(hits, draws);
    SmallBallEstimate {
        mc,
        low_confidence: mc.estimate < 100.0 / draws as f64,
        lemma_exponent: kl_smallball_exponent(prior.alpha(), beta, spec.p(), epsilon),
    }
}
