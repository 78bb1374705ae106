//! Experiment configuration: one flat record with per-regime defaults.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::rates_modulus::Regime;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub regime: Regime,
    /// Prior regularity α (sequence models).
    pub alpha: f64,
    /// Truth regularity β.
    pub beta: f64,
    /// Degree of ill-posedness (mild/deconvolution) or exponent in e^{−γiᵖ}.
    pub p: f64,
    pub gamma: f64,
    pub xi: f64,
    /// Constant C in κ_i = C i^(−p).
    pub kappa_c: f64,
    /// Spline order.
    pub q: usize,
    /// Regression noise level (Volterra, deconvolution).
    pub sigma: f64,
    pub c_x: f64,
    /// Truth radius: Sobolev radius, Hölder constant or Sobolev-β seminorm.
    pub radius: f64,
    /// Extra decay of the sequence truth, f₀,i ∝ i^(−β−1/2−η).
    pub eta: f64,
    /// Explicit coordinates N in the sequence models.
    pub head: usize,
    pub n_grid: Vec<u64>,
    pub replications: usize,
    pub credible_level: f64,
    pub draws: usize,
    pub seed: u64,
    /// Finite-n stand-in for Mₙ in δ = M · direct radius.
    pub m: f64,
    pub tolerance: f64,
    pub log_nuisance: bool,
    /// Tail-set constant c in 𝒮ₙ = {Σ_{i>k} f_i² ≤ cρ²}.
    pub tail_c: f64,
    /// Spline dimension grid J_min..=J_max.
    pub j_min: usize,
    pub j_max: usize,
    /// Geometric rate of the spline dimension prior.
    pub j_rate: f64,
    /// Terms in the lacunary Hölder truth.
    pub holder_terms: usize,
    /// Mixture prior Π_J ∝ j^(−s).
    pub s: f64,
    /// Bandwidths in the deconvolution grid.
    pub v_points: usize,
    pub v_min: f64,
    pub v_max: f64,
    /// Largest dyadic J in the deconvolution grid.
    pub mixture_j_max: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::for_regime(Regime::MildSeq)
    }
}

fn dyadic(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|k| 1u64 << k).collect()
}

impl ExperimentConfig {
    pub fn for_regime(regime: Regime) -> Self {
        let base = Self {
            regime,
            alpha: 1.0,
            beta: 1.0,
            p: 1.0,
            gamma: 1.0,
            xi: 0.0,
            kappa_c: 1.0,
            q: 3,
            sigma: 1.0,
            c_x: 0.25,
            radius: 1.0,
            eta: 0.05,
            head: 1 << 14,
            n_grid: dyadic(8, 16),
            replications: 50,
            credible_level: 0.9,
            draws: 200,
            seed: 20240601,
            m: 1.0,
            tolerance: 0.07,
            log_nuisance: false,
            tail_c: 1.0,
            j_min: 3,
            j_max: 40,
            j_rate: 0.3,
            holder_terms: 8,
            s: 2.0,
            v_points: 40,
            v_min: 1e-3,
            v_max: 10.0,
            mixture_j_max: 64,
        };
        match regime {
            Regime::MildSeq => base,
            Regime::SevereSeq => Self { n_grid: dyadic(8, 16), head: 256, ..base },
            Regime::Volterra => Self { n_grid: dyadic(8, 14), replications: 20, tolerance: 0.10, sigma: 0.1, ..base },
            Regime::Deconv => Self {
                n_grid: dyadic(6, 12),
                replications: 20,
                tolerance: 0.10,
                p: 2.0,
                sigma: 1.0,
                radius: 10.0,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with(4)
    }

    /// As [`validate`](Self::validate) with a custom minimum grid length;
    /// reports that fit no slope accept a single n.
    // Negated comparisons also reject NaN.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate_with(&self, min_grid: usize) -> Result<()> {
        let fail =
            |key: &str, constraint: &str| Err(Error::Validation { key: key.into(), constraint: constraint.into() });
        if self.n_grid.len() < min_grid.max(1) {
            return fail("n_grid", &format!("at least {} sample sizes", min_grid.max(1)));
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return fail("n_grid", "strictly increasing");
        }
        if self.n_grid[0] < 2 {
            return fail("n_grid", "sample sizes ≥ 2");
        }
        if self.replications < 20 {
            return fail("replications", "at least 20");
        }
        if !(self.credible_level > 0.0 && self.credible_level < 1.0) {
            return fail("credible_level", "in (0, 1)");
        }
        if self.draws < 100 {
            return fail("draws", "at least 100");
        }
        if !(self.alpha >= 0.0) {
            return fail("alpha", "≥ 0");
        }
        if !(self.beta > 0.0) {
            return fail("beta", "> 0");
        }
        if !(self.p >= 0.0) {
            return fail("p", "≥ 0");
        }
        if !(self.sigma > 0.0) {
            return fail("sigma", "> 0");
        }
        if !(self.radius >= 0.0) {
            return fail("radius", "≥ 0");
        }
        if !(self.eta > 0.0) {
            return fail("eta", "> 0");
        }
        if self.head < 1 {
            return fail("head", "≥ 1");
        }
        if !(self.m > 0.0) {
            return fail("m", "> 0");
        }
        if !(self.tolerance > 0.0) {
            return fail("tolerance", "> 0");
        }
        if !(self.kappa_c >= 1.0) {
            return fail("kappa_c", "≥ 1");
        }
        match self.regime {
            Regime::SevereSeq => {
                if !(self.gamma > 0.0 && self.p >= 1.0) {
                    return fail("gamma", "γ > 0 and p ≥ 1 for severe operators");
                }
                if !(self.xi + 2.0 * self.gamma > 0.0) {
                    return fail("xi", "ξ + 2γ > 0");
                }
            }
            Regime::Volterra => {
                if self.q < 2 {
                    return fail("q", "spline order ≥ 2");
                }
                if !(self.j_min >= 2 && self.j_max >= self.j_min) {
                    return fail("j_max", "2 ≤ j_min ≤ j_max");
                }
                if !(self.j_rate > 0.0 && self.j_rate < 1.0) {
                    return fail("j_rate", "in (0, 1)");
                }
            }
            Regime::Deconv => {
                if self.beta.fract() != 0.0 {
                    return fail("beta", "integer for the bump truth");
                }
                if !(self.c_x > 0.0) {
                    return fail("c_x", "> 0");
                }
                if !(self.s > 1.0) {
                    return fail("s", "> 1");
                }
                if !(self.v_min > 0.0 && self.v_max >= self.v_min && self.v_points >= 1) {
                    return fail("v_min", "0 < v_min ≤ v_max with at least one point");
                }
                if self.mixture_j_max < 1 {
                    return fail("mixture_j_max", "≥ 1");
                }
                if (self.p - 2.0).abs() > 0.0 {
                    return fail("p", "2 (Laplace kernel)");
                }
            }
            Regime::MildSeq => {}
        }
        Ok(())
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
            v.trim().parse::<T>().map_err(|_| format!("cannot parse `{}`", v.trim()))
        }
        match key {
            "regime" => self.regime = value.trim().parse().map_err(|e: Error| e.to_string())?,
            "alpha" => self.alpha = num(value)?,
            "beta" => self.beta = num(value)?,
            "p" => self.p = num(value)?,
            "gamma" => self.gamma = num(value)?,
            "xi" => self.xi = num(value)?,
            "kappa_c" => self.kappa_c = num(value)?,
            "q" => self.q = num(value)?,
            "sigma" => self.sigma = num(value)?,
            "c_x" => self.c_x = num(value)?,
            "radius" => self.radius = num(value)?,
            "eta" => self.eta = num(value)?,
            "head" => self.head = num(value)?,
            "n_grid" => self.n_grid = parse_grid(value)?,
            "replications" => self.replications = num(value)?,
            "credible_level" => self.credible_level = num(value)?,
            "draws" => self.draws = num(value)?,
            "seed" => self.seed = num(value)?,
            "m" => self.m = num(value)?,
            "tolerance" => self.tolerance = num(value)?,
            "log_nuisance" => self.log_nuisance = num(value)?,
            "tail_c" => self.tail_c = num(value)?,
            "j_min" => self.j_min = num(value)?,
            "j_max" => self.j_max = num(value)?,
            "j_rate" => self.j_rate = num(value)?,
            "holder_terms" => self.holder_terms = num(value)?,
            "s" => self.s = num(value)?,
            "v_points" => self.v_points = num(value)?,
            "v_min" => self.v_min = num(value)?,
            "v_max" => self.v_max = num(value)?,
            "mixture_j_max" => self.mixture_j_max = num(value)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// `key = value` lines for every field, in a fixed order.
    pub fn echo(&self) -> String {
        let grid: Vec<String> = self.n_grid.iter().map(|n| n.to_string()).collect();
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        line("regime", self.regime.name().into());
        line("alpha", self.alpha.to_string());
        line("beta", self.beta.to_string());
        line("p", self.p.to_string());
        line("gamma", self.gamma.to_string());
        line("xi", self.xi.to_string());
        line("kappa_c", self.kappa_c.to_string());
        line("q", self.q.to_string());
        line("sigma", self.sigma.to_string());
        line("c_x", self.c_x.to_string());
        line("radius", self.radius.to_string());
        line("eta", self.eta.to_string());
        line("head", self.head.to_string());
        line("n_grid", grid.join(","));
        line("replications", self.replications.to_string());
        line("credible_level", self.credible_level.to_string());
        line("draws", self.draws.to_string());
        line("seed", self.seed.to_string());
        line("m", self.m.to_string());
        line("tolerance", self.tolerance.to_string());
        line("log_nuisance", self.log_nuisance.to_string());
        line("tail_c", self.tail_c.to_string());
        line("j_min", self.j_min.to_string());
        line("j_max", self.j_max.to_string());
        line("j_rate", self.j_rate.to_string());
        line("holder_terms", self.holder_terms.to_string());
        line("s", self.s.to_string());
        line("v_points", self.v_points.to_string());
        line("v_min", self.v_min.to_string());
        line("v_max", self.v_max.to_string());
        line("mixture_j_max", self.mixture_j_max.to_string());
        s
    }
}

/// Comma-separated integers, or `a^k..l` for the powers aᵏ…aˡ.
fn parse_grid(v: &str) -> std::result::Result<Vec<u64>, String> {
    let v = v.trim();
    if let Some((base, range)) = v.split_once('^') {
        let base: u64 = base.trim().parse().map_err(|_| format!("cannot parse `{v}`"))?;
        let (lo, hi) = range.split_once("..").ok_or_else(|| format!("cannot parse `{v}`"))?;
        let lo: u32 = lo.trim().parse().map_err(|_| format!("cannot parse `{v}`"))?;
        let hi: u32 = hi.trim().parse().map_err(|_| format!("cannot parse `{v}`"))?;
        return (lo..=hi).map(|k| base.checked_pow(k).ok_or_else(|| format!("overflow in `{v}`"))).collect();
    }
    v.split(',').map(|t| t.trim().parse::<u64>().map_err(|_| format!("cannot parse `{}`", t.trim()))).collect()
}
