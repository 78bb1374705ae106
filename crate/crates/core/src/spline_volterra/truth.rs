//! Hölder-smooth test functions built from lacunary cosine series.

use std::f64::consts::{FRAC_PI_2, PI};

/// Grid resolution used to measure the Hölder constant.
pub const HOLDER_GRID: usize = 10_000;

/// f₀(x) = s Σ_{k<K} 2^(−k(β−r)) ω_k^(−r) cos(ω_k x − rπ/2), ω_k = 2ᵏπ, with
/// r = ⌈β⌉ − 1, so that f₀^(r) = s Σ 2^(−k(β−r)) cos(ω_k x) has Hölder
/// exponent β − r ∈ (0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct HolderTruth {
    pub beta: f64,
    pub r: u32,
    pub scale: f64,
    amps: Vec<f64>,
    freqs: Vec<f64>,
}

impl HolderTruth {
    fn unscaled(beta: f64, k_terms: usize) -> Self {
        assert!(beta > 0.0 && k_terms >= 1);
        let r = (beta.ceil() as u32).saturating_sub(1);
        let gamma = beta - r as f64;
        let freqs: Vec<f64> = (0..k_terms).map(|k| 2f64.powi(k as i32) * PI).collect();
        let amps = (0..k_terms).map(|k| 2f64.powf(-(k as f64) * gamma) / freqs[k].powi(r as i32)).collect();
        Self { beta, r, scale: 1.0, amps, freqs }
    }

    pub fn f(&self, x: f64) -> f64 {
        let phase = self.r as f64 * FRAC_PI_2;
        self.scale * self.amps.iter().zip(&self.freqs).map(|(a, w)| a * (w * x - phase).cos()).sum::<f64>()
    }

    /// Kf₀(x) = ∫₀ˣ f₀.
    pub fn kf(&self, x: f64) -> f64 {
        let phase = (self.r + 1) as f64 * FRAC_PI_2;
        self.scale
            * self.amps.iter().zip(&self.freqs).map(|(a, w)| a / w * ((w * x - phase).cos() - phase.cos())).sum::<f64>()
    }

    /// r-th derivative, the profile whose Hölder constant is controlled.
    pub fn profile(&self, x: f64) -> f64 {
        let gamma = self.beta - self.r as f64;
        self.scale
            * self.freqs.iter().enumerate().map(|(k, w)| 2f64.powf(-(k as f64) * gamma) * (w * x).cos()).sum::<f64>()
    }

    /// Derivative of the profile (used for the Lipschitz case).
    pub fn profile_derivative(&self, x: f64) -> f64 {
        let gamma = self.beta - self.r as f64;
        -self.scale
            * self
                .freqs
                .iter()
                .enumerate()
                .map(|(k, w)| 2f64.powf(-(k as f64) * gamma) * w * (w * x).sin())
                .sum::<f64>()
    }

    /// max |g(x) − g(y)| / |x − y|^(β−r) over all pairs of an equispaced grid.
    pub fn grid_holder_constant(&self, resolution: usize) -> f64 {
        holder_quotient(|x| self.profile(x), self.beta - self.r as f64, resolution)
    }
}

/// All-pairs Hölder quotient on the grid {i/N}; pairs are grouped by lag so
/// each power is computed once.
pub fn holder_quotient<F: Fn(f64) -> f64>(g: F, exponent: f64, resolution: usize) -> f64 {
    let vals: Vec<f64> = (0..=resolution).map(|i| g(i as f64 / resolution as f64)).collect();
    let h = 1.0 / resolution as f64;
    let mut best: f64 = 0.0;
    for lag in 1..=resolution {
        let denom = (lag as f64 * h).powf(exponent);
        let mut m: f64 = 0.0;
        for i in 0..=resolution - lag {
            m = m.max((vals[i + lag] - vals[i]).abs());
        }
        best = best.max(m / denom);
    }
    best
}

/// Canonical member of the Hölder class with grid-measured constant L.
pub fn make_holder_truth(beta: f64, l: f64, k_terms: usize) -> HolderTruth {
    assert!(l >= 0.0);
    let mut t = HolderTruth::unscaled(beta, k_terms);
    let c = t.grid_holder_constant(HOLDER_GRID);
    t.scale = if l == 0.0 { 0.0 } else { l / c };
    t
}
