//! Polynomial bump truth f₀(x) = A(x(1−x))^(β+1) on [0, 1].

use super::kernel::ConvolutionKernel;
use crate::error::{Error, Result};
use crate::numeric::GaussLegendre;

/// Coefficients in the monomial basis, lowest degree first.
fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_deriv(a: &[f64]) -> Vec<f64> {
    if a.len() <= 1 {
        return vec![0.0];
    }
    a.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect()
}

fn poly_eval(a: &[f64], x: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// ∫₀¹ of a polynomial.
fn poly_integral01(a: &[f64]) -> f64 {
    a.iter().enumerate().map(|(k, c)| c / (k + 1) as f64).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BumpTruth {
    pub beta: usize,
    pub scale: f64,
    /// Unscaled profile (x(1−x))^(β+1).
    profile: Vec<f64>,
}

impl BumpTruth {
    pub fn f(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        self.scale * poly_eval(&self.profile, x)
    }

    /// k-th derivative on [0, 1].
    pub fn derivative(&self, k: usize, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        let mut p = self.profile.clone();
        for _ in 0..k {
            p = poly_deriv(&p);
        }
        self.scale * poly_eval(&p, x)
    }

    /// ‖f₀‖²₂, exact.
    pub fn l2_sq(&self) -> f64 {
        self.scale * self.scale * poly_integral01(&poly_mul(&self.profile, &self.profile))
    }

    /// ∫f₀²  of the β-th derivative, exact.
    pub fn sobolev_seminorm_sq(&self) -> f64 {
        self.scale * self.scale * seminorm_sq_unscaled(&self.profile, self.beta)
    }

    /// ∫₀¹ f₀(u) φ_v(u − z) du.
    pub fn gaussian_cross(&self, v: f64, z: f64) -> f64 {
        let lo = (z - 12.0 * v).max(0.0);
        let hi = (z + 12.0 * v).min(1.0);
        if hi <= lo {
            return 0.0;
        }
        let panels = ((hi - lo) / v).ceil().clamp(2.0, 64.0) as usize;
        let gl = GaussLegendre::new(16);
        gl.composite(|u| self.f(u) * crate::numeric::gaussian_pdf(u - z, v), lo, hi, panels)
    }

    /// Kf₀(x) = ∫₀¹ f₀(u)λ(x − u)du for kernels with a closed-form density,
    /// split at u = x where the Laplace kernel has its kink.
    pub fn kf(&self, kernel: &ConvolutionKernel, x: f64) -> Result<f64> {
        if kernel.density(0.0).is_none() {
            return Err(Error::InvalidArgument("Kf₀ needs a kernel density".into()));
        }
        let gl = GaussLegendre::new(24);
        let g = |u: f64| self.f(u) * kernel.density(x - u).unwrap();
        let inner = x.clamp(0.0, 1.0);
        let mut s = 0.0;
        if inner > 0.0 {
            s += gl.composite(g, 0.0, inner, 4);
        }
        if inner < 1.0 {
            s += gl.composite(g, inner, 1.0, 4);
        }
        Ok(s)
    }
}

fn seminorm_sq_unscaled(profile: &[f64], beta: usize) -> f64 {
    let mut p = profile.to_vec();
    for _ in 0..beta {
        p = poly_deriv(&p);
    }
    poly_integral01(&poly_mul(&p, &p))
}

/// Bump with ∫|f₀^(β)|² = L². The β-th derivative of (x(1−x))^(β+1) is
/// continuous across 0 and 1, so this is the Sobolev-β seminorm on ℝ.
pub fn sobolev_bump_truth(beta: usize, l: f64) -> BumpTruth {
    assert!(beta >= 1 && l >= 0.0);
    let base = [0.0, 1.0, -1.0];
    let mut profile = vec![1.0];
    for _ in 0..=beta {
        profile = poly_mul(&profile, &base);
    }
    let scale = l / seminorm_sq_unscaled(&profile, beta).sqrt();
    BumpTruth { beta, scale, profile }
}
