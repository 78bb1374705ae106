//! Convolution kernels with analytic Fourier transforms λ̂(t) = ∫λ(u)e^{itu}du.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::numeric::{erfc, erfcx, gaussian_pdf, GaussLegendre};

#[derive(Debug, Clone, PartialEq)]
pub enum ConvolutionKernel {
    /// λ(x) = ½e^{−|x|}, λ̂(t) = 1/(1+t²); mildly ill-posed with p = 2.
    LaplaceP2,
    /// λ = N(0, τ²) density, λ̂(t) = e^{−τ²t²/2}; not mildly ill-posed.
    GaussianSmoothTest { tau: f64 },
    /// Symmetric kernel known only through λ̂ on 0 = t₀ < t₁ < … < t_M,
    /// linearly interpolated and assumed nonincreasing in |t| beyond t_M.
    UserTabulated { t: Vec<f64>, hat: Vec<f64>, p: f64 },
}

impl ConvolutionKernel {
    pub fn tabulated(t: Vec<f64>, hat: Vec<f64>, p: f64) -> Result<Self> {
        if t.len() < 2 || t.len() != hat.len() || t[0] != 0.0 || t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("tabulated λ̂ needs an increasing grid starting at 0".into()));
        }
        Ok(ConvolutionKernel::UserTabulated { t, hat, p })
    }

    /// Nominal degree of ill-posedness.
    pub fn p(&self) -> f64 {
        match self {
            ConvolutionKernel::LaplaceP2 => 2.0,
            ConvolutionKernel::GaussianSmoothTest { .. } => f64::INFINITY,
            ConvolutionKernel::UserTabulated { p, .. } => *p,
        }
    }

    pub fn fourier(&self, t: f64) -> f64 {
        match self {
            ConvolutionKernel::LaplaceP2 => 1.0 / (1.0 + t * t),
            ConvolutionKernel::GaussianSmoothTest { tau } => (-0.5 * tau * tau * t * t).exp(),
            ConvolutionKernel::UserTabulated { t: grid, hat, .. } => {
                let a = t.abs();
                let m = grid.len() - 1;
                if a >= grid[m] {
                    return hat[m];
                }
                let k = grid.partition_point(|&s| s <= a) - 1;
                let w = (a - grid[k]) / (grid[k + 1] - grid[k]);
                hat[k] * (1.0 - w) + hat[k + 1] * w
            }
        }
    }

    /// λ(x), where available in closed form.
    pub fn density(&self, x: f64) -> Option<f64> {
        match self {
            ConvolutionKernel::LaplaceP2 => Some(0.5 * (-x.abs()).exp()),
            ConvolutionKernel::GaussianSmoothTest { tau } => Some(gaussian_pdf(x, *tau)),
            ConvolutionKernel::UserTabulated { .. } => None,
        }
    }

    /// (λ ⋆ Ψ_v)(x) for the centred Gaussian Ψ_v of standard deviation v.
    pub fn smoothed_gaussian(&self, v: f64, x: f64) -> Result<f64> {
        match self {
            ConvolutionKernel::LaplaceP2 => Ok(laplace_gaussian(v, x)),
            ConvolutionKernel::GaussianSmoothTest { tau } => Ok(gaussian_pdf(x, (v * v + tau * tau).sqrt())),
            ConvolutionKernel::UserTabulated { .. } => tabulated_convolution(self, v, &[(1.0, 0.0)], x, TABULATED_TOL),
        }
    }
}

/// Absolute tolerance on the certified Fourier truncation bound.
pub const TABULATED_TOL: f64 = 1e-8;

/// ½e^{−|·|} ⋆ N(0, v²) at x:
/// ¼e^{v²/2}[e^{−x}erfc((v²−x)/(√2v)) + e^{x}erfc((v²+x)/(√2v))],
/// each term rewritten with erfcx when its argument is nonnegative.
pub fn laplace_gaussian(v: f64, x: f64) -> f64 {
    assert!(v > 0.0);
    let half = |s: f64| {
        // e^{v²/2 − s}·erfc((v² − s)/(√2v))
        let a = (v * v - s) / (SQRT_2 * v);
        if a >= 0.0 {
            (-(s * s) / (2.0 * v * v)).exp() * erfcx(a)
        } else {
            (0.5 * v * v - s).exp() * erfc(a)
        }
    };
    0.25 * (half(x) + half(-x))
}

/// (1/π)∫₀^T λ̂(t) e^{−v²t²/2} Σ w_j cos(t(z_j − x)) dt for a tabulated kernel,
/// with the remainder beyond T bounded by |λ̂(T)| Σ|w| (1/π)∫_T^∞ e^{−v²t²/2}dt.
pub fn tabulated_convolution(
    kernel: &ConvolutionKernel,
    v: f64,
    comps: &[(f64, f64)],
    x: f64,
    tol: f64,
) -> Result<f64> {
    let ConvolutionKernel::UserTabulated { t: grid, hat, .. } = kernel else {
        return Err(Error::InvalidArgument("tabulated_convolution needs a tabulated kernel".into()));
    };
    let big_t = *grid.last().unwrap();
    let wsum: f64 = comps.iter().map(|(w, _)| w.abs()).sum();
    let tail = hat.last().unwrap().abs() * wsum / PI * (PI / 2.0).sqrt() / v * erfc(v * big_t / SQRT_2);
    if tail > tol {
        return Err(Error::GridTooCoarse { bound: tail, tolerance: tol });
    }
    let spread = comps.iter().map(|(_, z)| (z - x).abs()).fold(0.0, f64::max);
    let gl = GaussLegendre::new(16);
    let integrand = |t: f64| {
        let s: f64 = comps.iter().map(|(w, z)| w * (t * (z - x)).cos()).sum();
        kernel.fourier(t) * (-0.5 * v * v * t * t).exp() * s
    };
    // Integrate panel by panel between table nodes so the interpolant is
    // smooth on each piece; subdivide long pieces to resolve oscillation.
    let mut total = 0.0;
    for k in 0..grid.len() - 1 {
        let (a, b) = (grid[k], grid[k + 1]);
        let panels = (((b - a) * (spread + v) / 2.0).ceil() as usize).clamp(1, 10_000);
        total += gl.composite(integrand, a, b, panels);
    }
    Ok(total / PI)
}

/// Envelope constants of |λ̂(t)|·|t|^p on [t0, t1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IllPosednessReport {
    pub c_hat: f64,
    pub c_big_hat: f64,
    pub pass: bool,
}

/// Relative floor below which c_hat counts as "decays faster than |t|^(−p)".
pub const ILLPOSED_RATIO_FLOOR: f64 = 1e-6;

pub fn illposedness_check(kernel: &ConvolutionKernel, p: f64, t0: f64, t1: f64, grid: usize) -> IllPosednessReport {
    assert!(t1 > t0 && t0 > 0.0 && grid >= 2);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for k in 0..grid {
        let t = t0 * (t1 / t0).powf(k as f64 / (grid - 1) as f64);
        let v = kernel.fourier(t).abs() * t.powf(p);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let pass = lo.is_finite() && hi.is_finite() && lo > 0.0 && lo >= ILLPOSED_RATIO_FLOOR * hi;
    IllPosednessReport { c_hat: lo, c_big_hat: hi, pass }
}
