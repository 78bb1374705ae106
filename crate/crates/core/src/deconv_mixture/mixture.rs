//! Gaussian location mixtures f = Σ w_j Ψ_v(· − z_j) on the node lattice z_j = j/J.

use num_complex::Complex64;

use super::kernel::{tabulated_convolution, ConvolutionKernel, TABULATED_TOL};
use crate::error::Result;
use crate::numeric::gaussian_pdf;

/// Lattice {k/J : |k/J| ≤ 2c_x log n}.
pub fn mixture_nodes(j: usize, c_x: f64, n: usize) -> Vec<f64> {
    assert!(j >= 1 && c_x > 0.0 && n >= 2);
    let reach = 2.0 * c_x * (n as f64).ln();
    let kmax = (reach * j as f64 + 1e-9).floor() as i64;
    (-kmax..=kmax).map(|k| k as f64 / j as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureFunction {
    /// Node density J (nodes are spaced 1/J apart).
    pub j: usize,
    pub v: f64,
    pub nodes: Vec<f64>,
    pub w: Vec<f64>,
}

impl MixtureFunction {
    pub fn new(j: usize, v: f64, nodes: Vec<f64>, w: Vec<f64>) -> Self {
        assert!(v > 0.0 && nodes.len() == w.len());
        Self { j, v, nodes, w }
    }

    /// Σ|w_j|, the constant in the envelope |f̂(t)| ≤ e^{−v²t²/2}Σ|w_j|.
    pub fn weight_l1(&self) -> f64 {
        self.w.iter().map(|w| w.abs()).sum()
    }

    /// ‖f‖² = Σ_jk w_j w_k φ_{√2 v}(z_j − z_k).
    pub fn l2_sq(&self) -> f64 {
        let s = std::f64::consts::SQRT_2 * self.v;
        let mut total = 0.0;
        for (a, (wa, za)) in self.w.iter().zip(&self.nodes).enumerate() {
            total += wa * wa * gaussian_pdf(0.0, s);
            for (wb, zb) in self.w[a + 1..].iter().zip(&self.nodes[a + 1..]) {
                total += 2.0 * wa * wb * gaussian_pdf(za - zb, s);
            }
        }
        total.max(0.0)
    }
}

pub fn mixture_eval(mf: &MixtureFunction, x: f64) -> f64 {
    mf.w.iter().zip(&mf.nodes).map(|(w, z)| w * gaussian_pdf(x - z, mf.v)).sum()
}

/// f̂(t) = e^{−v²t²/2} Σ w_j e^{itz_j}.
pub fn mixture_fourier(mf: &MixtureFunction, t: f64) -> Complex64 {
    let s: Complex64 = mf.w.iter().zip(&mf.nodes).map(|(w, z)| Complex64::from_polar(*w, t * z)).sum();
    s * (-0.5 * mf.v * mf.v * t * t).exp()
}

/// (λ ⋆ f)(x): closed form per component, or certified Fourier inversion for
/// tabulated kernels.
pub fn convolve(kernel: &ConvolutionKernel, mf: &MixtureFunction, x: f64) -> Result<f64> {
    match kernel {
        ConvolutionKernel::UserTabulated { .. } => {
            let comps: Vec<(f64, f64)> = mf.w.iter().cloned().zip(mf.nodes.iter().cloned()).collect();
            tabulated_convolution(kernel, mf.v, &comps, x, TABULATED_TOL)
        }
        _ => {
            let mut s = 0.0;
            for (w, z) in mf.w.iter().zip(&mf.nodes) {
                s += w * kernel.smoothed_gaussian(mf.v, x - z)?;
            }
            Ok(s)
        }
    }
}
