//! Deconvolution on ℝ with a Gaussian location-mixture prior.
//!
//! Fourier convention: f̂(t) = ∫f(u)e^{itu}du, so ‖f‖² = (1/2π)∫|f̂|².

mod kernel;
mod mixture;
mod posterior;
mod prior;
mod truth;
mod window;

pub use kernel::{
    illposedness_check, laplace_gaussian, tabulated_convolution, ConvolutionKernel, IllPosednessReport,
    ILLPOSED_RATIO_FLOOR, TABULATED_TOL,
};
pub use mixture::{convolve, mixture_eval, mixture_fourier, mixture_nodes, MixtureFunction};
pub use posterior::{
    deconv_batch, deconv_posterior, deconv_regressors, mixture_gram, mixture_gram_window, BatchDraws, DeconvCell,
    DeconvDesign, DeconvGrid, DeconvPosterior, DeconvTarget,
};
pub use prior::{draw_mixture_prior, draw_mixture_with, prior_sn_tail, MixturePriorSpec, SnTail, VSampler};
pub use truth::{sobolev_bump_truth, BumpTruth};
pub use window::{
    boundary_bandwidth, check_deconv_chain, deconv_chain_sides, deconv_modulus, sn_membership, window_lower_constant,
    DeconvChainReport, FourierWindow, SnMembership,
};
