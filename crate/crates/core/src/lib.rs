//! Numerical laboratory for posterior contraction in linear inverse problems.
//!
//! The crate computes exact conjugate posteriors for Gaussian sequence models,
//! spline priors under the Volterra (integration) operator and Gaussian
//! location-mixture priors under convolution, and measures how fast the
//! posterior concentrates around the truth as the sample size grows.
//!
//! Modules:
//! - [`seq_model`]: white-noise sequence model, product priors, conjugate posteriors.
//! - [`rates_modulus`]: tail sets, modulus-of-continuity bounds, rate exponents,
//!   Lambert-W truncation and Monte Carlo checks of the prior-mass bounds.
//! - [`spline_volterra`]: B-spline basis, Volterra operator, Gram matrices, spline posterior.
//! - [`deconv_mixture`]: convolution kernels, Gaussian mixtures, Fourier tail sets, mixture posterior.
//! - [`experiments`]: replicated simulations, slope fits and verification reports.
//! - [`cli_io`]: configuration files, CSV/manifest/plot-script output.

pub mod cli_io;
pub mod deconv_mixture;
pub mod error;
pub mod experiments;
pub mod numeric;
pub mod rates_modulus;
pub mod rng;
pub mod seq_model;
pub mod spline_volterra;

pub use error::{Error, Result};
