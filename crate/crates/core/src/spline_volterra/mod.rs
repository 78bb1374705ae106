//! Numerical differentiation through the Volterra operator Kf(x) = ∫₀ˣ f.
//!
//! The prior is placed on Kf = Σ a_j B_{j,q} with clamped uniform B-splines
//! of order q (degree q − 1, smoothness C^(q−2)); f is then the exact
//! derivative, a combination of order-(q−1) B-splines with weights on the
//! coefficient differences. The first coefficient is pinned to zero, which
//! is equivalent to Kf(0) = 0 because B_{1,q} is the only function that does
//! not vanish at the origin.

mod basis;
mod design;
mod posterior;
mod prior;
mod truth;

pub use basis::{bspline_derivative, bspline_eval, BSplineBasis};
pub use design::{
    calibrate_modulus_constant, check_design_conditions, empirical_norm, gram_matrix, gram_matrix_low,
    spline_modulus_report, DesignConditions, GramMatrix, ModulusCalibration, RegressionDesign, SplineDesign,
    DEFAULT_COND_THRESHOLD,
};
pub use posterior::{
    project_truth, spline_posterior, ProjectedTarget, SplineComponent, SplineMixturePosterior, SplineModelSet, RIDGE,
};
pub use prior::{
    draw_coefficients, draw_spline_prior, greville, j_prior_constants, volterra_apply_numeric,
    volterra_apply_numeric_with_breaks, volterra_apply_spline, JPrior, JPriorConstants, SplineFunction, SplinePrior,
};
pub use truth::{holder_quotient, make_holder_truth, HolderTruth, HOLDER_GRID};
