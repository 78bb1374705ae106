//! Shared numerical building blocks.

pub mod linalg;
pub mod quadrature;
pub mod special;
pub mod stats;

pub use quadrature::{adaptive_gk, GaussLegendre};
pub use special::{erfc, erfcx, gaussian_pdf, hurwitz_zeta, normal_cdf, Certified};
