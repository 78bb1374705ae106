//! Replicated simulations, slope fits and verification reports.

mod config;
mod contraction;
mod lemmas;
mod report;

pub use config::ExperimentConfig;
pub use contraction::{
    contraction_rows, deconv_setup, fit_rates, rate_params, replication_seed, run_contraction_experiment, NSummary,
    RateFitResult, ReplicationRow,
};
pub use lemmas::{deconv_smallball, deconv_smallball_sweep, run_lemma_suite, DeconvSmallBall, LemmaCheck, LemmaReport};
pub use report::{report_tail_set, run_modulus_report, ModulusReport, ModulusReportCell};
