//! Modulus-of-continuity verification: direct radius + tail-set mass ⇒ inverse radius.

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::contraction::{replication_seed, seq_draws, seq_setup, ReplicationRow};
use crate::error::{Error, Result};
use crate::numeric::stats::lower_quantile;
use crate::rates_modulus::{
    implied_inverse_radius, modulus_upper_bound, prior_mass_tail_bound, prior_mass_tail_mc, severe_k_n, McEstimate,
    Regime, TailSet,
};
use crate::seq_model::sobolev_norm;

/// Prior draws for the 𝒮ₙᶜ mass estimate.
const PRIOR_DRAWS: usize = 2000;

/// Tail set used at sample size n.
///
/// Mild: k = ⌈n^(1/(1+2α+2p))⌉, ρ = n^(−(α∧β)/(1+2α+2p)).
/// Severe: k from the truncation equation and ρ = k^(−β); the truncated
/// prior lives on 𝒮ₙ so ρ only enters the bound.
pub fn report_tail_set(cfg: &ExperimentConfig, n: u64) -> TailSet {
    let nf = n as f64;
    match cfg.regime {
        Regime::SevereSeq => {
            let k = severe_k_n(cfg.alpha, cfg.xi, cfg.gamma, cfg.p, nf).k_n;
            TailSet::new(k, (k as f64).powf(-cfg.beta), cfg.tail_c)
        }
        _ => {
            let d = 1.0 + 2.0 * cfg.alpha + 2.0 * cfg.p;
            let k = nf.powf(1.0 / d).ceil() as usize;
            TailSet::new(k, nf.powf(-cfg.alpha.min(cfg.beta) / d), cfg.tail_c)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulusReportCell {
    pub n: u64,
    pub tail_set: TailSet,
    pub prior_sn_mass: McEstimate,
    /// Analytic bound on Π(𝒮ₙᶜ) when its hypothesis holds.
    pub prior_sn_bound: Option<f64>,
    pub posterior_sn_mass: f64,
    pub direct_radius: f64,
    pub implied_radius: f64,
    pub inverse_radius: f64,
    /// Fraction of replications with measured inverse ≤ implied inverse.
    pub covered: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulusReport {
    pub regime: Regime,
    pub m: f64,
    pub cells: Vec<ModulusReportCell>,
    pub rows: Vec<ReplicationRow>,
    pub required: f64,
}

impl ModulusReport {
    pub fn pass(&self) -> bool {
        self.cells.iter().all(|c| c.covered >= self.required)
    }
}

pub fn run_modulus_report(cfg: &ExperimentConfig) -> Result<ModulusReport> {
    if !matches!(cfg.regime, Regime::MildSeq | Regime::SevereSeq) {
        return Err(Error::InvalidArgument(format!("modulus report needs a sequence regime, got {}", cfg.regime)));
    }
    cfg.validate_with(1)?;
    let mut cells = Vec::new();
    let mut rows = Vec::new();
    for &n in &cfg.n_grid {
        let setup = seq_setup(cfg, n);
        let ts = report_tail_set(cfg, n);
        let f0_norm = sobolev_norm(&setup.f0, cfg.beta)?;
        let bound = |delta: f64| modulus_upper_bound(&ts, &setup.spec, f0_norm, cfg.beta, delta);
        let cell_rows: Vec<ReplicationRow> = (0..cfg.replications)
            .into_par_iter()
            .map(|r| {
                let seed = replication_seed(cfg.seed, n, r);
                let d = seq_draws(&setup, n, seed, cfg.draws, ts.k_n);
                let outside = d.iter().filter(|x| x.tail > ts.threshold()).count();
                let mut inv: Vec<f64> = d.iter().map(|x| x.inverse).collect();
                let mut dir: Vec<f64> = d.iter().map(|x| x.direct).collect();
                let direct = lower_quantile(&mut dir, cfg.credible_level);
                ReplicationRow {
                    regime: cfg.regime,
                    n,
                    replication: r,
                    radius_direct: direct,
                    radius_inverse: lower_quantile(&mut inv, cfg.credible_level),
                    sn_mass: outside as f64 / d.len() as f64,
                    implied_radius: implied_inverse_radius(bound, cfg.m * direct),
                    seed,
                }
            })
            .collect();
        let reps = cell_rows.len() as f64;
        let avg = |f: fn(&ReplicationRow) -> f64| cell_rows.iter().map(f).sum::<f64>() / reps;
        let covered = cell_rows.iter().filter(|r| r.radius_inverse <= r.implied_radius).count() as f64 / reps;
        let prior_seed = replication_seed(cfg.seed, n, usize::MAX);
        cells.push(ModulusReportCell {
            n,
            tail_set: ts,
            prior_sn_mass: prior_mass_tail_mc(&setup.prior, &ts, PRIOR_DRAWS, setup.head, prior_seed)?,
            prior_sn_bound: match cfg.regime {
                Regime::MildSeq => prior_mass_tail_bound(cfg.alpha, ts.k_n, ts.rho_n, ts.c).ok(),
                _ => None,
            },
            posterior_sn_mass: avg(|r| r.sn_mass),
            direct_radius: avg(|r| r.radius_direct),
            implied_radius: avg(|r| r.implied_radius),
            inverse_radius: avg(|r| r.radius_inverse),
            covered,
        });
        rows.extend(cell_rows);
    }
    Ok(ModulusReport { regime: cfg.regime, m: cfg.m, cells, rows, required: 0.95 })
}
