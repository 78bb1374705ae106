//! Monte Carlo and exact-summation checks of the prior-mass and risk lemmas.

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::contraction::deconv_setup;
use crate::deconv_mixture::{
    convolve, draw_mixture_with, prior_sn_tail, sobolev_bump_truth, ConvolutionKernel, DeconvDesign, VSampler,
};
use crate::error::Result;
use crate::rates_modulus::{kl_smallball_mc, prior_mass_tail_bound, prior_mass_tail_mc, severe_k_n, Regime, TailSet};
use crate::rng::{self, Purpose};
use crate::seq_model::{expected_risk_components, make_truth, GaussianProductPrior, IllPosedSpec};
use crate::spline_volterra::{check_design_conditions, BSplineBasis, RegressionDesign, DEFAULT_COND_THRESHOLD};

/// One named check: `value` compared against `reference`.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LemmaReport {
    pub checks: Vec<LemmaCheck>,
}

impl LemmaReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LemmaCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    fn push(&mut self, name: String, value: f64, reference: f64, pass: bool, detail: String) {
        self.checks.push(LemmaCheck { name, value, reference, pass, detail });
    }
}

const TAIL_DRAWS: usize = 100_000;

/// Smallest power-of-two head whose omitted prior variance stays within the
/// Monte Carlo truncation allowance.
fn head_for(prior: &GaussianProductPrior, ts: &TailSet) -> usize {
    let mut head = (ts.k_n + 1).next_power_of_two();
    while prior.tail_variance(head, None) > 5e-4 * ts.threshold() {
        head *= 2;
    }
    head
}

/// Π(𝒮ₙᶜ) by Monte Carlo against the analytic bound, plus the pinned cell.
pub fn tail_mass_checks(rep: &mut LemmaReport, seed: u64) -> Result<()> {
    let (rho2, c) = (0.01f64, 8.0);
    for alpha in [1.0f64, 1.5, 2.0] {
        // Smallest k meeting k^(2α) ≥ 2(1+2α)/(αcρ²), then two larger ones.
        let need = 2.0 * (1.0 + 2.0 * alpha) / (alpha * c * rho2);
        let k0 = need.powf(0.5 / alpha).ceil() as usize;
        for k in [k0, k0 + 1, k0 + 3] {
            let ts = TailSet::new(k, rho2.sqrt(), c);
            let prior = GaussianProductPrior::mild(alpha);
            let bound = prior_mass_tail_bound(alpha, k, ts.rho_n, c)?;
            let mc = prior_mass_tail_mc(&prior, &ts, TAIL_DRAWS, head_for(&prior, &ts), seed)?;
            rep.push(
                format!("tail mass α={alpha} k={k}"),
                mc.estimate,
                bound,
                mc.estimate <= bound + 4.0 * mc.stderr,
                format!("MC {:.4e} ± {:.1e} vs bound {:.4e}", mc.estimate, mc.stderr, bound),
            );
        }
    }
    let bound = prior_mass_tail_bound(1.0, 10, 0.1, 8.0)?;
    rep.push(
        "tail bound cell α=1 k=10 ρ²=0.01 c=8".into(),
        bound,
        4.5400e-5,
        (bound - 4.5400e-5).abs() < 5e-9,
        format!("{bound:.4e}"),
    );
    Ok(())
}

/// Exact Σs, Σt of the truncated severe prior against [kₙ/(n·const), kₙ/n].
pub fn severe_sum_checks(rep: &mut LemmaReport) -> Result<()> {
    let mut worst = 1.0f64;
    let mut upper_ok = true;
    let mut resid = 0.0f64;
    for (alpha, xi, gamma, p) in [(1.0, 0.0, 1.0, 1.0), (0.5, 1.0, 1.0, 1.0), (2.0, 0.5, 0.5, 2.0)] {
        for n in [1u64 << 8, 1 << 12, 1 << 16, 1 << 20] {
            let tr = severe_k_n(alpha, xi, gamma, p, n as f64);
            resid = resid.max(tr.residual(alpha, xi, gamma, p, n as f64).abs());
            let k = tr.k_n;
            let prior = GaussianProductPrior::severe(alpha, xi, p).truncated(k);
            let spec = IllPosedSpec::severe(gamma, p);
            let rc = expected_risk_components(&prior, &make_truth(1.0, 1.0, 0.05, k.max(16)), &spec, n)?;
            let top = k as f64 / n as f64;
            upper_ok &= rc.s_sum <= top && rc.t_sum <= top;
            worst = worst.max(top / rc.s_sum).max(top / rc.t_sum);
        }
    }
    rep.push(
        "severe Σs, Σt ≤ kₙ/n".into(),
        worst,
        f64::NAN,
        upper_ok && worst.is_finite(),
        format!("lower bracket constant {worst:.4}"),
    );
    rep.push("severe kₙ residual".into(), resid, 1e-8, resid <= 1e-8, format!("max |residual| {resid:.2e}"));
    Ok(())
}

/// Π(‖Kf − Kf₀‖ ≤ ε) ≥ exp(−C ε^(−e)): −ln(mass)·ε^e must stay bounded
/// across the sweep; reported as its range.
pub fn kl_smallball_checks(rep: &mut LemmaReport, seed: u64) {
    let (alpha, beta, p) = (1.0, 1.0, 1.0);
    let prior = GaussianProductPrior::mild(alpha);
    let spec = IllPosedSpec::mild(p, 1.0);
    let f0 = make_truth(beta, 1.0, 0.05, 1024);
    let mut consts = Vec::new();
    let mut last = 0.0;
    let mut monotone = true;
    for eps in [0.02, 0.04, 0.08, 0.16] {
        let est = kl_smallball_mc(&prior, &f0, &spec, beta, eps, 1024, 20_000, seed);
        monotone &= est.mc.estimate >= last;
        last = est.mc.estimate;
        if !est.low_confidence {
            consts.push(-est.mc.estimate.ln() / est.lemma_exponent);
        }
    }
    let (lo, hi) = consts.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
    rep.push(
        "small-ball mass exponent".into(),
        hi,
        lo,
        monotone && consts.len() >= 2 && hi <= 4.0 * lo.max(1e-3),
        format!("−ln Π / ε^(−e) in [{lo:.3}, {hi:.3}] over {} resolved ε", consts.len()),
    );
}

/// Π_v(v ≤ J/aₙ) under the analytic envelope.
pub fn deconv_tail_checks(rep: &mut LemmaReport, cfg: &ExperimentConfig) {
    let (spec, _) = deconv_setup(cfg);
    let mut ok = true;
    let mut worst = 0.0f64;
    for a_n in [10.0, 20.0, 40.0, 80.0] {
        for j in [1, 2, 4] {
            let t = prior_sn_tail(&spec, a_n, j);
            ok &= t.numeric_tail <= t.analytic_envelope;
            worst = worst.max(t.numeric_tail / t.analytic_envelope);
        }
    }
    rep.push("bandwidth tail under envelope".into(), worst, 1.0, ok, format!("max numeric/envelope {worst:.4}"));
}

/// Result of the prior small-ball check in the convolution model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeconvSmallBall {
    pub n: usize,
    pub constant: f64,
    pub epsilon: f64,
    pub mass: f64,
    pub stderr: f64,
    pub target: f64,
}

impl DeconvSmallBall {
    pub fn pass(&self) -> bool {
        self.mass >= self.target
    }
}

/// Prior MC of {‖Kf − Kf₀‖ₙ ≤ C n^(−e)} against e^{−nε²}, where e is the
/// direct-rate exponent (β+p)/(1+2β+2p).
pub fn deconv_smallball(cfg: &ExperimentConfig, n: usize, constant: f64, draws: usize) -> Result<DeconvSmallBall> {
    let kernel = ConvolutionKernel::LaplaceP2;
    let (spec, _) = deconv_setup(cfg);
    let design = DeconvDesign::uniform(n, cfg.c_x, cfg.sigma);
    let truth = sobolev_bump_truth(cfg.beta as usize, cfg.radius);
    let kf0 = design.points.iter().map(|&x| truth.kf(&kernel, x)).collect::<Result<Vec<f64>>>()?;
    let e = (cfg.beta + cfg.p) / (1.0 + 2.0 * cfg.beta + 2.0 * cfg.p);
    let eps = constant * (n as f64).powf(-e);
    let vs = VSampler::new(&spec);
    let chunks = 64;
    let per = draws.div_ceil(chunks);
    let hits: usize = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<usize> {
            let mut rng = rng::stream(cfg.seed, Purpose::PriorDraws, &[n as u64, c as u64]);
            let mut h = 0;
            for _ in 0..per {
                let mf = draw_mixture_with(&spec, &vs, n, &mut rng);
                let mut s = 0.0;
                for (&x, k0) in design.points.iter().zip(&kf0) {
                    s += (convolve(&kernel, &mf, x)? - k0).powi(2);
                }
                h += usize::from((s / n as f64).sqrt() <= eps);
            }
            Ok(h)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    let total = per * chunks;
    let mass = hits as f64 / total as f64;
    Ok(DeconvSmallBall {
        n,
        constant,
        epsilon: eps,
        mass,
        stderr: (mass * (1.0 - mass) / total as f64).sqrt(),
        target: (-(n as f64) * eps * eps).exp(),
    })
}

/// Smallest constant in {1, 2, 4, 8} for which the check holds at every n.
pub fn deconv_smallball_sweep(cfg: &ExperimentConfig, ns: &[usize], draws: usize) -> Result<Vec<DeconvSmallBall>> {
    let mut last = Vec::new();
    for c in [1.0, 2.0, 4.0, 8.0] {
        last = ns.iter().map(|&n| deconv_smallball(cfg, n, c, draws)).collect::<Result<Vec<_>>>()?;
        if last.iter().all(DeconvSmallBall::pass) {
            break;
        }
    }
    Ok(last)
}

fn design_checks(rep: &mut LemmaReport) {
    let mut ok = true;
    for q in [2, 3, 4] {
        for j in [6, 10, 16] {
            for n in [256, 1024] {
                let c = check_design_conditions(
                    &RegressionDesign::uniform(n, 1.0),
                    &BSplineBasis::with_dim(q, j),
                    DEFAULT_COND_THRESHOLD,
                );
                ok &= c.pass;
            }
        }
    }
    rep.push(
        "uniform design D1/D2".into(),
        f64::from(u8::from(ok)),
        1.0,
        ok,
        "q∈{2,3,4}, J∈{6,10,16}, n∈{256,1024}".into(),
    );
}

/// Lemma checks relevant to `regime`.
pub fn run_lemma_suite(regime: Regime, seed: u64) -> Result<LemmaReport> {
    let mut rep = LemmaReport::default();
    match regime {
        Regime::MildSeq => {
            tail_mass_checks(&mut rep, seed)?;
            kl_smallball_checks(&mut rep, seed);
        }
        Regime::SevereSeq => severe_sum_checks(&mut rep)?,
        Regime::Volterra => design_checks(&mut rep),
        Regime::Deconv => {
            let cfg = ExperimentConfig { seed, ..ExperimentConfig::for_regime(Regime::Deconv) };
            deconv_tail_checks(&mut rep, &cfg);
            for s in deconv_smallball_sweep(&cfg, &[64, 256], 20_000)? {
                rep.push(
                    format!("deconv small ball n={}", s.n),
                    s.mass,
                    s.target,
                    s.pass(),
                    format!(
                        "C = {}, ε = {:.4}, mass {:.4e} ± {:.1e} vs e^(−nε²) = {:.4e}",
                        s.constant, s.epsilon, s.mass, s.stderr, s.target
                    ),
                );
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinned_cell_matches_formula() {
        let b = prior_mass_tail_bound(1.0, 10, 0.1, 8.0).unwrap();
        assert!((b - (-10.0f64).exp()).abs() < 1e-18);
    }

    #[test]
    fn severe_sums_sit_in_their_brackets() {
        let mut rep = LemmaReport::default();
        severe_sum_checks(&mut rep).unwrap();
        assert!(rep.pass(), "{:?}", rep.checks);
    }

    #[test]
    fn volterra_suite_passes() {
        assert!(run_lemma_suite(Regime::Volterra, 1).unwrap().pass());
    }
}
