//! Fourier-domain window Iₙ = [−aₙ, aₙ], membership in 𝒮ₙ and the modulus chain.

use std::f64::consts::PI;

use rand::Rng;

use super::kernel::{illposedness_check, ConvolutionKernel};
use super::mixture::{mixture_fourier, mixture_nodes, MixtureFunction};
use crate::error::{Error, Result};
use crate::numeric::{erfc, GaussLegendre};
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierWindow {
    pub a_n: f64,
    /// Ratio constant a in ∫_{Iₙ}|f̂|² ≥ a∫_{Iₙᶜ}|f̂|².
    pub a: f64,
    /// Gauss–Legendre points per panel.
    pub gl_points: usize,
    /// Cap on the number of panels for a direct quadrature of the outside mass.
    pub panel_budget: usize,
}

impl FourierWindow {
    pub fn new(a_n: f64, a: f64) -> Self {
        assert!(a_n > 0.0 && a > 0.0);
        Self { a_n, a, gl_points: 32, panel_budget: 20_000 }
    }
}

fn node_span(mf: &MixtureFunction) -> f64 {
    let lo = mf.nodes.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = mf.nodes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if mf.nodes.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Panels for |f̂|² on an interval of length `len`: |Σw e^{itz}|² oscillates
/// with frequency at most the node span.
fn panels_for(mf: &MixtureFunction, len: f64) -> usize {
    ((len * (node_span(mf) + 1.0) / 4.0).ceil() as usize).max(1)
}

/// ∫_{lo}^{hi} g(t)|f̂(t)|² dt for t ≥ 0 (the integrand is even for real weights).
fn weighted_mass<G: Fn(f64) -> f64>(mf: &MixtureFunction, g: G, lo: f64, hi: f64, gl: &GaussLegendre) -> f64 {
    gl.composite(|t| g(t) * mixture_fourier(mf, t).norm_sqr(), lo, hi, panels_for(mf, hi - lo))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnMembership {
    pub inside_mass: f64,
    pub outside_mass: f64,
    pub member: bool,
    /// Gaussian-envelope bound (Σ|w|)²·√π·erfc(v aₙ)/v on the outside mass.
    pub outside_envelope: f64,
    /// Whether the outside mass was integrated directly (else total − inside).
    pub outside_direct: bool,
}

/// Inside and outside Fourier L₂ masses (unnormalized, ∫|f̂|²dt).
pub fn sn_membership(mf: &MixtureFunction, window: &FourierWindow) -> SnMembership {
    let gl = GaussLegendre::new(window.gl_points);
    let a_n = window.a_n;
    let v = mf.v;
    let inside_mass = 2.0 * weighted_mass(mf, |_| 1.0, 0.0, a_n, &gl);
    let l1 = mf.weight_l1();
    let outside_envelope = l1 * l1 * PI.sqrt() * erfc(v * a_n) / v;
    // Beyond T with v²(T² − aₙ²) = 40 the remainder is e^{−40} of the envelope.
    let big_t = (a_n * a_n + 40.0 / (v * v)).sqrt();
    let direct = panels_for(mf, big_t - a_n) <= window.panel_budget;
    let outside_mass = if direct {
        2.0 * weighted_mass(mf, |_| 1.0, a_n, big_t, &gl)
    } else {
        (2.0 * PI * mf.l2_sq() - inside_mass).max(0.0)
    };
    SnMembership {
        inside_mass,
        outside_mass,
        member: inside_mass >= window.a * outside_mass,
        outside_envelope,
        outside_direct: direct,
    }
}

/// C₁aₙ^p δ + C₂aₙ^(−β).
pub fn deconv_modulus(window: &FourierWindow, p: f64, beta: f64, delta: f64, c1: f64, c2: f64) -> f64 {
    c1 * window.a_n.powf(p) * delta + c2 * window.a_n.powf(-beta)
}

/// min over |t| ≤ aₙ of |λ̂(t)|·aₙ^p: the constant c with |λ̂| ≥ c aₙ^(−p) on Iₙ.
pub fn window_lower_constant(kernel: &ConvolutionKernel, window: &FourierWindow, p: f64, grid: usize) -> f64 {
    let mut lo = f64::INFINITY;
    for k in 0..=grid {
        let t = window.a_n * k as f64 / grid as f64;
        lo = lo.min(kernel.fourier(t).abs());
    }
    lo * window.a_n.powf(p)
}

/// Two sides of ‖f̂‖² ≤ (1+1/a)(aₙ^{2p}/c²)‖K̂f‖², using only the Iₙ part of
/// ‖K̂f‖² (which can only shrink the right side).
pub fn deconv_chain_sides(
    kernel: &ConvolutionKernel,
    window: &FourierWindow,
    c: f64,
    mf: &MixtureFunction,
) -> (f64, f64) {
    let gl = GaussLegendre::new(window.gl_points);
    let p = kernel.p();
    let lhs = 2.0 * PI * mf.l2_sq();
    let kf_inside = 2.0 * weighted_mass(mf, |t| kernel.fourier(t).powi(2), 0.0, window.a_n, &gl);
    let rhs = (1.0 + 1.0 / window.a) * window.a_n.powf(2.0 * p) / (c * c) * kf_inside;
    (lhs, rhs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeconvChainReport {
    pub samples: usize,
    pub violations: usize,
    pub boundary_members: usize,
    /// Smallest and largest rhs/lhs − 1.
    pub min_slack: f64,
    pub max_slack: f64,
    pub c: f64,
}

/// Finds v where inside = a·outside by bisection in log v, holding nodes and
/// weights fixed. Returns None if the ratio does not straddle a on [lo, hi].
pub fn boundary_bandwidth(mf: &MixtureFunction, window: &FourierWindow, lo: f64, hi: f64) -> Option<f64> {
    let excess = |v: f64| {
        let m = sn_membership(&MixtureFunction { v, ..mf.clone() }, window);
        m.inside_mass - window.a * m.outside_mass
    };
    let (mut l, mut h) = (lo.ln(), hi.ln());
    let (el, eh) = (excess(lo), excess(hi));
    if el.signum() == eh.signum() {
        return None;
    }
    for _ in 0..60 {
        let m = 0.5 * (l + h);
        if excess(m.exp()).signum() == el.signum() {
            l = m;
        } else {
            h = m;
        }
    }
    // Return the member side of the bracket.
    Some(if el >= 0.0 { l.exp() } else { h.exp() })
}

/// Samples random members of 𝒮ₙ (every tenth one on the boundary) and checks
/// the chain. Node lattices use c_x = 1/4 and n = 64.
pub fn check_deconv_chain(
    kernel: &ConvolutionKernel,
    window: &FourierWindow,
    samples: usize,
    seed: u64,
) -> Result<DeconvChainReport> {
    let p = kernel.p();
    let t0 = (window.a_n / 10.0).max(1e-3);
    if !illposedness_check(kernel, p, t0, window.a_n, 200).pass {
        return Err(Error::HypothesisUnmet(format!("kernel is not mildly ill-posed of degree {p} on the window")));
    }
    let c = window_lower_constant(kernel, window, p, 2000);
    let mut rng = rng::stream(seed, Purpose::ChainSamples, &[window.a_n.to_bits()]);
    let mut report = DeconvChainReport {
        samples,
        violations: 0,
        boundary_members: 0,
        min_slack: f64::INFINITY,
        max_slack: f64::NEG_INFINITY,
        c,
    };
    let mut done = 0;
    while done < samples {
        let j = rng.random_range(1..=16usize);
        let nodes = mixture_nodes(j, 0.25, 64);
        let w: Vec<f64> = nodes.iter().map(|_| rng::normal(&mut rng)).collect();
        let v = 10f64.powf(rng.random_range(-2.0..0.5));
        let mut mf = MixtureFunction::new(j, v, nodes, w);
        if done % 10 == 9 {
            match boundary_bandwidth(&mf, window, 1e-3, 10.0) {
                Some(vb) => {
                    mf.v = vb;
                    report.boundary_members += 1;
                }
                None => continue,
            }
        }
        if !sn_membership(&mf, window).member {
            continue;
        }
        let (lhs, rhs) = deconv_chain_sides(kernel, window, c, &mf);
        if lhs > rhs * (1.0 + 1e-9) {
            return Err(Error::ChainViolation { lhs, rhs, detail: format!("J = {j}, v = {}", mf.v) });
        }
        let slack = rhs / lhs - 1.0;
        report.min_slack = report.min_slack.min(slack);
        report.max_slack = report.max_slack.max(slack);
        done += 1;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillating(v: f64) -> MixtureFunction {
        let nodes = mixture_nodes(8, 0.25, 64);
        let w = (0..nodes.len()).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        MixtureFunction::new(8, v, nodes, w)
    }

    #[test]
    fn wide_bandwidth_is_member() {
        let mf = MixtureFunction::new(1, 1.0, vec![0.0], vec![1.0]);
        let m = sn_membership(&mf, &FourierWindow::new(10.0, 1.0));
        assert!(m.member);
        assert!(m.outside_mass <= 1e-20 * m.inside_mass);
        // Single centred component: the envelope is exact.
        assert!(m.outside_mass <= m.outside_envelope * (1.0 + 1e-9));
        // Single centred component: inside = √π erf(v aₙ)/v.
        assert!((m.inside_mass - PI.sqrt() * (1.0 - erfc(10.0))).abs() < 1e-12);
    }

    #[test]
    fn narrow_oscillating_mixture_leaves() {
        let window = FourierWindow::new(10.0, 1.0);
        let members: Vec<bool> =
            [1.0, 0.3, 0.1, 0.03, 0.01].iter().map(|&v| sn_membership(&oscillating(v), &window).member).collect();
        assert!(members[0]);
        assert!(!members[4]);
        // Once out, stays out as v shrinks.
        let first_out = members.iter().position(|m| !m).unwrap();
        assert!(members[first_out..].iter().all(|m| !m));
    }

    #[test]
    fn masses_match_wide_grid_quadrature() {
        let window = FourierWindow::new(6.0, 1.0);
        for v in [0.5, 0.2, 0.08] {
            let mf = oscillating(v);
            let m = sn_membership(&mf, &window);
            let gl = GaussLegendre::new(20);
            let f = |t: f64| mixture_fourier(&mf, t).norm_sqr();
            let inside = 2.0 * gl.composite(f, 0.0, 6.0, 3000);
            let outside = 2.0 * gl.composite(f, 6.0, 6.0 + 14.0 / v, 30_000);
            assert!(((m.inside_mass - inside) / inside).abs() < 1e-6);
            assert!(((m.outside_mass - outside) / outside).abs() < 1e-6, "v={v}: {} vs {outside}", m.outside_mass);
            assert!(m.outside_mass <= m.outside_envelope);
        }
    }

    #[test]
    fn modulus_arithmetic_and_balance() {
        let w = FourierWindow::new(10.0, 1.0);
        assert!((deconv_modulus(&w, 2.0, 1.0, 1e-3, 1.0, 1.0) - 0.2).abs() < 1e-12);
        assert!((deconv_modulus(&w, 2.0, 1.0, 0.0, 1.0, 1.0) - 0.1).abs() < 1e-15);
        let (beta, p) = (1.0, 2.0);
        let mut xs = vec![];
        let mut ys = vec![];
        for k in 0..8 {
            let n = 10f64.powf(3.0 + k as f64);
            let delta = n.powf(-(beta + p) / (1.0 + 2.0 * beta + 2.0 * p));
            let best = (0..4000)
                .map(|i| 10f64.powf(i as f64 / 400.0))
                .map(|a| deconv_modulus(&FourierWindow::new(a, 1.0), p, beta, delta, 1.0, 1.0))
                .fold(f64::INFINITY, f64::min);
            xs.push(n);
            ys.push(best);
        }
        let (slope, _) = crate::numeric::stats::log_log_slope(&xs, &ys, false);
        assert!((slope + beta / (1.0 + 2.0 * beta + 2.0 * p)).abs() < 1e-2, "{slope}");
    }

    #[test]
    fn chain_holds_on_random_members() {
        let window = FourierWindow::new(10.0, 1.0);
        let r = check_deconv_chain(&ConvolutionKernel::LaplaceP2, &window, 200, 5).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.boundary_members >= 10);
        assert!(r.min_slack >= 0.0 && r.max_slack > r.min_slack);
        assert!((r.c - 100.0 / 101.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_member_has_smallest_slack() {
        let window = FourierWindow::new(10.0, 1.0);
        let k = ConvolutionKernel::LaplaceP2;
        let c = window_lower_constant(&k, &window, 2.0, 2000);
        let base = oscillating(0.3);
        let vb = boundary_bandwidth(&base, &window, 1e-3, 10.0).unwrap();
        let edge = MixtureFunction { v: vb, ..base.clone() };
        let m = sn_membership(&edge, &window);
        assert!(m.member && (m.inside_mass / m.outside_mass - 1.0).abs() < 1e-6);
        let (l0, r0) = deconv_chain_sides(&k, &window, c, &edge);
        let (l1, r1) = deconv_chain_sides(&k, &window, c, &MixtureFunction { v: 1.0, ..base });
        assert!(r0 >= l0 && r0 / l0 < r1 / l1);
    }

    #[test]
    fn gaussian_kernel_is_rejected() {
        let window = FourierWindow::new(10.0, 1.0);
        let r = check_deconv_chain(&ConvolutionKernel::GaussianSmoothTest { tau: 1.0 }, &window, 5, 1);
        assert!(matches!(r, Err(Error::HypothesisUnmet(_))));
    }
}
