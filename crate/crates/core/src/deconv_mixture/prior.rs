//! Location-mixture prior: J ∼ Π_J ∝ j^(−s), v ∼ Π_v, w | J ∼ N(0, I).

use rand::Rng;

use super::mixture::{mixture_nodes, MixtureFunction};
use crate::numeric::adaptive_gk;
use crate::rng::{self, Purpose};

/// Log-grid resolution of the tabulated v-prior CDF.
const V_TABLE: usize = 4000;
/// Below this bandwidth the v-prior mass is treated as zero.
const V_FLOOR: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct MixturePriorSpec {
    pub s: f64,
    pub j_max: usize,
    /// Π_v(v) ∝ v^(−q) exp(−(c_v/v) log(e + 1/v)^u) on (0, v_max].
    pub q: f64,
    pub u: f64,
    pub c_v: f64,
    pub v_max: f64,
    /// Envelope constants: v^(−q)e^{−(c_d/v)log(1/v)^u} ≲ Π_v ≲ v^(−q)e^{−(c_u/v)log(1/v)^u}.
    pub c_u: f64,
    pub c_d: f64,
    /// Node range constant: z_j = j/J over [−2c_x log n, 2c_x log n].
    pub c_x: f64,
}

impl Default for MixturePriorSpec {
    fn default() -> Self {
        Self { s: 2.0, j_max: 64, q: 1.0, u: 1.0, c_v: 0.5, v_max: 10.0, c_u: 0.25, c_d: 1.0, c_x: 0.25 }
    }
}

impl MixturePriorSpec {
    fn log_j_norm(&self) -> f64 {
        (1..=self.j_max).map(|j| (j as f64).powf(-self.s)).sum::<f64>().ln()
    }

    pub fn log_pmf_j(&self, j: usize) -> f64 {
        if j == 0 || j > self.j_max {
            return f64::NEG_INFINITY;
        }
        -self.s * (j as f64).ln() - self.log_j_norm()
    }

    /// Unnormalized log density of v.
    pub fn log_v_kernel(&self, v: f64) -> f64 {
        if !(v > 0.0 && v <= self.v_max) {
            return f64::NEG_INFINITY;
        }
        -self.q * v.ln() - self.c_v / v * (std::f64::consts::E + 1.0 / v).ln().powf(self.u)
    }

    /// Normalizer ∫₀^{v_max} of the v kernel, integrated in log v.
    pub fn v_normalizer(&self) -> f64 {
        self.v_mass_below(self.v_max)
    }

    fn v_mass_below(&self, x: f64) -> f64 {
        let hi = x.min(self.v_max);
        if hi <= V_FLOOR {
            return 0.0;
        }
        let f = |l: f64| (self.log_v_kernel(l.exp()) + l).exp();
        // Split at the mode region so the adaptive rule sees the rise.
        let (a, b) = (V_FLOOR.ln(), hi.ln());
        let mid = (self.c_v.max(1e-3)).ln().clamp(a, b);
        adaptive_gk(f, a, mid, 1e-14).unwrap_or(0.0) + adaptive_gk(f, mid, b, 1e-14).unwrap_or(0.0)
    }

    pub fn log_pdf_v(&self, v: f64) -> f64 {
        self.log_v_kernel(v) - self.v_normalizer().ln()
    }

    /// Π_v(v ≤ x).
    pub fn v_cdf(&self, x: f64) -> f64 {
        (self.v_mass_below(x) / self.v_normalizer()).min(1.0)
    }

    pub fn sample_j<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let norm = self.log_j_norm().exp();
        let mut u = rng.random::<f64>() * norm;
        for j in 1..=self.j_max {
            u -= (j as f64).powf(-self.s);
            if u <= 0.0 {
                return j;
            }
        }
        self.j_max
    }
}

/// Inverse-CDF sampler for v on a log grid with linear interpolation.
#[derive(Debug, Clone)]
pub struct VSampler {
    log_v: Vec<f64>,
    cdf: Vec<f64>,
}

impl VSampler {
    pub fn new(spec: &MixturePriorSpec) -> Self {
        let (a, b) = (V_FLOOR.ln(), spec.v_max.ln());
        let log_v: Vec<f64> = (0..=V_TABLE).map(|k| a + (b - a) * k as f64 / V_TABLE as f64).collect();
        let dens: Vec<f64> = log_v.iter().map(|&l| (spec.log_v_kernel(l.exp()) + l).exp()).collect();
        let mut cdf = vec![0.0; log_v.len()];
        for k in 1..log_v.len() {
            cdf[k] = cdf[k - 1] + 0.5 * (dens[k] + dens[k - 1]) * (log_v[k] - log_v[k - 1]);
        }
        let total = *cdf.last().unwrap();
        cdf.iter_mut().for_each(|c| *c /= total);
        Self { log_v, cdf }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let k = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let w = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        (self.log_v[k - 1] + w * (self.log_v[k] - self.log_v[k - 1])).exp()
    }
}

/// Draws (J, v, w) with nodes on [−2c_x log n, 2c_x log n].
pub fn draw_mixture_prior(spec: &MixturePriorSpec, n_ctx: usize, seed: u64) -> MixtureFunction {
    let mut rng = rng::stream(seed, Purpose::PriorDraws, &[n_ctx as u64]);
    draw_mixture_with(spec, &VSampler::new(spec), n_ctx, &mut rng)
}

pub fn draw_mixture_with<R: Rng + ?Sized>(
    spec: &MixturePriorSpec,
    vs: &VSampler,
    n_ctx: usize,
    rng: &mut R,
) -> MixtureFunction {
    let j = spec.sample_j(rng);
    let v = vs.sample(rng);
    let nodes = mixture_nodes(j, spec.c_x, n_ctx);
    let mut w = vec![0.0; nodes.len()];
    rng::fill_normal(rng, &mut w);
    MixtureFunction::new(j, v, nodes, w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnTail {
    /// Π_v(v ≤ J/aₙ).
    pub numeric_tail: f64,
    /// (1/Z) ε^(2−q) e^{−b/ε}/b with ε = J/aₙ and b = c_v log(e + 1/ε)^u.
    pub analytic_envelope: f64,
    /// −log(numeric tail)/(aₙ log aₙ), the constant C′ in e^{−C′aₙ log aₙ}.
    pub c_prime: f64,
    /// J/aₙ at or above the support's upper end.
    pub degenerate: bool,
}

/// Prior mass of the bandwidths that can leave 𝒮ₙ. The envelope uses that
/// log(e + 1/v) decreases in v, and needs q ≤ 2.
pub fn prior_sn_tail(spec: &MixturePriorSpec, a_n: f64, j: usize) -> SnTail {
    assert!(spec.q <= 2.0, "analytic envelope needs q ≤ 2");
    let eps = j as f64 / a_n;
    if eps >= spec.v_max {
        return SnTail { numeric_tail: 1.0, analytic_envelope: 1.0, c_prime: 0.0, degenerate: true };
    }
    let numeric_tail = spec.v_cdf(eps);
    let b = spec.c_v * (std::f64::consts::E + 1.0 / eps).ln().powf(spec.u);
    let log_env = (2.0 - spec.q) * eps.ln() - b / eps - b.ln() - spec.v_normalizer().ln();
    let c_prime = if a_n > 1.0 { -numeric_tail.ln() / (a_n * a_n.ln()) } else { f64::NAN };
    SnTail { numeric_tail, analytic_envelope: log_env.exp().min(1.0), c_prime, degenerate: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deconv_mixture::mixture::mixture_eval;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    #[test]
    fn j_prior_normalizes() {
        let spec = MixturePriorSpec::default();
        let total: f64 = (1..=spec.j_max).map(|j| spec.log_pmf_j(j).exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(spec.log_pmf_j(spec.j_max + 1), f64::NEG_INFINITY);
    }

    #[test]
    fn v_density_normalizes_and_sits_in_envelope() {
        let spec = MixturePriorSpec::default();
        let z = spec.v_normalizer();
        let trap = {
            let m = 200_000;
            let (a, b) = (1e-4f64.ln(), 10f64.ln());
            let h = (b - a) / m as f64;
            (0..=m)
                .map(|k| {
                    let l = a + h * k as f64;
                    let w = if k == 0 || k == m { 0.5 } else { 1.0 };
                    w * (spec.log_v_kernel(l.exp()) + l).exp()
                })
                .sum::<f64>()
                * h
        };
        assert!(((z - trap) / z).abs() < 1e-8);
        assert!((spec.v_cdf(10.0) - 1.0).abs() < 1e-12);
        // Envelope ratios bounded on a log grid of small v.
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for k in 0..200 {
            let v = 10f64.powf(-3.0 + 2.5 * k as f64 / 199.0);
            let l = (1.0 / v).ln();
            let d = spec.log_pdf_v(v);
            let upper = -spec.q * v.ln() - spec.c_u / v * l.powf(spec.u);
            let lower = -spec.q * v.ln() - spec.c_d / v * l.powf(spec.u);
            lo = lo.min(d - lower);
            hi = hi.max(d - upper);
        }
        assert!(lo > -3.0, "density falls below the lower envelope: {lo}");
        assert!(hi < 3.0, "density exceeds the upper envelope: {hi}");
    }

    #[test]
    fn sampler_matches_cdf() {
        let spec = MixturePriorSpec::default();
        let vs = VSampler::new(&spec);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let draws: Vec<f64> = (0..50_000).map(|_| vs.sample(&mut rng)).collect();
        for x in [0.1, 0.5, 2.0, 6.0] {
            let emp = draws.iter().filter(|&&v| v <= x).count() as f64 / draws.len() as f64;
            let p = spec.v_cdf(x);
            let se = (p * (1.0 - p) / draws.len() as f64).sqrt();
            assert!((emp - p).abs() < 4.0 * se + 1e-4, "x={x}: {emp} vs {p}");
        }
    }

    #[test]
    fn j_frequencies_pass_chi_square() {
        let spec = MixturePriorSpec { j_max: 32, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 1_000_000;
        let mut counts = vec![0usize; 33];
        for _ in 0..draws {
            counts[spec.sample_j(&mut rng)] += 1;
        }
        let stat: f64 = (1..=32)
            .map(|j| {
                let e = draws as f64 * spec.log_pmf_j(j).exp();
                (counts[j] as f64 - e).powi(2) / e
            })
            .sum();
        let p = 1.0 - ChiSquared::new(31.0).unwrap().cdf(stat);
        assert!(p > 1e-3, "χ² = {stat}, p = {p}");
    }

    #[test]
    fn zero_weights_give_zero_function() {
        let mf = MixtureFunction::new(1, 1.0, vec![0.0], vec![0.0]);
        assert_eq!(mixture_eval(&mf, 0.3), 0.0);
    }

    #[test]
    fn prior_mean_is_zero() {
        let spec = MixturePriorSpec::default();
        let vs = VSampler::new(&spec);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let xs = [-1.0, 0.0, 0.5, 2.0];
        let mut vals = vec![Vec::with_capacity(100_000); xs.len()];
        for _ in 0..100_000 {
            let mf = draw_mixture_with(&spec, &vs, 64, &mut rng);
            for (k, &x) in xs.iter().enumerate() {
                vals[k].push(mixture_eval(&mf, x));
            }
        }
        for v in vals {
            let (m, se) = crate::numeric::stats::mean_se(&v);
            assert!(m.abs() < 4.0 * se, "{m} ± {se}");
        }
    }

    #[test]
    fn draws_are_reproducible() {
        let spec = MixturePriorSpec::default();
        assert_eq!(draw_mixture_prior(&spec, 128, 3), draw_mixture_prior(&spec, 128, 3));
        assert_ne!(draw_mixture_prior(&spec, 128, 3), draw_mixture_prior(&spec, 128, 4));
    }

    #[test]
    fn sn_tail_envelope_dominates() {
        let spec = MixturePriorSpec::default();
        let mut last = 1.0;
        for a_n in [10.0, 20.0, 40.0, 80.0] {
            let t = prior_sn_tail(&spec, a_n, 2);
            assert!(!t.degenerate);
            assert!(t.numeric_tail <= t.analytic_envelope, "aₙ={a_n}: {t:?}");
            assert!(t.numeric_tail < last);
            last = t.numeric_tail;
        }
        assert!(last < 1e-10);
        let d = prior_sn_tail(&spec, 1.0, 20);
        assert!(d.degenerate && d.numeric_tail == 1.0);
    }
}
