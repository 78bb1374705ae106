//! Exact conjugate posterior for y = (λ ⋆ f)(x) + σε under the mixture prior,
//! averaged over a finite (J, v) grid.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::kernel::ConvolutionKernel;
use super::mixture::{mixture_nodes, MixtureFunction};
use super::prior::MixturePriorSpec;
use crate::error::{Error, Result};
use crate::numeric::linalg::{log_sum_exp, StabilizedCholesky};
use crate::numeric::{gaussian_pdf, normal_cdf};
use crate::rng::{self, Purpose};

/// Relative ridge for near-singular precision matrices.
pub const RIDGE: f64 = 1e-10;

/// Uniform design on [−c_x log n, c_x log n].
#[derive(Debug, Clone, PartialEq)]
pub struct DeconvDesign {
    pub points: Vec<f64>,
    pub sigma: f64,
    pub c_x: f64,
}

impl DeconvDesign {
    pub fn uniform(n: usize, c_x: f64, sigma: f64) -> Self {
        assert!(n >= 2 && c_x > 0.0 && sigma > 0.0);
        let half = c_x * (n as f64).ln();
        let points = (0..n).map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64).collect();
        Self { points, sigma, c_x }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeconvGrid {
    pub j_grid: Vec<usize>,
    pub v_grid: Vec<f64>,
}

impl Default for DeconvGrid {
    /// Dyadic J up to 64 and 40 log-uniform bandwidths on [10⁻³, 10].
    fn default() -> Self {
        let j_grid = (0..=6).map(|k| 1usize << k).collect();
        let v_grid = (0..40).map(|k| 10f64.powf(-3.0 + 4.0 * k as f64 / 39.0)).collect();
        Self { j_grid, v_grid }
    }
}

impl DeconvGrid {
    pub fn log_uniform(v_lo: f64, v_hi: f64, points: usize, j_grid: Vec<usize>) -> Self {
        assert!(points >= 1 && v_lo > 0.0 && v_hi >= v_lo);
        let v_grid = if points == 1 {
            vec![v_lo]
        } else {
            (0..points).map(|k| v_lo * (v_hi / v_lo).powf(k as f64 / (points - 1) as f64)).collect()
        };
        Self { j_grid, v_grid }
    }

    /// log of the quadrature weight v·Δlog v (trapezoid in log v); zero for a
    /// single bandwidth.
    pub fn log_v_weights(&self) -> Vec<f64> {
        let m = self.v_grid.len();
        if m == 1 {
            return vec![0.0];
        }
        let l: Vec<f64> = self.v_grid.iter().map(|v| v.ln()).collect();
        (0..m)
            .map(|k| {
                let left = if k > 0 { l[k] - l[k - 1] } else { 0.0 };
                let right = if k + 1 < m { l[k + 1] - l[k] } else { 0.0 };
                (0.5 * (left + right)).ln() + l[k]
            })
            .collect()
    }

    /// (J, v, log prior weight) for every cell, J outer.
    pub fn cells(&self, spec: &MixturePriorSpec) -> Result<Vec<(usize, f64, f64)>> {
        if let Some(&j) = self.j_grid.iter().find(|&&j| j == 0 || j > spec.j_max) {
            return Err(Error::InvalidArgument(format!("J = {j} outside 1..={}", spec.j_max)));
        }
        if let Some(&v) = self.v_grid.iter().find(|&&v| !(v > 0.0 && v <= spec.v_max)) {
            return Err(Error::InvalidArgument(format!("v = {v} outside (0, {}]", spec.v_max)));
        }
        let log_z = spec.v_normalizer().ln();
        let lw = self.log_v_weights();
        let mut out = Vec::with_capacity(self.j_grid.len() * self.v_grid.len());
        for &j in &self.j_grid {
            for (k, &v) in self.v_grid.iter().enumerate() {
                out.push((j, v, spec.log_pmf_j(j) + spec.log_v_kernel(v) - log_z + lw[k]));
            }
        }
        Ok(out)
    }
}

/// Regressors (λ ⋆ Ψ_v)(xᵢ − z_j), n × K.
pub fn deconv_regressors(
    design: &DeconvDesign,
    kernel: &ConvolutionKernel,
    nodes: &[f64],
    v: f64,
) -> Result<DMatrix<f64>> {
    let n = design.len();
    let mut x = DMatrix::zeros(n, nodes.len());
    for (c, z) in nodes.iter().enumerate() {
        for (i, xi) in design.points.iter().enumerate() {
            x[(i, c)] = kernel.smoothed_gaussian(v, xi - z)?;
        }
    }
    Ok(x)
}

/// Gram matrix ⟨Ψ_v(· − z_j), Ψ_v(· − z_k)⟩ = φ_{√2v}(z_j − z_k).
pub fn mixture_gram(nodes: &[f64], v: f64) -> DMatrix<f64> {
    let s = std::f64::consts::SQRT_2 * v;
    DMatrix::from_fn(nodes.len(), nodes.len(), |a, b| gaussian_pdf(nodes[a] - nodes[b], s))
}

/// Gram matrix of L₂[−h, h]: the product Ψ_v(· − z_j)Ψ_v(· − z_k) is
/// φ_{√2v}(z_j − z_k) times a N((z_j + z_k)/2, v²/2) density.
pub fn mixture_gram_window(nodes: &[f64], v: f64, h: f64) -> DMatrix<f64> {
    let s = std::f64::consts::SQRT_2 * v;
    let sd = v / std::f64::consts::SQRT_2;
    DMatrix::from_fn(nodes.len(), nodes.len(), |a, b| {
        let m = 0.5 * (nodes[a] + nodes[b]);
        let mass = normal_cdf((h - m) / sd) - normal_cdf((-h - m) / sd);
        gaussian_pdf(nodes[a] - nodes[b], s) * mass
    })
}

/// y-independent part of one (J, v) cell.
#[derive(Debug, Clone)]
pub struct DeconvCell {
    pub j: usize,
    pub v: f64,
    pub nodes: Vec<f64>,
    pub log_prior: f64,
    /// XᵀX.
    pub xtx: DMatrix<f64>,
    /// Precision XᵀX/σ² + I.
    chol: StabilizedCholesky,
    lt: DMatrix<f64>,
}

impl DeconvCell {
    fn build(
        design: &DeconvDesign,
        kernel: &ConvolutionKernel,
        j: usize,
        v: f64,
        log_prior: f64,
    ) -> Result<(Self, DMatrix<f64>)> {
        let nodes = mixture_nodes(j, design.c_x, design.len());
        let x = deconv_regressors(design, kernel, &nodes, v)?;
        let xtx = x.transpose() * &x;
        let s2 = design.sigma * design.sigma;
        let k = nodes.len();
        let prec = &xtx / s2 + DMatrix::identity(k, k);
        let chol = StabilizedCholesky::new(&prec, RIDGE);
        let lt = chol.factor.l().transpose();
        Ok((Self { j, v, nodes, log_prior, xtx, chol, lt }, x))
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn ridge(&self) -> Option<f64> {
        (self.chol.ridge > 0.0).then_some(self.chol.ridge)
    }

    /// log det(I + XᵀX/σ²).
    pub fn log_det(&self) -> f64 {
        self.chol.log_det()
    }

    pub fn covariance(&self) -> DMatrix<f64> {
        self.chol.factor.inverse()
    }

    /// N(mean, P⁻¹) draw.
    pub fn sample<R: Rng + ?Sized>(&self, mean: &DVector<f64>, rng: &mut R) -> DVector<f64> {
        let mut z = DVector::zeros(mean.len());
        rng::fill_normal(rng, z.as_mut_slice());
        mean + self.lt.solve_upper_triangular(&z).expect("nonzero diagonal")
    }

    /// Posterior means P⁻¹Xᵀy/σ² for each column of `xty` (which holds Xᵀy),
    /// and the log marginal likelihood of each y given its yᵀy.
    fn solve(&self, xty: &DMatrix<f64>, yty: &[f64], n: usize, sigma: f64) -> (DMatrix<f64>, Vec<f64>) {
        let s2 = sigma * sigma;
        let b = xty / s2;
        let means = self.chol.factor.solve(&b);
        let base = n as f64 * (2.0 * std::f64::consts::PI * s2).ln() + self.log_det();
        let lml = (0..yty.len()).map(|r| -0.5 * (base + yty[r] / s2 - b.column(r).dot(&means.column(r)))).collect();
        (means, lml)
    }
}

fn normalize(log_w: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(log_w);
    log_w.iter().map(|l| (l - lse).exp()).collect()
}

/// Posterior over (J, v, w) for one observation vector.
#[derive(Debug, Clone)]
pub struct DeconvPosterior {
    pub cells: Vec<DeconvCell>,
    pub means: Vec<DVector<f64>>,
    pub log_ml: Vec<f64>,
    pub weights: Vec<f64>,
}

impl DeconvPosterior {
    pub fn ridge_flagged(&self) -> bool {
        self.cells.iter().any(|c| c.ridge().is_some())
    }

    pub fn map_cell(&self) -> usize {
        self.weights.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(k, _)| k).unwrap()
    }

    pub fn mean_function(&self, k: usize) -> MixtureFunction {
        let c = &self.cells[k];
        MixtureFunction::new(c.j, c.v, c.nodes.clone(), self.means[k].iter().cloned().collect())
    }

    pub fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        pick(&self.weights, rng)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> MixtureFunction {
        let k = self.pick(rng);
        let c = &self.cells[k];
        let w = c.sample(&self.means[k], rng);
        MixtureFunction::new(c.j, c.v, c.nodes.clone(), w.iter().cloned().collect())
    }
}

fn pick<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let mut u: f64 = rng.random();
    for (k, w) in weights.iter().enumerate() {
        u -= w;
        if u <= 0.0 {
            return k;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

pub fn deconv_posterior(
    design: &DeconvDesign,
    y: &[f64],
    kernel: &ConvolutionKernel,
    spec: &MixturePriorSpec,
    grid: &DeconvGrid,
) -> Result<DeconvPosterior> {
    assert_eq!(y.len(), design.len());
    let yv = DMatrix::from_column_slice(y.len(), 1, y);
    let yty = [yv.norm_squared()];
    let mut cells = vec![];
    let mut means = vec![];
    let mut log_ml = vec![];
    let mut log_post = vec![];
    for (j, v, lp) in grid.cells(spec)? {
        let (cell, x) = DeconvCell::build(design, kernel, j, v, lp)?;
        let (m, l) = cell.solve(&(x.transpose() * &yv), &yty, design.len(), design.sigma);
        means.push(m.column(0).into_owned());
        log_ml.push(l[0]);
        log_post.push(lp + l[0]);
        cells.push(cell);
    }
    let weights = normalize(&log_post);
    Ok(DeconvPosterior { cells, means, log_ml, weights })
}

/// What posterior draws are compared against: Kf₀ on the design, ‖f₀‖², and
/// the cross moments ∫f₀Ψ_v(· − z).
pub struct DeconvTarget<'a> {
    pub kf0: &'a [f64],
    pub f0_l2_sq: f64,
    pub cross: &'a dyn Fn(f64, f64) -> f64,
    /// Half-width h of a window [−h, h] for a second inverse loss in L₂[−h, h];
    /// f₀'s support must lie inside it.
    pub window: Option<f64>,
}

/// Posterior draws of ‖f − f₀‖₂ and ‖Kf − Kf₀‖ₙ for a batch of replications.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchDraws {
    pub inverse: Vec<Vec<f64>>,
    pub direct: Vec<Vec<f64>>,
    /// ‖f − f₀‖ on L₂[−h, h] when a window is set.
    pub inverse_window: Vec<Vec<f64>>,
    /// Highest-weight (J, v) per replication.
    pub map_cell: Vec<(usize, f64)>,
    pub ridge_flagged: bool,
}

/// Runs every replication through every cell. Cells are built once for all
/// replications; the factorizations are rebuilt only for cells that receive
/// draws, so memory stays at one cell at a time.
#[allow(clippy::too_many_arguments)]
pub fn deconv_batch(
    design: &DeconvDesign,
    ys: &[Vec<f64>],
    kernel: &ConvolutionKernel,
    spec: &MixturePriorSpec,
    grid: &DeconvGrid,
    target: &DeconvTarget<'_>,
    draws: usize,
    seed: u64,
) -> Result<BatchDraws> {
    let n = design.len();
    let reps = ys.len();
    let mut ymat = DMatrix::zeros(n, reps);
    for (r, y) in ys.iter().enumerate() {
        assert_eq!(y.len(), n);
        ymat.column_mut(r).copy_from_slice(y);
    }
    let yty: Vec<f64> = ys.iter().map(|y| y.iter().map(|v| v * v).sum()).collect();
    let cells = grid.cells(spec)?;

    // Pass 1: log marginal likelihoods and means.
    let mut log_post = vec![vec![0.0; cells.len()]; reps];
    let mut means = Vec::with_capacity(cells.len());
    let mut ridge_flagged = false;
    for (c, &(j, v, lp)) in cells.iter().enumerate() {
        let (cell, x) = DeconvCell::build(design, kernel, j, v, lp)?;
        ridge_flagged |= cell.ridge().is_some();
        let (m, lml) = cell.solve(&(x.transpose() * &ymat), &yty, n, design.sigma);
        for r in 0..reps {
            log_post[r][c] = lp + lml[r];
        }
        means.push(m);
    }

    // Allocate draws to cells.
    let mut counts = vec![vec![0usize; reps]; cells.len()];
    let mut map_cell = Vec::with_capacity(reps);
    for r in 0..reps {
        let w = normalize(&log_post[r]);
        let best = w.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        map_cell.push((cells[best].0, cells[best].1));
        let mut rng = rng::stream(seed, Purpose::PosteriorDraws, &[n as u64, r as u64]);
        for _ in 0..draws {
            counts[pick(&w, &mut rng)][r] += 1;
        }
    }

    // Pass 2: draws.
    let kf0 = DVector::from_column_slice(target.kf0);
    let kf0_sq = kf0.norm_squared() / n as f64;
    let mut inverse = vec![Vec::with_capacity(draws); reps];
    let mut direct = vec![Vec::with_capacity(draws); reps];
    let mut inverse_window = vec![Vec::new(); reps];
    for (c, &(j, v, lp)) in cells.iter().enumerate() {
        if counts[c].iter().all(|&k| k == 0) {
            continue;
        }
        let (cell, x) = DeconvCell::build(design, kernel, j, v, lp)?;
        let gram = mixture_gram(&cell.nodes, v);
        let gram_w = target.window.map(|h| mixture_gram_window(&cell.nodes, v, h));
        let cross = DVector::from_iterator(cell.dim(), cell.nodes.iter().map(|&z| (target.cross)(v, z)));
        let xkf = x.transpose() * &kf0 / n as f64;
        let xtx_n = &cell.xtx / n as f64;
        for r in 0..reps {
            if counts[c][r] == 0 {
                continue;
            }
            let mean = means[c].column(r).into_owned();
            let mut rng = rng::stream(seed, Purpose::PosteriorDraws, &[n as u64, r as u64, c as u64 + 1]);
            for _ in 0..counts[c][r] {
                let w = cell.sample(&mean, &mut rng);
                let inv = w.dot(&(&gram * &w)) - 2.0 * w.dot(&cross) + target.f0_l2_sq;
                let dir = w.dot(&(&xtx_n * &w)) - 2.0 * w.dot(&xkf) + kf0_sq;
                inverse[r].push(inv.max(0.0).sqrt());
                direct[r].push(dir.max(0.0).sqrt());
                if let Some(gw) = &gram_w {
                    let iw = w.dot(&(gw * &w)) - 2.0 * w.dot(&cross) + target.f0_l2_sq;
                    inverse_window[r].push(iw.max(0.0).sqrt());
                }
            }
        }
    }
    Ok(BatchDraws { inverse, direct, inverse_window, map_cell, ridge_flagged })
}
