//! Summary statistics and least-squares slope fits.

/// Mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Lower empirical quantile: the ⌈level·D⌉-th order statistic (1-based),
/// with level 0 mapping to the minimum. Sorts `xs` in place.
pub fn lower_quantile(xs: &mut [f64], level: f64) -> f64 {
    assert!(!xs.is_empty(), "quantile of an empty sample");
    xs.sort_by(|a, b| a.total_cmp(b));
    let d = xs.len();
    let idx = ((level * d as f64).ceil() as usize).clamp(1, d) - 1;
    xs[idx]
}

/// Ordinary least-squares fit of y on the columns of `x` (each row a regressor vector,
/// intercept added). Returns coefficients (intercept first) and their standard errors.
pub fn ols(rows: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    use nalgebra::{DMatrix, DVector};
    let n = y.len();
    let k = rows.first().map_or(0, |r| r.len()) + 1;
    let x = DMatrix::from_fn(n, k, |i, j| if j == 0 { 1.0 } else { rows[i][j - 1] });
    let yv = DVector::from_column_slice(y);
    let xtx = x.transpose() * &x;
    let inv = xtx.try_inverse().expect("regressors are collinear");
    let beta = &inv * x.transpose() * &yv;
    let resid = &yv - &x * &beta;
    let dof = n.saturating_sub(k);
    let s2 = if dof > 0 { resid.norm_squared() / dof as f64 } else { f64::NAN };
    let se = (0..k).map(|j| (s2 * inv[(j, j)]).sqrt()).collect();
    (beta.iter().cloned().collect(), se)
}

/// Slope of log(y) on log(x), optionally with a log log x nuisance regressor.
/// Returns (slope, standard error).
pub fn log_log_slope(x: &[f64], y: &[f64], log_nuisance: bool) -> (f64, f64) {
    let rows: Vec<Vec<f64>> = x
        .iter()
        .map(|&v| {
            let l = v.ln();
            if log_nuisance {
                vec![l, l.ln()]
            } else {
                vec![l]
            }
        })
        .collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (beta, se) = ols(&rows, &ly);
    (beta[1], se[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_level_zero_is_min() {
        let mut v = vec![3.0, 1.0, 2.0];
        assert_eq!(lower_quantile(&mut v, 0.0), 1.0);
        assert_eq!(lower_quantile(&mut v, 1.0), 3.0);
        assert_eq!(lower_quantile(&mut v, 0.5), 2.0);
    }

    #[test]
    fn synthetic_power_law_slope_is_recovered() {
        let x: Vec<f64> = (8..=16).map(|k| 2f64.powi(k)).collect();
        let y: Vec<f64> = x.iter().map(|v| v.powf(-0.2)).collect();
        let (s, _) = log_log_slope(&x, &y, false);
        assert!((s + 0.2).abs() < 1e-10);
    }
}
