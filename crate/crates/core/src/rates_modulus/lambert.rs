//! Principal branch of the Lambert W function and the severe-case truncation level.

/// W₀(x) for x ≥ 0: the w ≥ 0 with w·e^w = x.
///
/// Halley iteration from a logarithmic initial guess; for very large x the
/// equivalent equation w + ln w = ln x is solved instead so e^w never overflows.
pub fn lambert_w(x: f64) -> f64 {
    assert!(x >= 0.0 && !x.is_nan(), "lambert_w is defined here for x ≥ 0 only");
    if x == 0.0 {
        return 0.0;
    }
    if x > 1e300 {
        return lambert_w_exp(x.ln());
    }
    let mut w = if x < 3.0 {
        let l = x.ln_1p();
        l * (1.0 - (1.0 + l).ln() / (2.0 + l))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    w
}

/// W₀(e^y), computed from w + ln w = y without forming e^y.
pub fn lambert_w_exp(y: f64) -> f64 {
    if y < 700.0 {
        return lambert_w(y.exp());
    }
    let mut w = y - y.ln();
    for _ in 0..64 {
        let g = w + w.ln() - y;
        let d1 = 1.0 + 1.0 / w;
        let d2 = -1.0 / (w * w);
        let step = g / (d1 - 0.5 * g * d2 / d1);
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w {
            break;
        }
    }
    w
}

/// Truncation level solving n · k^(−α) · exp(−(ξ+2γ) k^p) = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SevereTruncation {
    /// Real root of the defining equation.
    pub continuous: f64,
    /// Root rounded half-up, at least 1.
    pub k_n: usize,
}

impl SevereTruncation {
    /// |n k^(−α) e^(−(ξ+2γ)k^p) − 1| at the continuous root.
    pub fn residual(&self, alpha: f64, xi: f64, gamma: f64, p: f64, n: f64) -> f64 {
        let k = self.continuous;
        (n.ln() - alpha * k.ln() - (xi + 2.0 * gamma) * k.powf(p)).exp_m1().abs()
    }
}

/// k_n = ((α/(p b)) · W((p b/α) · n^(p/α)))^(1/p) with b = ξ + 2γ; closed form when α = 0.
pub fn severe_k_n(alpha: f64, xi: f64, gamma: f64, p: f64, n: f64) -> SevereTruncation {
    let b = xi + 2.0 * gamma;
    assert!(b > 0.0, "severe truncation needs ξ + 2γ > 0");
    assert!(n >= 2.0 && p > 0.0 && alpha >= 0.0);
    let kp = if alpha == 0.0 {
        n.ln() / b
    } else {
        let log_arg = (p * b / alpha).ln() + (p / alpha) * n.ln();
        alpha / (p * b) * lambert_w_exp(log_arg)
    };
    let continuous = kp.powf(1.0 / p);
    let k_n = ((continuous + 0.5).floor() as usize).max(1);
    SevereTruncation { continuous, k_n }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) > 0.0) == (f(hi) > 0.0) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn known_values() {
        assert_eq!(lambert_w(0.0), 0.0);
        assert!((lambert_w(std::f64::consts::E) - 1.0).abs() < 1e-15);
        let omega = bisect(|w| w * w.exp() - 1.0, 0.0, 1.0);
        assert!((lambert_w(1.0) - omega).abs() < 1e-15);
        assert!((lambert_w(1.0) - 0.567_143_290_409_783_8).abs() < 1e-15);
    }

    #[test]
    fn residual_on_log_grid() {
        for k in 0..=180 {
            let x = 10f64.powf(-6.0 + k as f64 * 0.1);
            let w = lambert_w(x);
            let r = (w * w.exp() - x).abs();
            assert!(r <= 1e-12 * x.max(1.0), "x = {x:e}: residual {r:e}");
        }
    }

    #[test]
    fn huge_arguments_use_log_form() {
        let y = 1000.0;
        let w = lambert_w_exp(y);
        assert!((w + w.ln() - y).abs() < 1e-12);
        assert!((lambert_w_exp(10.0) - lambert_w(10f64.exp())).abs() < 1e-14);
    }

    #[test]
    fn k_n_closed_form_for_alpha_zero() {
        let t = severe_k_n(0.0, 0.5, 1.0, 2.0, 1e6);
        assert!((t.continuous - (1e6f64.ln() / 2.5).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn k_n_solves_defining_equation() {
        let (a, xi, g, p, n) = (1.0, 0.0, 1.0, 1.0, 1e6);
        let t = severe_k_n(a, xi, g, p, n);
        assert!(t.residual(a, xi, g, p, n) <= 1e-8);
        // Independent route: bisection on the log of the defining equation.
        let root = bisect(|k: f64| n.ln() - a * k.ln() - (xi + 2.0 * g) * k.powf(p), 0.5, 100.0);
        assert!(((t.continuous - root) / root).abs() <= 1e-8);
        assert_eq!(t.k_n, (root + 0.5).floor() as usize);
    }

    #[test]
    fn k_n_grows_like_log_n() {
        let (a, xi, g, p) = (1.0, 0.0, 1.0, 1.0);
        let n = 1e12f64;
        let t = severe_k_n(a, xi, g, p, n);
        let ratio = t.k_n as f64 * (xi + 2.0 * g) / n.ln();
        assert!((ratio - 1.0).abs() < 0.15, "ratio {ratio}");
    }
}
