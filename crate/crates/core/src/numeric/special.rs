//! Special functions: Hurwitz zeta tails, scaled complementary error function.

use std::f64::consts::PI;

/// Even Bernoulli numbers B_2 .. B_24.
const BERNOULLI_EVEN: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// Value of a series remainder together with a bound on its truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certified {
    pub value: f64,
    pub error_bound: f64,
}

/// Hurwitz zeta ζ(s, a) = Σ_{k≥0} (a + k)^(−s) for s > 1, a > 0.
///
/// Direct summation until the shifted argument reaches 16, then
/// Euler–Maclaurin with Bernoulli corrections. The error bound is the
/// magnitude of the first omitted correction term.
pub fn hurwitz_zeta(s: f64, a: f64) -> Certified {
    assert!(s > 1.0 && a > 0.0, "hurwitz_zeta needs s > 1 and a > 0");
    let mut direct = 0.0;
    let mut x = a;
    while x < 16.0 {
        direct += x.powf(-s);
        x += 1.0;
    }
    // Euler–Maclaurin for Σ_{k≥0} (x+k)^(−s).
    let mut em = x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // Term j: B_{2j}/(2j)! · s(s+1)…(s+2j−2) · x^(−s−2j+1).
    let mut rising = s; // s(s+1)…(s+2j−2)
    let mut fact = 2.0; // (2j)!
    let mut xpow = x.powf(-s - 1.0);
    let mut last = f64::INFINITY;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / fact * rising * xpow;
        if term.abs() > last {
            break;
        }
        if j + 1 == BERNOULLI_EVEN.len() {
            last = term.abs();
            break;
        }
        em += term;
        last = term.abs();
        let jj = (j + 1) as f64;
        rising *= (s + 2.0 * jj - 1.0) * (s + 2.0 * jj);
        fact *= (2.0 * jj + 1.0) * (2.0 * jj + 2.0);
        xpow /= x * x;
    }
    let value = direct + em;
    Certified { value, error_bound: last + 4.0 * f64::EPSILON * value.abs() }
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Scaled complementary error function exp(x²)·erfc(x), finite for all x ≥ 0.
pub fn erfcx(x: f64) -> f64 {
    if x < 25.0 {
        (x * x).exp() * erfc(x)
    } else {
        // Asymptotic series; relative error below 1e-14 for x ≥ 25.
        let z = 1.0 / (2.0 * x * x);
        let series = 1.0 - z + 3.0 * z * z - 15.0 * z * z * z + 105.0 * z.powi(4);
        series / (x * PI.sqrt())
    }
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Gaussian density with mean 0 and standard deviation `sd`.
#[inline]
pub fn gaussian_pdf(x: f64, sd: f64) -> f64 {
    (-0.5 * (x / sd).powi(2)).exp() / (sd * (2.0 * PI).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_two_is_pi_squared_over_six() {
        let z = hurwitz_zeta(2.0, 1.0);
        assert!((z.value - PI * PI / 6.0).abs() < 1e-14);
    }

    #[test]
    fn tail_matches_brute_force() {
        let z = hurwitz_zeta(3.1, 1001.0);
        let brute: f64 =
            (1001..2_000_000u64).map(|k| (k as f64).powf(-3.1)).sum::<f64>() + 2_000_000f64.powf(-2.1) / 2.1;
        assert!(((z.value - brute) / brute).abs() < 1e-10, "{} {}", z.value, brute);
        assert!(z.error_bound < 1e-12 * z.value);
    }

    #[test]
    fn erfcx_is_continuous_at_switch() {
        let lo = erfcx(25.0 - 1e-9);
        let hi = erfcx(25.0);
        assert!(((lo - hi) / hi).abs() < 1e-9);
    }

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        let v = normal_cdf(1.959963984540054);
        assert!((v - 0.975).abs() < 1e-12, "{v}");
    }
}
