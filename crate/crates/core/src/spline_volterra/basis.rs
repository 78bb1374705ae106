//! Clamped uniform B-splines of order q (degree q − 1) on [0, 1].

/// Order-q B-spline basis on m uniform subintervals, J = m + q − 1 functions.
///
/// The knot vector repeats 0 and 1 q times each, so B_{1,q}(0) = 1 is the only
/// function nonzero at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct BSplineBasis {
    q: usize,
    m: usize,
    knots: Vec<f64>,
}

impl BSplineBasis {
    pub fn new(q: usize, m: usize) -> Self {
        assert!(q >= 2 && m >= 1, "need order q ≥ 2 and m ≥ 1");
        let j = m + q - 1;
        let knots = (0..j + q)
            .map(|i| {
                if i < q {
                    0.0
                } else if i >= j {
                    1.0
                } else {
                    (i + 1 - q) as f64 / m as f64
                }
            })
            .collect();
        Self { q, m, knots }
    }

    /// Basis with J functions, i.e. m = J − q + 1.
    pub fn with_dim(q: usize, j: usize) -> Self {
        assert!(j >= q, "J = {j} needs at least q = {q} functions");
        Self::new(q, j + 1 - q)
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn intervals(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.m + self.q - 1
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Knot span μ (0-based) with t_μ ≤ x < t_{μ+1}; x = 1 maps to the last span.
    fn span(&self, x: f64) -> usize {
        let x = x.clamp(0.0, 1.0);
        let cell = ((x * self.m as f64).floor() as usize).min(self.m - 1);
        cell + self.q - 1
    }

    /// Nonzero order-`k` B-splines (k ≤ q) at x on this knot vector:
    /// returns the 0-based index of the first one and k values.
    pub fn nonzero(&self, k: usize, x: f64) -> (usize, Vec<f64>) {
        assert!(k >= 1 && k <= self.q);
        let t = &self.knots;
        let mu = self.span(x);
        let mut n = vec![0.0; k];
        let mut left = vec![0.0; k];
        let mut right = vec![0.0; k];
        n[0] = 1.0;
        for d in 1..k {
            left[d] = x - t[mu + 1 - d];
            right[d] = t[mu + d] - x;
            let mut saved = 0.0;
            for r in 0..d {
                let tmp = n[r] / (right[r + 1] + left[d - r]);
                n[r] = saved + right[r + 1] * tmp;
                saved = left[d - r] * tmp;
            }
            n[d] = saved;
        }
        (mu + 1 - k, n)
    }

    /// B_{i,k}(x) for 0-based index i and order k ≤ q.
    pub fn eval_order(&self, k: usize, i: usize, x: f64) -> f64 {
        let (first, vals) = self.nonzero(k, x);
        if i >= first && i < first + k {
            vals[i - first]
        } else {
            0.0
        }
    }

    /// (q − 1)/(t_{i+q−1} − t_i): weight of B_{i,q−1} in the derivative, zero
    /// for the two degenerate order-(q−1) functions at the ends.
    pub fn derivative_weight(&self, i: usize) -> f64 {
        let t = &self.knots;
        let w = t[i + self.q - 1] - t[i];
        if w > 0.0 {
            (self.q - 1) as f64 / w
        } else {
            0.0
        }
    }

    /// Nonzero derivatives B'_{i,q}(x): first 0-based index and q values.
    pub fn nonzero_derivative(&self, x: f64) -> (usize, Vec<f64>) {
        let q = self.q;
        let (first_low, low) = self.nonzero(q - 1, x);
        // Order-(q−1) functions first_low..first_low+q−2 touch order-q
        // functions first_low−1..first_low+q−2.
        let first = first_low - 1;
        let mut out = vec![0.0; q];
        for (r, b) in low.iter().enumerate() {
            let i = first_low + r;
            let c = self.derivative_weight(i) * b;
            // +c to B_{i,q}, −c to B_{i−1,q}.
            out[r + 1] += c;
            out[r] -= c;
        }
        (first, out)
    }

    /// Order-(q−1) functions actually used by f: 0-based indices 1..J−1.
    pub fn low_order_dim(&self) -> usize {
        self.dim() - 1
    }
}

/// B_{j,q}(x) with 1-based j.
pub fn bspline_eval(basis: &BSplineBasis, j: usize, x: f64) -> f64 {
    assert!(j >= 1 && j <= basis.dim());
    basis.eval_order(basis.order(), j - 1, x)
}

/// B'_{j,q}(x) = (q−1)[B_{j,q−1}/(t_{j+q−1}−t_j) − B_{j+1,q−1}/(t_{j+q}−t_{j+1})], 1-based j.
///
/// On interior spans the weights equal m, the number of subintervals.
pub fn bspline_derivative(basis: &BSplineBasis, j: usize, x: f64) -> f64 {
    assert!(j >= 1 && j <= basis.dim());
    let i = j - 1;
    let q = basis.order();
    let lo = |idx: usize| basis.eval_order(q - 1, idx, x);
    basis.derivative_weight(i) * lo(i) - basis.derivative_weight(i + 1) * lo(i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::GaussLegendre;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Textbook recursive Cox–de Boor, 0-based, as an independent oracle.
    fn cox_de_boor(t: &[f64], i: usize, k: usize, x: f64, last: bool) -> f64 {
        if k == 1 {
            let inside = t[i] <= x && x < t[i + 1];
            let right_end = last && x == t[i + 1] && t[i] < t[i + 1] && t[i + 1..].iter().all(|&s| s == t[i + 1]);
            return if inside || right_end { 1.0 } else { 0.0 };
        }
        let mut v = 0.0;
        let d1 = t[i + k - 1] - t[i];
        if d1 > 0.0 {
            v += (x - t[i]) / d1 * cox_de_boor(t, i, k - 1, x, last);
        }
        let d2 = t[i + k] - t[i + 1];
        if d2 > 0.0 {
            v += (t[i + k] - x) / d2 * cox_de_boor(t, i + 1, k - 1, x, last);
        }
        v
    }

    #[test]
    fn matches_recursive_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for q in 2..=5 {
            for m in [1, 2, 5, 9] {
                let b = BSplineBasis::new(q, m);
                for _ in 0..50 {
                    let x: f64 = rng.random();
                    for j in 1..=b.dim() {
                        let want = cox_de_boor(b.knots(), j - 1, q, x, true);
                        assert!((bspline_eval(&b, j, x) - want).abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn hat_functions_peak_at_knots() {
        let b = BSplineBasis::new(2, 4);
        for j in 1..=b.dim() {
            let x = (j - 1) as f64 / 4.0;
            assert!((bspline_eval(&b, j, x) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn partition_of_unity_and_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for q in 2..=5 {
            for m in [1, 3, 8, 17] {
                let b = BSplineBasis::new(q, m);
                assert_eq!(b.dim(), m + q - 1);
                let mut xs: Vec<f64> = (0..1000).map(|_| rng.random()).collect();
                xs.extend([0.0, 0.3, 1.0]);
                for x in xs {
                    let mut s = 0.0;
                    let mut nonzero = 0;
                    for j in 1..=b.dim() {
                        let v = bspline_eval(&b, j, x);
                        assert!(v >= 0.0);
                        if v > 0.0 {
                            nonzero += 1;
                        }
                        s += v;
                    }
                    assert!((s - 1.0).abs() < 1e-12, "q={q} m={m} x={x}: {s}");
                    assert!(nonzero <= q);
                }
                // Only the first function is nonzero at the origin.
                assert_eq!(bspline_eval(&b, 1, 0.0), 1.0);
                for j in 2..=b.dim() {
                    assert_eq!(bspline_eval(&b, j, 0.0), 0.0);
                }
            }
        }
    }

    #[test]
    fn integrals_match_span_formula() {
        let gl = GaussLegendre::new(10);
        for q in 2..=4 {
            let b = BSplineBasis::new(q, 6);
            let t = b.knots();
            for j in 1..=b.dim() {
                // Piecewise polynomial: Gauss–Legendre per knot span is exact.
                let integral: f64 = (0..6)
                    .map(|c| gl.integrate(|x| bspline_eval(&b, j, x), c as f64 / 6.0, (c + 1) as f64 / 6.0))
                    .sum();
                let want = (t[j - 1 + q] - t[j - 1]) / q as f64;
                assert!((integral - want).abs() < 1e-8, "q={q} j={j}");
            }
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = 1e-6;
        for q in 3..=5 {
            let b = BSplineBasis::new(q, 7);
            for _ in 0..1000 {
                let x = rng.random_range(h..1.0 - h);
                for j in 1..=b.dim() {
                    let fd = (bspline_eval(&b, j, x + h) - bspline_eval(&b, j, x - h)) / (2.0 * h);
                    let d = bspline_derivative(&b, j, x);
                    assert!((fd - d).abs() < 1e-5, "q={q} j={j} x={x}: {fd} vs {d}");
                }
                let (first, vals) = b.nonzero_derivative(x);
                for (r, v) in vals.iter().enumerate() {
                    assert!((v - bspline_derivative(&b, first + r + 1, x)).abs() < 1e-12);
                }
                let total: f64 = (1..=b.dim()).map(|j| bspline_derivative(&b, j, x)).sum();
                assert!(total.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn derivative_weight_is_m_in_the_interior() {
        let b = BSplineBasis::new(3, 8);
        for i in 2..b.dim() - 1 {
            assert_eq!(b.derivative_weight(i), 8.0);
        }
        assert_eq!(b.derivative_weight(0), 0.0);
        assert_eq!(b.derivative_weight(b.dim()), 0.0);
    }

    #[test]
    fn derivative_is_continuous_at_knots_for_q3() {
        let b = BSplineBasis::new(3, 5);
        let eps = 1e-12;
        for k in 1..5 {
            let x = k as f64 / 5.0;
            for j in 1..=b.dim() {
                let l = bspline_derivative(&b, j, x - eps);
                let r = bspline_derivative(&b, j, x + eps);
                assert!((l - r).abs() < 1e-9);
            }
        }
    }
}
