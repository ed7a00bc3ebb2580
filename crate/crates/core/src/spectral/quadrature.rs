//! Gauss–Legendre rules and a small Legendre-series toolkit.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

/// Evaluates `(P_n(x), P_n'(x))`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, z);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|t| half * t).collect(),
    )
}

/// A finite Legendre series on `[a, b]`.
#[derive(Clone, Debug)]
pub struct LegendreSeries {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

impl LegendreSeries {
    /// Interpolates values sampled at the `n`-point Gauss–Legendre nodes of `[a, b]`.
    pub fn from_gauss_values(a: f64, b: f64, values: &[f64]) -> Self {
        let n = values.len();
        let (x, w) = gauss_legendre(n);
        let mut coeffs = vec![0.0; n];
        for (j, (&xj, &wj)) in x.iter().zip(&w).enumerate() {
            let mut p0 = 1.0;
            let mut p1 = xj;
            let fw = values[j] * wj;
            coeffs[0] += fw;
            if n > 1 {
                coeffs[1] += fw * p1;
            }
            for k in 2..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * xj * p1 - (kf - 1.0) * p0) / kf;
                coeffs[k] += fw * p2;
                p0 = p1;
                p1 = p2;
            }
        }
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c *= (2 * k + 1) as f64 / 2.0;
        }
        LegendreSeries { a, b, coeffs }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, t: f64) -> f64 {
        let x = (2.0 * t - self.a - self.b) / (self.b - self.a);
        let n = self.coeffs.len();
        if n == 0 {
            return 0.0;
        }
        let mut sum = self.coeffs[0];
        let mut p0 = 1.0;
        let mut p1 = x;
        if n > 1 {
            sum += self.coeffs[1] * p1;
        }
        for k in 2..n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            sum += self.coeffs[k] * p2;
            p0 = p1;
            p1 = p2;
        }
        sum
    }

    /// Antiderivative vanishing at `a`.
    pub fn antiderivative(&self) -> Self {
        let n = self.coeffs.len();
        let scale = 0.5 * (self.b - self.a);
        let mut out = vec![0.0; n + 1];
        for (k, &c) in self.coeffs.iter().enumerate() {
            // ∫ P_k = (P_{k+1} − P_{k−1}) / (2k+1), ∫ P_0 = P_1
            if k == 0 {
                out[1] += c;
            } else {
                let d = c / (2 * k + 1) as f64;
                out[k + 1] += d;
                out[k - 1] -= d;
            }
        }
        for c in &mut out {
            *c *= scale;
        }
        let mut s = LegendreSeries { a: self.a, b: self.b, coeffs: out };
        let at_a = s.eval(self.a);
        s.coeffs[0] -= at_a;
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre_on(7, 0.0, 2.0);
        for deg in 0..14 {
            let got: f64 = x.iter().zip(&w).map(|(t, wt)| wt * t.powi(deg)).sum();
            let want = 2f64.powi(deg + 1) / (deg + 1) as f64;
            assert!((got - want).abs() < 1e-12 * want, "deg {deg}");
        }
    }

    #[test]
    fn large_rules_are_accurate() {
        let (x, w) = gauss_legendre_on(400, 0.0, PI);
        let got: f64 = x.iter().zip(&w).map(|(t, wt)| wt * t.sin().powi(4)).sum();
        assert!((got - 3.0 * PI / 8.0).abs() < 1e-13);
        assert!((w.iter().sum::<f64>() - PI).abs() < 1e-13);
    }

    #[test]
    fn separation_of_partial_weights() {
        let (x, w) = gauss_legendre_on(40, 0.0, 1.0);
        let mut acc = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            assert!(acc < *xi && *xi < acc + wi);
            acc += wi;
        }
    }

    #[test]
    fn series_interpolates_and_integrates() {
        let n = 12;
        let (x, _) = gauss_legendre_on(n, 1.0, 3.0);
        let vals: Vec<f64> = x.iter().map(|t| t.powi(5) - 2.0 * t).collect();
        let s = LegendreSeries::from_gauss_values(1.0, 3.0, &vals);
        assert!((s.eval(2.5) - (2.5f64.powi(5) - 5.0)).abs() < 1e-11);
        let anti = s.antiderivative();
        let want = |t: f64| t.powi(6) / 6.0 - t * t - (1.0 / 6.0 - 1.0);
        assert!((anti.eval(2.2) - want(2.2)).abs() < 1e-11);
        assert!(anti.eval(1.0).abs() < 1e-14);
    }
}
