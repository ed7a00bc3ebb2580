//! Bessel functions of the first kind for integer order and their zeros.
//!
//! Small arguments use the ascending series, larger ones Miller's backward
//! recurrence normalised by `J_0 + 2 Σ J_2k = 1`.

use num_traits::Float;

const SERIES_LIMIT: f64 = 2.0;

fn series(m: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=m {
        term *= half / k as f64;
    }
    let mut sum = term;
    let q = -half * half;
    let mut k = 0usize;
    loop {
        k += 1;
        term *= q / (k as f64 * (k + m) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || k > 200 {
            break;
        }
    }
    sum
}

/// Returns `(J_m(x), J_{m+1}(x))` from a single backward sweep.
fn miller(m: usize, x: f64) -> (f64, f64) {
    let top = (m as f64).max(x);
    let mut start = (top + 20.0 + (40.0 * top).sqrt()) as usize;
    start += start % 2;
    let mut jp = 0.0;
    let mut j = 1e-300;
    let mut norm = 0.0;
    let mut at_m = 0.0;
    let mut at_m1 = 0.0;
    for k in (1..=start).rev() {
        // j holds J_k, jp holds J_{k+1}
        let jm = 2.0 * k as f64 / x * j - jp;
        jp = j;
        j = jm;
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * j;
        }
        if k - 1 == m {
            at_m = j;
            at_m1 = jp;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            at_m *= 1e-250;
            at_m1 *= 1e-250;
        }
    }
    norm += j;
    (at_m / norm, at_m1 / norm)
}

/// `J_m(x)` for `x ≥ 0`.
pub fn bessel_j(m: usize, x: f64) -> f64 {
    bessel_j_pair(m, x).0
}

/// `(J_m(x), J_{m+1}(x))` for `x ≥ 0`.
pub fn bessel_j_pair(m: usize, x: f64) -> (f64, f64) {
    let x = x.abs();
    if x == 0.0 {
        return (if m == 0 { 1.0 } else { 0.0 }, 0.0);
    }
    if x < SERIES_LIMIT {
        (series(m, x), series(m + 1, x))
    } else {
        miller(m, x)
    }
}

/// `J_m'(x) = (m/x) J_m(x) − J_{m+1}(x)`.
pub fn bessel_j_derivative(m: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if m == 1 { 0.5 } else { 0.0 };
    }
    let (j, j1) = bessel_j_pair(m, x);
    m as f64 / x * j - j1
}

fn refine_zero(m: usize, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = bessel_j(m, lo);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = bessel_j(m, x);
        if fx == 0.0 {
            return x;
        }
        if (fx > 0.0) == (f_lo > 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        let d = bessel_j_derivative(m, x);
        let newton = x - fx / d;
        let next = if d != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-15 * x.max(1.0) || hi - lo <= 1e-14 * x.max(1.0) {
            return next;
        }
        x = next;
    }
    x
}

/// Positive zeros of `J_m` below `limit`, ascending.
pub fn bessel_zeros_below(m: usize, limit: f64) -> alloc::vec::Vec<f64> {
    let mut zeros = alloc::vec::Vec::new();
    let step = 0.25;
    let mut a = (m as f64).max(0.5);
    let mut fa = bessel_j(m, a);
    while a < limit {
        let b = a + step;
        let fb = bessel_j(m, b);
        if fa == 0.0 {
            zeros.push(a);
        } else if (fa > 0.0) != (fb > 0.0) {
            let z = refine_zero(m, a, b);
            if z < limit {
                zeros.push(z);
            }
        }
        a = b;
        fa = fb;
    }
    zeros
}

/// The first `count` positive zeros of `J_m`.
pub fn bessel_zeros(m: usize, count: usize) -> alloc::vec::Vec<f64> {
    let mut limit = m as f64 + 4.0 * count as f64 + 4.0;
    loop {
        let z = bessel_zeros_below(m, limit);
        if z.len() >= count {
            return z[..count].to_vec();
        }
        limit *= 1.5;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn values_match_reference() {
        let cases = [
            (0, 1.0, 0.765_197_686_557_966_55),
            (1, 1.0, 0.440_050_585_744_933_52),
            (0, 10.0, -0.245_935_764_451_348_34),
            (5, 10.0, -0.234_061_528_186_793_64),
            (3, 0.5, 0.002_563_729_994_587_244),
            (12, 15.3, 0.206_376_877_925_874_65),
            (0, 30.2, -0.061_136_277_179_132_956),
            (7, 2.5, 0.000_776_553_187_533_484_95),
        ];
        for (m, x, want) in cases {
            let got = bessel_j(m, x);
            assert!(rel(got, want) < 1e-12, "J_{m}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn zeros_match_reference() {
        let cases: [(usize, [f64; 3]); 5] = [
            (0, [2.404_825_557_695_772_8, 5.520_078_110_286_310_6, 14.930_917_708_487_786]),
            (1, [3.831_705_970_207_512_3, 7.015_586_669_815_618_8, 16.470_630_050_877_633]),
            (2, [5.135_622_301_840_682_6, 8.417_244_140_399_864_9, 17.959_819_494_987_826]),
            (5, [8.771_483_815_959_954, 12.338_604_197_466_944, 22.217_799_896_561_268]),
            (11, [15.589_847_884_455_485, 19.615_966_903_966_92, 30.179_061_178_784_86]),
        ];
        for (m, want) in cases {
            let z = bessel_zeros(m, 5);
            for (got, w) in [z[0], z[1], z[4]].into_iter().zip(want) {
                assert!(rel(got, w) < 1e-13, "j_{m}: {got} vs {w}");
            }
        }
    }

    #[test]
    fn derivative_matches_difference() {
        for m in 0..6 {
            for &x in &[0.3, 1.7, 4.2, 11.0] {
                let h = 1e-5;
                let fd = (bessel_j(m, x + h) - bessel_j(m, x - h)) / (2.0 * h);
                assert!((fd - bessel_j_derivative(m, x)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn series_and_recurrence_agree_at_switch() {
        for m in 0..10 {
            let a = series(m, SERIES_LIMIT);
            let b = miller(m, SERIES_LIMIT).0;
            assert!((a - b).abs() < 1e-15 + 1e-13 * a.abs());
        }
    }
}
