//! Small dense solvers for Newton systems of size `M` or `2M`.

use alloc::vec::Vec;

use num_traits::Float;

/// Solves `A x = b` in place for symmetric positive definite `A` (row-major, `n×n`).
/// Returns `false` when `A` is not numerically positive definite.
pub fn cholesky_solve(a: &mut [f64], n: usize, b: &mut [f64]) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return false;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    true
}

/// Gaussian elimination with partial pivoting. Returns `false` on a singular matrix.
pub fn lu_solve(a: &mut [f64], n: usize, b: &mut [f64]) -> bool {
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let mut piv = col;
        let mut best = a[perm[col] * n + col].abs();
        for r in col + 1..n {
            let v = a[perm[r] * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return false;
        }
        perm.swap(col, piv);
        let pr = perm[col];
        let d = a[pr * n + col];
        for r in col + 1..n {
            let rr = perm[r];
            let f = a[rr * n + col] / d;
            if f == 0.0 {
                continue;
            }
            a[rr * n + col] = f;
            for c in col + 1..n {
                a[rr * n + c] -= f * a[pr * n + c];
            }
        }
    }
    let mut y = alloc::vec![0.0; n];
    for i in 0..n {
        let r = perm[i];
        let mut s = b[r];
        for k in 0..i {
            s -= a[r * n + k] * y[k];
        }
        y[i] = s;
    }
    for i in (0..n).rev() {
        let r = perm[i];
        let mut s = y[i];
        for k in i + 1..n {
            s -= a[r * n + k] * b[k];
        }
        b[i] = s / a[r * n + i];
    }
    true
}

/// `G = Σ_j d_j s_j s_jᵀ` where `s_j` is column `j` of the `m×q` row-major matrix `rows`.
pub fn weighted_gram(rows: &[f64], m: usize, q: usize, d: &[f64]) -> Vec<f64> {
    let mut scaled = alloc::vec![0.0; m * q];
    for i in 0..m {
        for j in 0..q {
            scaled[i * q + j] = rows[i * q + j] * d[j];
        }
    }
    let mut g = alloc::vec![0.0; m * m];
    for i in 0..m {
        let ri = &scaled[i * q..(i + 1) * q];
        for k in 0..=i {
            let rk = &rows[k * q..(k + 1) * q];
            let s: f64 = ri.iter().zip(rk).map(|(a, b)| a * b).sum();
            g[i * m + k] = s;
            g[k * m + i] = s;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_systems() {
        let mut a = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let orig = a;
        let x = [1.0, -2.0, 0.5];
        let mut b: Vec<f64> = (0..3).map(|i| (0..3).map(|j| orig[i * 3 + j] * x[j]).sum()).collect();
                assert!(cholesky_solve(&mut a, 3, &mut b));
        let mut a2 = [0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let o2 = a2;
        let mut b2: Vec<f64> = (0..3).map(|i| (0..3).map(|j| o2[i * 3 + j] * x[j]).sum()).collect();
        assert!(lu_solve(&mut a2, 3, &mut b2));
        for i in 0..3 {
            assert!((b[i] - x[i]).abs() < 1e-14);
            assert!((b2[i] - x[i]).abs() < 1e-14);
        }
        let mut neg = [-1.0];
        assert!(!cholesky_solve(&mut neg, 1, &mut [1.0]));
    }
}
