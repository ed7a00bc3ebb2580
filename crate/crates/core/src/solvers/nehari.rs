//! Degeneracy of the standard Nehari set along `(t u, t λ u)`.

use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::problem::ExponentPair;
use crate::spectral::{dirichlet_pairing, weighted_power_integral, Field};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NehariRow {
    pub lambda: f64,
    /// `t_λ`, absent when no admissible root exists.
    pub t: Option<f64>,
    /// `‖(t_λ u, t_λ λ u)‖_{H¹₀×H¹₀}`.
    pub norm: Option<f64>,
    /// Relative defect of `I'(U,V)(U,V) = 0` at the reported point.
    pub identity_residual: Option<f64>,
}

/// For each `λ` solves `2λ t²‖∇u‖² = t^{p+1}∫|x|^α|u|^{p+1} + (tλ)^{q+1}∫|x|^β|u|^{q+1}`
/// for `t > 0` and reports the norm of `(t u, t λ u)`.
pub fn nehari_degeneracy_demo(e: &ExponentPair, u: &Field, lambdas: &[f64]) -> Result<Vec<NehariRow>> {
    if !(e.p * e.q > 1.0) {
        return Err(Error::InvalidExponents("the demonstration needs pq > 1"));
    }
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    let basis = u.basis();
    let d = dirichlet_pairing(u, u)?;
    let a = weighted_power_integral(basis, u.nodal(), e.p + 1.0, e.alpha)?;
    let b = weighted_power_integral(basis, u.nodal(), e.q + 1.0, e.beta)?;
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        if !(lambda > 0.0) {
            return Err(Error::OutOfRange { name: "lambda", value: lambda });
        }
        // h(t) = t^{p−1}A + λ^{q+1} t^{q−1} B − 2λD, in s = ln t
        let lq = lambda.powf(e.q + 1.0);
        let h = |s: f64| {
            let t = s.exp();
            t.powf(e.p - 1.0) * a + lq * t.powf(e.q - 1.0) * b - 2.0 * lambda * d
        };
        let mut root = None;
        let (s_min, s_max, cells) = (-60.0f64, 60.0f64, 2400);
        let ds = (s_max - s_min) / cells as f64;
        let mut prev = h(s_min);
        for k in 1..=cells {
            let s1 = s_min + k as f64 * ds;
            let cur = h(s1);
            if prev < 0.0 && cur >= 0.0 {
                let (mut lo, mut hi) = (s1 - ds, s1);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if h(mid) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-16 * (1.0 + mid.abs()) {
                        break;
                    }
                }
                root = Some(0.5 * (lo + hi));
                break;
            }
            prev = cur;
        }
        rows.push(match root {
            Some(s) => {
                let t = s.exp();
                let lhs = 2.0 * lambda * t * t * d;
                let rhs = t.powf(e.p + 1.0) * a + (t * lambda).powf(e.q + 1.0) * b;
                NehariRow {
                    lambda,
                    t: Some(t),
                    norm: Some(t * (d * (1.0 + lambda * lambda)).sqrt()),
                    identity_residual: Some((lhs - rhs).abs() / lhs),
                }
            }
            None => NehariRow { lambda, t: None, norm: None, identity_residual: None },
        });
    }
    Ok(rows)
}
