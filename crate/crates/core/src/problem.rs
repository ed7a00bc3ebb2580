//! Exponents, hypothesis classification, power nonlinearities and the
//! Pohozaev balance.

use core::fmt;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::functionals::SolutionPair;
use crate::spectral::field::power_integral_unchecked;

/// Exponents `(p, q)`, Hénon weights `(α, β)` and the space dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExponentPair {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub dimension: usize,
}

impl ExponentPair {
    pub fn new(p: f64, q: f64, alpha: f64, beta: f64, dimension: usize) -> Result<Self> {
        ExponentPair { p, q, alpha, beta, dimension }.validated()
    }

    /// Unweighted pair.
    pub fn lane_emden(p: f64, q: f64, dimension: usize) -> Result<Self> {
        Self::new(p, q, 0.0, 0.0, dimension)
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.p > 0.0 && self.q > 0.0 && self.p.is_finite() && self.q.is_finite()) {
            return Err(Error::InvalidExponents("p and q must be positive and finite"));
        }
        if !(self.alpha >= 0.0 && self.beta >= 0.0 && self.alpha.is_finite() && self.beta.is_finite()) {
            return Err(Error::InvalidExponents("weights must be nonnegative and finite"));
        }
        if self.dimension == 0 {
            return Err(Error::InvalidExponents("dimension must be at least 1"));
        }
        Ok(self)
    }

    pub fn with_dimension(self, dimension: usize) -> Self {
        ExponentPair { dimension, ..self }
    }

    /// `(pq − 1)/((p+1)(q+1))`, the factor in the energy identity.
    pub fn energy_factor(&self) -> f64 {
        (self.p * self.q - 1.0) / ((self.p + 1.0) * (self.q + 1.0))
    }

    pub fn power(&self, side: Side) -> PowerLaw {
        match side {
            Side::F => PowerLaw { exponent: self.p },
            Side::G => PowerLaw { exponent: self.q },
        }
    }
}

/// Hypotheses under which the frameworks apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Hypothesis {
    H1,
    H2,
    H3,
    H4,
    H4Prime,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::H1 => "H1",
            Hypothesis::H2 => "H2",
            Hypothesis::H3 => "H3",
            Hypothesis::H4 => "H4",
            Hypothesis::H4Prime => "H4'",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Regime {
    Sublinear,
    Linear,
    Superlinear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum HyperbolaPosition {
    Below,
    On,
    Above,
}

impl fmt::Display for HyperbolaPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HyperbolaPosition::Below => "below critical hyperbola",
            HyperbolaPosition::On => "on critical hyperbola",
            HyperbolaPosition::Above => "above critical hyperbola",
        })
    }
}

/// Hypothesis flags, regime and position relative to the critical hyperbola.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Classification {
    pub h1: bool,
    pub h2: bool,
    pub h3: bool,
    pub h4: bool,
    pub h4_prime: bool,
    pub regime: Regime,
    pub hyperbola: HyperbolaPosition,
}

impl Classification {
    pub fn holds(&self, h: Hypothesis) -> bool {
        match h {
            Hypothesis::H1 => self.h1,
            Hypothesis::H2 => self.h2,
            Hypothesis::H3 => self.h3,
            Hypothesis::H4 => self.h4,
            Hypothesis::H4Prime => self.h4_prime,
        }
    }

    pub fn subcritical(&self) -> bool {
        self.hyperbola == HyperbolaPosition::Below
    }
}

/// Small-denominator rational representation of `x`, when exact.
fn as_rational(x: f64) -> Option<(i128, i128)> {
    for d in 1..=1000i128 {
        let n = (x * d as f64).round();
        if n.abs() > 1e15 {
            return None;
        }
        if n / d as f64 == x {
            return Some((n as i128, d));
        }
    }
    None
}

/// Sign of `a − b` for `a = 1/(p+1) + 1/(q+1)` and `b = (N−2)/N`, exact when possible.
fn hyperbola_sign(p: f64, q: f64, n: usize) -> core::cmp::Ordering {
    use core::cmp::Ordering;
    let nn = n as i128;
    if let (Some((pn, pd)), Some((qn, qd))) = (as_rational(p), as_rational(q)) {
        // 1/(p+1) = pd/(pn+pd)
        let (a1n, a1d) = (pd, pn + pd);
        let (a2n, a2d) = (qd, qn + qd);
        // a1n/a1d + a2n/a2d − (n−2)/n, common denominator a1d·a2d·n
        let lhs = (a1n * a2d + a2n * a1d) * nn;
        let rhs = (nn - 2) * a1d * a2d;
        return lhs.cmp(&rhs);
    }
    let s = 1.0 / (p + 1.0) + 1.0 / (q + 1.0) - (n as f64 - 2.0) / n as f64;
    if s > 1e-12 {
        Ordering::Greater
    } else if s < -1e-12 {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}

fn product_sign(p: f64, q: f64) -> core::cmp::Ordering {
    use core::cmp::Ordering;
    if let (Some((pn, pd)), Some((qn, qd))) = (as_rational(p), as_rational(q)) {
        return (pn * qn).cmp(&(pd * qd));
    }
    let s = p * q - 1.0;
    if s > 1e-12 {
        Ordering::Greater
    } else if s < -1e-12 {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}

fn one_minus_sum_sign(p: f64, q: f64) -> core::cmp::Ordering {
    // 1 − 1/(p+1) − 1/(q+1) has the sign of pq − 1
    product_sign(p, q)
}

/// Evaluates every hypothesis flag literally.
pub fn classify(e: &ExponentPair) -> Classification {
    use core::cmp::Ordering;
    let n = e.dimension;
    let (p, q) = (e.p, e.q);
    let hyper = hyperbola_sign(p, q, n);
    let below = hyper == Ordering::Greater;
    let hyperbola = match hyper {
        Ordering::Greater => HyperbolaPosition::Below,
        Ordering::Equal => HyperbolaPosition::On,
        Ordering::Less => HyperbolaPosition::Above,
    };
    let regime = match product_sign(p, q) {
        Ordering::Less => Regime::Sublinear,
        Ordering::Equal => Regime::Linear,
        Ordering::Greater => Regime::Superlinear,
    };
    let sum_below_one = one_minus_sum_sign(p, q) == Ordering::Greater;
    let nf = n as f64;
    let h1 = p > 0.0 && q > 0.0 && below;
    let h3 = h1 && sum_below_one;
    let h2 = h3 && p * (nf - 4.0) < nf + 4.0 && q * (nf - 4.0) < nf + 4.0;
    let h4 = p > 1.0 && q > 1.0 && below;
    let h4_prime = p > 1.0
        && q > 1.0
        && (p + 1.0) * (nf - 2.0) < 2.0 * nf
        && (q + 1.0) * (nf - 2.0) < 2.0 * nf;
    Classification { h1, h2, h3, h4, h4_prime, regime, hyperbola }
}

/// Which equation a nonlinearity feeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `|u|^{p−1}u`
    F,
    /// `|v|^{q−1}v`
    G,
}

/// Result of differentiating a power law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Derivative {
    Finite(f64),
    /// `p < 1` at `s = 0`.
    Singular,
}

/// `s ↦ |s|^{k−1} s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLaw {
    pub exponent: f64,
}

impl PowerLaw {
    #[inline]
    pub fn value(&self, s: f64) -> f64 {
        if s == 0.0 {
            0.0
        } else {
            s.signum() * s.abs().powf(self.exponent)
        }
    }

    #[inline]
    pub fn primitive(&self, s: f64) -> f64 {
        s.abs().powf(self.exponent + 1.0) / (self.exponent + 1.0)
    }

    pub fn derivative(&self, s: f64) -> Derivative {
        let k = self.exponent;
        if s == 0.0 {
            return if k < 1.0 {
                Derivative::Singular
            } else if k == 1.0 {
                Derivative::Finite(1.0)
            } else {
                Derivative::Finite(0.0)
            };
        }
        Derivative::Finite(k * s.abs().powf(k - 1.0))
    }

    /// Inverse map `t ↦ |t|^{1/k−1} t`.
    #[inline]
    pub fn inverse(&self, t: f64) -> f64 {
        if t == 0.0 {
            0.0
        } else {
            t.signum() * t.abs().powf(1.0 / self.exponent)
        }
    }
}

/// Pointwise `|s|^{p−1}s` (F side) or `|s|^{q−1}s` (G side).
pub fn nonlinearity(e: &ExponentPair, side: Side, s: f64) -> f64 {
    e.power(side).value(s)
}

/// `|LHS − RHS|` of the weighted Pohozaev identity
/// `((N+α)/(p+1) − a)∫|x|^α|u|^{p+1} + ((N+β)/(q+1) − (N−2−a))∫|x|^β|v|^{q+1}
///  = ∫_∂Ω ∂_ν u ∂_ν v (x·ν)`, with `x` measured from the domain center.
pub fn pohozaev_residual(pair: &SolutionPair, e: &ExponentPair, a: f64) -> Result<f64> {
    pair.u.check_same(&pair.v)?;
    let basis = pair.u.basis();
    let n = basis.domain().dimension() as f64;
    let iu = power_integral_unchecked(basis, pair.u.nodal(), e.p + 1.0, e.alpha);
    let iv = power_integral_unchecked(basis, pair.v.nodal(), e.q + 1.0, e.beta);
    let lhs = ((n + e.alpha) / (e.p + 1.0) - a) * iu + ((n + e.beta) / (e.q + 1.0) - (n - 2.0 - a)) * iv;
    let du = basis.normal_derivative(pair.u.coefficients());
    let dv = basis.normal_derivative(pair.v.coefficients());
    let rule = basis.boundary();
    let rhs: f64 = (0..du.len()).map(|b| du[b] * dv[b] * rule.support[b] * rule.weights[b]).sum();
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair(p: f64, q: f64, n: usize) -> ExponentPair {
        ExponentPair::lane_emden(p, q, n).unwrap()
    }

    #[test]
    fn classification_examples() {
        let c = classify(&pair(3.0, 3.0, 2));
        assert_eq!(c.hyperbola, HyperbolaPosition::Below);
        assert_eq!(c.regime, Regime::Superlinear);
        assert!(c.h1 && c.h2 && c.h3 && c.h4 && c.h4_prime);

        let c = classify(&pair(5.0, 5.0, 3));
        assert_eq!(c.hyperbola, HyperbolaPosition::On);
        assert!(!c.h1 && !c.h4);

        let c = classify(&pair(0.5, 1.5, 3));
        assert_eq!(c.hyperbola, HyperbolaPosition::Below);
        assert_eq!(c.regime, Regime::Sublinear);
        assert!(c.h1 && !c.h3 && !c.h4);

        assert_eq!(classify(&pair(0.5, 2.0, 2)).regime, Regime::Linear);
        assert_eq!(classify(&pair(7.0, 7.0, 3)).hyperbola, HyperbolaPosition::Above);
    }

    #[test]
    fn exact_rational_boundary() {
        assert_eq!(classify(&pair(3.0, 3.0, 4)).hyperbola, HyperbolaPosition::On);
        assert_eq!(classify(&pair(2.0, 5.0, 4)).hyperbola, HyperbolaPosition::On);
        assert_eq!(classify(&pair(2.0, 5.5, 4)).hyperbola, HyperbolaPosition::Above);
        assert_eq!(classify(&pair(2.0, 4.5, 4)).hyperbola, HyperbolaPosition::Below);
    }

    #[test]
    fn invalid_pairs() {
        assert!(ExponentPair::lane_emden(0.0, 1.0, 2).is_err());
        assert!(ExponentPair::new(1.0, 1.0, -1.0, 0.0, 2).is_err());
    }

    #[test]
    fn power_law_examples() {
        let f = PowerLaw { exponent: 3.0 };
        assert_eq!(f.value(2.0), 8.0);
        assert_eq!(f.value(-2.0), -8.0);
        assert_eq!(f.primitive(2.0), 4.0);
        assert_eq!(PowerLaw { exponent: 0.5 }.derivative(0.0), Derivative::Singular);
        assert_eq!(f.derivative(0.0), Derivative::Finite(0.0));
        assert!((f.inverse(f.value(-1.7)) + 1.7).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn hyperbola_monotone(p in 0.1f64..8.0, q in 0.1f64..8.0, dp in 0.0f64..3.0, n in 1usize..6) {
            let rank = |h: HyperbolaPosition| match h {
                HyperbolaPosition::Below => 0,
                HyperbolaPosition::On => 1,
                HyperbolaPosition::Above => 2,
            };
            let a = classify(&pair(p, q, n));
            let b = classify(&pair(p + dp, q, n));
            prop_assert!(rank(a.hyperbola) <= rank(b.hyperbola));
        }

        #[test]
        fn low_dimensions_always_subcritical(p in 0.01f64..1e6, q in 0.01f64..1e6, n in 1usize..3) {
            let c = classify(&pair(p, q, n));
            prop_assert!(c.h1);
            prop_assert_eq!(c.hyperbola, HyperbolaPosition::Below);
        }

        #[test]
        fn implications(p in 0.05f64..9.0, q in 0.05f64..9.0, n in 1usize..7) {
            let c = classify(&pair(p, q, n));
            prop_assert!(!c.h3 || c.h1);
            prop_assert!(!c.h4_prime || c.h4);
        }

        #[test]
        fn primitive_differentiates_back(k in 0.3f64..5.0, s in prop_oneof![-3.0f64..-0.05, 0.05f64..3.0]) {
            let f = PowerLaw { exponent: k };
            let h = 1e-6;
            let fd = (f.primitive(s + h) - f.primitive(s - h)) / (2.0 * h);
            prop_assert!((fd - f.value(s)).abs() < 1e-6 * (1.0 + f.value(s).abs()));
        }
    }
}
