//! Scalar fields held both as coefficients and as nodal values.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::Float;

use super::basis::SpectralBasis;
use super::domain::Point;
use crate::error::{Error, Result};

/// `u = Σ a_n φ_n`. The nodal cache is synthesised once at construction.
#[derive(Clone, Debug)]
pub struct Field {
    basis: Arc<SpectralBasis>,
    coeffs: Vec<f64>,
    nodal: Vec<f64>,
}

impl Field {
    pub fn zero(basis: &Arc<SpectralBasis>) -> Self {
        Field {
            basis: basis.clone(),
            coeffs: alloc::vec![0.0; basis.mode_count()],
            nodal: alloc::vec![0.0; basis.node_count()],
        }
    }

    pub fn from_coefficients(basis: &Arc<SpectralBasis>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.mode_count() {
            return Err(Error::LengthMismatch { expected: basis.mode_count(), found: coeffs.len() });
        }
        let nodal = basis.synthesize(&coeffs);
        Ok(Field { basis: basis.clone(), coeffs, nodal })
    }

    /// Galerkin projection of nodal data.
    pub fn from_nodal(basis: &Arc<SpectralBasis>, nodal: &[f64]) -> Result<Self> {
        if nodal.len() != basis.node_count() {
            return Err(Error::LengthMismatch { expected: basis.node_count(), found: nodal.len() });
        }
        Field::from_coefficients(basis, basis.project(nodal))
    }

    /// The eigenfunction `φ_{n+1}`.
    pub fn mode(basis: &Arc<SpectralBasis>, n: usize) -> Result<Self> {
        if n >= basis.mode_count() {
            return Err(Error::OutOfRange { name: "mode index", value: n as f64 });
        }
        let mut c = alloc::vec![0.0; basis.mode_count()];
        c[n] = 1.0;
        Field::from_coefficients(basis, c)
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn nodal(&self) -> &[f64] {
        &self.nodal
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn same_basis(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis)
    }

    pub fn check_same(&self, other: &Field) -> Result<()> {
        if self.same_basis(other) {
            Ok(())
        } else {
            Err(Error::BasisMismatch)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&a| a == 0.0)
    }

    /// Spectral synthesis at an arbitrary point, zero outside the domain.
    pub fn eval(&self, x: Point) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| **a != 0.0)
            .map(|(n, a)| a * self.basis.eval_mode(n, x))
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|a| a * s).collect(),
            nodal: self.nodal.iter().map(|a| a * s).collect(),
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        self.check_same(other)?;
        Ok(Field {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| a * x + b * y).collect(),
            nodal: self.nodal.iter().zip(&other.nodal).map(|(x, y)| a * x + b * y).collect(),
        })
    }

    /// Multiplies each coefficient by `f(λ_n)`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Field {
        let coeffs: Vec<f64> = self
            .coeffs
            .iter()
            .zip(self.basis.eigenvalues())
            .map(|(a, &l)| a * f(l))
            .collect();
        let nodal = self.basis.synthesize(&coeffs);
        Field { basis: self.basis.clone(), coeffs, nodal }
    }
}

/// `K = (−Δ)^{-1}`: divides coefficients by `λ_n`.
pub fn apply_inverse_laplacian(w: &Field) -> Field {
    w.map_spectrum(|l| 1.0 / l)
}

/// `A^s = (−Δ)^{s/2}`: multiplies coefficients by `λ_n^{s/2}`.
pub fn apply_frac(w: &Field, s: f64) -> Field {
    if s == 0.0 {
        return w.clone();
    }
    w.map_spectrum(|l| l.powf(0.5 * s))
}

fn check_weight(basis: &SpectralBasis, gamma: f64) -> Result<()> {
    let n = basis.domain().dimension();
    if gamma <= -(n as f64) {
        Err(Error::NonIntegrableWeight { gamma, dimension: n })
    } else {
        Ok(())
    }
}

/// `∫ |x|^γ |f|^r` for nodal data on `basis`.
pub fn weighted_power_integral(basis: &SpectralBasis, nodal: &[f64], r: f64, gamma: f64) -> Result<f64> {
    check_weight(basis, gamma)?;
    if r < 1.0 {
        return Err(Error::OutOfRange { name: "r", value: r });
    }
    Ok(power_integral_unchecked(basis, nodal, r, gamma))
}

pub(crate) fn power_integral_unchecked(basis: &SpectralBasis, nodal: &[f64], r: f64, gamma: f64) -> f64 {
    let w = basis.weights();
    let rad = basis.radii();
    let mut s = 0.0;
    for j in 0..nodal.len() {
        let v = nodal[j].abs();
        if v == 0.0 {
            continue;
        }
        let mut t = w[j] * v.powf(r);
        if gamma != 0.0 {
            t *= rad[j].powf(gamma);
        }
        s += t;
    }
    s
}

/// Weighted Lebesgue norm `(∫ |x|^γ |w|^r)^{1/r}`.
pub fn lr_norm(w: &Field, r: f64, gamma: f64) -> Result<f64> {
    Ok(weighted_power_integral(w.basis(), w.nodal(), r, gamma)?.powf(1.0 / r))
}

/// `‖w‖_{E^s} = ‖A^s w‖_2 = (Σ λ_n^s a_n²)^{1/2}`.
pub fn es_norm(w: &Field, s: f64) -> f64 {
    w.coefficients()
        .iter()
        .zip(w.basis().eigenvalues())
        .map(|(a, l)| l.powf(s) * a * a)
        .sum::<f64>()
        .sqrt()
}

/// Dirichlet pairing `∫ ∇u·∇v = Σ λ_n a_n b_n`.
pub fn dirichlet_pairing(u: &Field, v: &Field) -> Result<f64> {
    u.check_same(v)?;
    Ok(u.coefficients()
        .iter()
        .zip(v.coefficients())
        .zip(u.basis().eigenvalues())
        .map(|((a, b), l)| l * a * b)
        .sum())
}

/// `∫ u v` computed from coefficients.
pub fn l2_inner(u: &Field, v: &Field) -> Result<f64> {
    u.check_same(v)?;
    Ok(u.coefficients().iter().zip(v.coefficients()).map(|(a, b)| a * b).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_basis, Domain};
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn interval(m: usize) -> Arc<SpectralBasis> {
        build_basis(Domain::interval(PI).unwrap(), m).unwrap()
    }

    #[test]
    fn inverse_laplacian_examples() {
        let b = interval(8);
        let p1 = Field::mode(&b, 0).unwrap();
        assert!((apply_inverse_laplacian(&p1).coefficients()[0] - 1.0).abs() < 1e-15);
        let p2 = Field::mode(&b, 1).unwrap();
        assert!((apply_inverse_laplacian(&p2).coefficients()[1] - 0.25).abs() < 1e-15);
        assert!(apply_inverse_laplacian(&Field::zero(&b)).is_zero());
    }

    #[test]
    fn fractional_examples() {
        let b = interval(8);
        let p1 = Field::mode(&b, 0).unwrap();
        assert!((apply_frac(&p1, 2.0).coefficients()[0] - 1.0).abs() < 1e-15);
        let p2 = Field::mode(&b, 1).unwrap();
        assert!((apply_frac(&p2, 1.0).coefficients()[1] - 2.0).abs() < 1e-14);
        assert_eq!(apply_frac(&p2, 0.0).coefficients(), p2.coefficients());
    }

    #[test]
    fn norm_examples() {
        let b = interval(16);
        let p1 = Field::mode(&b, 0).unwrap();
        assert!((lr_norm(&p1, 2.0, 0.0).unwrap() - 1.0).abs() < 1e-13);
        assert!((dirichlet_pairing(&p1, &p1).unwrap() - 1.0).abs() < 1e-15);
        let l4 = weighted_power_integral(&b, p1.nodal(), 4.0, 0.0).unwrap();
        assert!((l4 - 3.0 / (2.0 * PI)).abs() < 1e-13);
        assert!(lr_norm(&p1, 2.0, -1.0).is_err());
        assert!(lr_norm(&p1, 2.0, -0.5).is_ok());
    }

    #[test]
    fn nodal_cache_matches_pointwise_synthesis() {
        let b = build_basis(Domain::disk(1.0).unwrap(), 20).unwrap();
        let c: Vec<f64> = (0..20).map(|k| 1.0 / (1.0 + k as f64)).collect();
        let f = Field::from_coefficients(&b, c).unwrap();
        for j in (0..b.node_count()).step_by(97) {
            let x = b.nodes()[j];
            assert!((f.eval(x) - f.nodal()[j]).abs() < 1e-12 * (1.0 + f.nodal()[j].abs()));
        }
    }

    #[test]
    fn frac_two_is_minus_laplacian() {
        let b = build_basis(Domain::rectangle(1.0, 2.0).unwrap(), 10).unwrap();
        let c: Vec<f64> = (0..10).map(|k| (k as f64 * 0.7).sin()).collect();
        let f = Field::from_coefficients(&b, c).unwrap();
        let lap = apply_frac(&f, 2.0);
        let x = [0.31, 1.13];
        let h = 1e-4;
        let d2 = (f.eval([x[0] + h, x[1]]) + f.eval([x[0] - h, x[1]]) + f.eval([x[0], x[1] + h])
            + f.eval([x[0], x[1] - h])
            - 4.0 * f.eval(x))
            / (h * h);
        assert!((lap.eval(x) + d2).abs() < 1e-4 * (1.0 + d2.abs()));
    }

    #[test]
    fn mismatched_bases_are_rejected() {
        let a = Field::zero(&interval(4));
        let b = Field::zero(&interval(4));
        assert_eq!(dirichlet_pairing(&a, &b), Err(Error::BasisMismatch));
    }

    proptest! {
        #[test]
        fn semigroup_and_inverse(c in proptest::collection::vec(-1.0f64..1.0, 12), s in -2.0f64..2.0, t in -2.0f64..2.0) {
            let b = interval(12);
            let f = Field::from_coefficients(&b, c).unwrap();
            let lhs = apply_frac(&apply_frac(&f, s), t);
            let rhs = apply_frac(&f, s + t);
            for (x, y) in lhs.coefficients().iter().zip(rhs.coefficients()) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
            }
            let back = apply_inverse_laplacian(&apply_frac(&f, 2.0));
            for (x, y) in back.coefficients().iter().zip(f.coefficients()) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()));
            }
        }

        #[test]
        fn norms_vanish_only_at_zero(c in proptest::collection::vec(-1.0f64..1.0, 8)) {
            let b = interval(8);
            let zero = c.iter().all(|&a| a == 0.0);
            let f = Field::from_coefficients(&b, c).unwrap();
            let n2 = lr_norm(&f, 2.0, 0.0).unwrap();
            let e1 = es_norm(&f, 1.0);
            prop_assert!(n2 >= 0.0 && e1 >= 0.0);
            prop_assert_eq!(zero, e1 == 0.0);
        }
    }
}
