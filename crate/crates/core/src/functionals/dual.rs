//! Dual functional in the source variables `f = |x|^α|u|^{p−1}u`, `g = |x|^β|v|^{q−1}v`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::problem::ExponentPair;
use crate::spectral::{Field, SpectralBasis};

/// `(f, g)` stored as nodal values; back-projection on demand.
#[derive(Clone, Debug)]
pub struct DualPair {
    basis: Arc<SpectralBasis>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

impl DualPair {
    pub fn new(basis: &Arc<SpectralBasis>, f: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        let q = basis.node_count();
        for len in [f.len(), g.len()] {
            if len != q {
                return Err(Error::LengthMismatch { expected: q, found: len });
            }
        }
        Ok(DualPair { basis: basis.clone(), f, g })
    }

    pub fn from_fields(f: &Field, g: &Field) -> Result<Self> {
        f.check_same(g)?;
        DualPair::new(f.basis(), f.nodal().to_vec(), g.nodal().to_vec())
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    pub fn projected_f(&self) -> Field {
        Field::from_coefficients(&self.basis, self.basis.project(&self.f)).expect("sizes checked")
    }

    pub fn projected_g(&self) -> Field {
        Field::from_coefficients(&self.basis, self.basis.project(&self.g)).expect("sizes checked")
    }

    /// `(f, g) ↦ (t f, t^κ g)` with `κ = q(p+1)/(p(q+1))`.
    pub fn fiber(&self, e: &ExponentPair, t: f64) -> DualPair {
        let kappa = e.q * (e.p + 1.0) / (e.p * (e.q + 1.0));
        let tk = t.powf(kappa);
        DualPair {
            basis: self.basis.clone(),
            f: self.f.iter().map(|x| x * t).collect(),
            g: self.g.iter().map(|x| x * tk).collect(),
        }
    }
}

pub(crate) struct DualParts {
    /// Convex part `∫ (p/(p+1))|x|^{−α/p}|f|^{(p+1)/p} + (q/(q+1))|x|^{−β/q}|g|^{(q+1)/q}`.
    pub a: f64,
    /// Coupling `∫ f K g`.
    pub b: f64,
    pub pf: Vec<f64>,
    pub pg: Vec<f64>,
}

pub(crate) fn dual_parts(d: &DualPair, e: &ExponentPair) -> DualParts {
    let basis = &d.basis;
    let w = basis.weights();
    let r = basis.radii();
    let (p, q) = (e.p, e.q);
    let mut a = 0.0;
    for j in 0..w.len() {
        let mut x = p / (p + 1.0) * d.f[j].abs().powf((p + 1.0) / p);
        if e.alpha != 0.0 {
            x *= r[j].powf(-e.alpha / p);
        }
        let mut y = q / (q + 1.0) * d.g[j].abs().powf((q + 1.0) / q);
        if e.beta != 0.0 {
            y *= r[j].powf(-e.beta / q);
        }
        a += w[j] * (x + y);
    }
    let pf = basis.project(&d.f);
    let pg = basis.project(&d.g);
    let b = pf.iter().zip(&pg).zip(basis.eigenvalues()).map(|((x, y), l)| x * y / l).sum();
    DualParts { a, b, pf, pg }
}

/// `Φ(f,g) = A(f,g) − ∫ f K g`, where `½⟨T(f,g),(f,g)⟩ = ∫ f K g`.
pub fn energy_dual(d: &DualPair, e: &ExponentPair) -> Result<f64> {
    let parts = dual_parts(d, e);
    Ok(parts.a - parts.b)
}

/// Nodal `L²` gradients `(|x|^{−α/p}|f|^{1/p−1}f − K g, |x|^{−β/q}|g|^{1/q−1}g − K f)`.
pub fn gradient_dual(d: &DualPair, e: &ExponentPair) -> (Vec<f64>, Vec<f64>) {
    let parts = dual_parts(d, e);
    gradient_from_parts(d, e, &parts)
}

pub(crate) fn gradient_from_parts(d: &DualPair, e: &ExponentPair, parts: &DualParts) -> (Vec<f64>, Vec<f64>) {
    let basis = &d.basis;
    let lam = basis.eigenvalues();
    let kg: Vec<f64> = parts.pg.iter().zip(lam).map(|(x, l)| x / l).collect();
    let kf: Vec<f64> = parts.pf.iter().zip(lam).map(|(x, l)| x / l).collect();
    let u = basis.synthesize(&kg);
    let v = basis.synthesize(&kf);
    let fi = e.power(crate::problem::Side::F);
    let gi = e.power(crate::problem::Side::G);
    let r = basis.radii();
    let gf = (0..u.len())
        .map(|j| {
            let mut x = fi.inverse(d.f[j]);
            if e.alpha != 0.0 {
                x *= r[j].powf(-e.alpha / e.p);
            }
            x - u[j]
        })
        .collect();
    let gg = (0..v.len())
        .map(|j| {
            let mut y = gi.inverse(d.g[j]);
            if e.beta != 0.0 {
                y *= r[j].powf(-e.beta / e.q);
            }
            y - v[j]
        })
        .collect();
    (gf, gg)
}

/// Unique maximum of `t ↦ Φ(t f, t^κ g) = A t^a − B t^{γ₂}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiberMax {
    pub t0: f64,
    pub value: f64,
    pub a: f64,
    pub b: f64,
}

/// Closed-form fiber maximiser `t₀ = (a A / (γ₂ B))^{1/(γ₂ − a)}`.
pub fn fiber_maximizer(d: &DualPair, e: &ExponentPair) -> Result<FiberMax> {
    let parts = dual_parts(d, e);
    fiber_from_ab(parts.a, parts.b, e)
}

pub(crate) fn fiber_from_ab(a_term: f64, b_term: f64, e: &ExponentPair) -> Result<FiberMax> {
    let (p, q) = (e.p, e.q);
    if p * q <= 1.0 {
        return Err(Error::Hypothesis {
            framework: "dual",
            hypothesis: crate::problem::Hypothesis::H3,
            detail: "fiber maximum needs pq > 1",
        });
    }
    if !(b_term > 0.0) {
        return Err(Error::NoAscentDirection);
    }
    let a = (p + 1.0) / p;
    let g2 = (p * (q + 1.0) + q * (p + 1.0)) / (p * (q + 1.0));
    let t0 = (a * a_term / (g2 * b_term)).powf(1.0 / (g2 - a));
    let value = a_term * t0.powf(a) - b_term * t0.powf(g2);
    Ok(FiberMax { t0, value, a: a_term, b: b_term })
}
