//! Energy functionals of the system and their gradients in coefficient space.
//!
//! Nonlinear terms are evaluated at quadrature nodes and projected back
//! (pseudospectral Galerkin). Every framework therefore shares one discrete
//! problem: `u = K P(|x|^β g(v))`, `v = K P(|x|^α f(u))`.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::problem::ExponentPair;
use crate::spectral::{apply_frac, Field, SpectralBasis};

mod dual;
mod fourth;
mod reduced;

pub use dual::{energy_dual, fiber_maximizer, gradient_dual, DualPair, FiberMax};
pub(crate) use dual::fiber_from_ab;
pub use fourth::{energy_fourth_order, gradient_fourth_order};
pub use reduced::{
    energy_reduced, evaluate_reduced, gradient_reduced, solve_inner_max, solve_inner_max_with,
    InnerOptions, InnerSolution, ReducedEvaluation,
};

/// Which framework produced a result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Framework {
    Dual,
    Inversion,
    LsReduction,
    ShootingOracle,
}

impl Framework {
    pub fn as_str(&self) -> &'static str {
        match self {
            Framework::Dual => "dual",
            Framework::Inversion => "inversion",
            Framework::LsReduction => "ls_reduction",
            Framework::ShootingOracle => "shooting_oracle",
        }
    }

    pub fn parse(s: &str) -> Option<Framework> {
        match s.trim() {
            "dual" => Some(Framework::Dual),
            "inversion" => Some(Framework::Inversion),
            "ls_reduction" | "ls" | "reduction" => Some(Framework::LsReduction),
            "shooting_oracle" | "shooting" => Some(Framework::ShootingOracle),
            _ => None,
        }
    }
}

impl fmt::Display for Framework {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A candidate or converged `(u, v)`.
#[derive(Clone, Debug)]
pub struct SolutionPair {
    pub u: Field,
    pub v: Field,
    pub energy: f64,
    /// Relative Galerkin residual of the system, see [`system_residual`].
    pub residual: f64,
    pub provenance: Framework,
}

impl SolutionPair {
    /// Builds a pair and fills in its energy and residual.
    pub fn assemble(u: Field, v: Field, e: &ExponentPair, provenance: Framework) -> Result<Self> {
        let energy = energy_direct(&u, &v, e)?;
        let residual = system_residual(&u, &v, e)?;
        Ok(SolutionPair { u, v, energy, residual, provenance })
    }
}

/// Solver knobs shared by the frameworks.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrameworkConfig {
    /// Split `s` of the fractional form, `t = 2 − s`.
    pub fractional_split: f64,
    /// Parameter of the reduced family.
    pub lambda: f64,
    /// Relative residual at which a run counts as converged.
    pub tolerance: f64,
    pub inner_tolerance: f64,
    pub max_inversion_iterations: usize,
    pub max_outer_iterations: usize,
    pub max_inner_iterations: usize,
    /// Seed for perturbed starts; `None` starts from `φ_1`.
    pub seed: Option<u64>,
    /// Size of the seeded perturbation relative to `φ_1`.
    pub perturbation: f64,
    /// Restrict iterates to radial modes.
    pub radial_only: bool,
}

impl Default for FrameworkConfig {
    fn default() -> Self {
        FrameworkConfig {
            fractional_split: 1.0,
            lambda: 1.0,
            tolerance: 1e-9,
            inner_tolerance: 1e-12,
            max_inversion_iterations: 10_000,
            max_outer_iterations: 500,
            max_inner_iterations: 100,
            seed: None,
            perturbation: 0.0,
            radial_only: false,
        }
    }
}

impl FrameworkConfig {
    pub fn validated(self) -> Result<Self> {
        let s = self.fractional_split;
        if !(s > 0.0 && s < 2.0) {
            return Err(Error::OutOfRange { name: "fractional split s", value: s });
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::OutOfRange { name: "lambda", value: self.lambda });
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::OutOfRange { name: "tolerance", value: self.tolerance });
        }
        Ok(self)
    }
}

/// Nodal values of `|x|^γ` on `basis`.
pub fn radial_weight(basis: &SpectralBasis, gamma: f64) -> Vec<f64> {
    if gamma == 0.0 {
        return alloc::vec![1.0; basis.node_count()];
    }
    basis.radii().iter().map(|r| r.powf(gamma)).collect()
}

/// `|x|^α f(u)` at the nodes.
pub(crate) fn source_f(e: &ExponentPair, wa: &[f64], u: &[f64]) -> Vec<f64> {
    let f = e.power(crate::problem::Side::F);
    u.iter().zip(wa).map(|(x, w)| w * f.value(*x)).collect()
}

/// `|x|^β g(v)` at the nodes.
pub(crate) fn source_g(e: &ExponentPair, wb: &[f64], v: &[f64]) -> Vec<f64> {
    let g = e.power(crate::problem::Side::G);
    v.iter().zip(wb).map(|(x, w)| w * g.value(*x)).collect()
}

/// `∫|x|^α F(u) + ∫|x|^β G(v)`.
pub(crate) fn hamiltonian_integral(basis: &Arc<SpectralBasis>, e: &ExponentPair, u: &[f64], v: &[f64]) -> f64 {
    let fl = e.power(crate::problem::Side::F);
    let gl = e.power(crate::problem::Side::G);
    let w = basis.weights();
    let r = basis.radii();
    let mut s = 0.0;
    for j in 0..w.len() {
        let mut a = fl.primitive(u[j]);
        if e.alpha != 0.0 {
            a *= r[j].powf(e.alpha);
        }
        let mut b = gl.primitive(v[j]);
        if e.beta != 0.0 {
            b *= r[j].powf(e.beta);
        }
        s += w[j] * (a + b);
    }
    s
}

/// `I(u,v) = ∫∇u·∇v − ∫H(x,u,v)`.
pub fn energy_direct(u: &Field, v: &Field, e: &ExponentPair) -> Result<f64> {
    let q = crate::spectral::dirichlet_pairing(u, v)?;
    Ok(q - hamiltonian_integral(u.basis(), e, u.nodal(), v.nodal()))
}

/// `I_s(u,v) = ∫ A^s u · A^{2−s} v − ∫H`.
pub fn energy_fractional(u: &Field, v: &Field, e: &ExponentPair, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 2.0) {
        return Err(Error::OutOfRange { name: "fractional split s", value: s });
    }
    u.check_same(v)?;
    let a = apply_frac(u, s);
    let b = apply_frac(v, 2.0 - s);
    let q: f64 = a.coefficients().iter().zip(b.coefficients()).map(|(x, y)| x * y).sum();
    Ok(q - hamiltonian_integral(u.basis(), e, u.nodal(), v.nodal()))
}

/// Relative Galerkin residual of the system,
/// `‖(Λa − P g_β(v), Λb − P f_α(u))‖_{H⁻¹} / ‖(u, v)‖_{H¹₀}`.
pub fn system_residual(u: &Field, v: &Field, e: &ExponentPair) -> Result<f64> {
    u.check_same(v)?;
    let basis = u.basis();
    let wa = radial_weight(basis, e.alpha);
    let wb = radial_weight(basis, e.beta);
    let pg = basis.project(&source_g(e, &wb, v.nodal()));
    let pf = basis.project(&source_f(e, &wa, u.nodal()));
    let lam = basis.eigenvalues();
    let (a, b) = (u.coefficients(), v.coefficients());
    let mut num = 0.0;
    let mut den = 0.0;
    for n in 0..lam.len() {
        let ru = lam[n] * a[n] - pg[n];
        let rv = lam[n] * b[n] - pf[n];
        num += (ru * ru + rv * rv) / lam[n];
        den += lam[n] * (a[n] * a[n] + b[n] * b[n]);
    }
    if den == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((num / den).sqrt())
}
