//! Ground-state solvers for the three variational frameworks, a radial
//! shooting oracle and the Nehari degeneracy demonstration.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::functionals::{source_f, source_g, radial_weight, Framework, FrameworkConfig, SolutionPair};
use crate::linalg::{lu_solve, weighted_gram};
use crate::problem::{ExponentPair, Hypothesis};
use crate::spectral::SpectralBasis;

mod dual;
mod inversion;
mod nehari;
mod reduction;
mod shooting;

pub use dual::solve_dual;
pub use inversion::{embedding_quotient, level_from_quotient, ray_scale, solve_inversion};
pub use nehari::{nehari_degeneracy_demo, NehariRow};
pub use reduction::solve_ls_reduction;
pub use shooting::{radial_profile, scalar_ground_level, solve_shooting, RadialProfile};

/// One row of an iteration trace.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceRow {
    pub iter: usize,
    pub energy: f64,
    pub residual: f64,
    pub step: f64,
}

/// Output of one framework run.
#[derive(Clone, Debug)]
pub struct FrameworkResult {
    pub framework: Framework,
    pub exponents: ExponentPair,
    /// Ground-state level `c(Ω)`.
    pub level: f64,
    pub solution: SolutionPair,
    pub iterations: usize,
    pub trace: Vec<TraceRow>,
    pub converged: bool,
    /// Framework-specific scalars (quotient value, λ, shooting data, ...).
    pub diagnostics: Vec<(&'static str, f64)>,
}

impl FrameworkResult {
    pub fn diagnostic(&self, name: &str) -> Option<f64> {
        self.diagnostics.iter().find(|(k, _)| *k == name).map(|(_, v)| *v)
    }

    pub fn basis(&self) -> &Arc<SpectralBasis> {
        self.solution.u.basis()
    }
}

pub(crate) fn refuse(framework: &'static str, hypothesis: Hypothesis, detail: &'static str) -> Error {
    Error::Hypothesis { framework, hypothesis, detail }
}

pub(crate) fn check_dimension(e: &ExponentPair, basis: &SpectralBasis) -> Result<()> {
    if e.dimension != basis.domain().dimension() {
        return Err(Error::MismatchedProblems);
    }
    Ok(())
}

/// Mask of modes an iterate may use.
pub(crate) fn mode_mask(basis: &SpectralBasis, radial_only: bool) -> Result<Option<Vec<bool>>> {
    if !radial_only {
        return Ok(None);
    }
    if !(basis.domain().is_ball() || basis.domain().dimension() == 1) {
        return Err(Error::Unsupported("radial restriction needs an interval or a disk"));
    }
    Ok(Some((0..basis.mode_count()).map(|n| basis.is_radial_mode(n)).collect()))
}

pub(crate) fn apply_mask(mask: &Option<Vec<bool>>, c: &mut [f64]) {
    if let Some(m) = mask {
        for (x, keep) in c.iter_mut().zip(m) {
            if !keep {
                *x = 0.0;
            }
        }
    }
}

/// `φ_1` plus a seeded perturbation with coefficients decaying like `1/(n+1)`.
pub(crate) fn initial_coefficients(basis: &SpectralBasis, cfg: &FrameworkConfig) -> Vec<f64> {
    let m = basis.mode_count();
    let mut c = alloc::vec![0.0; m];
    c[0] = 1.0;
    if let Some(seed) = cfg.seed {
        if cfg.perturbation != 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for (n, x) in c.iter_mut().enumerate().skip(1) {
                *x += cfg.perturbation * rng.random_range(-1.0..1.0) / (n as f64 + 1.0);
            }
        }
    }
    c
}

/// Galerkin form of the system on one basis: `Λa = P g_β(Sᵀb)`, `Λb = P f_α(Sᵀa)`.
pub(crate) struct Discrete<'a> {
    pub basis: &'a Arc<SpectralBasis>,
    pub e: ExponentPair,
    pub wa: Vec<f64>,
    pub wb: Vec<f64>,
}

impl<'a> Discrete<'a> {
    pub fn new(basis: &'a Arc<SpectralBasis>, e: &ExponentPair) -> Self {
        Discrete { basis, e: *e, wa: radial_weight(basis, e.alpha), wb: radial_weight(basis, e.beta) }
    }

    pub fn lam(&self) -> &[f64] {
        self.basis.eigenvalues()
    }

    pub fn pf(&self, u: &[f64]) -> Vec<f64> {
        self.basis.project(&source_f(&self.e, &self.wa, u))
    }

    pub fn pg(&self, v: &[f64]) -> Vec<f64> {
        self.basis.project(&source_g(&self.e, &self.wb, v))
    }

    /// Residual vector `(Λa − P g_β(v), Λb − P f_α(u))` and the relative
    /// `H⁻¹/H¹` size used as the convergence measure.
    pub fn residual(&self, a: &[f64], b: &[f64]) -> (Vec<f64>, f64) {
        let u = self.basis.synthesize(a);
        let v = self.basis.synthesize(b);
        let pg = self.pg(&v);
        let pf = self.pf(&u);
        let lam = self.lam();
        let m = lam.len();
        let mut r = alloc::vec![0.0; 2 * m];
        let mut num = 0.0;
        let mut den = 0.0;
        for n in 0..m {
            r[n] = lam[n] * a[n] - pg[n];
            r[m + n] = lam[n] * b[n] - pf[n];
            num += (r[n] * r[n] + r[m + n] * r[m + n]) / lam[n];
            den += lam[n] * (a[n] * a[n] + b[n] * b[n]);
        }
        let rel = if den > 0.0 { (num / den).sqrt() } else { f64::INFINITY };
        (r, rel)
    }

    fn derivative_weights(&self, nodal: &[f64], w: &[f64], k: f64) -> Vec<f64> {
        let qw = self.basis.weights();
        (0..nodal.len())
            .map(|j| {
                let x = nodal[j].abs();
                let d = if x == 0.0 { if k == 1.0 { 1.0 } else { 0.0 } } else { k * x.powf(k - 1.0) };
                qw[j] * w[j] * d
            })
            .collect()
    }

    /// Damped Newton on the Galerkin system starting from `(a, b)`.
    /// Returns the number of iterations and the final relative residual.
    pub fn newton(&self, a: &mut Vec<f64>, b: &mut Vec<f64>, tol: f64, max_iter: usize) -> (usize, f64) {
        let m = self.basis.mode_count();
        let rows: Vec<f64> = (0..m).flat_map(|n| self.basis.mode_row(n).iter().copied()).collect();
        let q = self.basis.node_count();
        let lam = self.lam().to_vec();
        let hnorm = |r: &[f64]| -> f64 {
            (0..m).map(|n| (r[n] * r[n] + r[m + n] * r[m + n]) / lam[n]).sum::<f64>().sqrt()
        };
        let (mut r, mut rel) = self.residual(a, b);
        let mut it = 0;
        while it < max_iter && rel > tol {
            it += 1;
            let u = self.basis.synthesize(a);
            let v = self.basis.synthesize(b);
            let dg = weighted_gram(&rows, m, q, &self.derivative_weights(&v, &self.wb, self.e.q));
            let df = weighted_gram(&rows, m, q, &self.derivative_weights(&u, &self.wa, self.e.p));
            let n2 = 2 * m;
            let mut jac = alloc::vec![0.0; n2 * n2];
            for i in 0..m {
                jac[i * n2 + i] = lam[i];
                jac[(m + i) * n2 + m + i] = lam[i];
                for k in 0..m {
                    jac[i * n2 + m + k] = -dg[i * m + k];
                    jac[(m + i) * n2 + k] = -df[i * m + k];
                }
            }
            let mut step: Vec<f64> = r.iter().map(|x| -x).collect();
            if !lu_solve(&mut jac, n2, &mut step) {
                break;
            }
            let base = hnorm(&r);
            let mut tau = 1.0;
            let mut improved = false;
            while tau > 1e-6 {
                let ta: Vec<f64> = (0..m).map(|n| a[n] + tau * step[n]).collect();
                let tb: Vec<f64> = (0..m).map(|n| b[n] + tau * step[m + n]).collect();
                let (tr, trel) = self.residual(&ta, &tb);
                if hnorm(&tr) < (1.0 - 1e-4 * tau) * base {
                    *a = ta;
                    *b = tb;
                    r = tr;
                    rel = trel;
                    improved = true;
                    break;
                }
                tau *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (it, rel)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Quadrature `L²` norm of nodal values.
pub(crate) fn nodal_norm(basis: &SpectralBasis, x: &[f64]) -> f64 {
    basis.weights().iter().zip(x).map(|(w, v)| w * v * v).sum::<f64>().sqrt()
}
