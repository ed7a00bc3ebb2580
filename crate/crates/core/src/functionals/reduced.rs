//! Reduced functional `𝒥_λ(w) = sup_ψ I(λw + ψ, w − ψ/λ)`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::Float;

use super::{hamiltonian_integral, radial_weight, source_f, source_g};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, weighted_gram};
use crate::problem::{ExponentPair, Hypothesis};
use crate::spectral::{Field, SpectralBasis};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnerOptions {
    /// Size of the inner gradient in `H⁻¹`, relative to its largest term, at which Newton stops.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for InnerOptions {
    fn default() -> Self {
        InnerOptions { tolerance: 1e-12, max_iterations: 100 }
    }
}

#[derive(Clone, Debug)]
pub struct InnerSolution {
    pub psi: Field,
    pub iterations: usize,
    pub residual: f64,
}

/// Value, envelope gradient and assembled pair at one `w`.
#[derive(Clone, Debug)]
pub struct ReducedEvaluation {
    pub value: f64,
    /// Coefficients of `𝒥_λ'(w)`.
    pub gradient: Vec<f64>,
    pub psi: Field,
    pub u: Field,
    pub v: Field,
    pub inner_iterations: usize,
}

pub(crate) fn check_reduction_regime(e: &ExponentPair) -> Result<()> {
    if e.p <= 1.0 || e.q <= 1.0 {
        return Err(Error::Hypothesis {
            framework: "ls_reduction",
            hypothesis: Hypothesis::H4,
            detail: "the reduction needs p > 1 and q > 1",
        });
    }
    Ok(())
}

struct InnerProblem<'a> {
    basis: &'a Arc<SpectralBasis>,
    e: &'a ExponentPair,
    lambda: f64,
    w: &'a [f64],
    w_nodal: &'a [f64],
    wa: Vec<f64>,
    wb: Vec<f64>,
}

impl InnerProblem<'_> {
    fn pair_nodal(&self, psi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let pn = self.basis.synthesize(psi);
        let l = self.lambda;
        let u = self.w_nodal.iter().zip(&pn).map(|(w, p)| l * w + p).collect();
        let v = self.w_nodal.iter().zip(&pn).map(|(w, p)| w - p / l).collect();
        (u, v)
    }

    fn value(&self, psi: &[f64]) -> f64 {
        let (u, v) = self.pair_nodal(psi);
        let l = self.lambda;
        let q: f64 = self
            .basis
            .eigenvalues()
            .iter()
            .zip(self.w)
            .zip(psi)
            .map(|((lam, w), p)| lam * (l * w * w - p * p / l))
            .sum();
        q - hamiltonian_integral(self.basis, self.e, &u, &v)
    }

    /// Gradient in ψ together with the nodal pair and the size of its largest term.
    fn gradient(&self, psi: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>, f64) {
        let (u, v) = self.pair_nodal(psi);
        let pf = self.basis.project(&source_f(self.e, &self.wa, &u));
        let pg = self.basis.project(&source_g(self.e, &self.wb, &v));
        let l = self.lambda;
        let g = (0..psi.len())
            .map(|n| -2.0 / l * self.basis.eigenvalues()[n] * psi[n] - pf[n] + pg[n] / l)
            .collect();
        let lam = self.basis.eigenvalues();
        let quad = 2.0 / l * psi.iter().zip(lam).map(|(x, k)| k * x * x).sum::<f64>().sqrt();
        let mag = quad.max(dual_norm(self.basis, &pf)).max(dual_norm(self.basis, &pg) / l);
        (g, u, v, mag)
    }

    /// `−Hessian = (2/λ)Λ + S W diag(|x|^α f'(U) + |x|^β g'(V)/λ²) Sᵀ`.
    fn neg_hessian(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let m = self.basis.mode_count();
        let q = self.basis.node_count();
        let (p, qq) = (self.e.p, self.e.q);
        let l2 = self.lambda * self.lambda;
        let w = self.basis.weights();
        let d: Vec<f64> = (0..q)
            .map(|j| {
                let fp = p * u[j].abs().powf(p - 1.0);
                let gp = qq * v[j].abs().powf(qq - 1.0);
                w[j] * (self.wa[j] * fp + self.wb[j] * gp / l2)
            })
            .collect();
        let rows: Vec<f64> = (0..m).flat_map(|n| self.basis.mode_row(n).iter().copied()).collect();
        let mut h = weighted_gram(&rows, m, q, &d);
        for n in 0..m {
            h[n * m + n] += 2.0 / self.lambda * self.basis.eigenvalues()[n];
        }
        h
    }
}

fn dual_norm(basis: &SpectralBasis, g: &[f64]) -> f64 {
    g.iter().zip(basis.eigenvalues()).map(|(x, l)| x * x / l).sum::<f64>().sqrt()
}

fn h1_norm(basis: &SpectralBasis, a: &[f64]) -> f64 {
    a.iter().zip(basis.eigenvalues()).map(|(x, l)| l * x * x).sum::<f64>().sqrt()
}

/// `Ψ_{λ,w}` with default options and a cold start.
pub fn solve_inner_max(w: &Field, e: &ExponentPair, lambda: f64) -> Result<Field> {
    Ok(solve_inner_max_with(w, e, lambda, None, InnerOptions::default())?.psi)
}

/// Damped Newton on the strictly concave map `ψ ↦ I(λw + ψ, w − ψ/λ)`.
pub fn solve_inner_max_with(
    w: &Field,
    e: &ExponentPair,
    lambda: f64,
    warm: Option<&Field>,
    opts: InnerOptions,
) -> Result<InnerSolution> {
    check_reduction_regime(e)?;
    if !(lambda > 0.0) {
        return Err(Error::OutOfRange { name: "lambda", value: lambda });
    }
    let basis = w.basis();
    if let Some(p) = warm {
        w.check_same(p)?;
    }
    let m = basis.mode_count();
    let prob = InnerProblem {
        basis,
        e,
        lambda,
        w: w.coefficients(),
        w_nodal: w.nodal(),
        wa: radial_weight(basis, e.alpha),
        wb: radial_weight(basis, e.beta),
    };
    let scale = h1_norm(basis, w.coefficients()).max(1e-300);
    let mut psi: Vec<f64> = match warm {
        Some(p) => p.coefficients().to_vec(),
        None => alloc::vec![0.0; m],
    };
    let mut val = prob.value(&psi);
    let mut res = f64::INFINITY;
    for it in 0..=opts.max_iterations {
        let (g, u, v, mag) = prob.gradient(&psi);
        res = dual_norm(basis, &g) / scale.max(mag);
        if res <= opts.tolerance || w.is_zero() {
            let psi = Field::from_coefficients(basis, psi)?;
            return Ok(InnerSolution { psi, iterations: it, residual: res });
        }
        if it == opts.max_iterations {
            break;
        }
        let mut h = prob.neg_hessian(&u, &v);
        let mut step = g.clone();
        if !cholesky_solve(&mut h, m, &mut step) {
            return Err(Error::InnerSolver { iterations: it, residual: res });
        }
        let psi_scale = h1_norm(basis, &psi).max(scale);
        if h1_norm(basis, &step) <= 1e-14 * psi_scale {
            // the Newton correction is below roundoff: the gradient floor is reached
            let psi = Field::from_coefficients(basis, psi)?;
            return Ok(InnerSolution { psi, iterations: it, residual: res });
        }
        let slope: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
        if slope <= 1e-13 * (1.0 + val.abs()) {
            // predicted gain below roundoff of the objective: plain Newton
            psi.iter_mut().zip(&step).for_each(|(p, s)| *p += s);
            val = prob.value(&psi);
            continue;
        }
        let mut t = 1.0;
        let mut accepted = false;
        while t >= 1e-4 {
            let trial: Vec<f64> = psi.iter().zip(&step).map(|(p, s)| p + t * s).collect();
            let tv = prob.value(&trial);
            if tv >= val + 1e-4 * t * slope || (t * 0.5 < 1e-4 && tv >= val) {
                psi = trial;
                val = tv;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // at roundoff level the objective no longer resolves the ascent
            let trial: Vec<f64> = psi.iter().zip(&step).map(|(p, s)| p + s).collect();
            let (g2, _, _, mag2) = prob.gradient(&trial);
            if dual_norm(basis, &g2) / scale.max(mag2) < res {
                val = prob.value(&trial);
                psi = trial;
            } else {
                return Err(Error::InnerSolver { iterations: it, residual: res });
            }
        }
    }
    Err(Error::InnerSolver { iterations: opts.max_iterations, residual: res })
}

/// Value and envelope gradient of `𝒥_λ` at `w`.
pub fn evaluate_reduced(
    w: &Field,
    e: &ExponentPair,
    lambda: f64,
    warm: Option<&Field>,
    opts: InnerOptions,
) -> Result<ReducedEvaluation> {
    let inner = solve_inner_max_with(w, e, lambda, warm, opts)?;
    let u = w.combine(lambda, &inner.psi, 1.0)?;
    let v = w.combine(1.0, &inner.psi, -1.0 / lambda)?;
    let value = super::energy_direct(&u, &v, e)?;
    let basis = w.basis();
    let pf = basis.project(&source_f(e, &radial_weight(basis, e.alpha), u.nodal()));
    let pg = basis.project(&source_g(e, &radial_weight(basis, e.beta), v.nodal()));
    let lam = basis.eigenvalues();
    let (a, b) = (u.coefficients(), v.coefficients());
    // 𝒥_λ'(w)ξ = I'(u,v)(λξ, ξ)
    let gradient = (0..lam.len())
        .map(|n| lambda * (lam[n] * b[n] - pf[n]) + (lam[n] * a[n] - pg[n]))
        .collect();
    Ok(ReducedEvaluation { value, gradient, psi: inner.psi, u, v, inner_iterations: inner.iterations })
}

pub fn energy_reduced(w: &Field, e: &ExponentPair, lambda: f64) -> Result<f64> {
    Ok(evaluate_reduced(w, e, lambda, None, InnerOptions::default())?.value)
}

pub fn gradient_reduced(w: &Field, e: &ExponentPair, lambda: f64) -> Result<Field> {
    let ev = evaluate_reduced(w, e, lambda, None, InnerOptions::default())?;
    Field::from_coefficients(w.basis(), ev.gradient)
}
