//! Mountain pass on the reduced functional `𝒥_λ`.
//!
//! Directions are kept on the unit sphere of `H¹₀` in the scaled coordinates
//! `y_n = √λ_n w_n`. For each direction the ray maximum of `t ↦ 𝒥_λ(t ŵ)` is
//! located by bracketing in `log t` and regula falsi on the ray derivative,
//! and the resulting max-value is minimised by L-BFGS with Armijo backtracking.

use alloc::collections::VecDeque;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::Float;

use super::{check_dimension, dot, initial_coefficients, refuse, FrameworkResult, TraceRow};
use crate::error::{Error, Result};
use crate::functionals::{
    evaluate_reduced, system_residual, Framework, FrameworkConfig, InnerOptions, ReducedEvaluation, SolutionPair,
};
use crate::problem::{classify, ExponentPair, Hypothesis};
use crate::spectral::{Field, SpectralBasis};

const T_MIN: f64 = 1e-4;
const T_MAX: f64 = 1e4;
const MEMORY: usize = 8;

struct Ray {
    t: f64,
    ev: ReducedEvaluation,
}

struct Reduced<'a> {
    basis: &'a Arc<SpectralBasis>,
    e: &'a ExponentPair,
    lambda: f64,
    opts: InnerOptions,
    sq: Vec<f64>,
    inner_total: usize,
}

impl Reduced<'_> {
    fn direction(&self, y: &[f64]) -> Result<Field> {
        Field::from_coefficients(self.basis, y.iter().zip(&self.sq).map(|(a, s)| a / s).collect())
    }

    fn eval(&mut self, dir: &Field, t: f64, warm: Option<&Ray>) -> Result<(ReducedEvaluation, f64)> {
        let w = dir.scaled(t);
        let guess = warm.map(|r| r.ev.psi.scaled(t / r.t));
        let ev = evaluate_reduced(&w, self.e, self.lambda, guess.as_ref(), self.opts)?;
        self.inner_total += ev.inner_iterations;
        let d = dot(&ev.gradient, dir.coefficients());
        Ok((ev, d))
    }

    /// Maximum of `t ↦ 𝒥_λ(t ŵ)` on `[T_MIN, T_MAX]`.
    fn ray_max(&mut self, y: &[f64], t0: f64, warm: Option<&Ray>) -> Result<Ray> {
        let dir = self.direction(y)?;
        let t0 = t0.clamp(T_MIN, T_MAX);
        let (ev0, d0) = self.eval(&dir, t0, warm)?;
        let mut best = Ray { t: t0, ev: ev0 };
        let s0 = t0.ln();
        let (mut sl, mut dl, mut sh, mut dh);
        let mut step = 0.05;
        if d0 > 0.0 {
            sl = s0;
            dl = d0;
            loop {
                let s = sl + step;
                if s > T_MAX.ln() {
                    return Err(Error::RayWindow { t: T_MAX });
                }
                let (ev, d) = self.eval(&dir, s.exp(), Some(&best))?;
                best = Ray { t: s.exp(), ev };
                if d <= 0.0 {
                    sh = s;
                    dh = d;
                    break;
                }
                sl = s;
                dl = d;
                step *= 2.0;
            }
        } else {
            sh = s0;
            dh = d0;
            loop {
                let s = sh - step;
                if s < T_MIN.ln() {
                    return Err(Error::RayWindow { t: T_MIN });
                }
                let (ev, d) = self.eval(&dir, s.exp(), Some(&best))?;
                best = Ray { t: s.exp(), ev };
                if d > 0.0 {
                    sl = s;
                    dl = d;
                    break;
                }
                sh = s;
                dh = d;
                step *= 2.0;
            }
        }
        if dh == 0.0 {
            return Ok(best);
        }
        // regula falsi, Illinois variant
        let mut side = 0i8;
        for _ in 0..100 {
            let s = (sl * dh - sh * dl) / (dh - dl);
            let t = s.exp();
            let (ev, d) = self.eval(&dir, t, Some(&best))?;
            let done = (t * d).abs() <= 1e-13 * ev.value.abs() || (sh - sl) < 1e-15;
            best = Ray { t, ev };
            if done || d == 0.0 {
                break;
            }
            if d > 0.0 {
                sl = s;
                dl = d;
                if side == 1 {
                    dh *= 0.5;
                }
                side = 1;
            } else {
                sh = s;
                dh = d;
                if side == -1 {
                    dl *= 0.5;
                }
                side = -1;
            }
        }
        Ok(best)
    }

    /// Gradient of `y ↦ max_t 𝒥_λ(t y/|y|)` at a unit `y`.
    fn sphere_gradient(&self, y: &[f64], ray: &Ray) -> Vec<f64> {
        let mut g: Vec<f64> = ray.ev.gradient.iter().zip(&self.sq).map(|(x, s)| ray.t * x / s).collect();
        let c = dot(&g, y);
        for (gi, yi) in g.iter_mut().zip(y) {
            *gi -= c * yi;
        }
        g
    }
}

fn normalise(y: &mut [f64]) {
    let n = dot(y, y).sqrt();
    y.iter_mut().for_each(|x| *x /= n);
}

fn lbfgs_direction(g: &[f64], mem: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q: Vec<f64> = g.to_vec();
    let mut alphas = Vec::with_capacity(mem.len());
    for (s, y, rho) in mem.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = mem.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|x| *x *= gamma);
    }
    for ((s, y, rho), a) in mem.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|x| *x = -*x);
    q
}

pub fn solve_ls_reduction(e: &ExponentPair, basis: &Arc<SpectralBasis>, cfg: &FrameworkConfig) -> Result<FrameworkResult> {
    let cfg = cfg.clone().validated()?;
    check_dimension(e, basis)?;
    let class = classify(e);
    if !class.h4 {
        return Err(refuse("ls_reduction", Hypothesis::H4, "needs p > 1, q > 1 below the critical hyperbola"));
    }
    if !class.h4_prime {
        return Err(refuse("ls_reduction", Hypothesis::H4Prime, "needs p + 1 and q + 1 below 2N/(N−2)"));
    }
    let sq: Vec<f64> = basis.eigenvalues().iter().map(|l| l.sqrt()).collect();
    let mut ctx = Reduced {
        basis,
        e,
        lambda: cfg.lambda,
        opts: InnerOptions { tolerance: cfg.inner_tolerance, max_iterations: cfg.max_inner_iterations },
        sq,
        inner_total: 0,
    };
    let mut y: Vec<f64> = initial_coefficients(basis, &cfg).iter().zip(&ctx.sq).map(|(a, s)| a * s).collect();
    normalise(&mut y);
    let mut ray = ctx.ray_max(&y, 1.0, None)?;
    let mut grad = ctx.sphere_gradient(&y, &ray);
    let mut mem: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..=cfg.max_outer_iterations {
        iterations = it;
        let residual = system_residual(&ray.ev.u, &ray.ev.v, e)?;
        if residual <= cfg.tolerance {
            trace.push(TraceRow { iter: it, energy: ray.ev.value, residual, step: 0.0 });
            converged = true;
            break;
        }
        if it == cfg.max_outer_iterations {
            trace.push(TraceRow { iter: it, energy: ray.ev.value, residual, step: 0.0 });
            break;
        }
        let mut d = lbfgs_direction(&grad, &mem);
        let mut slope = dot(&grad, &d);
        if !(slope < 0.0) {
            mem.clear();
            d = grad.iter().map(|x| -x).collect();
            slope = dot(&grad, &d);
        }
        let c = dot(&d, &y);
        d.iter_mut().zip(&y).for_each(|(di, yi)| *di -= c * yi);
        let mut tau: f64 = if mem.is_empty() { (0.1 / dot(&d, &d).sqrt()).min(1.0) } else { 1.0 };
        let mut accepted = None;
        while tau > 1e-12 {
            let mut yt: Vec<f64> = y.iter().zip(&d).map(|(a, b)| a + tau * b).collect();
            normalise(&mut yt);
            match ctx.ray_max(&yt, ray.t, Some(&ray)) {
                Ok(r) => {
                    let slack = 1e-14 * ray.ev.value.abs();
                    if r.ev.value <= ray.ev.value + 1e-4 * tau * slope + slack {
                        accepted = Some((yt, r));
                        break;
                    }
                }
                Err(Error::RayWindow { .. }) => {}
                Err(err) => return Err(err),
            }
            tau *= 0.5;
        }
        trace.push(TraceRow { iter: it, energy: ray.ev.value, residual, step: tau * dot(&d, &d).sqrt() });
        let Some((yn, rn)) = accepted else {
            if mem.is_empty() {
                break;
            }
            mem.clear();
            continue;
        };
        let gn = ctx.sphere_gradient(&yn, &rn);
        let s: Vec<f64> = yn.iter().zip(&y).map(|(a, b)| a - b).collect();
        let yk: Vec<f64> = gn.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yk);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&yk, &yk).sqrt() {
            if mem.len() == MEMORY {
                mem.pop_front();
            }
            mem.push_back((s, yk, 1.0 / sy));
        }
        y = yn;
        ray = rn;
        grad = gn;
    }
    let level = ray.ev.value;
    let solution = SolutionPair::assemble(ray.ev.u.clone(), ray.ev.v.clone(), e, Framework::LsReduction)?;
    Ok(FrameworkResult {
        framework: Framework::LsReduction,
        exponents: *e,
        level,
        solution,
        iterations,
        trace,
        converged,
        diagnostics: alloc::vec![
            ("lambda", cfg.lambda),
            ("ray_t", ray.t),
            ("inner_iterations", ctx.inner_total as f64),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::solve_inversion;
    use crate::spectral::{build_basis, Domain};
    use core::f64::consts::PI;

    #[test]
    fn agrees_with_inversion_and_is_lambda_free() {
        let b = build_basis(Domain::interval(PI).unwrap(), 24).unwrap();
        let e = ExponentPair::lane_emden(2.0, 3.0, 1).unwrap();
        let inv = solve_inversion(&e, &b, &FrameworkConfig::default()).unwrap();
        for lambda in [0.5, 1.0, 2.0] {
            let cfg = FrameworkConfig { lambda, ..Default::default() };
            let r = solve_ls_reduction(&e, &b, &cfg).unwrap();
            assert!(r.converged, "λ = {lambda}: {:?}", r.trace.last());
            assert!((r.level - inv.level).abs() < 1e-8 * inv.level);
            assert!(r.solution.u.nodal().iter().all(|x| *x > 0.0));
            assert!(r.solution.v.nodal().iter().all(|x| *x > 0.0));
        }
    }

    #[test]
    fn refuses_outside_h4() {
        let b = build_basis(Domain::interval(PI).unwrap(), 8).unwrap();
        let e = ExponentPair::lane_emden(0.5, 1.5, 1).unwrap();
        assert!(matches!(
            solve_ls_reduction(&e, &b, &FrameworkConfig::default()),
            Err(Error::Hypothesis { hypothesis: Hypothesis::H4, .. })
        ));
    }
}
