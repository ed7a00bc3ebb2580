//! Dual method: minimise `Φ` over its fiber-scaled Nehari set.
//!
//! Iterates are stored through `U = |x|^{−α/p}|f|^{1/p−1}f` and
//! `V = |x|^{−β/q}|g|^{1/q−1}g` at the nodes, so that the preconditioned
//! gradient direction is simply `(K g − U, K f − V)`. After each step the
//! pair is moved to the maximum of its fiber. A Newton polish on the
//! Galerkin system finishes the run.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_dimension, initial_coefficients, refuse, Discrete, FrameworkResult, TraceRow};
use crate::error::{Error, Result};
use crate::functionals::{
    energy_dual, fiber_from_ab, gradient_dual, source_f, source_g, DualPair, Framework, FrameworkConfig, SolutionPair,
};
use crate::problem::{classify, ExponentPair, Hypothesis};
use crate::spectral::{Field, SpectralBasis};

/// Descent hands over to Newton once the Galerkin residual is this small.
const NEWTON_SWITCH: f64 = 1e-5;

struct OnFiber {
    u: Vec<f64>,
    v: Vec<f64>,
    pf: Vec<f64>,
    pg: Vec<f64>,
    value: f64,
    convex: f64,
}

fn to_fiber_max(d: &Discrete, mut u: Vec<f64>, mut v: Vec<f64>) -> Result<OnFiber> {
    let e = &d.e;
    let (p, q) = (e.p, e.q);
    let basis = d.basis;
    let w = basis.weights();
    let mut pf = d.pf(&u);
    let mut pg = d.pg(&v);
    let mut a = 0.0;
    for j in 0..w.len() {
        a += w[j]
            * (p / (p + 1.0) * d.wa[j] * u[j].abs().powf(p + 1.0) + q / (q + 1.0) * d.wb[j] * v[j].abs().powf(q + 1.0));
    }
    let b: f64 = pf.iter().zip(&pg).zip(d.lam()).map(|((x, y), l)| x * y / l).sum();
    let fm = fiber_from_ab(a, b, e)?;
    let kappa = q * (p + 1.0) / (p * (q + 1.0));
    let tk = fm.t0.powf(kappa);
    let su = fm.t0.powf(1.0 / p);
    let sv = tk.powf(1.0 / q);
    u.iter_mut().for_each(|x| *x *= su);
    v.iter_mut().for_each(|x| *x *= sv);
    pf.iter_mut().for_each(|x| *x *= fm.t0);
    pg.iter_mut().for_each(|x| *x *= tk);
    let convex = a * fm.t0.powf((p + 1.0) / p);
    Ok(OnFiber { u, v, pf, pg, value: fm.value, convex })
}

fn start(d: &Discrete, cfg: &FrameworkConfig) -> Result<OnFiber> {
    let basis = d.basis;
    let c = initial_coefficients(basis, cfg);
    let u = basis.synthesize(&c);
    match to_fiber_max(d, u.clone(), u) {
        Ok(s) => return Ok(s),
        Err(Error::NoAscentDirection) => {}
        Err(err) => return Err(err),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0) ^ 0x5eed);
    for _ in 0..16 {
        let c: Vec<f64> = (0..basis.mode_count())
            .map(|n| if n == 0 { 1.0 } else { rng.random_range(-1.0..1.0) / (n as f64 + 1.0) })
            .collect();
        let u = basis.synthesize(&c);
        if let Ok(s) = to_fiber_max(d, u.clone(), u) {
            return Ok(s);
        }
    }
    Err(Error::NoAscentDirection)
}

pub fn solve_dual(e: &ExponentPair, basis: &Arc<SpectralBasis>, cfg: &FrameworkConfig) -> Result<FrameworkResult> {
    let cfg = cfg.clone().validated()?;
    check_dimension(e, basis)?;
    let class = classify(e);
    if !class.h3 {
        let hyp = if class.h1 { Hypothesis::H3 } else { Hypothesis::H1 };
        return Err(refuse("dual", hyp, "needs pq > 1 below the critical hyperbola"));
    }
    let d = Discrete::new(basis, e);
    let (p, q) = (e.p, e.q);
    let w = basis.weights();
    let lam = basis.eigenvalues().to_vec();
    let mut st = start(&d, &cfg)?;
    let mut trace = Vec::new();
    let mut tau: f64 = 1.0;
    let mut descent_iterations = 0;
    for it in 0..cfg.max_outer_iterations {
        descent_iterations = it;
        let a: Vec<f64> = st.pg.iter().zip(&lam).map(|(x, l)| x / l).collect();
        let b: Vec<f64> = st.pf.iter().zip(&lam).map(|(x, l)| x / l).collect();
        let (_, res) = d.residual(&a, &b);
        if res < NEWTON_SWITCH.max(cfg.tolerance) {
            trace.push(TraceRow { iter: it, energy: st.value, residual: res, step: 0.0 });
            break;
        }
        let ku = basis.synthesize(&a);
        let kv = basis.synthesize(&b);
        let du: Vec<f64> = ku.iter().zip(&st.u).map(|(x, y)| x - y).collect();
        let dv: Vec<f64> = kv.iter().zip(&st.v).map(|(x, y)| x - y).collect();
        let mut slope = 0.0;
        for j in 0..w.len() {
            let fp = p * st.u[j].abs().powf(p - 1.0);
            let gp = q * st.v[j].abs().powf(q - 1.0);
            slope -= w[j] * (d.wa[j] * fp * du[j] * du[j] + d.wb[j] * gp * dv[j] * dv[j]);
        }
        tau = (2.0 * tau).min(1.0);
        let mut next = None;
        while tau > 1e-10 {
            let tu: Vec<f64> = st.u.iter().zip(&du).map(|(x, y)| x + tau * y).collect();
            let tv: Vec<f64> = st.v.iter().zip(&dv).map(|(x, y)| x + tau * y).collect();
            if let Ok(trial) = to_fiber_max(&d, tu, tv) {
                if trial.value <= st.value + 1e-4 * tau * slope + 1e-14 * st.value.abs() {
                    next = Some(trial);
                    break;
                }
            }
            tau *= 0.5;
        }
        trace.push(TraceRow { iter: it, energy: st.value, residual: res, step: tau });
        match next {
            Some(n) => st = n,
            None => break,
        }
    }

    let mut a: Vec<f64> = st.pg.iter().zip(&lam).map(|(x, l)| x / l).collect();
    let mut b: Vec<f64> = st.pf.iter().zip(&lam).map(|(x, l)| x / l).collect();
    let (newton_iterations, residual) = d.newton(&mut a, &mut b, cfg.tolerance, 50);
    let converged = residual <= cfg.tolerance;

    let u = Field::from_coefficients(basis, a)?;
    let v = Field::from_coefficients(basis, b)?;
    let f = source_f(e, &d.wa, u.nodal());
    let g = source_g(e, &d.wb, v.nodal());
    let pair = DualPair::new(basis, f, g)?;
    let level = energy_dual(&pair, e)?;
    let (gf, gg) = gradient_dual(&pair, e);
    let umax = u.nodal().iter().chain(v.nodal()).fold(0.0f64, |m, x| m.max(x.abs()));
    let consistency = gf.iter().chain(&gg).fold(0.0f64, |m, x| m.max(x.abs())) / umax;
    let solution = SolutionPair::assemble(u, v, e, Framework::Dual)?;
    trace.push(TraceRow {
        iter: descent_iterations + newton_iterations,
        energy: level,
        residual,
        step: 1.0,
    });
    let factor = (p * q - 1.0) / (p * (q + 1.0) + q * (p + 1.0));
    let nehari_gap = (st.value - factor * st.convex).abs() / st.value.abs();
    Ok(FrameworkResult {
        framework: Framework::Dual,
        exponents: *e,
        level,
        solution,
        iterations: descent_iterations + newton_iterations,
        trace,
        converged,
        diagnostics: alloc::vec![
            ("descent_iterations", descent_iterations as f64),
            ("newton_iterations", newton_iterations as f64),
            ("inversion_consistency", consistency),
            ("nehari_value_gap", nehari_gap),
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
    fn matches_inversion_on_interval() {
        let b = build_basis(Domain::interval(PI).unwrap(), 32).unwrap();
        let e = ExponentPair::lane_emden(2.0, 3.0, 1).unwrap();
        let cfg = FrameworkConfig::default();
        let r = solve_dual(&e, &b, &cfg).unwrap();
        assert!(r.converged);
        let s = solve_inversion(&e, &b, &cfg).unwrap();
        assert!((r.level - s.level).abs() < 1e-8 * s.level);
        assert!(r.diagnostic("nehari_value_gap").unwrap() < 1e-12);
        assert!(r.diagnostic("inversion_consistency").unwrap() < 1e-8);
    }

    #[test]
    fn refuses_sublinear() {
        let b = build_basis(Domain::interval(PI).unwrap(), 8).unwrap();
        let e = ExponentPair::lane_emden(0.5, 1.5, 1).unwrap();
        assert!(matches!(
            solve_dual(&e, &b, &FrameworkConfig::default()),
            Err(Error::Hypothesis { hypothesis: Hypothesis::H3, .. })
        ));
    }
}
