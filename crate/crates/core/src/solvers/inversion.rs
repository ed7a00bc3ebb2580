//! Reduction by inversion: minimise the embedding quotient by a nonlinear
//! inverse power iteration on the nodal source `G = −Δu`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::Float;

use super::{apply_mask, check_dimension, initial_coefficients, mode_mask, nodal_norm, refuse, Discrete, FrameworkResult, TraceRow};
use crate::error::{Error, Result};
use crate::functionals::{source_g, Framework, FrameworkConfig, SolutionPair};
use crate::problem::{classify, ExponentPair, Hypothesis, Regime};
use crate::spectral::{Field, SpectralBasis};

struct Quotient<'a> {
    d: Discrete<'a>,
    /// `|x|^{−β/q}` at the nodes.
    wb_inv: Vec<f64>,
    s: f64,
}

impl Quotient<'_> {
    fn numerator(&self, g: &[f64]) -> f64 {
        let w = self.d.basis.weights();
        (0..g.len()).map(|j| w[j] * self.wb_inv[j] * g[j].abs().powf(self.s)).sum()
    }

    fn denominator(&self, u: &[f64]) -> f64 {
        let w = self.d.basis.weights();
        let p1 = self.d.e.p + 1.0;
        (0..u.len()).map(|j| w[j] * self.d.wa[j] * u[j].abs().powf(p1)).sum()
    }
}

/// `c = ((pq−1)/((p+1)(q+1))) α^{q(p+1)/(pq−1)}`.
pub fn level_from_quotient(e: &ExponentPair, alpha_pq: f64) -> f64 {
    e.energy_factor() * alpha_pq.powf(e.q * (e.p + 1.0) / (e.p * e.q - 1.0))
}

/// `t(u) = (numerator / denominator)^{q/(pq−1)}`, the scale putting `u` on the ground-state ray.
pub fn ray_scale(e: &ExponentPair, numerator: f64, denominator: f64) -> f64 {
    (numerator / denominator).powf(e.q / (e.p * e.q - 1.0))
}

/// Embedding quotient of a field, with `−Δu` taken spectrally.
pub fn embedding_quotient(u: &Field, e: &ExponentPair) -> Result<f64> {
    let basis = u.basis();
    let lap = u.map_spectrum(|l| l);
    let s = (e.q + 1.0) / e.q;
    let w = basis.weights();
    let r = basis.radii();
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..w.len() {
        let wb = if e.beta == 0.0 { 1.0 } else { r[j].powf(-e.beta / e.q) };
        let wa = if e.alpha == 0.0 { 1.0 } else { r[j].powf(e.alpha) };
        num += w[j] * wb * lap.nodal()[j].abs().powf(s);
        den += w[j] * wa * u.nodal()[j].abs().powf(e.p + 1.0);
    }
    if !(den > 0.0) {
        return Err(Error::ZeroField);
    }
    Ok(num / den.powf(s / (e.p + 1.0)))
}

/// Solves by inverse iteration `u = K P G`, `v = K P(|x|^α f(u))`, `G ← |x|^β g(v)`.
///
/// The quotient `∫|x|^{−β/q}|G|^{(q+1)/q} / (∫|x|^α|u|^{p+1})^{(q+1)/(q(p+1))}` decreases
/// monotonically along the iteration; its limit is `α_{p,q}` and
/// `c = ((pq−1)/((p+1)(q+1))) α_{p,q}^{q(p+1)/(pq−1)}`.
pub fn solve_inversion(e: &ExponentPair, basis: &Arc<SpectralBasis>, cfg: &FrameworkConfig) -> Result<FrameworkResult> {
    let cfg = cfg.clone().validated()?;
    check_dimension(e, basis)?;
    let class = classify(e);
    if !class.h1 {
        return Err(refuse("inversion", Hypothesis::H1, "(p, q) must lie below the critical hyperbola"));
    }
    if class.regime == Regime::Linear {
        return Err(Error::InvalidExponents("pq = 1 is an eigenvalue problem"));
    }
    let mask = mode_mask(basis, cfg.radial_only)?;
    let (p, q) = (e.p, e.q);
    let s = (q + 1.0) / q;
    let wb_inv: Vec<f64> = basis.radii().iter().map(|r| if e.beta == 0.0 { 1.0 } else { r.powf(-e.beta / q) }).collect();
    let qt = Quotient { d: Discrete::new(basis, e), wb_inv, s };
    let lam = basis.eigenvalues().to_vec();
    let m = lam.len();

    let mut a0 = initial_coefficients(basis, &cfg);
    apply_mask(&mask, &mut a0);
    let mut g = basis.synthesize(&a0.iter().zip(&lam).map(|(x, l)| x * l).collect::<Vec<_>>());

    let mut trace = Vec::new();
    let mut prev_quotient = f64::INFINITY;
    let mut monotone_violation: f64 = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    let mut state = None;
    for it in 0..=cfg.max_inversion_iterations {
        iterations = it;
        let mut a: Vec<f64> = basis.project(&g).iter().zip(&lam).map(|(x, l)| x / l).collect();
        apply_mask(&mask, &mut a);
        let mut u = basis.synthesize(&a);
        let den = qt.denominator(&u);
        if !(den > 0.0) {
            return Err(Error::ZeroField);
        }
        let scale = den.powf(-1.0 / (p + 1.0));
        for x in g.iter_mut() {
            *x *= scale;
        }
        for x in a.iter_mut() {
            *x *= scale;
        }
        for x in u.iter_mut() {
            *x *= scale;
        }
        let quotient = qt.numerator(&g);
        if quotient > prev_quotient {
            monotone_violation = monotone_violation.max((quotient - prev_quotient) / prev_quotient);
        }
        prev_quotient = quotient;

        let mut b: Vec<f64> = qt.d.pf(&u).iter().zip(&lam).map(|(x, l)| x / l).collect();
        apply_mask(&mask, &mut b);
        let v = basis.synthesize(&b);
        let g_new = source_g(e, &qt.d.wb, &v);

        // ground state on the ray: u* = t u, v* = t^p v
        let t = ray_scale(e, quotient, 1.0);
        let mut pgn = basis.project(&g_new);
        apply_mask(&mask, &mut pgn);
        let tpq = t.powf(p * q);
        let tp = t.powf(p);
        let mut num = 0.0;
        let mut dnm = 0.0;
        for n in 0..m {
            let r = lam[n] * t * a[n] - tpq * pgn[n];
            num += r * r / lam[n];
            dnm += lam[n] * (t * t * a[n] * a[n] + tp * tp * b[n] * b[n]);
        }
        let residual = (num / dnm).sqrt();
        let level = level_from_quotient(e, quotient);

        // step measured after normalising G_new the same way G was
        let gn = nodal_norm(basis, &g);
        let ratio = nodal_norm(basis, &g_new) / gn;
        let diff: Vec<f64> = g_new.iter().zip(&g).map(|(x, y)| x / ratio - y).collect();
        let step = nodal_norm(basis, &diff) / gn;
        trace.push(TraceRow { iter: it, energy: level, residual, step });
        state = Some((a, b, t, quotient, level, residual));
        if residual <= cfg.tolerance {
            converged = true;
            break;
        }
        g = g_new;
    }
    let (a, b, t, quotient, level, residual) = state.expect("at least one iteration");
    let tp = t.powf(p);
    let sign = if basis.integrate(&basis.synthesize(&a)) < 0.0 { -1.0 } else { 1.0 };
    let u = Field::from_coefficients(basis, a.iter().map(|x| sign * t * x).collect())?;
    let v = Field::from_coefficients(basis, b.iter().map(|x| sign * tp * x).collect())?;
    let solution = SolutionPair::assemble(u, v, e, Framework::Inversion)?;
    Ok(FrameworkResult {
        framework: Framework::Inversion,
        exponents: *e,
        level,
        solution,
        iterations,
        trace,
        converged,
        diagnostics: alloc::vec![
            ("alpha_pq", quotient),
            ("ray_scale", t),
            ("quotient_residual", residual),
            ("monotonicity_violation", monotone_violation),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_basis, Domain};
    use core::f64::consts::PI;

    #[test]
    fn interval_ground_state() {
        let b = build_basis(Domain::interval(PI).unwrap(), 32).unwrap();
        let e = ExponentPair::lane_emden(2.0, 3.0, 1).unwrap();
        let r = solve_inversion(&e, &b, &FrameworkConfig::default()).unwrap();
        assert!(r.converged, "{:?}", r.trace.last());
        assert!(r.level > 0.0);
        assert!((r.solution.energy - r.level).abs() < 1e-8 * r.level);
        assert!(r.diagnostic("monotonicity_violation").unwrap() < 1e-12);
        assert!(r.solution.residual < 1e-8);
        let min_u = r.solution.u.nodal().iter().cloned().fold(f64::INFINITY, f64::min);
        let min_v = r.solution.v.nodal().iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min_u > 0.0 && min_v > 0.0);
        let lap = r.solution.u.map_spectrum(|l| l);
        let top = lap.nodal().iter().cloned().fold(0.0, f64::max);
        assert!(lap.nodal().iter().all(|x| *x > -1e-6 * top));
    }

    #[test]
    fn quotient_to_level_examples() {
        // p = q = 3: c = α^{3/2}/2
        let e = ExponentPair::lane_emden(3.0, 3.0, 1).unwrap();
        for alpha in [0.3f64, 1.0, 1.7, 12.5] {
            assert!((level_from_quotient(&e, alpha) - 0.5 * alpha.powf(1.5)).abs() < 1e-14 * alpha.powf(1.5));
        }
        assert!((ray_scale(&e, 2.0, 1.0) - 2f64.powf(0.375)).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn quotient_is_scale_invariant(c in proptest::collection::vec(-1.0f64..1.0, 8), k in 0.01f64..100.0) {
            let b = build_basis(Domain::interval(PI).unwrap(), 8).unwrap();
            let e = ExponentPair::lane_emden(2.0, 3.0, 1).unwrap();
            let u = Field::from_coefficients(&b, c).unwrap();
            proptest::prop_assume!(!u.is_zero());
            let q1 = embedding_quotient(&u, &e).unwrap();
            let q2 = embedding_quotient(&u.scaled(k), &e).unwrap();
            proptest::prop_assert!((q1 - q2).abs() <= 1e-12 * q1);
        }
    }

    #[test]
    fn sublinear_pair_converges_positive() {
        let b = build_basis(Domain::interval(PI).unwrap(), 24).unwrap();
        let e = ExponentPair::lane_emden(0.5, 1.5, 1).unwrap();
        let r = solve_inversion(&e, &b, &FrameworkConfig::default()).unwrap();
        assert!(r.converged);
        assert!(r.level < 0.0);
        assert!(r.solution.u.nodal().iter().all(|x| *x > 0.0));
        assert!(r.solution.v.nodal().iter().all(|x| *x > 0.0));
    }

    #[test]
    fn refuses_linear_and_critical() {
        let b = build_basis(Domain::interval(PI).unwrap(), 8).unwrap();
        let e = ExponentPair::lane_emden(0.5, 2.0, 1).unwrap();
        assert!(solve_inversion(&e, &b, &FrameworkConfig::default()).is_err());
        let d = build_basis(Domain::disk(1.0).unwrap(), 8).unwrap();
        let e = ExponentPair::lane_emden(3.0, 3.0, 1).unwrap();
        assert!(matches!(solve_inversion(&e, &d, &FrameworkConfig::default()), Err(Error::MismatchedProblems)));
    }
}
