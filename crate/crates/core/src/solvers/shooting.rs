//! Radial shooting oracle for the interval and the disk.
//!
//! In the radial variable `r = |x − c|` the system reads
//! `u'' + ((N−1)/r)u' = −r^β g(v)`, `v'' + ((N−1)/r)v' = −r^α f(u)`.
//! We fix `u(0) = 1`, shoot on `θ = v(0)` until `u` and `v` vanish at the
//! same radius `R₀`, then rescale with `u_μ(r) = μ^a u(μr)`, `v_μ(r) = μ^b v(μr)`,
//! `a = (2+β+q(2+α))/(pq−1)`, `b = (2+α+p(2+β))/(pq−1)`, `μ = R₀/R`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::Float;

use super::{check_dimension, FrameworkResult, TraceRow};
use crate::error::{Error, Result};
use crate::functionals::{Framework, FrameworkConfig, SolutionPair};
use crate::problem::{classify, ExponentPair, Hypothesis, Regime};
use crate::spectral::{Domain, Field, SpectralBasis};

const RTOL: f64 = 1e-12;
const ATOL: f64 = 1e-14;
/// Series start radius in shot coordinates (where `u(0) = 1`).
const R_START: f64 = 1e-4;

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step; returns the fifth-order state and an error estimate.
fn dp_step<const D: usize>(f: &impl Fn(f64, &[f64; D]) -> [f64; D], r: f64, y: &[f64; D], h: f64) -> ([f64; D], f64) {
    let mut k = [[0.0; D]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for i in 0..D {
                ys[i] += h * A[s][j] * kj[i];
            }
        }
        k[s] = f(r + C[s] * h, &ys);
    }
    let mut y5 = *y;
    let mut err: f64 = 0.0;
    for i in 0..D {
        let mut d5 = 0.0;
        let mut d4 = 0.0;
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            d4 += B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        let sc = ATOL + RTOL * y[i].abs().max(y5[i].abs());
        err = err.max((h * (d5 - d4)).abs() / sc);
    }
    (y5, err)
}

/// Adaptive integration from `(r, y)` to `r_end`. `event` is checked after
/// every accepted step; on a hit the step is shrunk onto the event, located
/// by secant iteration on `event(y)`.
fn integrate<const D: usize>(
    f: &impl Fn(f64, &[f64; D]) -> [f64; D],
    mut r: f64,
    mut y: [f64; D],
    r_end: f64,
    event: Option<&dyn Fn(&[f64; D]) -> f64>,
) -> Result<(f64, [f64; D], bool)> {
    let mut h = (r_end - r) * 1e-3;
    for _ in 0..1_000_000 {
        if r_end - r <= 1e-15 * r_end.abs() {
            return Ok((r, y, false));
        }
        h = h.min(r_end - r);
        let (yn, err) = dp_step(f, r, &y, h);
        if !err.is_finite() {
            h *= 0.1;
            continue;
        }
        if err <= 1.0 {
            if let Some(ev) = event {
                let e0 = ev(&y);
                let e1 = ev(&yn);
                if e0 > 0.0 && e1 <= 0.0 {
                    // secant in the step length, each trial a single step from r
                    let (mut ha, mut ea, mut hb, mut eb) = (0.0, e0, h, e1);
                    let mut ys = yn;
                    let mut hs = h;
                    for _ in 0..60 {
                        hs = hb - eb * (hb - ha) / (eb - ea);
                        ys = dp_step(f, r, &y, hs).0;
                        let es = ev(&ys);
                        if es.abs() <= 1e-15 * e0.abs() || (hb - ha).abs() <= 1e-16 * r.max(1e-300) {
                            break;
                        }
                        if es > 0.0 {
                            ha = hs;
                            ea = es;
                        } else {
                            hb = hs;
                            eb = es;
                        }
                    }
                    return Ok((r + hs, ys, true));
                }
            }
            r += h;
            y = yn;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        if h < 1e-14 * r.max(1e-10) && r_end - r > 1e-13 * r {
            return Err(Error::Shooting("step size underflow"));
        }
    }
    Err(Error::Shooting("too many steps"))
}

/// Layout of the system state: `[u, u', v, v', ∫r^{N−1+α}|u|^{p+1}, ∫r^{N−1+β}|v|^{q+1}]`.
fn system_rhs(e: &ExponentPair, n: f64) -> impl Fn(f64, &[f64; 6]) -> [f64; 6] + '_ {
    move |r: f64, y: &[f64; 6]| {
        let ra = if e.alpha == 0.0 { 1.0 } else { r.powf(e.alpha) };
        let rb = if e.beta == 0.0 { 1.0 } else { r.powf(e.beta) };
        let rn = if n == 1.0 { 1.0 } else { r.powf(n - 1.0) };
        let fu = y[0].signum() * y[0].abs().powf(e.p);
        let gv = y[2].signum() * y[2].abs().powf(e.q);
        [
            y[1],
            -(n - 1.0) / r * y[1] - rb * gv,
            y[3],
            -(n - 1.0) / r * y[3] - ra * fu,
            rn * ra * y[0].abs().powf(e.p + 1.0),
            rn * rb * y[2].abs().powf(e.q + 1.0),
        ]
    }
}

/// Leading-order expansion at the center with `u(0) = 1`, `v(0) = θ`.
fn series_start(e: &ExponentPair, n: f64, theta: f64, r: f64) -> [f64; 6] {
    let cu = theta.powf(e.q) / ((2.0 + e.beta) * (n + e.beta));
    let cv = 1.0 / ((2.0 + e.alpha) * (n + e.alpha));
    let u = 1.0 - cu * r.powf(2.0 + e.beta);
    let v = theta - cv * r.powf(2.0 + e.alpha);
    let du = -cu * (2.0 + e.beta) * r.powf(1.0 + e.beta);
    let dv = -cv * (2.0 + e.alpha) * r.powf(1.0 + e.alpha);
    let iu = r.powf(n + e.alpha) / (n + e.alpha);
    let iv = theta.powf(e.q + 1.0) * r.powf(n + e.beta) / (n + e.beta);
    [u, du, v, dv, iu, iv]
}

/// First zeros of `u` and `v` for `v(0) = θ`; `None` when a component does
/// not vanish before `r_cap`.
fn first_zeros(e: &ExponentPair, n: f64, theta: f64, r_cap: f64) -> Result<(Option<f64>, Option<f64>)> {
    let f = system_rhs(e, n);
    let y0 = series_start(e, n, theta, R_START);
    let ev_u = |y: &[f64; 6]| y[0];
    let ev_v = |y: &[f64; 6]| y[2];
    let ev_both = |y: &[f64; 6]| y[0].min(y[2]);
    let (r1, y1, hit) = integrate(&f, R_START, y0, r_cap, Some(&ev_both))?;
    if !hit {
        return Ok((None, None));
    }
    // which component vanished; keep integrating for the other one
    let (other, u_first): (&dyn Fn(&[f64; 6]) -> f64, bool) =
        if y1[0].abs() <= y1[2].abs() { (&ev_v, true) } else { (&ev_u, false) };
    let second = if other(&y1) <= 0.0 {
        Some(r1)
    } else {
        // past the first zero the profile may blow up; that counts as no zero
        match integrate(&f, r1, y1, (4.0 * r1).min(r_cap.max(r1)), Some(other)) {
            Ok((r2, _, true)) => Some(r2),
            Ok(_) | Err(Error::Shooting(_)) => None,
            Err(err) => return Err(err),
        }
    };
    Ok(if u_first { (Some(r1), second) } else { (second, Some(r1)) })
}

/// Accurate radial ground state on `[0, R]`.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub exponents: ExponentPair,
    /// `R`: half-length of the interval or radius of the disk.
    pub radius: f64,
    /// `v(0)/u(0)^{...}` in shot coordinates.
    pub theta: f64,
    /// Common first zero in shot coordinates.
    pub shot_radius: f64,
    /// `μ = R₀/R`.
    pub mu: f64,
    pub level: f64,
    /// `∫|x|^α|u|^{p+1}` and `∫|x|^β|v|^{q+1}` on the whole domain.
    pub integral_u: f64,
    pub integral_v: f64,
    pub bisections: usize,
}

impl RadialProfile {
    fn exponents_ab(&self) -> (f64, f64) {
        let e = &self.exponents;
        let pq1 = e.p * e.q - 1.0;
        ((2.0 + e.beta + e.q * (2.0 + e.alpha)) / pq1, (2.0 + e.alpha + e.p * (2.0 + e.beta)) / pq1)
    }

    /// `(u(r), v(r))` at the requested radii (any order, each in `[0, R]`).
    pub fn evaluate(&self, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
        let e = &self.exponents;
        let n = e.dimension as f64;
        let (a, b) = self.exponents_ab();
        let ma = self.mu.powf(a);
        let mb = self.mu.powf(b);
        let mut order: Vec<usize> = (0..radii.len()).collect();
        order.sort_by(|i, j| radii[*i].total_cmp(&radii[*j]));
        let f = system_rhs(e, n);
        let mut out = alloc::vec![(0.0, 0.0); radii.len()];
        let mut r = R_START;
        let mut y = series_start(e, n, self.theta, R_START);
        for idx in order {
            let s = (radii[idx] * self.mu).min(self.shot_radius);
            let val = if s <= R_START {
                let ys = series_start(e, n, self.theta, s.max(0.0));
                (ys[0], ys[2])
            } else {
                if s > r {
                    let (r2, y2, _) = integrate(&f, r, y, s, None)?;
                    r = r2;
                    y = y2;
                }
                (y[0], y[2])
            };
            out[idx] = (ma * val.0, mb * val.1);
        }
        Ok(out)
    }
}

fn radial_setup(domain: &Domain) -> Result<(f64, f64)> {
    match *domain {
        Domain::Interval { length } => Ok((length / 2.0, 2.0)),
        Domain::Disk { radius } => Ok((radius, 2.0 * core::f64::consts::PI)),
        Domain::Rectangle { .. } => Err(Error::Unsupported("shooting needs an interval or a disk")),
    }
}

/// Positive radial ground state by shooting from the center.
pub fn radial_profile(e: &ExponentPair, domain: &Domain) -> Result<RadialProfile> {
    if e.dimension != domain.dimension() {
        return Err(Error::MismatchedProblems);
    }
    if e.p * e.q <= 1.0 {
        return Err(Error::Hypothesis {
            framework: "shooting_oracle",
            hypothesis: Hypothesis::H3,
            detail: "scaling shots need pq > 1",
        });
    }
    let (radius, omega) = radial_setup(domain)?;
    let n = e.dimension as f64;
    let r_cap = 1e3;
    // sign of r_u − r_v; small θ makes v vanish first
    let side = |theta: f64| -> Result<f64> {
        let (ru, rv) = first_zeros(e, n, theta, r_cap)?;
        Ok(match (ru, rv) {
            (Some(a), Some(b)) => a - b,
            (Some(_), None) => -1.0,
            (None, Some(_)) => 1.0,
            (None, None) => f64::NAN,
        })
    };
    let diagonal = e.p == e.q && e.alpha == e.beta;
    let mut bisections = 0;
    let theta = if diagonal {
        1.0
    } else {
        let mut lo = 0.0f64; // log θ with side > 0
        let mut hi = 0.0f64; // log θ with side < 0
        let s0 = side(1.0)?;
        if s0.is_nan() {
            return Err(Error::Shooting("no zero for the initial shot"));
        }
        if s0 > 0.0 {
            let mut k = 0;
            loop {
                hi += 1.0;
                k += 1;
                let s = side(hi.exp())?;
                if s <= 0.0 {
                    break;
                }
                lo = hi;
                if k > 40 {
                    return Err(Error::Shooting("no root in the search box"));
                }
            }
        } else if s0 < 0.0 {
            let mut k = 0;
            loop {
                lo -= 1.0;
                k += 1;
                let s = side(lo.exp())?;
                if s >= 0.0 {
                    break;
                }
                hi = lo;
                if k > 40 {
                    return Err(Error::Shooting("no root in the search box"));
                }
            }
        }
        if s0 == 0.0 {
            1.0
        } else {
            while hi - lo > 1e-15 * (1.0 + lo.abs()) && bisections < 200 {
                let mid = 0.5 * (lo + hi);
                let s = side(mid.exp())?;
                if s.is_nan() {
                    return Err(Error::Shooting("lost the zero during bisection"));
                }
                if s > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                bisections += 1;
            }
            (0.5 * (lo + hi)).exp()
        }
    };
    // final shot: integrate to the first zero of u
    let f = system_rhs(e, n);
    let y0 = series_start(e, n, theta, R_START);
    let ev_u = |y: &[f64; 6]| y[0];
    let (r0, y_end, hit) = integrate(&f, R_START, y0, r_cap, Some(&ev_u))?;
    if !hit {
        return Err(Error::Shooting("u has no zero"));
    }
    let mu = r0 / radius;
    let pq1 = e.p * e.q - 1.0;
    let a = (2.0 + e.beta + e.q * (2.0 + e.alpha)) / pq1;
    let b = (2.0 + e.alpha + e.p * (2.0 + e.beta)) / pq1;
    let integral_u = omega * mu.powf(a * (e.p + 1.0) - n - e.alpha) * y_end[4];
    let integral_v = omega * mu.powf(b * (e.q + 1.0) - n - e.beta) * y_end[5];
    let level = e.energy_factor() * integral_u;
    Ok(RadialProfile {
        exponents: *e,
        radius,
        theta,
        shot_radius: r0,
        mu,
        level,
        integral_u,
        integral_v,
        bisections,
    })
}

/// Scalar Lane–Emden ground level `(1/2 − 1/(p+1))∫|x|^α|u|^{p+1}` for
/// `−Δu = |x|^α|u|^{p−1}u` on an interval or disk.
pub fn scalar_ground_level(p: f64, alpha: f64, domain: &Domain) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::InvalidExponents("scalar shooting needs p > 1"));
    }
    let (radius, omega) = radial_setup(domain)?;
    let n = domain.dimension() as f64;
    let rhs = move |r: f64, y: &[f64; 3]| {
        let ra = if alpha == 0.0 { 1.0 } else { r.powf(alpha) };
        let rn = if n == 1.0 { 1.0 } else { r.powf(n - 1.0) };
        [y[1], -(n - 1.0) / r * y[1] - ra * y[0].signum() * y[0].abs().powf(p), rn * ra * y[0].abs().powf(p + 1.0)]
    };
    let c = 1.0 / ((2.0 + alpha) * (n + alpha));
    let r = R_START;
    let y0 = [1.0 - c * r.powf(2.0 + alpha), -c * (2.0 + alpha) * r.powf(1.0 + alpha), r.powf(n + alpha) / (n + alpha)];
    let ev = |y: &[f64; 3]| y[0];
    let (r0, y, hit) = integrate(&rhs, r, y0, 1e3, Some(&ev))?;
    if !hit {
        return Err(Error::Shooting("scalar profile has no zero"));
    }
    let mu = r0 / radius;
    let a = (2.0 + alpha) / (p - 1.0);
    let integral = omega * mu.powf(a * (p + 1.0) - n - alpha) * y[2];
    Ok((0.5 - 1.0 / (p + 1.0)) * integral)
}

/// Shooting oracle packaged as a framework result; the profile is sampled at
/// the quadrature nodes of `basis` and projected.
pub fn solve_shooting(e: &ExponentPair, basis: &Arc<SpectralBasis>, cfg: &FrameworkConfig) -> Result<FrameworkResult> {
    let _ = cfg.clone().validated()?;
    check_dimension(e, basis)?;
    let class = classify(e);
    if !class.h1 {
        return Err(Error::Hypothesis {
            framework: "shooting_oracle",
            hypothesis: Hypothesis::H1,
            detail: "(p, q) must lie below the critical hyperbola",
        });
    }
    if class.regime != Regime::Superlinear {
        return Err(Error::Hypothesis { framework: "shooting_oracle", hypothesis: Hypothesis::H3, detail: "needs pq > 1" });
    }
    let domain = basis.domain();
    let prof = radial_profile(e, &domain)?;
    let vals = prof.evaluate(basis.radii())?;
    let un: Vec<f64> = vals.iter().map(|x| x.0).collect();
    let vn: Vec<f64> = vals.iter().map(|x| x.1).collect();
    let u = Field::from_nodal(basis, &un)?;
    let v = Field::from_nodal(basis, &vn)?;
    let solution = SolutionPair::assemble(u, v, e, Framework::ShootingOracle)?;
    let balance = (prof.integral_u - prof.integral_v).abs() / prof.integral_u;
    Ok(FrameworkResult {
        framework: Framework::ShootingOracle,
        exponents: *e,
        level: prof.level,
        solution,
        iterations: prof.bisections,
        trace: alloc::vec![TraceRow { iter: prof.bisections, energy: prof.level, residual: balance, step: 0.0 }],
        converged: true,
        diagnostics: alloc::vec![
            ("theta", prof.theta),
            ("shot_radius", prof.shot_radius),
            ("integral_balance", balance),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::solve_inversion;
    use crate::spectral::build_basis;
    use core::f64::consts::PI;

    #[test]
    fn dp45_integrates_a_harmonic_oscillator() {
        let f = |_r: f64, y: &[f64; 2]| [y[1], -y[0]];
        let (r, y, _) = integrate(&f, 0.0, [0.0, 1.0], 3.0, None).unwrap();
        assert_eq!(r, 3.0);
        assert!((y[0] - 3f64.sin()).abs() < 1e-11);
        let ev = |y: &[f64; 2]| y[0];
        let (r, _, hit) = integrate(&f, 0.5, [0.5f64.sin(), 0.5f64.cos()], 10.0, Some(&ev)).unwrap();
        assert!(hit);
        assert!((r - PI).abs() < 1e-12);
    }

    #[test]
    fn linear_scalar_level_is_exact() {
        // −u'' = u³ on (0, π): compare with the system diagonal shot
        let d = Domain::interval(PI).unwrap();
        let s = scalar_ground_level(3.0, 0.0, &d).unwrap();
        let e = ExponentPair::lane_emden(3.0, 3.0, 1).unwrap();
        let prof = radial_profile(&e, &d).unwrap();
        assert!((prof.level - 2.0 * s).abs() < 1e-10 * s);
        assert!((prof.integral_u - prof.integral_v).abs() < 1e-10 * prof.integral_u);
    }

    #[test]
    fn agrees_with_inversion() {
        for (d, m) in [(Domain::interval(PI).unwrap(), 48), (Domain::disk(1.0).unwrap(), 64)] {
            let e = ExponentPair::lane_emden(2.0, 3.0, d.dimension()).unwrap();
            let b = build_basis(d, m).unwrap();
            let inv = solve_inversion(&e, &b, &FrameworkConfig::default()).unwrap();
            let sh = solve_shooting(&e, &b, &FrameworkConfig::default()).unwrap();
            assert!((sh.level - inv.level).abs() < 1e-6 * inv.level, "{} vs {}", sh.level, inv.level);
            assert!(sh.solution.u.nodal().iter().all(|x| *x > 0.0));
            assert!(sh.solution.v.nodal().iter().all(|x| *x > 0.0));
        }
    }
}
