//! Symmetry certificates of a single field and the Hénon breaking probe.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use super::polarization::{polarize, relative_l2, HalfSpace, HalfSpaceFamily, PointFunction};
use super::rearrangement::schwarz_rearrange;
use crate::error::{Error, Result};
use crate::functionals::FrameworkConfig;
use crate::problem::{classify, ExponentPair, Hypothesis};
use crate::solvers::{radial_profile, solve_inversion, FrameworkResult};
use crate::spectral::{build_basis, Domain, Field, NodeLayout, SpectralBasis};

/// Deficits at or below this count as zero.
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

/// Normals sampled for the foliated deficit. Must divide into the polar grid
/// so that each reflection permutes the nodes.
const FOLIATED_NORMALS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SymmetryReport {
    /// `‖u − ū‖₂/‖u‖₂` with `ū` the angular average (interval: even part).
    pub radial_deficit: f64,
    /// Foliated deficit about `best_axis`; zero on an interval.
    pub foliated_deficit: f64,
    pub best_axis: [f64; 2],
    /// Sampled halfspaces with the center inside for which `u_H ≠ u`.
    pub polarization_violations: usize,
    pub sampled_halfspaces: usize,
}

fn require_nonzero(u: &Field) -> Result<()> {
    if u.is_zero() {
        return Err(Error::ZeroField);
    }
    Ok(())
}

/// Angular average on a disk, even part on an interval.
fn radial_part(basis: &SpectralBasis, x: &[f64]) -> Result<Vec<f64>> {
    match *basis.layout() {
        NodeLayout::Polar { nr, ntheta } => {
            let mut out = alloc::vec![0.0; nr * ntheta];
            for ring in 0..nr {
                let block = &x[ring * ntheta..(ring + 1) * ntheta];
                let mean = block.iter().sum::<f64>() / ntheta as f64;
                out[ring * ntheta..(ring + 1) * ntheta].iter_mut().for_each(|o| *o = mean);
            }
            Ok(out)
        }
        NodeLayout::Line => {
            let q = x.len();
            Ok((0..q).map(|j| 0.5 * (x[j] + x[q - 1 - j])).collect())
        }
        NodeLayout::Grid { .. } => Err(Error::Unsupported("radial symmetry needs an interval or a disk")),
    }
}

pub fn radial_deficit(u: &Field) -> Result<f64> {
    require_nonzero(u)?;
    let basis = u.basis();
    let avg = radial_part(basis, u.nodal())?;
    Ok(relative_l2(basis, &avg, u.nodal()))
}

fn unit(angle: f64) -> [f64; 2] {
    [angle.cos(), angle.sin()]
}

fn check_disk(u: &Field) -> Result<()> {
    require_nonzero(u)?;
    match (u.basis().domain(), u.basis().layout()) {
        (Domain::Disk { .. }, NodeLayout::Polar { ntheta, .. }) if ntheta % (FOLIATED_NORMALS / 2) == 0 => Ok(()),
        _ => Err(Error::Unsupported("foliated symmetry needs a disk")),
    }
}

/// `‖u_H − u‖₂/‖u‖₂` for each sampled normal, boundary through the center.
fn normal_deficits(u: &Field) -> Vec<(f64, f64)> {
    let basis = u.basis();
    (0..FOLIATED_NORMALS)
        .map(|k| {
            let angle = 2.0 * PI * k as f64 / FOLIATED_NORMALS as f64;
            let uh = polarize(u, HalfSpace::at_angle(angle, 0.0)).nodal_values();
            (angle, relative_l2(basis, &uh, u.nodal()))
        })
        .collect()
}

fn deficit_about(deficits: &[(f64, f64)], axis: [f64; 2]) -> f64 {
    deficits
        .iter()
        .filter(|(a, _)| {
            let n = unit(*a);
            n[0] * axis[0] + n[1] * axis[1] > 1e-12
        })
        .fold(0.0f64, |m, (_, d)| m.max(*d))
}

/// Max over sampled `H` with boundary through the center and `axis` inside `H`
/// of `‖u_H − u‖₂/‖u‖₂`. Certification holds at the resolution of the sample.
pub fn foliated_deficit(u: &Field, axis: [f64; 2]) -> Result<f64> {
    check_disk(u)?;
    let n = (axis[0] * axis[0] + axis[1] * axis[1]).sqrt();
    if !(n > 0.0) {
        return Err(Error::OutOfRange { name: "axis length", value: n });
    }
    Ok(deficit_about(&normal_deficits(u), [axis[0] / n, axis[1] / n]))
}

/// Axis minimising the foliated deficit. Candidates are the direction of the
/// first moment `∫u x`, the direction of the largest nodal value, and a
/// uniform angular sweep.
pub fn best_axis(u: &Field) -> Result<([f64; 2], f64)> {
    check_disk(u)?;
    let deficits = normal_deficits(u);
    let basis = u.basis();
    let w = basis.weights();
    let mut mx = 0.0;
    let mut my = 0.0;
    let mut imax = 0;
    for (j, x) in basis.nodes().iter().enumerate() {
        let val = u.nodal()[j];
        mx += w[j] * val * x[0];
        my += w[j] * val * x[1];
        if val > u.nodal()[imax] {
            imax = j;
        }
    }
    let mut cands = Vec::new();
    if mx * mx + my * my > 0.0 {
        cands.push(my.atan2(mx));
    }
    let xm = basis.nodes()[imax];
    if xm[0] != 0.0 || xm[1] != 0.0 {
        cands.push(xm[1].atan2(xm[0]));
    }
    cands.extend((0..2 * FOLIATED_NORMALS).map(|k| PI * (k as f64 + 0.5) / FOLIATED_NORMALS as f64));
    let mut best = (unit(0.0), f64::INFINITY);
    for a in cands {
        let d = deficit_about(&deficits, unit(a));
        if d < best.1 {
            best = (unit(a), d);
        }
    }
    Ok(best)
}

/// Halfspaces of `family` (center inside) for which `u_H` differs from `u`.
pub fn polarization_violations(u: &Field, family: HalfSpaceFamily) -> Result<(usize, usize)> {
    require_nonzero(u)?;
    let basis = u.basis();
    let radius = basis
        .domain()
        .ball_radius()
        .ok_or(Error::Unsupported("polarization families need an interval or a disk"))?;
    let members = family.members(basis.domain().dimension(), radius);
    let count = members
        .iter()
        .filter(|h| relative_l2(basis, &polarize(u, **h).nodal_values(), u.nodal()) > SYMMETRY_TOLERANCE)
        .count();
    Ok((count, members.len()))
}

/// True when the rearrangement reproduces `u` at the nodes.
pub fn schwarz_fixed(u: &Field) -> Result<bool> {
    let star = schwarz_rearrange(u)?.nodal();
    let scale = u.nodal().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let dev = star.iter().zip(u.nodal()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(dev <= SYMMETRY_TOLERANCE * scale)
}

pub fn symmetry_report(u: &Field, family: HalfSpaceFamily) -> Result<SymmetryReport> {
    let radial = radial_deficit(u)?;
    let (axis, foliated) = match u.basis().domain() {
        Domain::Disk { .. } => best_axis(u)?,
        _ => ([1.0, 0.0], 0.0),
    };
    let (violations, sampled) = polarization_violations(u, family)?;
    Ok(SymmetryReport {
        radial_deficit: radial,
        foliated_deficit: foliated,
        best_axis: axis,
        polarization_violations: violations,
        sampled_halfspaces: sampled,
    })
}

/// Relative margin of the breaking test: ten times the level tolerance.
pub const BREAKING_MARGIN: f64 = 1e-2;

/// Seeded perturbed starts used for the full two-dimensional solve.
const PROBE_STARTS: u64 = 3;

#[derive(Clone, Debug)]
pub struct BreakingReport {
    pub exponents: ExponentPair,
    /// Radial ground level from the shooting oracle.
    pub c_rad: f64,
    /// Radial ground level of the spectral problem.
    pub c_rad_spectral: f64,
    /// Least level over the perturbed two-dimensional runs.
    pub c_full: f64,
    pub margin: f64,
    pub breaking: bool,
    pub radial_deficit: f64,
    pub foliated_deficit: f64,
    pub best_axis: [f64; 2],
    /// Levels of the individual perturbed runs.
    pub runs: Vec<f64>,
    pub minimizer: FrameworkResult,
}

/// Compares the radial ground level with the least level found without
/// symmetry restrictions on a disk with Hénon weights.
pub fn symmetry_breaking_probe(
    e: &ExponentPair,
    basis: &Arc<SpectralBasis>,
    cfg: &FrameworkConfig,
) -> Result<BreakingReport> {
    let domain = basis.domain();
    if !matches!(domain, Domain::Disk { .. }) {
        return Err(Error::Unsupported("the breaking probe runs on a disk"));
    }
    if e.alpha < 0.0 || e.beta < 0.0 {
        return Err(Error::InvalidExponents("the breaking probe needs nonnegative weights"));
    }
    if !classify(e).h3 {
        return Err(Error::Hypothesis {
            framework: "symmetry_breaking_probe",
            hypothesis: Hypothesis::H3,
            detail: "needs pq > 1 below the critical hyperbola",
        });
    }
    let basis = if basis.splits_rotation_pair() {
        build_basis(domain, basis.mode_count() + 1)?
    } else {
        basis.clone()
    };
    let c_rad = radial_profile(e, &domain)?.level;
    let radial_cfg = FrameworkConfig { radial_only: true, seed: None, ..cfg.clone() };
    let c_rad_spectral = solve_inversion(e, &basis, &radial_cfg)?.level;
    let seed0 = cfg.seed.unwrap_or(0);
    let perturbation = if cfg.perturbation > 0.0 { cfg.perturbation } else { 0.5 };
    let mut runs = Vec::new();
    let mut best: Option<FrameworkResult> = None;
    let mut last_err = None;
    for k in 0..PROBE_STARTS {
        let run_cfg = FrameworkConfig { radial_only: false, seed: Some(seed0 + k), perturbation, ..cfg.clone() };
        match solve_inversion(e, &basis, &run_cfg) {
            Ok(r) => {
                runs.push(r.level);
                if best.as_ref().is_none_or(|b| r.level < b.level - 1e-9 * b.level.abs()) {
                    best = Some(r);
                }
            }
            Err(err) => last_err = Some(err),
        }
    }
    let Some(minimizer) = best else {
        return Err(last_err.unwrap_or(Error::Unconverged));
    };
    let c_full = minimizer.level;
    let u = &minimizer.solution.u;
    let (axis, foliated) = best_axis(u)?;
    Ok(BreakingReport {
        exponents: *e,
        c_rad,
        c_rad_spectral,
        c_full,
        margin: BREAKING_MARGIN,
        breaking: c_full < c_rad * (1.0 - BREAKING_MARGIN),
        radial_deficit: radial_deficit(u)?,
        foliated_deficit: foliated,
        best_axis: axis,
        runs,
        minimizer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Mode, Parity};

    fn disk() -> Arc<SpectralBasis> {
        build_basis(Domain::disk(1.0).unwrap(), 40).unwrap()
    }

    fn mode_index(b: &SpectralBasis, m0: usize, k0: usize, p0: Parity) -> usize {
        b.modes()
            .iter()
            .position(|md| matches!(*md, Mode::Bessel { m, k, parity, .. } if m == m0 && k == k0 && parity == p0))
            .unwrap()
    }

    #[test]
    fn radial_field_has_zero_deficits() {
        let b = disk();
        let u = Field::mode(&b, 0).unwrap();
        assert!(radial_deficit(&u).unwrap() < 1e-14);
        for a in [0.0, 1.0, 2.5] {
            assert!(foliated_deficit(&u, unit(a)).unwrap() < 1e-10);
        }
    }

    #[test]
    fn angularly_decreasing_field() {
        let b = disk();
        let mut c = alloc::vec![0.0; b.mode_count()];
        c[0] = 1.0;
        c[mode_index(&b, 1, 1, Parity::Cos)] = 0.5;
        let u = Field::from_coefficients(&b, c).unwrap();
        assert!(foliated_deficit(&u, [1.0, 0.0]).unwrap() < 1e-8);
        assert!(foliated_deficit(&u, [-1.0, 0.0]).unwrap() > 0.1);
        let (axis, d) = best_axis(&u).unwrap();
        assert!(d < 1e-8 && (axis[0] - 1.0).abs() < 1e-8);
        assert!(radial_deficit(&u).unwrap() > 0.1);
    }

    #[test]
    fn rotated_axis_is_found() {
        let b = disk();
        let mut c = alloc::vec![0.0; b.mode_count()];
        c[0] = 1.0;
        let a = 0.37f64;
        c[mode_index(&b, 1, 1, Parity::Cos)] = 0.4 * a.cos();
        c[mode_index(&b, 1, 1, Parity::Sin)] = 0.4 * a.sin();
        let u = Field::from_coefficients(&b, c).unwrap();
        let (axis, d) = best_axis(&u).unwrap();
        assert!(d < 1e-8, "{d}");
        assert!((axis[1].atan2(axis[0]) - a).abs() < 1e-8);
    }

    #[test]
    fn schwarz_characterization() {
        let b = build_basis(Domain::disk(1.0).unwrap(), 20).unwrap();
        let family = HalfSpaceFamily { normals: 16, offsets: 3 };
        let radial = Field::mode(&b, 0).unwrap();
        assert!(schwarz_fixed(&radial).unwrap());
        assert_eq!(polarization_violations(&radial, family).unwrap().0, 0);
        let mut c = alloc::vec![0.0; b.mode_count()];
        c[0] = 1.0;
        c[mode_index(&b, 1, 1, Parity::Cos)] = 0.3;
        let shifted = Field::from_coefficients(&b, c).unwrap();
        assert!(!schwarz_fixed(&shifted).unwrap());
        assert!(polarization_violations(&shifted, family).unwrap().0 > 0);
    }

    #[test]
    fn zero_field_is_rejected() {
        let b = disk();
        assert!(matches!(foliated_deficit(&Field::zero(&b), [1.0, 0.0]), Err(Error::ZeroField)));
    }
}
