//! Pass/fail reports over solver results.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::functionals::energy_direct;
use crate::problem::{pohozaev_residual, ExponentPair};
use crate::solvers::FrameworkResult;
use crate::spectral::{weighted_power_integral, Field};
use crate::symmetry::radial_deficit;

/// Every acceptance threshold in one place.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct Tolerances {
    /// Relative gap between ground-state levels.
    pub level: f64,
    /// Relative error of the energy identities.
    pub identity: f64,
    /// Pointwise comparisons.
    pub pointwise: f64,
    /// Pohozaev residual relative to `∫|x|^α|u|^{p+1} + ∫|x|^β|v|^{q+1}`.
    pub pohozaev: f64,
    /// Allowed negative part, relative to the sup norm.
    pub sign: f64,
    /// Radial deficit of ball ground states.
    pub radial: f64,
    /// Foliated deficit of nonradial minimizers about their best axis.
    pub foliated: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { level: 1e-3, identity: 1e-6, pointwise: 1e-8, pohozaev: 1e-4, sign: 1e-6, radial: 1e-4, foliated: 1e-3 }
    }
}

/// Which checks [`verify_solution`] runs. Inapplicable checks are skipped.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct CheckSelection {
    pub identities: bool,
    pub pohozaev: bool,
    pub sign: bool,
    /// Radial symmetry on balls with `α = β = 0`.
    pub symmetry: bool,
    /// Values of the free Pohozaev parameter.
    pub pohozaev_parameters: Vec<f64>,
}

impl Default for CheckSelection {
    fn default() -> Self {
        CheckSelection {
            identities: true,
            pohozaev: true,
            sign: true,
            symmetry: true,
            pohozaev_parameters: alloc::vec![0.0, 1.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        // NaN fails
        Check { name: name.into(), value, tolerance, pass: value < tolerance }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new() -> Self {
        VerificationReport { checks: Vec::new(), pass: true }
    }

    pub fn push(&mut self, check: Check) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        for c in other.checks {
            self.push(c);
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(5).max(5);
        writeln!(f, "{:<width$}  {:>12}  {:>12}  result", "check", "value", "tolerance")?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<width$}  {:>12.5e}  {:>12.5e}  {}",
                c.name,
                c.value,
                c.tolerance,
                if c.pass { "pass" } else { "FAIL" }
            )?;
        }
        write!(f, "overall: {}", if self.pass { "pass" } else { "FAIL" })
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        return 0.0;
    }
    (a - b).abs() / scale
}

/// Framework name, with `λ` appended for reduced runs at `λ ≠ 1`.
pub fn result_label(r: &FrameworkResult) -> String {
    match r.diagnostic("lambda") {
        Some(l) if l != 1.0 => format!("{}[lambda={l}]", r.framework),
        _ => String::from(r.framework.as_str()),
    }
}

fn usable(r: &FrameworkResult) -> Result<()> {
    if !r.converged || !r.solution.residual.is_finite() || r.solution.u.is_zero() || r.solution.v.is_zero() {
        return Err(Error::Unconverged);
    }
    Ok(())
}

fn negative_part(u: &Field, flip: f64) -> f64 {
    let (lo, hi) = u.nodal().iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), x| (lo.min(flip * x), hi.max(x.abs())));
    if hi == 0.0 {
        return f64::INFINITY;
    }
    (-lo).max(0.0) / hi
}

/// Identity, Pohozaev, sign and symmetry checks for one converged result.
pub fn verify_solution(
    result: &FrameworkResult,
    e: &ExponentPair,
    checks: &CheckSelection,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    usable(result)?;
    if result.exponents != *e {
        return Err(Error::MismatchedProblems);
    }
    let (u, v) = (&result.solution.u, &result.solution.v);
    let basis = u.basis();
    let domain = basis.domain();
    let mut report = VerificationReport::new();
    let iu = weighted_power_integral(basis, u.nodal(), e.p + 1.0, e.alpha)?;
    let iv = weighted_power_integral(basis, v.nodal(), e.q + 1.0, e.beta)?;

    if checks.identities {
        report.push(Check::new("power balance", relative_gap(iu, iv), tol.identity));
        let energy = energy_direct(u, v, e)?;
        let predicted = e.energy_factor() * iu;
        report.push(Check::new("energy identity", relative_gap(energy, predicted), tol.identity));
    }
    // balls and rectangles are star-shaped about their centers
    if checks.pohozaev {
        let scale = iu + iv;
        for &a in &checks.pohozaev_parameters {
            let r = pohozaev_residual(&result.solution, e, a)?;
            report.push(Check::new(format!("pohozaev a={a}"), r / scale, tol.pohozaev));
        }
    }
    if checks.sign {
        let mean: f64 = basis.integrate(u.nodal());
        let flip = if mean < 0.0 { -1.0 } else { 1.0 };
        report.push(Check::new("sign u", negative_part(u, flip), tol.sign));
        report.push(Check::new("sign v", negative_part(v, flip), tol.sign));
    }
    let ball = domain.is_ball() || domain.dimension() == 1;
    if checks.symmetry && ball && e.alpha == 0.0 && e.beta == 0.0 {
        let d = radial_deficit(u)?.max(radial_deficit(v)?);
        report.push(Check::new("radial deficit", d, tol.radial));
    }
    Ok(report)
}

/// Pairwise level and `∫|x|^α|u|^{p+1}` gaps between results for one problem.
pub fn cross_framework_report(results: &[FrameworkResult], tol: &Tolerances) -> Result<VerificationReport> {
    if results.len() < 2 {
        return Err(Error::InsufficientResults { found: results.len() });
    }
    let first = &results[0];
    for r in results {
        usable(r)?;
        if r.exponents != first.exponents || r.basis().domain() != first.basis().domain() {
            return Err(Error::MismatchedProblems);
        }
    }
    let e = first.exponents;
    let power = results
        .iter()
        .map(|r| {
            let u = &r.solution.u;
            weighted_power_integral(u.basis(), u.nodal(), e.p + 1.0, e.alpha)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut report = VerificationReport::new();
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            let pair = format!("{}/{}", result_label(&results[i]), result_label(&results[j]));
            report.push(Check::new(
                format!("level gap {pair}"),
                relative_gap(results[i].level, results[j].level),
                tol.level,
            ));
            report.push(Check::new(format!("power gap {pair}"), relative_gap(power[i], power[j]), tol.level));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::FrameworkConfig;
    use crate::solvers::{solve_dual, solve_inversion, solve_shooting};
    use crate::spectral::{build_basis, Domain};
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn interval_run(p: f64, q: f64, m: usize) -> (ExponentPair, FrameworkResult) {
        let e = ExponentPair::lane_emden(p, q, 1).unwrap();
        let b = build_basis(Domain::interval(PI).unwrap(), m).unwrap();
        (e, solve_inversion(&e, &b, &FrameworkConfig::default()).unwrap())
    }

    #[test]
    fn interval_ground_state_passes() {
        let (e, r) = interval_run(2.0, 3.0, 48);
        let rep = verify_solution(&r, &e, &CheckSelection::default(), &Tolerances::default()).unwrap();
        assert!(rep.pass, "{rep}");
        assert_eq!(rep.checks.len(), 7);
    }

    #[test]
    fn zero_pair_is_unconverged() {
        let (e, mut r) = interval_run(3.0, 3.0, 16);
        r.solution.u = Field::zero(r.basis());
        r.solution.v = Field::zero(r.basis());
        assert_eq!(
            verify_solution(&r, &e, &CheckSelection::default(), &Tolerances::default()),
            Err(Error::Unconverged)
        );
        r.converged = false;
        assert!(cross_framework_report(&[r.clone(), r], &Tolerances::default()).is_err());
    }

    #[test]
    fn wrong_exponents_are_rejected() {
        let (_, r) = interval_run(3.0, 3.0, 16);
        let other = ExponentPair::lane_emden(2.0, 3.0, 1).unwrap();
        assert_eq!(
            verify_solution(&r, &other, &CheckSelection::default(), &Tolerances::default()),
            Err(Error::MismatchedProblems)
        );
    }

    #[test]
    fn cross_report_needs_two_results() {
        let (_, r) = interval_run(3.0, 3.0, 16);
        assert_eq!(
            cross_framework_report(&[r], &Tolerances::default()),
            Err(Error::InsufficientResults { found: 1 })
        );
    }

    #[test]
    fn frameworks_agree_on_the_interval() {
        let (e, a) = interval_run(3.0, 3.0, 32);
        let b = solve_dual(&e, a.basis(), &FrameworkConfig::default()).unwrap();
        let rep = cross_framework_report(&[a.clone(), b], &Tolerances::default()).unwrap();
        assert!(rep.pass, "{rep}");
        let (_, c) = interval_run(2.0, 3.0, 32);
        assert_eq!(cross_framework_report(&[a, c], &Tolerances::default()), Err(Error::MismatchedProblems));
    }

    #[test]
    fn shooting_matches_inversion_on_the_disk() {
        let e = ExponentPair::lane_emden(2.0, 3.0, 2).unwrap();
        let b = build_basis(Domain::disk(1.0).unwrap(), 40).unwrap();
        let cfg = FrameworkConfig { radial_only: true, ..FrameworkConfig::default() };
        let a = solve_inversion(&e, &b, &cfg).unwrap();
        let s = solve_shooting(&e, &b, &cfg).unwrap();
        let rep = cross_framework_report(&[a, s], &Tolerances::default()).unwrap();
        assert!(rep.pass, "{rep}");
    }

    #[test]
    fn reports_are_deterministic() {
        let (e, r) = interval_run(2.0, 3.0, 16);
        let a = verify_solution(&r, &e, &CheckSelection::default(), &Tolerances::default()).unwrap();
        let b = verify_solution(&r, &e, &CheckSelection::default(), &Tolerances::default()).unwrap();
        assert_eq!(format!("{a}"), format!("{b}"));
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn loosening_never_fails(k in 1.0f64..1e6, which in 0usize..6) {
            let (e, r) = interval_run(2.0, 3.0, 12);
            let tight = Tolerances { level: 1e-14, identity: 1e-14, pointwise: 1e-14, pohozaev: 1e-14, sign: 1e-14, radial: 1e-14, foliated: 1e-14 };
            let mut loose = tight;
            let slot = match which {
                0 => &mut loose.level,
                1 => &mut loose.identity,
                2 => &mut loose.pointwise,
                3 => &mut loose.pohozaev,
                4 => &mut loose.sign,
                _ => &mut loose.radial,
            };
            *slot *= k;
            let a = verify_solution(&r, &e, &CheckSelection::default(), &tight).unwrap();
            let b = verify_solution(&r, &e, &CheckSelection::default(), &loose).unwrap();
            for (x, y) in a.checks.iter().zip(&b.checks) {
                prop_assert!(!x.pass || y.pass);
            }
            prop_assert!(!a.pass || b.pass);
        }
    }
}
