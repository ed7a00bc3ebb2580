//! Acceptance gate: one line per criterion, nonzero exit on any failure.

mod common;

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use common::{dual_gradient_error, fourth_order_gradient_error, reduced_gradient_error, FD_TOLERANCE};
use hamsys_core::functionals::FrameworkConfig;
use hamsys_core::problem::{pohozaev_residual, ExponentPair, Hypothesis};
use hamsys_core::solvers::{
    nehari_degeneracy_demo, scalar_ground_level, solve_dual, solve_inversion, solve_ls_reduction, FrameworkResult,
};
use hamsys_core::spectral::{build_basis, weighted_power_integral, Domain, Field, Mode, SpectralBasis};
use hamsys_core::symmetry::{
    distribution_gap, polarization_violations, polarize, radial_deficit, schwarz_fixed, symmetry_breaking_probe,
    talenti_check, HalfSpaceFamily, PointFunction,
};
use hamsys_core::verification::{cross_framework_report, Tolerances};
use hamsys_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<(bool, String), String>;

fn line(n: usize, title: &str, run: impl FnOnce() -> Verdict) -> bool {
    let t = Instant::now();
    let (pass, detail) = match run() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    println!(
        "criterion {n:>2} {}  {title}: {detail} [{:.1} s]",
        if pass { "PASS" } else { "FAIL" },
        t.elapsed().as_secs_f64()
    );
    pass
}

fn err(e: Error) -> String {
    e.to_string()
}

fn interval() -> Domain {
    Domain::interval(PI).unwrap()
}

fn disk() -> Domain {
    Domain::disk(1.0).unwrap()
}

const PAIRS: [(f64, f64); 3] = [(3.0, 3.0), (2.0, 3.0), (2.2, 4.0)];

struct Run {
    label: String,
    result: FrameworkResult,
    seconds: f64,
}

fn timed(
    f: fn(&ExponentPair, &Arc<SpectralBasis>, &FrameworkConfig) -> hamsys_core::Result<FrameworkResult>,
    e: &ExponentPair,
    b: &Arc<SpectralBasis>,
    cfg: &FrameworkConfig,
) -> Result<(FrameworkResult, f64), String> {
    let t = Instant::now();
    let r = f(e, b, cfg).map_err(err)?;
    Ok((r, t.elapsed().as_secs_f64()))
}

/// Dual, inversion and LS reduction at M = 64 on every pair and both domains.
fn central_runs() -> Result<Vec<Vec<Run>>, String> {
    let cfg = FrameworkConfig::default();
    let mut groups = Vec::new();
    for d in [interval(), disk()] {
        let b = build_basis(d, 64).map_err(err)?;
        for (p, q) in PAIRS {
            let e = ExponentPair::lane_emden(p, q, d.dimension()).map_err(err)?;
            let mut g = Vec::new();
            for (name, f) in [
                ("dual", solve_dual as fn(&_, &_, &_) -> _),
                ("inversion", solve_inversion),
                ("ls_reduction", solve_ls_reduction),
            ] {
                let (result, seconds) = timed(f, &e, &b, &cfg)?;
                g.push(Run { label: format!("{} ({p},{q}) {name}", d.kind()), result, seconds });
            }
            groups.push(g);
        }
    }
    Ok(groups)
}

fn criterion_1(groups: &[Vec<Run>]) -> Verdict {
    let mut worst_gap = 0.0f64;
    let mut slowest = (0.0f64, String::new());
    let total: f64 = groups.iter().flatten().map(|r| r.seconds).sum();
    for g in groups {
        let results: Vec<FrameworkResult> = g.iter().map(|r| r.result.clone()).collect();
        let rep = cross_framework_report(&results, &Tolerances::default()).map_err(err)?;
        for c in rep.checks.iter().filter(|c| c.name.starts_with("level gap")) {
            worst_gap = worst_gap.max(c.value);
        }
        for r in g {
            if r.seconds > slowest.0 {
                slowest = (r.seconds, r.label.clone());
            }
        }
    }
    Ok((
        worst_gap < 1e-3 && slowest.0 < 60.0,
        format!("max pairwise level gap {worst_gap:.2e} (< 1e-3), slowest run {:.1} s for {} (< 60 s), 18 runs in {total:.1} s", slowest.0, slowest.1),
    ))
}

fn criterion_2(groups: &[Vec<Run>]) -> Verdict {
    let scalar = scalar_ground_level(3.0, 0.0, &interval()).map_err(err)?;
    let c = groups[0].iter().map(|r| r.result.level).fold(f64::NAN, f64::max);
    let gap = (c - 2.0 * scalar).abs() / (2.0 * scalar);
    Ok((gap < 1e-3, format!("c = {c:.12}, 2 x scalar = {:.12}, relative gap {gap:.2e} (< 1e-3)", 2.0 * scalar)))
}

fn criterion_3(groups: &[Vec<Run>]) -> Verdict {
    let (mut balance, mut energy) = (0.0f64, 0.0f64);
    let mut count = 0;
    for r in groups.iter().flatten() {
        let res = &r.result;
        if !res.converged {
            return Ok((false, format!("{} did not converge", r.label)));
        }
        let e = res.exponents;
        let (u, v) = (&res.solution.u, &res.solution.v);
        let iu = weighted_power_integral(u.basis(), u.nodal(), e.p + 1.0, e.alpha).map_err(err)?;
        let iv = weighted_power_integral(v.basis(), v.nodal(), e.q + 1.0, e.beta).map_err(err)?;
        balance = balance.max((iu - iv).abs() / iu.max(iv));
        let predicted = e.energy_factor() * iu;
        energy = energy.max((res.solution.energy - predicted).abs() / predicted.abs());
        count += 1;
    }
    Ok((
        balance < 1e-6 && energy < 1e-6,
        format!("{count} solutions: power balance {balance:.2e}, energy identity {energy:.2e} (< 1e-6)"),
    ))
}

fn criterion_4(groups: &[Vec<Run>]) -> Verdict {
    let mut sols: Vec<(String, FrameworkResult)> = groups
        .iter()
        .flatten()
        .filter(|r| r.result.basis().domain().dimension() == 1)
        .map(|r| (r.label.clone(), r.result.clone()))
        .collect();
    // two-dimensional boundary fluxes need more modes than M = 64 carries
    let cfg = FrameworkConfig::default();
    for (d, m) in [(disk(), 256), (Domain::rectangle(2.0, 1.0).unwrap(), 256)] {
        let b = build_basis(d, m).map_err(err)?;
        for (p, q) in PAIRS {
            let e = ExponentPair::lane_emden(p, q, 2).map_err(err)?;
            let r = solve_inversion(&e, &b, &cfg).map_err(err)?;
            sols.push((format!("{} ({p},{q}) inversion M={m}", d.kind()), r));
        }
    }
    let mut worst = (0.0f64, String::new());
    for (label, r) in &sols {
        let e = r.exponents;
        let (u, v) = (&r.solution.u, &r.solution.v);
        let scale = weighted_power_integral(u.basis(), u.nodal(), e.p + 1.0, e.alpha).map_err(err)?
            + weighted_power_integral(v.basis(), v.nodal(), e.q + 1.0, e.beta).map_err(err)?;
        for a in [0.0, 1.0] {
            let rel = pohozaev_residual(&r.solution, &e, a).map_err(err)? / scale;
            if rel > worst.0 {
                worst = (rel, format!("{label}, a = {a}"));
            }
        }
    }
    Ok((
        worst.0 < 1e-4,
        format!("{} solutions, a in {{0, 1}}: worst relative residual {:.2e} at {} (< 1e-4)", sols.len(), worst.0, worst.1),
    ))
}

fn criterion_5() -> Verdict {
    let cases = [
        (interval(), ExponentPair::lane_emden(2.2, 4.0, 1).unwrap()),
        (disk(), ExponentPair::lane_emden(3.0, 3.0, 2).unwrap()),
        (disk(), ExponentPair::new(2.0, 2.0, 1.5, 1.0, 2).unwrap()),
        (Domain::rectangle(2.0, 1.0).unwrap(), ExponentPair::lane_emden(2.0, 3.0, 2).unwrap()),
    ];
    let (mut phi, mut j, mut jr) = (0.0f64, 0.0f64, 0.0f64);
    for (d, e) in cases {
        let b = build_basis(d, 16).map_err(err)?;
        phi = phi.max(dual_gradient_error(&b, &e, 10));
        j = j.max(fourth_order_gradient_error(&b, &e, 10));
        let b = build_basis(d, 12).map_err(err)?;
        jr = jr.max(reduced_gradient_error(&b, &e, 1.0, 10));
    }
    Ok((
        phi < FD_TOLERANCE && j < FD_TOLERANCE && jr < FD_TOLERANCE,
        format!("4 problems x 10 fields: Phi {phi:.2e}, J {j:.2e}, reduced {jr:.2e} (< 1e-5)"),
    ))
}

fn criterion_6() -> Verdict {
    let e = ExponentPair::lane_emden(3.0, 3.0, 1).map_err(err)?;
    let b = build_basis(interval(), 64).map_err(err)?;
    let mut levels = Vec::new();
    for lambda in [0.5, 1.0, 2.0] {
        let cfg = FrameworkConfig { lambda, ..FrameworkConfig::default() };
        levels.push(solve_ls_reduction(&e, &b, &cfg).map_err(err)?.level);
    }
    let hi = levels.iter().cloned().fold(f64::MIN, f64::max);
    let lo = levels.iter().cloned().fold(f64::MAX, f64::min);
    let gap = (hi - lo) / hi;
    Ok((gap < 1e-3, format!("levels {levels:.10?} for lambda 0.5, 1, 2; spread {gap:.2e} (< 1e-3)")))
}

fn criterion_7() -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;
    for d in [interval(), disk()] {
        let e = ExponentPair::lane_emden(0.5, 1.5, d.dimension()).map_err(err)?;
        let b = build_basis(d, 64).map_err(err)?;
        let cfg = FrameworkConfig::default();
        let r = solve_inversion(&e, &b, &cfg).map_err(err)?;
        let min_u = r.solution.u.nodal().iter().cloned().fold(f64::MAX, f64::min);
        let min_v = r.solution.v.nodal().iter().cloned().fold(f64::MAX, f64::min);
        let positive = r.converged && min_u > 0.0 && min_v > 0.0;
        let hyp = |res: hamsys_core::Result<FrameworkResult>| match res {
            Err(Error::Hypothesis { hypothesis, .. }) => Some(hypothesis),
            _ => None,
        };
        let dual = hyp(solve_dual(&e, &b, &cfg));
        let ls = hyp(solve_ls_reduction(&e, &b, &cfg));
        pass &= positive && dual == Some(Hypothesis::H3) && ls == Some(Hypothesis::H4);
        notes.push(format!(
            "{}: converged {} min u {min_u:.2e} min v {min_v:.2e}, dual refuses {}, ls refuses {}",
            d.kind(),
            r.converged,
            dual.map_or("no".to_string(), |h| h.to_string()),
            ls.map_or("no".to_string(), |h| h.to_string())
        ));
    }
    Ok((pass, notes.join("; ")))
}

fn criterion_8() -> Verdict {
    let b = build_basis(interval(), 16).map_err(err)?;
    let u = Field::mode(&b, 0).map_err(err)?;
    let mut pass = true;
    let mut notes = Vec::new();
    for (p, q) in PAIRS {
        let e = ExponentPair::lane_emden(p, q, 1).map_err(err)?;
        let rows = nehari_degeneracy_demo(&e, &u, &[1.0, 10.0, 100.0, 1000.0]).map_err(err)?;
        let norms: Vec<f64> = rows.iter().map(|r| r.norm.unwrap_or(f64::NAN)).collect();
        let monotone = norms.windows(2).all(|w| w[1] < w[0]);
        let ratio = norms[3] / norms[0];
        pass &= monotone && ratio < 0.1;
        notes.push(format!("({p},{q}) norm ratio {ratio:.3e}"));
    }
    Ok((pass, format!("strictly decreasing over lambda = 1..1e3, {} (< 0.1)", notes.join(", "))))
}

fn mode_index(b: &SpectralBasis, want: impl Fn(&Mode) -> bool) -> usize {
    b.modes().iter().position(want).expect("mode present")
}

/// Radial decreasing, radial non-monotone and nonradial nonnegative fields.
fn symmetry_zoo(b: &Arc<SpectralBasis>) -> Vec<(&'static str, Field, bool)> {
    let m = b.mode_count();
    let (second, off) = match b.domain() {
        Domain::Disk { .. } => (
            mode_index(b, |md| matches!(md, Mode::Bessel { m: 0, k: 2, .. })),
            mode_index(b, |md| matches!(md, Mode::Bessel { m: 1, k: 1, .. })),
        ),
        _ => (mode_index(b, |md| matches!(md, Mode::Sine { n: 3 })), mode_index(b, |md| matches!(md, Mode::Sine { n: 2 }))),
    };
    let make = |pairs: &[(usize, f64)]| {
        let mut c = vec![0.0; m];
        for &(n, a) in pairs {
            c[n] += a;
        }
        Field::from_coefficients(b, c).unwrap()
    };
    // second radial mode scaled to match phi1 at the center
    let c = b.domain().center();
    let s = make(&[(0, 1.0)]).eval(c) / make(&[(second, 1.0)]).eval(c);
    vec![
        ("phi1", make(&[(0, 1.0)]), true),
        ("radial decreasing", make(&[(0, 1.0), (second, 0.1 * s)]), true),
        ("radial with a dip", make(&[(0, 1.0), (second, -0.4 * s)]), false),
        ("off-center", make(&[(0, 1.0), (off, 0.3)]), false),
    ]
}

fn random_source(b: &Arc<SpectralBasis>, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rough = seed.is_multiple_of(2);
    let c = (0..b.mode_count())
        .map(|n| {
            if n == 0 {
                return 1.0;
            }
            let d = if rough { n as f64 + 1.0 } else { ((n + 1) * (n + 1)) as f64 };
            0.4 * rng.random_range(-1.0..1.0) / d
        })
        .collect();
    Field::from_coefficients(b, c).unwrap()
}

fn criterion_9() -> Verdict {
    // Talenti: 100 nonnegative sources, including radial ones where equality must hold
    let mut checked = 0;
    let mut failures = 0;
    let mut worst = 0.0f64;
    for d in [Domain::interval(2.0).unwrap(), disk()] {
        let b = build_basis(d, 30).map_err(err)?;
        let mut sources: Vec<Field> = symmetry_zoo(&b).into_iter().filter(|z| z.2).map(|z| z.1).collect();
        let mut seed = 0;
        while sources.len() < 50 {
            let f = random_source(&b, seed);
            seed += 1;
            if f.nodal().iter().all(|x| *x >= 0.0) {
                sources.push(f);
            }
        }
        for f in &sources {
            let rep = talenti_check(f).map_err(err)?;
            worst = worst.max(rep.max_excess);
            checked += 1;
            if !rep.passes() {
                failures += 1;
            }
        }
    }
    let talenti = failures == 0 && checked == 100;

    // polarization: equimeasurable and idempotent
    let family = HalfSpaceFamily::default();
    let (mut idem, mut swap, mut gap) = (0.0f64, 0.0f64, 0.0f64);
    for d in [interval(), disk()] {
        let b = build_basis(d, 16).map_err(err)?;
        let radius = d.ball_radius().unwrap();
        let center = d.center();
        for seed in 0..3 {
            let w = random_source(&b, 1000 + seed);
            let scale = w.nodal().iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for h in family.members(d.dimension(), radius) {
                let wh = polarize(&w, h);
                let once = wh.nodal_values();
                let twice = polarize(&wh, h).nodal_values();
                idem = idem.max(once.iter().zip(&twice).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale);
                if h.offset() == 0.0 {
                    gap = gap.max(distribution_gap(b.weights(), w.nodal(), &once));
                }
                // on each pair {x, σx} the two values are only reordered
                for (j, &x) in b.nodes().iter().enumerate().step_by(3) {
                    if !h.contains(center, x) {
                        continue;
                    }
                    let y = h.reflect(center, x);
                    let (a, c) = (w.nodal()[j], w.value(y));
                    let (ah, ch) = (once[j], wh.value(y));
                    let dev = (a.min(c) - ah.min(ch)).abs() + (a.max(c) - ah.max(ch)).abs();
                    swap = swap.max(dev / scale);
                }
            }
        }
    }
    let polar = idem < 1e-8 && swap < 1e-8 && gap < 1e-8;

    // Schwarz symmetric exactly when every sampled polarization fixes the field
    let mut disagree = Vec::new();
    let mut total = 0;
    for d in [interval(), disk()] {
        let b = build_basis(d, 16).map_err(err)?;
        for (name, f, expected) in symmetry_zoo(&b) {
            let fixed = schwarz_fixed(&f).map_err(err)?;
            let (violations, _) = polarization_violations(&f, family).map_err(err)?;
            total += 1;
            if fixed != expected || (violations == 0) != expected {
                disagree.push(format!("{} {name}: rearrangement fixed {fixed}, {violations} violations", d.kind()));
            }
        }
    }
    let schwarz = disagree.is_empty();
    Ok((
        talenti && polar && schwarz,
        format!(
            "Talenti {}/{checked} ordered, max excess {worst:.2e} (slack 1e-8); polarization idempotence {idem:.1e}, \
             pair swap {swap:.1e}, aligned distribution gap {gap:.1e} (< 1e-8); Schwarz iff polarization-fixed {}/{total}{}",
            checked - failures,
            total - disagree.len(),
            disagree.iter().map(|d| format!("; {d}")).collect::<String>()
        ),
    ))
}

fn criterion_10() -> Verdict {
    let b = build_basis(disk(), 64).map_err(err)?;
    let cfg = FrameworkConfig { seed: Some(1), perturbation: 0.5, ..FrameworkConfig::default() };
    let mut worst = 0.0f64;
    for (p, q) in PAIRS {
        let e = ExponentPair::lane_emden(p, q, 2).map_err(err)?;
        let r = solve_inversion(&e, &b, &cfg).map_err(err)?;
        worst = worst.max(radial_deficit(&r.solution.u).map_err(err)?).max(radial_deficit(&r.solution.v).map_err(err)?);
    }
    Ok((worst < 1e-4, format!("3 pairs from perturbed starts: max radial deficit {worst:.2e} (< 1e-4)")))
}

fn criterion_11() -> Verdict {
    let t = Instant::now();
    let b = build_basis(disk(), 64).map_err(err)?;
    let cfg = FrameworkConfig::default();
    for k in 0..=20 {
        let a = k as f64;
        let e = ExponentPair::new(2.0, 2.0, a, a, 2).map_err(err)?;
        let r = symmetry_breaking_probe(&e, &b, &cfg).map_err(err)?;
        if r.breaking {
            let secs = t.elapsed().as_secs_f64();
            return Ok((
                r.foliated_deficit < 1e-3 && secs < 600.0,
                format!(
                    "first breaking at alpha = beta = {a}: c_full {:.6} < c_rad {:.6} x (1 - {}); foliated deficit {:.2e} (< 1e-3) about axis ({:.3}, {:.3}); sweep {secs:.1} s (< 600 s)",
                    r.c_full, r.c_rad, r.margin, r.foliated_deficit, r.best_axis[0], r.best_axis[1]
                ),
            ));
        }
    }
    Ok((false, "no breaking for alpha = beta <= 20".into()))
}

fn criterion_12() -> Verdict {
    let e = ExponentPair::lane_emden(3.0, 3.0, 1).map_err(err)?;
    let cfg = FrameworkConfig::default();
    let level = |m: usize| -> Result<f64, String> {
        let b = build_basis(interval(), m).map_err(err)?;
        Ok(solve_inversion(&e, &b, &cfg).map_err(err)?.level)
    };
    let reference = level(128)?;
    let floor = 1e-13 * reference;
    let gaps: Vec<(usize, f64)> =
        [4usize, 8, 16, 32, 64].iter().map(|&m| level(m).map(|c| (m, (c - reference).abs()))).collect::<Result<_, _>>()?;
    let mut pass = true;
    for w in gaps.windows(2).filter(|w| w[0].0 >= 16) {
        // a gap already at roundoff has nothing left to lose
        pass &= w[0].1 <= floor || w[1].1 <= 0.1 * w[0].1;
    }
    let shown: Vec<String> = gaps.iter().map(|(m, g)| format!("M={m}: {g:.1e}")).collect();
    Ok((
        pass,
        format!("|c(M) - c(128)|: {}; roundoff floor {floor:.1e}, M in {{16, 32, 64}} must shrink 10x per doubling or sit at the floor", shown.join(", ")),
    ))
}

fn main() {
    let t = Instant::now();
    let mut results = Vec::new();
    let groups = central_runs();
    let with_groups = |n: usize, title: &str, f: fn(&[Vec<Run>]) -> Verdict| {
        line(n, title, || match &groups {
            Ok(g) => f(g),
            Err(e) => Err(e.clone()),
        })
    };
    results.push(with_groups(1, "cross-framework levels", criterion_1));
    results.push(with_groups(2, "diagonal Lane-Emden oracle", criterion_2));
    results.push(with_groups(3, "critical-point identities", criterion_3));
    results.push(with_groups(4, "Pohozaev residual", criterion_4));
    results.push(line(5, "gradients vs central differences", criterion_5));
    results.push(line(6, "reduced family invariance in lambda", criterion_6));
    results.push(line(7, "sublinear regime", criterion_7));
    results.push(line(8, "Nehari degeneracy", criterion_8));
    results.push(line(9, "symmetrization suite", criterion_9));
    results.push(line(10, "ball symmetry", criterion_10));
    results.push(line(11, "Henon symmetry breaking", criterion_11));
    results.push(line(12, "spectral convergence", criterion_12));
    let failed = results.iter().filter(|p| !**p).count();
    println!(
        "acceptance: {}/{} criteria pass [{:.1} s]",
        results.len() - failed,
        results.len(),
        t.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
