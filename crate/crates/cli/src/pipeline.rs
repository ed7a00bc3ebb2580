//! Subcommand pipelines: solve, verify, sweep, convergence, Nehari demo.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use hamsys_core::functionals::{Framework, SolutionPair};
use hamsys_core::problem::{classify, Classification, ExponentPair, Hypothesis};
use hamsys_core::solvers::{
    nehari_degeneracy_demo, solve_dual, solve_inversion, solve_ls_reduction, solve_shooting, FrameworkResult, NehariRow,
};
use hamsys_core::spectral::{build_basis, Domain, Field, SpectralBasis};
use hamsys_core::symmetry::{symmetry_breaking_probe, BREAKING_MARGIN};
use hamsys_core::verification::{cross_framework_report, result_label, verify_solution, Check, VerificationReport};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::{read_coefficients, write_result, RunDir};

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultSummary {
    pub label: String,
    pub framework: Framework,
    pub lambda: Option<f64>,
    pub level: f64,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub diagnostics: BTreeMap<String, f64>,
    pub fields_file: String,
    pub coefficients_file: String,
    pub trace_file: String,
    pub profile_file: Option<String>,
}

/// A framework that did not produce a result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Refusal {
    pub label: String,
    /// Set when the framework refused on a hypothesis.
    pub hypothesis: Option<Hypothesis>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub beta: f64,
    pub c_rad: f64,
    pub c_rad_spectral: f64,
    pub c_full: f64,
    pub breaking: bool,
    pub radial_deficit: f64,
    pub foliated_deficit: f64,
    pub axis: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub framework: Framework,
    pub modes: usize,
    pub level: f64,
    /// `|c(M) − c(M_ref)|`; absent for the reference row.
    pub gap: Option<f64>,
    /// Empirical order against the previous row.
    pub order: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: RunConfig,
    pub exponents: ExponentPair,
    pub classification: Classification,
    pub results: Vec<ResultSummary>,
    pub refusals: Vec<Refusal>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub convergence: Vec<ConvergenceRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nehari: Vec<NehariRow>,
    pub verification: VerificationReport,
    /// Wall-clock seconds per step.
    pub timings: BTreeMap<String, f64>,
    pub artifacts: Vec<String>,
    pub pass: bool,
}

impl RunManifest {
    fn new(command: &str, cfg: &RunConfig, e: ExponentPair) -> Self {
        RunManifest {
            command: command.to_string(),
            config: cfg.clone(),
            exponents: e,
            classification: classify(&e),
            results: Vec::new(),
            refusals: Vec::new(),
            sweep: Vec::new(),
            convergence: Vec::new(),
            nehari: Vec::new(),
            verification: VerificationReport::new(),
            timings: BTreeMap::new(),
            artifacts: Vec::new(),
            pass: false,
        }
    }

    /// Writes the manifest as the last artifact of `dir`.
    fn finish(mut self, mut dir: RunDir) -> Result<Self> {
        self.pass = self.verification.pass && self.refusals.iter().all(|r| r.hypothesis.is_some());
        self.artifacts = dir.artifacts.clone();
        self.artifacts.push(MANIFEST.to_string());
        dir.json(MANIFEST, &self)?;
        Ok(self)
    }
}

/// Classification plus the frameworks whose hypotheses hold.
#[derive(Clone, Debug, Serialize)]
pub struct ClassifyReport {
    pub exponents: ExponentPair,
    pub classification: Classification,
    pub admissible: Vec<Framework>,
    pub refused: Vec<(Framework, Hypothesis)>,
}

pub fn classify_problem(cfg: &RunConfig) -> Result<ClassifyReport> {
    let e = cfg.exponents()?;
    let c = classify(&e);
    let mut admissible = Vec::new();
    let mut refused = Vec::new();
    let needs = [
        (Framework::Dual, if c.h1 { Hypothesis::H3 } else { Hypothesis::H1 }, c.h3),
        (Framework::Inversion, Hypothesis::H1, c.h1),
        (Framework::LsReduction, if c.h1 { Hypothesis::H4 } else { Hypothesis::H1 }, c.h4),
    ];
    for (f, h, ok) in needs {
        if ok {
            admissible.push(f);
        } else {
            refused.push((f, h));
        }
    }
    Ok(ClassifyReport { exponents: e, classification: c, admissible, refused })
}

fn run_framework(f: Framework, e: &ExponentPair, basis: &Arc<SpectralBasis>, cfg: &RunConfig, lambda: f64) -> hamsys_core::Result<FrameworkResult> {
    let fc = cfg.solver.framework_config(lambda);
    match f {
        Framework::Dual => solve_dual(e, basis, &fc),
        Framework::Inversion => solve_inversion(e, basis, &fc),
        Framework::LsReduction => solve_ls_reduction(e, basis, &fc),
        Framework::ShootingOracle => solve_shooting(e, basis, &fc),
    }
}

fn job_label(f: Framework, lambda: f64) -> String {
    if f == Framework::LsReduction && lambda != 1.0 {
        format!("{f}[lambda={lambda}]")
    } else {
        f.to_string()
    }
}

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

fn prefixed(prefix: &str, rep: VerificationReport) -> VerificationReport {
    let mut out = VerificationReport::new();
    for mut c in rep.checks {
        c.name = format!("{prefix}: {}", c.name);
        out.push(c);
    }
    out
}

/// Per-result checks plus the cross-framework comparison.
fn verify_all(results: &[FrameworkResult], e: &ExponentPair, cfg: &RunConfig) -> VerificationReport {
    let mut rep = VerificationReport::new();
    let mut converged = Vec::new();
    for r in results {
        let label = result_label(r);
        match verify_solution(r, e, &cfg.checks, &cfg.tolerances) {
            Ok(v) => {
                rep.extend(prefixed(&label, v));
                converged.push(r.clone());
            }
            Err(err) => rep.push(Check { name: format!("{label}: {err}"), value: f64::NAN, tolerance: 0.0, pass: false }),
        }
    }
    if converged.len() >= 2 {
        match cross_framework_report(&converged, &cfg.tolerances) {
            Ok(v) => rep.extend(prefixed("cross", v)),
            Err(err) => rep.push(Check { name: format!("cross: {err}"), value: f64::NAN, tolerance: 0.0, pass: false }),
        }
    }
    rep
}

fn summarize(label: &str, r: &FrameworkResult, files: crate::output::FieldFiles) -> ResultSummary {
    ResultSummary {
        label: label.to_string(),
        framework: r.framework,
        lambda: r.diagnostic("lambda"),
        level: r.level,
        energy: r.solution.energy,
        residual: r.solution.residual,
        iterations: r.iterations,
        converged: r.converged,
        diagnostics: r.diagnostics.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        fields_file: files.fields,
        coefficients_file: files.coefficients,
        trace_file: files.trace,
        profile_file: files.profile,
    }
}

fn refusal(label: String, err: &hamsys_core::Error) -> Refusal {
    let hypothesis = match err {
        hamsys_core::Error::Hypothesis { hypothesis, .. } => Some(*hypothesis),
        _ => None,
    };
    Refusal { label, hypothesis, message: err.to_string() }
}

/// Runs every selected framework, verifies the results and writes the run directory.
pub fn run(cfg: &RunConfig) -> Result<RunManifest> {
    let e = cfg.solvable_exponents()?;
    let mut m = RunManifest::new("solve", cfg, e);
    let t0 = Instant::now();
    let basis = build_basis(cfg.domain, cfg.solver.modes)?;
    m.timings.insert("basis".into(), secs(t0));
    let mut jobs = Vec::new();
    for &f in &cfg.solver.frameworks {
        if f == Framework::LsReduction {
            jobs.extend(cfg.solver.lambdas.iter().map(|&l| (f, l)));
        } else {
            jobs.push((f, 1.0));
        }
    }
    let outcomes: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(f, l)| {
                let basis = &basis;
                let e = &e;
                s.spawn(move || {
                    let t = Instant::now();
                    let r = run_framework(f, e, basis, cfg, l);
                    (job_label(f, l), r, secs(t))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });
    let mut dir = RunDir::create(&cfg.output.dir)?;
    let mut results = Vec::new();
    for (label, r, t) in outcomes {
        m.timings.insert(label.clone(), t);
        match r {
            Ok(r) => {
                let files = write_result(&mut dir, &label, &r)?;
                m.results.push(summarize(&label, &r, files));
                results.push(r);
            }
            Err(err) => m.refusals.push(refusal(label, &err)),
        }
    }
    if results.is_empty() {
        m.finish(dir)?;
        return Err(CliError::Usage("no selected framework applies to this problem".into()));
    }
    let t = Instant::now();
    m.verification = verify_all(&results, &e, cfg);
    m.timings.insert("verification".into(), secs(t));
    m.finish(dir)
}

/// Rebuilds the results of a `solve` run from its directory and checks them again.
pub fn verify_dir(dir_path: &Path) -> Result<RunManifest> {
    let path = dir_path.join(MANIFEST);
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
    let old: RunManifest = serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.clone(), source })?;
    if old.command != "solve" {
        return Err(CliError::Usage(format!("{} was written by `{}`, not `solve`", path.display(), old.command)));
    }
    let cfg = old.config.clone();
    let e = old.exponents;
    let basis = build_basis(cfg.domain, cfg.solver.modes)?;
    let mut results = Vec::new();
    for s in &old.results {
        let (a, b) = read_coefficients(&dir_path.join(&s.coefficients_file))?;
        let u = Field::from_coefficients(&basis, a)?;
        let v = Field::from_coefficients(&basis, b)?;
        let solution = SolutionPair::assemble(u, v, &e, s.framework)?;
        let diagnostics = s.lambda.map(|l| vec![("lambda", l)]).unwrap_or_default();
        results.push(FrameworkResult {
            framework: s.framework,
            exponents: e,
            level: s.level,
            solution,
            iterations: s.iterations,
            trace: Vec::new(),
            converged: s.converged,
            diagnostics,
        });
    }
    let mut m = old.clone();
    m.command = "verify".into();
    m.verification = verify_all(&results, &e, &cfg);
    m.pass = m.verification.pass;
    let mut dir = RunDir::create(dir_path)?;
    dir.json("verification.json", &m.verification)?;
    Ok(m)
}

/// Breaking probe over increasing `α = β` on a disk.
pub fn henon_sweep(cfg: &RunConfig) -> Result<RunManifest> {
    if !matches!(cfg.domain, Domain::Disk { .. }) {
        return Err(CliError::Usage("henon-sweep needs a disk domain".into()));
    }
    let base = cfg.solvable_exponents()?;
    let mut m = RunManifest::new("henon-sweep", cfg, base);
    let basis = build_basis(cfg.domain, cfg.solver.modes)?;
    let fc = cfg.solver.framework_config(1.0);
    let t0 = Instant::now();
    let outcomes: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = cfg
            .sweep
            .weights
            .iter()
            .map(|&w| {
                let (basis, fc) = (&basis, &fc);
                s.spawn(move || {
                    let e = ExponentPair::new(base.p, base.q, w, w, 2)?;
                    symmetry_breaking_probe(&e, basis, fc)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("probe thread panicked")).collect()
    });
    m.timings.insert("sweep".into(), secs(t0));
    let mut dir = RunDir::create(&cfg.output.dir)?;
    let mut first_break = None;
    for (&w, out) in cfg.sweep.weights.iter().zip(outcomes) {
        match out {
            Ok(r) => {
                m.sweep.push(SweepRow {
                    alpha: w,
                    beta: w,
                    c_rad: r.c_rad,
                    c_rad_spectral: r.c_rad_spectral,
                    c_full: r.c_full,
                    breaking: r.breaking,
                    radial_deficit: r.radial_deficit,
                    foliated_deficit: r.foliated_deficit,
                    axis: r.best_axis,
                });
                if r.breaking && first_break.is_none() {
                    first_break = Some((w, r));
                }
            }
            Err(err) => m.refusals.push(refusal(format!("alpha={w}"), &err)),
        }
    }
    dir.csv(
        "henon_sweep.csv",
        &["alpha", "beta", "c_rad", "c_rad_spectral", "c_full", "breaking", "radial_deficit", "foliated_deficit", "axis_x", "axis_y"],
        m.sweep.iter().map(|r| {
            use crate::output::machine as f;
            vec![
                f(r.alpha),
                f(r.beta),
                f(r.c_rad),
                f(r.c_rad_spectral),
                f(r.c_full),
                r.breaking.to_string(),
                f(r.radial_deficit),
                f(r.foliated_deficit),
                f(r.axis[0]),
                f(r.axis[1]),
            ]
        }),
    )?;
    let ratio = m.sweep.iter().map(|r| r.c_full / r.c_rad).fold(f64::INFINITY, f64::min);
    m.verification.push(Check::new("min c_full/c_rad", ratio, 1.0 - BREAKING_MARGIN));
    if let Some((w, r)) = first_break {
        let label = format!("minimizer alpha={w}");
        let files = write_result(&mut dir, &label, &r.minimizer)?;
        m.results.push(summarize(&label, &r.minimizer, files));
        m.verification.push(Check::new(format!("foliated deficit at alpha={w}"), r.foliated_deficit, cfg.tolerances.foliated));
    }
    m.finish(dir)
}

/// Levels at each mode count against a finer reference.
pub fn convergence_study(cfg: &RunConfig) -> Result<RunManifest> {
    let mut list = cfg.convergence.modes.clone();
    list.sort_unstable();
    list.dedup();
    if list.len() < 2 {
        return Err(CliError::Usage("convergence needs at least two mode counts".into()));
    }
    let reference = cfg.convergence.reference;
    if reference <= *list.last().unwrap() {
        return Err(CliError::Usage(format!("reference M = {reference} must exceed every listed mode count")));
    }
    let e = cfg.solvable_exponents()?;
    let mut m = RunManifest::new("convergence", cfg, e);
    let lambda = cfg.solver.lambdas[0];
    let mut all = list.clone();
    all.push(reference);
    let jobs: Vec<(Framework, usize)> =
        cfg.solver.frameworks.iter().flat_map(|&f| all.iter().map(move |&n| (f, n))).collect();
    let t0 = Instant::now();
    let outcomes: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(f, n)| {
                let e = &e;
                s.spawn(move || {
                    let basis = build_basis(cfg.domain, n)?;
                    run_framework(f, e, &basis, cfg, lambda).map(|r| r.level)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });
    m.timings.insert("convergence".into(), secs(t0));
    let mut levels: BTreeMap<(Framework, usize), f64> = BTreeMap::new();
    for (&(f, n), out) in jobs.iter().zip(outcomes) {
        match out {
            Ok(c) => {
                levels.insert((f, n), c);
            }
            Err(err) => m.refusals.push(refusal(format!("{f} M={n}"), &err)),
        }
    }
    for &f in &cfg.solver.frameworks {
        let Some(&cref) = levels.get(&(f, reference)) else { continue };
        let floor = 1e-13 * cref.abs();
        let mut prev: Option<(usize, f64)> = None;
        for &n in &list {
            let Some(&c) = levels.get(&(f, n)) else { continue };
            let gap = (c - cref).abs();
            let mut order = None;
            if let Some((pn, pg)) = prev {
                let doublings = (n as f64 / pn as f64).log2();
                if pg > floor && gap > floor {
                    order = Some((pg / gap).ln() / (n as f64 / pn as f64).ln());
                }
                // once the previous gap sits at roundoff there is nothing left to shrink
                let per_doubling = if pg <= floor { 0.0 } else { (gap / pg).powf(1.0 / doublings) };
                m.verification.push(Check::new(format!("{f}: gap ratio per doubling M={pn}->{n}"), per_doubling, 0.1));
            }
            m.convergence.push(ConvergenceRow { framework: f, modes: n, level: c, gap: Some(gap), order });
            prev = Some((n, gap));
        }
        m.convergence.push(ConvergenceRow { framework: f, modes: reference, level: cref, gap: None, order: None });
    }
    let mut dir = RunDir::create(&cfg.output.dir)?;
    dir.csv(
        "convergence.csv",
        &["framework", "modes", "level", "gap", "order"],
        m.convergence.iter().map(|r| {
            use crate::output::machine as f;
            vec![
                r.framework.to_string(),
                r.modes.to_string(),
                f(r.level),
                r.gap.map(f).unwrap_or_default(),
                r.order.map(f).unwrap_or_default(),
            ]
        }),
    )?;
    if m.convergence.is_empty() {
        m.verification.push(Check { name: "no levels computed".into(), value: f64::NAN, tolerance: 0.0, pass: false });
    }
    m.finish(dir)
}

/// Norms along `(t_λ φ₁, t_λ λ φ₁)` on the standard Nehari set.
pub fn nehari_demo(cfg: &RunConfig) -> Result<RunManifest> {
    let e = cfg.solvable_exponents()?;
    let mut m = RunManifest::new("demo-nehari", cfg, e);
    let basis = build_basis(cfg.domain, cfg.solver.modes)?;
    let u = Field::mode(&basis, 0)?;
    m.nehari = nehari_degeneracy_demo(&e, &u, &cfg.nehari.lambdas)?;
    let mut dir = RunDir::create(&cfg.output.dir)?;
    dir.csv(
        "nehari.csv",
        &["lambda", "t", "norm", "identity_residual"],
        m.nehari.iter().map(|r| {
            use crate::output::machine as f;
            vec![f(r.lambda), r.t.map(f).unwrap_or_default(), r.norm.map(f).unwrap_or_default(), r.identity_residual.map(f).unwrap_or_default()]
        }),
    )?;
    let norms: Vec<f64> = m.nehari.iter().map(|r| r.norm.unwrap_or(f64::NAN)).collect();
    let step = norms.windows(2).map(|w| w[1] / w[0]).fold(0.0f64, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) });
    m.verification.push(Check::new("max consecutive norm ratio", step, 1.0));
    if let (Some(first), Some(last)) = (norms.first(), norms.last()) {
        m.verification.push(Check::new("last/first norm", last / first, 0.1));
    }
    m.finish(dir)
}
