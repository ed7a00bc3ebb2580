use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hamsys::config::parse_frameworks;
use hamsys::output::{human, table};
use hamsys::pipeline::{self, ClassifyReport};
use hamsys::{CliError, Overrides, RunConfig, RunManifest};
use hamsys_core::functionals::Framework;

#[derive(Parser, Debug)]
#[command(name = "hamsys", version, about = "Ground states of Hamiltonian elliptic systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Mode count M (for `convergence`, the reference M).
    #[arg(long, global = true, value_name = "M")]
    modes: Option<usize>,
    /// Comma-separated framework names, or `all`.
    #[arg(long, global = true, value_name = "LIST", value_parser = frameworks)]
    frameworks: Option<FrameworkList>,
}

#[derive(Clone, Debug)]
struct FrameworkList(Vec<Framework>);

fn frameworks(s: &str) -> Result<FrameworkList, String> {
    parse_frameworks(s).map(FrameworkList)
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hypotheses, regime and position relative to the critical hyperbola.
    Classify,
    /// Solve with the selected frameworks and verify the results.
    Solve,
    /// Re-check a `solve` run directory.
    Verify {
        /// Run directory; defaults to the output directory.
        dir: Option<PathBuf>,
    },
    /// Breaking probe over increasing Hénon weights on a disk.
    HenonSweep,
    /// Levels against mode count.
    Convergence,
    /// Degeneracy of the standard Nehari set.
    DemoNehari,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn execute(cli: Cli) -> Result<u8, CliError> {
    let base = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut overrides = Overrides {
        out: cli.out.clone(),
        seed: cli.seed,
        modes: cli.modes,
        frameworks: cli.frameworks.map(|f| f.0),
    };
    if matches!(cli.command, Command::Convergence) {
        overrides.modes = None;
    }
    let mut cfg = base.apply(&overrides);
    if let (Command::Convergence, Some(m)) = (&cli.command, cli.modes) {
        cfg.convergence.reference = m;
    }
    let manifest = match cli.command {
        Command::Classify => {
            print_classification(&pipeline::classify_problem(&cfg)?);
            return Ok(0);
        }
        Command::Solve => pipeline::run(&cfg)?,
        Command::Verify { dir } => {
            let dir = dir.unwrap_or_else(|| cfg.output.dir.clone());
            pipeline::verify_dir(&dir)?
        }
        Command::HenonSweep => pipeline::henon_sweep(&cfg)?,
        Command::Convergence => pipeline::convergence_study(&cfg)?,
        Command::DemoNehari => pipeline::nehari_demo(&cfg)?,
    };
    print_manifest(&manifest);
    Ok(if manifest.pass { 0 } else { 1 })
}

fn print_classification(r: &ClassifyReport) {
    let e = &r.exponents;
    let c = &r.classification;
    println!("p = {}, q = {}, alpha = {}, beta = {}, N = {}", e.p, e.q, e.alpha, e.beta, e.dimension);
    println!("{}", c.hyperbola);
    println!("regime: {:?}", c.regime);
    println!("H1 {}  H2 {}  H3 {}  H4 {}  H4' {}", c.h1, c.h2, c.h3, c.h4, c.h4_prime);
    let names: Vec<_> = r.admissible.iter().map(|f| f.as_str()).collect();
    println!("admissible: {}", if names.is_empty() { "none".to_string() } else { names.join(", ") });
    for (f, h) in &r.refused {
        println!("{f} refused: {h} fails");
    }
    if !c.h1 {
        println!("solve refused: H1 fails");
    }
}

fn print_manifest(m: &RunManifest) {
    if !m.results.is_empty() {
        let rows: Vec<Vec<String>> = m
            .results
            .iter()
            .map(|r| {
                vec![
                    r.label.clone(),
                    human(r.level),
                    r.iterations.to_string(),
                    human(r.residual),
                    m.timings.get(&r.label).map(|t| human(*t)).unwrap_or_default(),
                ]
            })
            .collect();
        println!("{}\n", table(&["result", "level", "iterations", "residual", "seconds"], &rows));
    }
    if !m.sweep.is_empty() {
        let rows: Vec<Vec<String>> = m
            .sweep
            .iter()
            .map(|r| {
                vec![human(r.alpha), human(r.c_rad), human(r.c_full), r.breaking.to_string(), human(r.foliated_deficit)]
            })
            .collect();
        println!("{}\n", table(&["alpha=beta", "c_rad", "c_full", "breaking", "foliated"], &rows));
    }
    if !m.convergence.is_empty() {
        let rows: Vec<Vec<String>> = m
            .convergence
            .iter()
            .map(|r| {
                vec![
                    r.framework.to_string(),
                    r.modes.to_string(),
                    human(r.level),
                    r.gap.map(human).unwrap_or_else(|| "ref".into()),
                    r.order.map(human).unwrap_or_default(),
                ]
            })
            .collect();
        println!("{}\n", table(&["framework", "M", "level", "gap", "order"], &rows));
    }
    if !m.nehari.is_empty() {
        let opt = |x: Option<f64>| x.map(human).unwrap_or_else(|| "-".into());
        let rows: Vec<Vec<String>> =
            m.nehari.iter().map(|r| vec![human(r.lambda), opt(r.t), opt(r.norm)]).collect();
        println!("{}\n", table(&["lambda", "t", "norm"], &rows));
    }
    for r in &m.refusals {
        println!("{}: {}", r.label, r.message);
    }
    if !m.refusals.is_empty() {
        println!();
    }
    println!("{}", m.verification);
}
