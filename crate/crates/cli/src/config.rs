//! Run configuration, read from TOML.
//!
//! Every section and key is optional. Unknown keys are rejected with the
//! offending line and field.

use std::path::{Path, PathBuf};

use hamsys_core::functionals::{Framework, FrameworkConfig};
use hamsys_core::problem::ExponentPair;
use hamsys_core::spectral::Domain;
use hamsys_core::verification::{CheckSelection, Tolerances};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    /// `kind = "interval" | "disk" | "rectangle"` with `length`, `radius` or `lx`, `ly`.
    /// Default: interval of length π.
    pub domain: Domain,
    pub solver: SolverConfig,
    pub tolerances: Tolerances,
    pub checks: CheckSelection,
    pub sweep: SweepConfig,
    pub convergence: ConvergenceConfig,
    pub nehari: NehariConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: ProblemConfig::default(),
            domain: Domain::Interval { length: std::f64::consts::PI },
            solver: SolverConfig::default(),
            tolerances: Tolerances::default(),
            checks: CheckSelection::default(),
            sweep: SweepConfig::default(),
            convergence: ConvergenceConfig::default(),
            nehari: NehariConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Defaults: `p = q = 3`, no weights, dimension taken from the domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Only `classify` accepts a dimension different from the domain's.
    pub dimension: Option<usize>,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig { p: 3.0, q: 3.0, alpha: 0.0, beta: 0.0, dimension: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Mode count `M`. Default 64.
    pub modes: usize,
    /// List of names, or `"all"` for dual, inversion and ls_reduction.
    #[serde(deserialize_with = "frameworks_de")]
    pub frameworks: Vec<Framework>,
    /// Default 1e-9.
    pub tolerance: f64,
    /// Default 1e-12.
    pub inner_tolerance: f64,
    pub max_outer_iterations: usize,
    pub max_inversion_iterations: usize,
    /// Fixes every seeded start. Default: unseeded starts from `φ_1`.
    pub seed: Option<u64>,
    /// Perturbation size of seeded starts. Default 0.
    pub perturbation: f64,
    pub radial_only: bool,
    /// Fractional split `s`. Default 1.
    pub fractional_split: f64,
    /// Values of `λ` for ls_reduction; one run per value. Default `[1]`.
    pub lambdas: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let base = FrameworkConfig::default();
        SolverConfig {
            modes: 64,
            frameworks: all_frameworks(),
            tolerance: base.tolerance,
            inner_tolerance: base.inner_tolerance,
            max_outer_iterations: base.max_outer_iterations,
            max_inversion_iterations: base.max_inversion_iterations,
            seed: None,
            perturbation: 0.0,
            radial_only: false,
            fractional_split: base.fractional_split,
            lambdas: vec![1.0],
        }
    }
}

impl SolverConfig {
    pub fn framework_config(&self, lambda: f64) -> FrameworkConfig {
        FrameworkConfig {
            fractional_split: self.fractional_split,
            lambda,
            tolerance: self.tolerance,
            inner_tolerance: self.inner_tolerance,
            max_outer_iterations: self.max_outer_iterations,
            max_inversion_iterations: self.max_inversion_iterations,
            seed: self.seed,
            perturbation: self.perturbation,
            radial_only: self.radial_only,
            ..FrameworkConfig::default()
        }
    }
}

/// Hénon weights `α = β` for `henon-sweep`. Default `0, 1, …, 10`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub weights: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { weights: (0..=10).map(f64::from).collect() }
    }
}

/// Mode counts for `convergence`, compared against `reference`.
/// Defaults `[16, 32, 64]` and 128.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub modes: Vec<usize>,
    pub reference: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig { modes: vec![16, 32, 64], reference: 128 }
    }
}

/// `λ` values for `demo-nehari`. Default `[1, 10, 100, 1000]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NehariConfig {
    pub lambdas: Vec<f64>,
}

impl Default for NehariConfig {
    fn default() -> Self {
        NehariConfig { lambdas: vec![1.0, 10.0, 100.0, 1000.0] }
    }
}

/// Default directory `hamsys-out`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("hamsys-out") }
    }
}

pub fn all_frameworks() -> Vec<Framework> {
    vec![Framework::Dual, Framework::Inversion, Framework::LsReduction]
}

/// Parses `"all"` or a comma-separated list of framework names.
pub fn parse_frameworks(list: &str) -> std::result::Result<Vec<Framework>, String> {
    if list.trim() == "all" {
        return Ok(all_frameworks());
    }
    let mut out = Vec::new();
    for name in list.split(',').filter(|s| !s.trim().is_empty()) {
        let f = Framework::parse(name).ok_or_else(|| format!("unknown framework `{}`", name.trim()))?;
        if !out.contains(&f) {
            out.push(f);
        }
    }
    if out.is_empty() {
        return Err("empty framework list".into());
    }
    Ok(out)
}

fn frameworks_de<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Framework>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        One(String),
        Many(Vec<String>),
    }
    let joined = match Raw::deserialize(d)? {
        Raw::One(s) => s,
        Raw::Many(v) => v.join(","),
    };
    parse_frameworks(&joined).map_err(serde::de::Error::custom)
}

/// Flag overrides applied after the file is read.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub modes: Option<usize>,
    pub frameworks: Option<Vec<Framework>>,
}

impl RunConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Config { path: path.to_path_buf(), message: e.to_string() })?;
        cfg.validated(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text, path)
    }

    pub fn apply(mut self, o: &Overrides) -> Self {
        if let Some(dir) = &o.out {
            self.output.dir = dir.clone();
        }
        if let Some(seed) = o.seed {
            self.solver.seed = Some(seed);
        }
        if let Some(m) = o.modes {
            self.solver.modes = m;
        }
        if let Some(f) = &o.frameworks {
            self.solver.frameworks = f.clone();
        }
        self
    }

    fn validated(self, path: &Path) -> Result<Self> {
        let bad = |message: String| CliError::Config { path: path.to_path_buf(), message };
        self.domain.validated().map_err(|e| bad(format!("domain: {e}")))?;
        if self.solver.modes == 0 {
            return Err(bad("solver.modes must be positive".into()));
        }
        if self.solver.lambdas.is_empty() || self.solver.lambdas.iter().any(|l| !(*l > 0.0)) {
            return Err(bad("solver.lambdas must be a nonempty list of positive numbers".into()));
        }
        Ok(self)
    }

    /// Exponents in the dimension of the domain, or the configured one.
    pub fn exponents(&self) -> Result<ExponentPair> {
        let n = self.problem.dimension.unwrap_or_else(|| self.domain.dimension());
        Ok(ExponentPair::new(self.problem.p, self.problem.q, self.problem.alpha, self.problem.beta, n)?)
    }

    /// Exponents that must match the domain, for commands that solve.
    pub fn solvable_exponents(&self) -> Result<ExponentPair> {
        let e = self.exponents()?;
        if e.dimension != self.domain.dimension() {
            return Err(CliError::Usage(format!(
                "problem.dimension = {} does not match the {} domain",
                e.dimension,
                self.domain.kind()
            )));
        }
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::from_toml("", Path::new("x.toml")).unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn sections_parse() {
        let text = r#"
[problem]
p = 2.0
q = 3.0

[domain]
kind = "disk"
radius = 1.0

[solver]
modes = 32
frameworks = ["dual", "ls"]
lambdas = [0.5, 1.0, 2.0]

[tolerances]
level = 1e-4
"#;
        let c = RunConfig::from_toml(text, Path::new("x.toml")).unwrap();
        assert_eq!(c.domain, Domain::Disk { radius: 1.0 });
        assert_eq!(c.solver.frameworks, vec![Framework::Dual, Framework::LsReduction]);
        assert_eq!(c.tolerances.level, 1e-4);
        assert_eq!(c.tolerances.identity, 1e-6);
        assert_eq!(c.exponents().unwrap().dimension, 2);
    }

    #[test]
    fn unknown_key_names_line_and_field() {
        let err = RunConfig::from_toml("[solver]\nmodes = 8\nmodez = 3\n", Path::new("x.toml")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains("modez"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn framework_lists() {
        assert_eq!(parse_frameworks("all").unwrap(), all_frameworks());
        assert_eq!(parse_frameworks("inversion, dual").unwrap(), vec![Framework::Inversion, Framework::Dual]);
        assert!(parse_frameworks("newton").is_err());
        let c = RunConfig::from_toml("[solver]\nframeworks = \"all\"\n", Path::new("x")).unwrap();
        assert_eq!(c.solver.frameworks.len(), 3);
    }

    #[test]
    fn bad_domain_is_a_config_error() {
        let err = RunConfig::from_toml("[domain]\nkind = \"disk\"\nradius = -1.0\n", Path::new("x")).unwrap_err();
        assert!(matches!(err, CliError::Config { .. }));
    }
}
