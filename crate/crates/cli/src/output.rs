//! Artifact files and number formatting.

use std::fs;
use std::path::{Path, PathBuf};

use hamsys_core::solvers::FrameworkResult;
use hamsys_core::spectral::{Field, Mode, Parity};
use serde::Serialize;

use crate::error::{CliError, Result};

/// 17 significant digits, for machine-readable files.
pub fn machine(x: f64) -> String {
    format!("{x:.16e}")
}

/// 6 significant digits, for tables meant to be read.
pub fn human(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        format!("{:.*}", (5 - mag).max(0) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

/// Writes into one run directory and remembers what it wrote.
pub struct RunDir {
    root: PathBuf,
    pub artifacts: Vec<String>,
}

impl RunDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|source| CliError::Io { path: root.to_path_buf(), source })?;
        Ok(RunDir { root: root.to_path_buf(), artifacts: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
        let path = self.root.join(name);
        let err = |source| CliError::Csv { path: path.clone(), source };
        let mut w = csv::Writer::from_path(&path).map_err(err)?;
        w.write_record(header).map_err(err)?;
        for row in rows {
            w.write_record(&row).map_err(err)?;
        }
        w.flush().map_err(|source| CliError::Io { path: path.clone(), source })?;
        self.artifacts.push(name.to_string());
        Ok(name.to_string())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.root.join(name);
        let text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json { path: path.clone(), source })?;
        fs::write(&path, text + "\n").map_err(|source| CliError::Io { path, source })?;
        Ok(())
    }
}

/// File-safe form of a result label.
pub fn slug(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' }).collect::<String>().trim_matches('_').to_string()
}

pub fn mode_name(m: &Mode) -> String {
    match *m {
        Mode::Sine { n } => format!("sin{n}"),
        Mode::SineProduct { i, j } => format!("sin{i}x{j}"),
        Mode::Bessel { m, k, parity, .. } => {
            let p = match parity {
                Parity::Radial => "r",
                Parity::Cos => "c",
                Parity::Sin => "s",
            };
            format!("J{m}.{k}{p}")
        }
    }
}

pub struct FieldFiles {
    pub fields: String,
    pub coefficients: String,
    pub trace: String,
    pub profile: Option<String>,
}

/// Nodal values, coefficients, iteration trace and (on balls) a radial cut.
pub fn write_result(dir: &mut RunDir, label: &str, r: &FrameworkResult) -> Result<FieldFiles> {
    let s = slug(label);
    let (u, v) = (&r.solution.u, &r.solution.v);
    let basis = u.basis();
    let fields = dir.csv(
        &format!("fields_{s}.csv"),
        &["node", "x", "y", "weight", "u", "v"],
        (0..basis.node_count()).map(|j| {
            let x = basis.nodes()[j];
            vec![
                j.to_string(),
                machine(x[0]),
                machine(x[1]),
                machine(basis.weights()[j]),
                machine(u.nodal()[j]),
                machine(v.nodal()[j]),
            ]
        }),
    )?;
    let coefficients = dir.csv(
        &format!("coefficients_{s}.csv"),
        &["n", "mode", "eigenvalue", "u", "v"],
        (0..basis.mode_count()).map(|n| {
            vec![
                n.to_string(),
                mode_name(&basis.modes()[n]),
                machine(basis.eigenvalues()[n]),
                machine(u.coefficients()[n]),
                machine(v.coefficients()[n]),
            ]
        }),
    )?;
    let trace = dir.csv(
        &format!("trace_{s}.csv"),
        &["iter", "energy", "residual", "step"],
        r.trace.iter().map(|t| vec![t.iter.to_string(), machine(t.energy), machine(t.residual), machine(t.step)]),
    )?;
    let profile = match basis.domain().ball_radius() {
        Some(radius) => Some(write_profile(dir, &format!("profile_{s}.csv"), u, v, radius)?),
        None => None,
    };
    Ok(FieldFiles { fields, coefficients, trace, profile })
}

/// `u`, `v` along the ray from the center in the first coordinate direction.
fn write_profile(dir: &mut RunDir, name: &str, u: &Field, v: &Field, radius: f64) -> Result<String> {
    let c = u.basis().domain().center();
    let n = 200;
    dir.csv(
        name,
        &["r", "u", "v"],
        (0..=n).map(|k| {
            let r = radius * k as f64 / n as f64;
            let x = [c[0] + r, c[1]];
            vec![machine(r), machine(u.eval(x)), machine(v.eval(x))]
        }),
    )
}

/// Reads a coefficient file written by [`write_result`].
pub fn read_coefficients(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let err = |source| CliError::Csv { path: path.to_path_buf(), source };
    let mut r = csv::Reader::from_path(path).map_err(err)?;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(err)?;
        let num = |k: usize| -> Result<f64> {
            rec.get(k).and_then(|s| s.trim().parse().ok()).ok_or_else(|| CliError::Artifact {
                path: path.to_path_buf(),
                message: format!("bad number in column {k} of row {}", row + 1),
            })
        };
        a.push(num(3)?);
        b.push(num(4)?);
    }
    Ok((a, b))
}

/// Plain-text table with left-aligned first column.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (k, cell) in row.iter().enumerate().take(cols) {
            width[k] = width[k].max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .enumerate()
            .map(|(k, c)| if k == 0 { format!("{c:<w$}", w = width[k]) } else { format!("{c:>w$}", w = width[k]) })
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = line(header.to_vec());
    for row in rows {
        out.push('\n');
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits() {
        assert_eq!(human(1.016314223937781), "1.01631");
        assert_eq!(human(21.9807129126069), "21.9807");
        assert_eq!(human(1.5e-7), "1.50000e-7");
        assert_eq!(human(-3.0e8), "-3.00000e8");
        let m = machine(std::f64::consts::PI);
        assert_eq!(m.parse::<f64>().unwrap(), std::f64::consts::PI);
        assert_eq!(m.split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("ls_reduction[lambda=2]"), "ls_reduction_lambda_2");
        assert_eq!(slug("dual"), "dual");
    }
}
