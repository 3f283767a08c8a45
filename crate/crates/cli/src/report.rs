//! CSV writers and readers.
//!
//! All files are comma-separated with a header row (the weight CSV carries a
//! `#` metadata line instead), LF line endings, and floats printed with 17
//! significant digits so values round-trip exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fastmix_core::spectral::ConvergenceTime;
use fastmix_core::weights::WeightMatrix;
use fastmix_core::Matrix;

use crate::{CliError, Result};

/// 17 significant digits; parses back to the identical bit pattern.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_tau(tau: ConvergenceTime) -> String {
    match tau {
        ConvergenceTime::Finite(t) => fmt_float(t),
        ConvergenceTime::Infinite => "inf".to_string(),
    }
}

/// Writes a weight matrix: one metadata comment line, then `M` rows of `M`
/// comma-separated entries.
pub fn write_weights_csv(path: &Path, wm: &WeightMatrix) -> Result<()> {
    let mut out = String::new();
    let mut meta = format!("# method={}", wm.method().tag());
    if let Some(param) = wm.param() {
        let key = match wm.method().tag() {
            "kappa" => "kappa",
            _ => "alpha",
        };
        let _ = write!(meta, " {key}={}", fmt_float(param));
    }
    let _ = write!(meta, " rho={} tau={}", fmt_float(wm.rho()), fmt_tau(wm.tau()));
    out.push_str(&meta);
    out.push('\n');
    let p = wm.matrix();
    for i in 0..p.rows() {
        let row: Vec<String> = (0..p.cols()).map(|j| fmt_float(p[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(CliError::io(path))
}

/// Reads a weight CSV back into a matrix and its metadata fields.
pub fn read_weights_csv(path: &Path) -> Result<(Matrix, BTreeMap<String, String>)> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let mut metadata = BTreeMap::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if let Some(meta) = line.strip_prefix('#') {
            for token in meta.split_whitespace() {
                if let Some((key, value)) = token.split_once('=') {
                    metadata.insert(key.to_string(), value.to_string());
                }
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|cell| cell.trim().parse()).collect();
        let row = row.map_err(|e| {
            CliError::Validation(format!("{}: line {}: {e}", path.display(), idx + 1))
        })?;
        rows.push(row);
    }
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Validation(format!(
            "{}: expected a square matrix",
            path.display()
        )));
    }
    let matrix = Matrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok((matrix, metadata))
}

/// Objective trace: `iteration,rho` rows.
pub fn write_trace_csv(path: &Path, trace: &[(usize, f64)]) -> Result<()> {
    let mut out = String::from("iteration,rho\n");
    for &(iteration, rho) in trace {
        let _ = writeln!(out, "{iteration},{}", fmt_float(rho));
    }
    fs::write(path, out).map_err(CliError::io(path))
}

/// Aggregate error curve: `t,mean_delta,stderr` rows, with `t` the absolute
/// round index (`first_round` for the first entry).
pub fn write_curve_csv(
    path: &Path,
    mean: &[f64],
    stderr: &[f64],
    first_round: usize,
) -> Result<()> {
    let mut out = String::from("t,mean_delta,stderr\n");
    for (offset, (m, s)) in mean.iter().zip(stderr).enumerate() {
        let _ = writeln!(out, "{},{},{}", first_round + offset, fmt_float(*m), fmt_float(*s));
    }
    fs::write(path, out).map_err(CliError::io(path))
}

/// One row of the simulation summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub network: String,
    pub rho: f64,
    pub tau: ConvergenceTime,
    /// Absolute round at which the aggregate error settles, if it does.
    pub settling_step: Option<usize>,
    pub final_regret_mean: f64,
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut out = String::from("method,network,rho,tau,settling_step,final_regret_mean\n");
    for row in rows {
        let settling = row
            .settling_step
            .map(|s| s.to_string())
            .unwrap_or_else(|| "none".to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.method,
            row.network,
            fmt_float(row.rho),
            fmt_tau(row.tau),
            settling,
            fmt_float(row.final_regret_mean)
        );
    }
    fs::write(path, out).map_err(CliError::io(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use fastmix_core::weights::max_degree_weights;
    use fastmix_core::Graph;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 2.0 / 3.0, 39.49789020520061, 1e-300, -0.975] {
            let parsed: f64 = fmt_float(x).parse().unwrap();
            assert_eq!(parsed.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn weights_csv_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        let g = Graph::star(5).unwrap();
        let wm = max_degree_weights(&g).unwrap();
        write_weights_csv(&path, &wm).unwrap();
        let (matrix, metadata) = read_weights_csv(&path).unwrap();
        assert_eq!(&matrix, wm.matrix());
        assert_eq!(metadata["method"], "max_degree");
        let rho: f64 = metadata["rho"].parse().unwrap();
        assert_eq!(rho.to_bits(), wm.rho().to_bits());
        let alpha: f64 = metadata["alpha"].parse().unwrap();
        assert_eq!(alpha, 0.25);
    }

    #[test]
    fn summary_csv_marks_unsettled_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.csv");
        let rows = vec![SummaryRow {
            method: "kappa".into(),
            network: "star5".into(),
            rho: 0.995,
            tau: ConvergenceTime::Finite(199.5),
            settling_step: None,
            final_regret_mean: 12.5,
        }];
        write_summary_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("method,network,rho,tau,settling_step,final_regret_mean\n"));
        assert!(text.contains(",none,"));
        assert!(!text.contains('\r'));
    }
}
