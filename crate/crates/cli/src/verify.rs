//! Replays a run and compares its CSV outputs against stored golden files.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::run::run;

pub const ABS_TOL: f64 = 1e-9;
pub const REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub files_compared: usize,
    pub cells_compared: usize,
    pub max_abs_diff: f64,
}

fn csv_files(root: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).map_err(|e| CliError::io(&dir, e))? {
            let path = entry.map_err(|e| CliError::io(&dir, e))?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|x| x == "csv") {
                out.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}

fn cells_match(a: &str, b: &str, max_diff: &mut f64) -> bool {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => {
            let d = (x - y).abs();
            *max_diff = max_diff.max(d);
            d <= ABS_TOL + REL_TOL * y.abs()
        }
        _ => a == b,
    }
}

/// Compares two CSV texts; comment lines must match exactly, numeric cells
/// within tolerance, other cells exactly.
pub fn compare_csv(name: &str, replay: &str, golden: &str, report: &mut VerifyReport) -> Result<(), CliError> {
    let (r_lines, g_lines): (Vec<&str>, Vec<&str>) = (replay.lines().collect(), golden.lines().collect());
    if r_lines.len() != g_lines.len() {
        return Err(CliError::Mismatch(format!(
            "{name}: {} lines replayed, {} in golden file",
            r_lines.len(),
            g_lines.len()
        )));
    }
    for (i, (r, g)) in r_lines.iter().zip(&g_lines).enumerate() {
        let bad = || CliError::Mismatch(format!("{name}:{}: `{r}` vs golden `{g}`", i + 1));
        if r.starts_with('#') || g.starts_with('#') {
            if r != g {
                return Err(bad());
            }
            continue;
        }
        let (rc, gc): (Vec<&str>, Vec<&str>) = (r.split(',').collect(), g.split(',').collect());
        if rc.len() != gc.len() {
            return Err(bad());
        }
        for (a, b) in rc.iter().zip(&gc) {
            report.cells_compared += 1;
            if !cells_match(a, b, &mut report.max_abs_diff) {
                return Err(bad());
            }
        }
    }
    report.files_compared += 1;
    Ok(())
}

/// Re-runs `cfg` in a scratch directory and checks every CSV it produces
/// against the file of the same relative path under the golden directory
/// (`golden_dir`, or `output_dir` when unset).
pub fn verify(cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    let golden = cfg.golden_dir.clone().unwrap_or_else(|| cfg.output_dir.clone());
    if !golden.is_dir() {
        return Err(CliError::Mismatch(format!("golden directory {} does not exist", golden.display())));
    }
    let scratch = tempfile::tempdir().map_err(|e| CliError::io(std::env::temp_dir(), e))?;
    let mut replay_cfg = cfg.clone();
    replay_cfg.output_dir = scratch.path().to_path_buf();
    run(&replay_cfg)?;

    let mut report = VerifyReport { files_compared: 0, cells_compared: 0, max_abs_diff: 0.0 };
    for path in csv_files(scratch.path())? {
        let rel = path.strip_prefix(scratch.path()).expect("file under scratch dir");
        let golden_path = golden.join(rel);
        let name = rel.display().to_string();
        let replay = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let stored = fs::read_to_string(&golden_path)
            .map_err(|e| CliError::Mismatch(format!("{name}: golden file unreadable ({e})")))?;
        compare_csv(&name, &replay, &stored, &mut report)?;
    }
    Ok(report)
}
