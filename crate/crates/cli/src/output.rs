//! CSV writers for probe series and field snapshots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use c2flow::nshj::FluidState;

use crate::error::CliError;

pub const PROBE_HEADER: &str = "time,quantity,probe_x,probe_y,solver,value";

/// Shortest plain decimal or exponent form carrying 17 significant digits,
/// in the style of C's `%.17g`.
pub fn fmt_real(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// One row of the probe CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow<'a> {
    pub time: f64,
    pub quantity: &'a str,
    pub probe: (f64, f64),
    pub solver: &'a str,
    pub value: f64,
}

pub fn write_probe_csv<'a>(path: &Path, rows: impl IntoIterator<Item = ProbeRow<'a>>) -> Result<(), CliError> {
    let mut out = String::from(PROBE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_real(r.time),
            r.quantity,
            fmt_real(r.probe.0),
            fmt_real(r.probe.1),
            r.solver,
            fmt_real(r.value)
        );
    }
    fs::write(path, out).map_err(|e| CliError::io(path, e))
}

pub struct SnapshotMeta<'a> {
    pub scenario: &'a str,
    pub solver: &'a str,
    pub dt: f64,
    pub step: usize,
}

pub fn write_snapshot(path: &Path, state: &FluidState<f64>, meta: &SnapshotMeta<'_>) -> Result<(), CliError> {
    let grid = state.grid();
    let n = grid.n();
    let mut out = String::new();
    let _ = writeln!(out, "# n = {n}");
    let _ = writeln!(out, "# dt = {}", fmt_real(meta.dt));
    let _ = writeln!(out, "# step = {}", meta.step);
    let _ = writeln!(out, "# scenario = {}", meta.scenario);
    let _ = writeln!(out, "# solver = {}", meta.solver);
    out.push_str("ix,iy,rho,chi,ax,ay\n");
    for iy in 0..n {
        for ix in 0..n {
            let _ = writeln!(
                out,
                "{ix},{iy},{},{},{},{}",
                fmt_real(state.rho.at(ix, iy)),
                fmt_real(state.chi.at(ix, iy)),
                fmt_real(state.ax.at(ix, iy)),
                fmt_real(state.ay.at(ix, iy))
            );
        }
    }
    fs::write(path, out).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_formatting_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-9, 6.02e23, 0.054, 1e-5, 123456.789, f64::MIN_POSITIVE] {
            let s = fmt_real(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(fmt_real(0.0), "0");
        assert_eq!(fmt_real(0.5), "0.5");
        assert_eq!(fmt_real(12.0), "12");
        assert_eq!(fmt_real(0.1), "0.10000000000000001");
        assert_eq!(fmt_real(1e-7), "9.9999999999999995e-8");
    }
}
