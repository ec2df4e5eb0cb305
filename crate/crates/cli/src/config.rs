//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use c2flow::diagnostics::Quantity;
use c2flow::scenario::{
    characteristic_time, FlowScenario, FlowSetup, CS2, KOLMOGOROV_NU, KOLMOGOROV_STEPS, DEFAULT_PROBES,
    STEPS_PER_T, TWO_MODE_DT, TWO_MODE_NU, TWO_MODE_STEPS,
};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Logistic,
    Kolmogorov,
    TwoMode,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Logistic => "logistic",
            Scenario::Kolmogorov => "kolmogorov",
            Scenario::TwoMode => "two_mode",
        }
    }
}

/// Solvers in canonical execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Solver {
    C2,
    Nshj,
    Ns,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::C2 => "c2",
            Solver::Nshj => "nshj",
            Solver::Ns => "ns",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "c2" => Some(Solver::C2),
            "nshj" => Some(Solver::Nshj),
            "ns" => Some(Solver::Ns),
            _ => None,
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const KEYS: &[&str] = &[
    "scenario",
    "solvers",
    "grid_n",
    "dt",
    "steps",
    "nu",
    "cs2",
    "u0",
    "f0",
    "u1",
    "u2",
    "f1",
    "f2",
    "a",
    "b",
    "f",
    "g2",
    "x0",
    "probes",
    "quantities",
    "snapshot_every",
    "steady_window",
    "steady_tol",
    "output_dir",
    "golden_dir",
    "allow_large_memory",
];

/// Fully resolved run parameters. Keys absent from the file take the
/// scenario defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub solvers: Vec<Solver>,
    pub grid_n: usize,
    pub dt: f64,
    pub steps: usize,
    pub nu: f64,
    pub cs2: f64,
    pub u0: f64,
    pub f0: f64,
    pub u1: f64,
    pub u2: f64,
    pub f1: f64,
    pub f2: f64,
    /// Explicit decay rate; when absent the logistic runs sweep `g2`.
    pub a: Option<f64>,
    pub b: f64,
    pub f: f64,
    pub g2: Vec<f64>,
    pub x0: f64,
    pub probes: Vec<(f64, f64)>,
    pub quantities: Vec<Quantity>,
    /// Snapshot cadence in steps; 0 writes only the final state.
    pub snapshot_every: usize,
    pub steady_window: usize,
    pub steady_tol: f64,
    pub output_dir: PathBuf,
    /// Where `verify` looks for reference CSVs; defaults to `output_dir`.
    pub golden_dir: Option<PathBuf>,
    pub allow_large_memory: bool,
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {lineno}: expected `key = value`")))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(CliError::Config(format!("line {lineno}: unknown key `{key}`")));
            }
            if map.insert(key.to_string(), (lineno, value.trim().to_string())).is_some() {
                return Err(CliError::Config(format!("line {lineno}: duplicate key `{key}`")));
            }
        }
        Ok(Self { map })
    }

    fn raw(&self, key: &str) -> Option<&(usize, String)> {
        self.map.get(key)
    }

    fn get<V>(&self, key: &str, parse: impl Fn(&str) -> Option<V>) -> Result<Option<V>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some((lineno, v)) => parse(v)
                .map(Some)
                .ok_or_else(|| CliError::Config(format!("line {lineno}: invalid value `{v}` for `{key}`"))),
        }
    }

    fn real(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key, |v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
    }

    fn real_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        Ok(self.real(key)?.unwrap_or(default))
    }

    fn count(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.get(key, |v| v.parse::<usize>().ok())
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

fn parse_list<V>(v: &str, item: impl Fn(&str) -> Option<V>) -> Option<Vec<V>> {
    v.split(',').map(|s| item(s.trim())).collect()
}

/// `(x, y), (x, y), ...`
fn parse_probes(v: &str) -> Option<Vec<(f64, f64)>> {
    let compact: String = v.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Some(Vec::new());
    }
    let inner = compact.strip_prefix('(')?.strip_suffix(')')?;
    inner
        .split("),(")
        .map(|pair| {
            let (x, y) = pair.split_once(',')?;
            let (x, y) = (x.parse::<f64>().ok()?, y.parse::<f64>().ok()?);
            (x.is_finite() && y.is_finite()).then_some((x, y))
        })
        .collect()
}

pub fn parse_solvers(v: &str) -> Result<Vec<Solver>, CliError> {
    let mut solvers = parse_list(v, Solver::parse)
        .ok_or_else(|| CliError::Config(format!("invalid solver list `{v}` (expected c2, nshj, ns)")))?;
    solvers.sort();
    solvers.dedup();
    if solvers.is_empty() {
        return Err(CliError::Config("solver list is empty".into()));
    }
    Ok(solvers)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses config text; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let e = Entries::parse(text)?;
        let scenario = match e.raw("scenario").map(|(_, v)| v.as_str()) {
            Some("logistic") => Scenario::Logistic,
            Some("kolmogorov") => Scenario::Kolmogorov,
            Some("two_mode") => Scenario::TwoMode,
            Some(other) => return Err(CliError::Config(format!("unknown scenario `{other}`"))),
            None => return Err(CliError::Config("missing required key `scenario`".into())),
        };

        let nu = e.real_or(
            "nu",
            if scenario == Scenario::TwoMode { TWO_MODE_NU } else { KOLMOGOROV_NU },
        )?;
        let (default_dt, default_steps) = match scenario {
            Scenario::Logistic => (0.01, 700),
            Scenario::Kolmogorov => (
                characteristic_time(nu, 1.0) / STEPS_PER_T as f64,
                KOLMOGOROV_STEPS,
            ),
            Scenario::TwoMode => (TWO_MODE_DT, TWO_MODE_STEPS),
        };
        let dt = e.real_or("dt", default_dt)?;
        let u1 = e.real_or("u1", 0.05)?;
        let f1 = e.real_or("f1", 0.01)?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };

        let cfg = RunConfig {
            scenario,
            solvers: match e.raw("solvers") {
                Some((lineno, v)) => parse_solvers(v).map_err(|err| CliError::Config(format!("line {lineno}: {err}")))?,
                None => vec![Solver::Nshj, Solver::Ns],
            },
            grid_n: e.count("grid_n")?.unwrap_or(64),
            dt,
            steps: e.count("steps")?.unwrap_or(default_steps),
            nu,
            cs2: e.real_or("cs2", CS2)?,
            u0: e.real_or("u0", 0.05)?,
            f0: e.real_or("f0", 0.009)?,
            u1,
            u2: e.real_or("u2", u1 / 8.0)?,
            f1,
            f2: e.real_or("f2", f1 / 8.0)?,
            a: e.real("a")?,
            b: e.real_or("b", 1.0)?,
            f: e.real_or("f", 1.0)?,
            g2: e
                .get("g2", |v| parse_list(v, |s| s.parse::<f64>().ok().filter(|x| x.is_finite())))?
                .unwrap_or_else(|| vec![0.05, 0.1, 0.2]),
            x0: e.real_or("x0", 0.0)?,
            probes: e.get("probes", parse_probes)?.unwrap_or_else(|| DEFAULT_PROBES.to_vec()),
            quantities: e
                .get("quantities", |v| parse_list(v, Quantity::parse))?
                .unwrap_or_else(|| vec![Quantity::Vx]),
            snapshot_every: e.count("snapshot_every")?.unwrap_or(0),
            steady_window: match e.count("steady_window")? {
                Some(w) => w,
                None => (characteristic_time(nu, 1.0) / dt).round().max(1.0) as usize,
            },
            steady_tol: e.real_or("steady_tol", 1e-3)?,
            output_dir: resolve(e.get("output_dir", |v| Some(PathBuf::from(v)))?.unwrap_or_else(|| "out".into())),
            golden_dir: e.get("golden_dir", |v| Some(PathBuf::from(v)))?.map(resolve),
            allow_large_memory: e.get("allow_large_memory", parse_bool)?.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if !(self.dt > 0.0) {
            return fail(format!("dt must be > 0, got {}", self.dt));
        }
        if self.scenario == Scenario::Logistic {
            if self.a.is_none() && self.g2.is_empty() {
                return fail("logistic runs need `a` or a non-empty `g2` list".into());
            }
            return Ok(());
        }
        if self.grid_n < 4 || self.grid_n % 2 != 0 {
            return fail(format!("grid_n must be even and >= 4, got {}", self.grid_n));
        }
        if !(self.nu > 0.0) || !(self.cs2 > 0.0) {
            return fail("nu and cs2 must be > 0".into());
        }
        if self.steady_window == 0 || !(self.steady_tol > 0.0) {
            return fail("steady_window must be >= 1 and steady_tol > 0".into());
        }
        if self.grid_n >= 64 && self.solvers.contains(&Solver::C2) && !self.allow_large_memory {
            let dim = 4 * self.grid_n * self.grid_n;
            let gib = (2 * dim * dim * 8) as f64 / (1u64 << 30) as f64;
            return fail(format!(
                "c2 at grid_n = {} needs about {gib:.1} GiB of dense storage; \
                 set allow_large_memory = true or pass --allow-large-memory",
                self.grid_n
            ));
        }
        Ok(())
    }

    /// The fluid experiment described by this config.
    pub fn flow_setup(&self) -> Option<FlowSetup<f64>> {
        let scenario = match self.scenario {
            Scenario::Logistic => return None,
            Scenario::Kolmogorov => FlowScenario::Kolmogorov { u0: self.u0, f0: self.f0 },
            Scenario::TwoMode => FlowScenario::TwoMode {
                u1: self.u1,
                u2: self.u2,
                f1: self.f1,
                f2: self.f2,
            },
        };
        Some(FlowSetup {
            scenario,
            n: self.grid_n,
            nu: self.nu,
            cs2: self.cs2,
            dt: self.dt,
            steps: self.steps,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, CliError> {
        RunConfig::parse(text, Path::new("/tmp"))
    }

    #[test]
    fn kolmogorov_defaults() {
        let c = parse("scenario = kolmogorov\n").unwrap();
        assert_eq!(c.grid_n, 64);
        assert_eq!(c.steps, 2500);
        assert!((c.dt - 0.012).abs() < 1e-15);
        assert!((c.nu - 1.0 / 6.0).abs() < 1e-15);
        assert!((c.cs2 - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.u0, 0.05);
        assert_eq!(c.steady_window, 500);
        assert_eq!(c.probes, DEFAULT_PROBES.to_vec());
        assert_eq!(c.output_dir, PathBuf::from("/tmp/out"));
    }

    #[test]
    fn two_mode_defaults() {
        let c = parse("scenario = two_mode").unwrap();
        assert_eq!((c.dt, c.steps, c.nu), (0.03, 3000, 1.0 / 16.0));
        assert_eq!((c.u2, c.f2), (0.05 / 8.0, 0.01 / 8.0));
    }

    #[test]
    fn comments_lists_and_probes() {
        let c = parse(
            "# fig 1\nscenario = logistic # inline\ng2 = 0.05, 0.2\nprobes = (0, 0), (1.5, 2)\nsolvers = ns, c2, ns\n",
        )
        .unwrap();
        assert_eq!(c.g2, vec![0.05, 0.2]);
        assert_eq!(c.probes, vec![(0.0, 0.0), (1.5, 2.0)]);
        assert_eq!(c.solvers, vec![Solver::C2, Solver::Ns]);
        assert_eq!((c.dt, c.steps, c.x0), (0.01, 700, 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse("").is_err());
        assert!(parse("scenario = vortex").is_err());
        assert!(parse("scenario = kolmogorov\nbogus = 1").is_err());
        assert!(parse("scenario = kolmogorov\ndt = 1\ndt = 2").is_err());
        assert!(parse("scenario = kolmogorov\ngrid_n = 7").is_err());
        assert!(parse("scenario = kolmogorov\ndt = -1").is_err());
        assert!(parse("scenario = kolmogorov\nsolvers = c2, lbm").is_err());
        assert!(parse("scenario = kolmogorov\nno equals sign").is_err());
    }

    #[test]
    fn large_c2_needs_acknowledgment() {
        assert!(parse("scenario = kolmogorov\nsolvers = c2").is_err());
        assert!(parse("scenario = kolmogorov\nsolvers = c2\nallow_large_memory = true").is_ok());
        assert!(parse("scenario = kolmogorov\nsolvers = c2\ngrid_n = 32").is_ok());
    }
}
