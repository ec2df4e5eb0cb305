//! Scenario execution and artifact emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use c2flow::carleman::{assemble_operators, lift, readout, C2Stepper};
use c2flow::diagnostics::{
    incompressibility_report, max_abs_error, rel_l2_error, reynolds, sample_probes, steady_detector,
    steady_velocity_scale, ComparisonReport, FlowFields, ProbeSeries, SteadyVerdict,
};
use c2flow::grid::{Field2D, GridSpec};
use c2flow::logistic::{attractors, c2_fixed_point, c2_logistic, euler_logistic, LogisticParams, Trajectory};
use c2flow::nshj::{evolve, FluidState, PhysicsParams};
use c2flow::reference_ns::{ReferenceNs, VorticityState};
use c2flow::scenario::FlowSetup;

use crate::config::{RunConfig, Solver};
use crate::error::CliError;
use crate::output::{fmt_real, write_probe_csv, write_snapshot, ProbeRow, SnapshotMeta};
use crate::plot::{emit_plot, PlotSeries};

pub const PROBE_FILE: &str = "probes.csv";
pub const REPORT_FILE: &str = "report.txt";
pub const PLOT_FILE: &str = "probes.svg";
pub const SNAPSHOT_DIR: &str = "snapshots";

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// Scalars held in lifted-state storage: `j1`, `j2` and stepper scratch.
    pub dense_elements: usize,
    pub report: String,
}

/// Runs the configured experiment and writes every artifact into
/// `cfg.output_dir`. On divergence the outputs gathered so far are still
/// written before the error is returned.
pub fn run(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::io(&cfg.output_dir, e))?;
    match cfg.flow_setup() {
        None => run_logistic(cfg),
        Some(setup) => run_flow(cfg, &setup),
    }
}

struct SolverRun {
    solver: Solver,
    probes: Vec<ProbeSeries<f64>>,
    vx_history: Vec<Field2D<f64>>,
    final_fields: Option<FlowFields<f64>>,
    final_state: Option<FluidState<f64>>,
}

struct Recorder<'a> {
    cfg: &'a RunConfig,
    run: SolverRun,
    snapshots: Vec<PathBuf>,
    io_error: Option<CliError>,
}

impl<'a> Recorder<'a> {
    fn new(cfg: &'a RunConfig, solver: Solver, grid: &GridSpec<f64>) -> Self {
        let probes = cfg
            .probes
            .iter()
            .flat_map(|&loc| cfg.quantities.iter().map(move |&q| ProbeSeries::new(loc, grid, q)))
            .collect();
        Self {
            cfg,
            run: SolverRun {
                solver,
                probes,
                vx_history: Vec::with_capacity(cfg.steps + 1),
                final_fields: None,
                final_state: None,
            },
            snapshots: Vec::new(),
            io_error: None,
        }
    }

    fn record(&mut self, step: usize, fields: FlowFields<f64>, state: impl FnOnce(&FlowFields<f64>) -> FluidState<f64>) {
        let t = step as f64 * self.cfg.dt;
        // Times are strictly increasing by construction.
        let _ = sample_probes(&fields, t, &mut self.run.probes);
        self.run.vx_history.push(fields.vx.clone());
        let every = self.cfg.snapshot_every;
        let periodic = every > 0 && step % every == 0;
        if periodic || step == self.cfg.steps {
            let state = state(&fields);
            if periodic && self.io_error.is_none() {
                if let Err(e) = self.snapshot(step, &state) {
                    self.io_error = Some(e);
                }
            }
            self.run.final_state = Some(state);
        }
        self.run.final_fields = Some(fields);
    }

    fn snapshot(&mut self, step: usize, state: &FluidState<f64>) -> Result<(), CliError> {
        let dir = self.cfg.output_dir.join(SNAPSHOT_DIR);
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let path = dir.join(format!("{}_{step:06}.csv", self.run.solver));
        let meta = SnapshotMeta {
            scenario: self.cfg.scenario.name(),
            solver: self.run.solver.name(),
            dt: self.cfg.dt,
            step,
        };
        write_snapshot(&path, state, &meta)?;
        self.snapshots.push(path);
        Ok(())
    }

    /// Surfaces deferred I/O errors and writes the final snapshot if the
    /// cadence did not already cover it.
    fn finish(&mut self) -> Result<(), CliError> {
        if let Some(e) = self.io_error.take() {
            return Err(e);
        }
        if self.cfg.snapshot_every == 0 || self.cfg.steps % self.cfg.snapshot_every != 0 {
            if let Some(state) = self.run.final_state.take() {
                let written = self.snapshot(self.cfg.steps, &state);
                self.run.final_state = Some(state);
                written?;
            }
        }
        Ok(())
    }
}

/// The reference path carries no density or potential; its snapshot is the
/// equivalent NSHJ state `rho = 1, chi = 0, A = v`.
fn ns_as_fluid(fields: &FlowFields<f64>) -> FluidState<f64> {
    let grid = *fields.vx.grid();
    FluidState {
        rho: Field2D::constant(grid, 1.0),
        chi: Field2D::zeros(grid),
        ax: fields.vx.clone(),
        ay: fields.vy.clone(),
    }
}

fn solver_error(solver: impl std::fmt::Display, source: c2flow::Error) -> CliError {
    CliError::Solver { solver: solver.to_string(), source }
}

fn run_solver(
    cfg: &RunConfig,
    solver: Solver,
    s0: &FluidState<f64>,
    p: &PhysicsParams<f64>,
    dense: &mut usize,
) -> (Result<Vec<PathBuf>, CliError>, SolverRun) {
    let grid = *s0.grid();
    let mut rec = Recorder::new(cfg, solver, &grid);
    let result: Result<(), CliError> = (|| match solver {
        Solver::Nshj => {
            rec.record(0, FlowFields::from_fluid(s0), |_| s0.clone());
            evolve(s0, p, cfg.steps, |step, s| rec.record(step, FlowFields::from_fluid(s), |_| s.clone()))
                .map(|_| ())
                .map_err(|e| solver_error(solver, e))
        }
        Solver::C2 => {
            let ops = assemble_operators(grid, p).map_err(|e| solver_error(solver, e))?;
            let mut state = lift(s0);
            let mut stepper = C2Stepper::new(ops.dim());
            *dense += state.j1.len() + state.j2.len() + stepper.allocated_elements();
            rec.record(0, FlowFields::from_fluid(s0), |_| s0.clone());
            for step in 1..=cfg.steps {
                stepper.step(&mut state, &ops).map_err(|e| solver_error(solver, e))?;
                let fluid = readout(&state, &grid).map_err(|e| solver_error(solver, e))?;
                rec.record(step, FlowFields::from_fluid(&fluid), move |_| fluid);
            }
            Ok(())
        }
        Solver::Ns => {
            let ns = ReferenceNs::new(grid);
            let (vx, vy) = c2flow::nshj::velocity(s0);
            let w0 = VorticityState::from_velocity(&vx, &vy).map_err(|e| solver_error(solver, e))?;
            let mut fields_err = None;
            let mut observe = |step: usize, w: &VorticityState<f64>| match FlowFields::from_vorticity(&ns, w) {
                Ok(fields) => rec.record(step, fields, ns_as_fluid),
                Err(e) => {
                    fields_err.get_or_insert(e);
                }
            };
            observe(0, &w0);
            ns.evolve(&w0, p, cfg.steps, &mut observe).map_err(|e| solver_error(solver, e))?;
            match fields_err {
                Some(e) => Err(solver_error(solver, e)),
                None => Ok(()),
            }
        }
    })();
    let result = result.and_then(|()| rec.finish()).map(|()| std::mem::take(&mut rec.snapshots));
    (result, rec.run)
}

fn probe_rows(runs: &[SolverRun]) -> Vec<ProbeRow<'_>> {
    runs.iter()
        .flat_map(|r| {
            r.probes.iter().flat_map(move |s| {
                s.samples.iter().map(move |&(time, value)| ProbeRow {
                    time,
                    quantity: s.quantity.name(),
                    probe: s.location,
                    solver: r.solver.name(),
                    value,
                })
            })
        })
        .collect()
}

fn probe_plot(runs: &[SolverRun]) -> Vec<PlotSeries> {
    runs.iter()
        .flat_map(|r| {
            r.probes.iter().map(move |s| PlotSeries {
                label: format!(
                    "{} {} ({}, {})",
                    r.solver,
                    s.quantity.name(),
                    fmt_real(s.location.0),
                    fmt_real(s.location.1)
                ),
                points: s.samples.clone(),
            })
        })
        .collect()
}

fn verdict(cfg: &RunConfig, run: &SolverRun) -> SteadyVerdict {
    steady_detector(&run.vx_history, cfg.steady_window, cfg.steady_tol)
        .unwrap_or(SteadyVerdict { steady: false, first_index: None })
}

fn compare(cfg: &RunConfig, test: &SolverRun, reference: &SolverRun) -> Option<ComparisonReport<f64>> {
    let (tf, rf) = (test.final_fields.as_ref()?, reference.final_fields.as_ref()?);
    let u_s = steady_velocity_scale(&rf.vx);
    let density_source = match test.solver {
        Solver::Ns => reference.final_state.as_ref()?,
        _ => test.final_state.as_ref()?,
    };
    let (mach2, max_density_fluct) = incompressibility_report(density_source, cfg.cs2, u_s);
    let v = verdict(cfg, test);
    Some(ComparisonReport {
        scenario: cfg.scenario.name().into(),
        test_solver: test.solver.name().into(),
        reference_solver: reference.solver.name().into(),
        reynolds: reynolds(u_s, cfg.grid_n, cfg.nu),
        rel_l2_error: rel_l2_error(&tf.vx, &rf.vx).unwrap_or(f64::NAN),
        max_abs_error: max_abs_error(&tf.vx, &rf.vx).ok()?,
        mach2,
        max_density_fluct,
        steady: v.steady,
        steps_to_steady: v.first_index,
    })
}

fn flow_report(cfg: &RunConfig, setup: &FlowSetup<f64>, runs: &[SolverRun], failure: Option<&CliError>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# c2flow run report");
    let _ = writeln!(out, "scenario = {}", cfg.scenario.name());
    let _ = writeln!(out, "grid_n = {}", setup.n);
    let _ = writeln!(out, "dt = {}", fmt_real(setup.dt));
    let _ = writeln!(out, "steps = {}", setup.steps);
    let _ = writeln!(out, "nu = {}", fmt_real(setup.nu));
    let _ = writeln!(out, "cs2 = {}", fmt_real(setup.cs2));
    if let Some(e) = failure {
        let _ = writeln!(out, "status = failed: {e}");
    } else {
        let _ = writeln!(out, "status = ok");
    }
    for r in runs {
        let Some(fields) = r.final_fields.as_ref() else { continue };
        let u_s = steady_velocity_scale(&fields.vx);
        let v = verdict(cfg, r);
        let _ = writeln!(out, "\n[solver {}]", r.solver);
        let _ = writeln!(out, "steps_completed = {}", r.vx_history.len().saturating_sub(1));
        let _ = writeln!(out, "u_s = {}", fmt_real(u_s));
        let _ = writeln!(out, "reynolds = {}", fmt_real(reynolds(u_s, cfg.grid_n, cfg.nu)));
        let _ = writeln!(out, "steady = {}", v.steady);
        let _ = writeln!(out, "steps_to_steady = {}", v.first_index.map_or("none".into(), |i| i.to_string()));
        if r.solver != Solver::Ns {
            if let Some(state) = r.final_state.as_ref() {
                let (mach2, fluct) = incompressibility_report(state, cfg.cs2, u_s);
                let _ = writeln!(out, "mach2 = {}", fmt_real(mach2));
                let _ = writeln!(out, "max_density_fluct = {}", fmt_real(fluct));
            }
        }
    }
    let find = |s: Solver| runs.iter().find(|r| r.solver == s);
    for (test, reference) in [(Solver::C2, Solver::Nshj), (Solver::Ns, Solver::Nshj), (Solver::C2, Solver::Ns)] {
        let (Some(t), Some(r)) = (find(test), find(reference)) else { continue };
        let Some(c) = compare(cfg, t, r) else { continue };
        let _ = writeln!(out, "\n[compare {} vs {}]", c.test_solver, c.reference_solver);
        let _ = writeln!(out, "reynolds = {}", fmt_real(c.reynolds));
        let _ = writeln!(out, "rel_l2_error = {}", fmt_real(c.rel_l2_error));
        let _ = writeln!(out, "max_abs_error = {}", fmt_real(c.max_abs_error));
        let _ = writeln!(out, "mach2 = {}", fmt_real(c.mach2));
        let _ = writeln!(out, "max_density_fluct = {}", fmt_real(c.max_density_fluct));
        let _ = writeln!(out, "steady = {}", c.steady);
        let _ = writeln!(
            out,
            "steps_to_steady = {}",
            c.steps_to_steady.map_or("none".into(), |i| i.to_string())
        );
    }
    out
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn run_flow(cfg: &RunConfig, setup: &FlowSetup<f64>) -> Result<RunSummary, CliError> {
    let s0 = setup.initial_state().map_err(|e| CliError::Config(e.to_string()))?;
    let p = setup.physics().map_err(|e| CliError::Config(e.to_string()))?;
    let mut dense = 0;
    let mut runs = Vec::new();
    let mut files = Vec::new();
    let mut failure = None;
    for &solver in &cfg.solvers {
        log::info!("running {solver} for {} steps on a {}x{} grid", cfg.steps, cfg.grid_n, cfg.grid_n);
        let (result, run) = run_solver(cfg, solver, &s0, &p, &mut dense);
        runs.push(run);
        match result {
            Ok(snaps) => files.extend(snaps),
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }

    let out = &cfg.output_dir;
    let probe_path = out.join(PROBE_FILE);
    write_probe_csv(&probe_path, probe_rows(&runs))?;
    let plot_path = out.join(PLOT_FILE);
    emit_plot(&probe_plot(&runs), "t", "probe value", &plot_path)?;
    let report = flow_report(cfg, setup, &runs, failure.as_ref());
    let report_path = out.join(REPORT_FILE);
    write_text(&report_path, &report)?;
    if let Some(e) = failure {
        return Err(e);
    }
    files.splice(0..0, [probe_path, plot_path, report_path]);
    Ok(RunSummary { files, dense_elements: dense, report })
}

struct LogisticCase {
    g2: f64,
    params: LogisticParams<f64>,
    euler: Option<Trajectory<f64>>,
    c2: Option<Trajectory<f64>>,
}

fn curves(case: &LogisticCase) -> Vec<(&'static str, &Trajectory<f64>)> {
    [("euler", case.euler.as_ref()), ("c2", case.c2.as_ref())]
        .into_iter()
        .filter_map(|(name, t)| t.map(|t| (name, t)))
        .collect()
}

fn run_logistic(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let params: Vec<(f64, LogisticParams<f64>)> = match cfg.a {
        Some(a) => {
            let p = LogisticParams::new(a, cfg.b, cfg.f).map_err(|e| CliError::Config(e.to_string()))?;
            vec![(p.g2(), p)]
        }
        None => cfg
            .g2
            .iter()
            .map(|&g2| LogisticParams::from_g2(cfg.b, cfg.f, g2).map(|p| (g2, p)))
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Config(e.to_string()))?,
    };

    let mut cases = Vec::new();
    let mut failure = None;
    for (g2, params) in params {
        let mut case = LogisticCase { g2, params, euler: None, c2: None };
        match euler_logistic(cfg.x0, &params, cfg.dt, cfg.steps) {
            Ok(t) => case.euler = Some(t),
            Err(e) => failure = Some(solver_error("euler", e)),
        }
        if failure.is_none() {
            match c2_logistic(cfg.x0, &params, cfg.dt, cfg.steps) {
                Ok(t) => case.c2 = Some(t),
                Err(e) => failure = Some(solver_error("c2", e)),
            }
        }
        cases.push(case);
        if failure.is_some() {
            break;
        }
    }

    let mut rows = Vec::new();
    let mut plot = Vec::new();
    for case in &cases {
        for (solver, traj) in curves(case) {
            let points: Vec<(f64, f64)> = (0..traj.len()).map(|i| (traj.time(i), traj.sample(i)[0])).collect();
            rows.extend(points.iter().map(|&(time, value)| ProbeRow {
                time,
                quantity: "x",
                probe: (case.g2, 0.0),
                solver,
                value,
            }));
            plot.push(PlotSeries { label: format!("{solver} g2={}", fmt_real(case.g2)), points });
        }
    }

    let out = &cfg.output_dir;
    let probe_path = out.join(PROBE_FILE);
    write_probe_csv(&probe_path, rows)?;
    let plot_path = out.join(PLOT_FILE);
    emit_plot(&plot, "t", "x", &plot_path)?;

    let mut report = String::new();
    let _ = writeln!(report, "# c2flow run report");
    let _ = writeln!(report, "scenario = logistic");
    let _ = writeln!(report, "dt = {}", fmt_real(cfg.dt));
    let _ = writeln!(report, "steps = {}", cfg.steps);
    let _ = writeln!(report, "x0 = {}", fmt_real(cfg.x0));
    let _ = writeln!(
        report,
        "status = {}",
        failure.as_ref().map_or("ok".to_string(), |e| format!("failed: {e}"))
    );
    for case in &cases {
        let p = &case.params;
        let _ = writeln!(report, "\n[g2 {}]", fmt_real(case.g2));
        let _ = writeln!(report, "a = {}", fmt_real(p.a));
        let _ = writeln!(report, "b = {}", fmt_real(p.b));
        let _ = writeln!(report, "f = {}", fmt_real(p.f));
        let opt = |v: Option<f64>| v.map_or("none".to_string(), fmt_real);
        let _ = writeln!(report, "x_stable = {}", opt(attractors(p).ok().map(|a| a.0)));
        let _ = writeln!(report, "c2_fixed_point = {}", opt(c2_fixed_point(p).ok()));
        let last = |t: &Option<Trajectory<f64>>| t.as_ref().and_then(|t| t.last().map(|s| s[0]));
        let _ = writeln!(report, "euler_final = {}", opt(last(&case.euler)));
        let _ = writeln!(report, "c2_final = {}", opt(last(&case.c2)));
    }
    let report_path = out.join(REPORT_FILE);
    write_text(&report_path, &report)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(RunSummary { files: vec![probe_path, plot_path, report_path], dense_elements: 0, report })
}
