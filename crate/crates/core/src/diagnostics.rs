//! Measurements taken on solver output: Reynolds number, field errors,
//! steadiness, density fluctuations and point probes.

use crate::error::{Error, Result};
use crate::grid::{nearest_node, Field2D, GridSpec};
use crate::nshj::{velocity, vorticity, FluidState};
use crate::reference_ns::{ReferenceNs, VorticityState};
use crate::scalar::Real;

/// `Re = (U_s / pi) n / nu`.
pub fn reynolds<T: Real>(u_s: T, n: usize, nu: T) -> T {
    u_s / T::PI() * T::from_usize_lossy(n) / nu
}

/// Peak amplitude `max |vx|` of a steady profile.
pub fn steady_velocity_scale<T: Real>(vx: &Field2D<T>) -> T {
    vx.max_abs()
}

/// Projection onto x-independent modes: each row replaced by its mean
/// along x. For shear forcing `fx(y)` this is the forced part of `vx`;
/// decaying x-dependent transients are removed.
pub fn forced_component<T: Real>(f: &Field2D<T>) -> Field2D<T> {
    let n = f.grid().n();
    let inv = T::one() / T::from_usize_lossy(n);
    let means: Vec<T> = f.values().chunks(n).map(|row| row.iter().copied().sum::<T>() * inv).collect();
    let mut out = f.clone();
    for (row, &m) in out.values_mut().chunks_mut(n).zip(&means) {
        row.iter_mut().for_each(|v| *v = m);
    }
    out
}

/// `rms(test - reference) / rms(reference)`.
pub fn rel_l2_error<T: Real>(test: &Field2D<T>, reference: &Field2D<T>) -> Result<T> {
    let denom = reference.rms();
    if denom == T::zero() {
        return Err(Error::Domain("reference field has zero norm".into()));
    }
    Ok(test.zip_map(reference, |a, b| a - b)?.rms() / denom)
}

/// `max |test - reference|`.
pub fn max_abs_error<T: Real>(test: &Field2D<T>, reference: &Field2D<T>) -> Result<T> {
    Ok(test.zip_map(reference, |a, b| a - b)?.max_abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SteadyVerdict {
    /// The last snapshot agrees with the one `window` earlier.
    pub steady: bool,
    /// First snapshot index at which the comparison held.
    pub first_index: Option<usize>,
}

/// Compares each snapshot with the one `window` positions earlier, in the
/// relative L2 norm.
pub fn steady_detector<T: Real>(history: &[Field2D<T>], window: usize, tol: T) -> Result<SteadyVerdict> {
    if window == 0 {
        return Err(Error::Domain("window must be >= 1".into()));
    }
    let holds = |i: usize| -> Result<bool> {
        let reference = &history[i - window];
        if reference.rms() == T::zero() {
            return Ok(history[i].rms() == T::zero());
        }
        Ok(rel_l2_error(&history[i], reference)? < tol)
    };
    let mut first_index = None;
    for i in window..history.len() {
        if holds(i)? {
            first_index = Some(i);
            break;
        }
    }
    let steady = match history.len() {
        len if len > window => holds(len - 1)?,
        _ => false,
    };
    Ok(SteadyVerdict { steady, first_index })
}

/// `(Ma^2, max |rho - 1|)` with `Ma^2 = u_s^2 / cs2`.
pub fn incompressibility_report<T: Real>(s: &FluidState<T>, cs2: T, u_s: T) -> (T, T) {
    let fluct = s.rho.values().iter().fold(T::zero(), |m, &r| m.max((r - T::one()).abs()));
    (u_s * u_s / cs2, fluct)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantity {
    Vx,
    Vy,
    Rho,
    Chi,
    Omega,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Vx => "vx",
            Quantity::Vy => "vy",
            Quantity::Rho => "rho",
            Quantity::Chi => "chi",
            Quantity::Omega => "omega",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "vx" => Quantity::Vx,
            "vy" => Quantity::Vy,
            "rho" => Quantity::Rho,
            "chi" => Quantity::Chi,
            "omega" => Quantity::Omega,
            _ => return None,
        })
    }
}

/// Derived fields of one solver snapshot. Solvers without a density or
/// potential leave those empty.
#[derive(Debug, Clone)]
pub struct FlowFields<T> {
    pub vx: Field2D<T>,
    pub vy: Field2D<T>,
    pub omega: Field2D<T>,
    pub rho: Option<Field2D<T>>,
    pub chi: Option<Field2D<T>>,
}

impl<T: Real> FlowFields<T> {
    pub fn from_fluid(s: &FluidState<T>) -> Self {
        let (vx, vy) = velocity(s);
        Self {
            vx,
            vy,
            omega: vorticity(s),
            rho: Some(s.rho.clone()),
            chi: Some(s.chi.clone()),
        }
    }

    pub fn from_vorticity(ns: &ReferenceNs<T>, s: &VorticityState<T>) -> Result<Self> {
        let (vx, vy) = ns.velocity(s)?;
        Ok(Self {
            vx,
            vy,
            omega: s.omega.clone(),
            rho: None,
            chi: None,
        })
    }

    pub fn get(&self, q: Quantity) -> Option<&Field2D<T>> {
        match q {
            Quantity::Vx => Some(&self.vx),
            Quantity::Vy => Some(&self.vy),
            Quantity::Omega => Some(&self.omega),
            Quantity::Rho => self.rho.as_ref(),
            Quantity::Chi => self.chi.as_ref(),
        }
    }
}

/// Time series of one quantity at one grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSeries<T> {
    pub location: (T, T),
    pub node: (usize, usize),
    pub quantity: Quantity,
    pub samples: Vec<(T, T)>,
}

impl<T: Real> ProbeSeries<T> {
    pub fn new(location: (T, T), grid: &GridSpec<T>, quantity: Quantity) -> Self {
        Self {
            location,
            node: nearest_node(location, grid),
            quantity,
            samples: Vec::new(),
        }
    }

    /// Appends a sample; time stamps must increase strictly.
    pub fn push(&mut self, t: T, value: T) -> Result<()> {
        if let Some(&(last, _)) = self.samples.last() {
            if !(t > last) {
                return Err(Error::Domain(format!("probe time {t} does not follow {last}")));
            }
        }
        self.samples.push((t, value));
        Ok(())
    }
}

/// Records the value at each probe's node. Probes whose quantity the
/// snapshot does not carry are left untouched.
pub fn sample_probes<T: Real>(fields: &FlowFields<T>, t: T, series: &mut [ProbeSeries<T>]) -> Result<()> {
    for s in series.iter_mut() {
        if let Some(f) = fields.get(s.quantity) {
            s.push(t, f.at(s.node.0, s.node.1))?;
        }
    }
    Ok(())
}

/// Final-state comparison of one solver against a reference solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport<T> {
    pub scenario: String,
    pub test_solver: String,
    pub reference_solver: String,
    pub reynolds: T,
    pub rel_l2_error: T,
    pub max_abs_error: T,
    pub mach2: T,
    pub max_density_fluct: T,
    pub steady: bool,
    pub steps_to_steady: Option<usize>,
}
