//! Initial conditions and body forces of the forced-flow experiments.

use crate::error::Result;
use crate::grid::{Field2D, GridSpec};
use crate::nshj::{FluidState, PhysicsParams};
use crate::scalar::Real;

/// Squared sound speed used in every fluid experiment.
pub const CS2: f64 = 1.0 / 3.0;
/// Viscosity of the single-mode Kolmogorov runs.
pub const KOLMOGOROV_NU: f64 = 1.0 / 6.0;
/// Steps per characteristic time in the Kolmogorov runs.
pub const STEPS_PER_T: usize = 500;
/// Run length of the Kolmogorov runs, five characteristic times.
pub const KOLMOGOROV_STEPS: usize = 2500;
pub const TWO_MODE_NU: f64 = 1.0 / 16.0;
pub const TWO_MODE_DT: f64 = 0.03;
pub const TWO_MODE_STEPS: usize = 3000;

/// Probe locations `P0`, `P1`, `P2`.
pub const DEFAULT_PROBES: [(f64, f64); 3] = [(0.0, 0.0), (1.5, 1.5), (0.7, 2.5)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowScenario<T> {
    /// `A = u0 (cos y, cos x)`, `fx = f0 cos y`.
    Kolmogorov { u0: T, f0: T },
    /// Two-mode divergence-free start, `fx = f1 cos y + f2 cos 2y`.
    TwoMode { u1: T, u2: T, f1: T, f2: T },
}

impl<T: Real> FlowScenario<T> {
    pub fn kolmogorov(f0: T) -> Self {
        FlowScenario::Kolmogorov { u0: T::lit(0.05), f0 }
    }

    pub fn two_mode() -> Self {
        let u1 = T::lit(0.05);
        let f1 = T::lit(0.01);
        let eight = T::lit(8.0);
        FlowScenario::TwoMode {
            u1,
            u2: u1 / eight,
            f1,
            f2: f1 / eight,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FlowScenario::Kolmogorov { .. } => "kolmogorov",
            FlowScenario::TwoMode { .. } => "two_mode",
        }
    }

    /// Shared initial state. For the two-mode case the whole velocity is
    /// carried by `A` with `chi = 0`.
    pub fn initial_state(&self, grid: GridSpec<T>) -> FluidState<T> {
        let (ax, ay) = match *self {
            FlowScenario::Kolmogorov { u0, .. } => (
                Field2D::from_fn(grid, |_, y| u0 * y.cos()),
                Field2D::from_fn(grid, |x, _| u0 * x.cos()),
            ),
            FlowScenario::TwoMode { u1, u2, .. } => {
                let two = T::lit(2.0);
                (
                    Field2D::from_fn(grid, |x, y| {
                        u1 * x.sin() * y.sin() + u2 * (two * x).sin() * (two * y).sin()
                    }),
                    Field2D::from_fn(grid, |x, y| {
                        u1 * x.cos() * y.cos() + u2 * (two * x).cos() * (two * y).cos()
                    }),
                )
            }
        };
        FluidState {
            rho: Field2D::constant(grid, T::one()),
            chi: Field2D::zeros(grid),
            ax,
            ay,
        }
    }

    /// `(fx, fy)`; `fy` is zero in both scenarios.
    pub fn forcing(&self, grid: GridSpec<T>) -> (Field2D<T>, Field2D<T>) {
        let fx = match *self {
            FlowScenario::Kolmogorov { f0, .. } => Field2D::from_fn(grid, |_, y| f0 * y.cos()),
            FlowScenario::TwoMode { f1, f2, .. } => {
                let two = T::lit(2.0);
                Field2D::from_fn(grid, |_, y| f1 * y.cos() + f2 * (two * y).cos())
            }
        };
        (fx, Field2D::zeros(grid))
    }

    pub fn physics(&self, grid: GridSpec<T>, nu: T, cs2: T, dt: T) -> Result<PhysicsParams<T>> {
        let (fx, fy) = self.forcing(grid);
        PhysicsParams::new(nu, cs2, dt, fx, fy)
    }
}

/// `T = 1 / (nu k^2)` for wavenumber `k`.
pub fn characteristic_time<T: Real>(nu: T, k: T) -> T {
    T::one() / (nu * k * k)
}

/// Complete parameter set of one fluid experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSetup<T> {
    pub scenario: FlowScenario<T>,
    pub n: usize,
    pub nu: T,
    pub cs2: T,
    pub dt: T,
    pub steps: usize,
}

impl<T: Real> FlowSetup<T> {
    /// Single-mode run on an `n x n` grid: `dt = T/500`, 2500 steps.
    pub fn kolmogorov(n: usize, f0: T) -> Self {
        let nu = T::lit(KOLMOGOROV_NU);
        Self {
            scenario: FlowScenario::kolmogorov(f0),
            n,
            nu,
            cs2: T::lit(CS2),
            dt: characteristic_time(nu, T::one()) / T::from_usize_lossy(STEPS_PER_T),
            steps: KOLMOGOROV_STEPS,
        }
    }

    pub fn two_mode(n: usize) -> Self {
        Self {
            scenario: FlowScenario::two_mode(),
            n,
            nu: T::lit(TWO_MODE_NU),
            cs2: T::lit(CS2),
            dt: T::lit(TWO_MODE_DT),
            steps: TWO_MODE_STEPS,
        }
    }

    pub fn grid(&self) -> Result<GridSpec<T>> {
        GridSpec::new(self.n)
    }

    pub fn physics(&self) -> Result<PhysicsParams<T>> {
        self.scenario.physics(self.grid()?, self.nu, self.cs2, self.dt)
    }

    pub fn initial_state(&self) -> Result<FluidState<T>> {
        Ok(self.scenario.initial_state(self.grid()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::divergence;
    use crate::nshj::velocity;

    #[test]
    fn kolmogorov_fields() {
        let g = GridSpec::<f64>::new(64).unwrap();
        let sc = FlowScenario::kolmogorov(0.009);
        let s = sc.initial_state(g);
        for iy in 0..64 {
            assert_eq!(s.ax.at(5, iy), 0.05 * g.coord(iy).cos());
        }
        assert!(s.chi.max_abs() == 0.0 && s.rho.values().iter().all(|&r| r == 1.0));
        let (fx, fy) = sc.forcing(g);
        assert_eq!(fx.at(3, 10), 0.009 * g.coord(10).cos());
        assert_eq!(fy.max_abs(), 0.0);
        let (fx, _) = FlowScenario::kolmogorov(0.0225).forcing(g);
        assert!((fx.max_abs() - 0.0225).abs() < 1e-18);
    }

    #[test]
    fn kolmogorov_defaults() {
        let s = FlowSetup::<f64>::kolmogorov(64, 0.009);
        assert!((s.dt - 0.012).abs() < 1e-15);
        assert_eq!(s.steps, 2500);
        assert_eq!(s.cs2, 1.0 / 3.0);
    }

    #[test]
    fn two_mode_fields() {
        let g = GridSpec::<f64>::new(32).unwrap();
        let sc = FlowScenario::<f64>::two_mode();
        let s = sc.initial_state(g);
        let (vx, vy) = velocity(&s);
        assert_eq!(vx.at(0, 0), 0.0);
        assert!((vy.at(0, 0) - (0.05 + 0.05 / 8.0)).abs() < 1e-16);
        assert!(divergence(&vx, &vy).unwrap().max_abs() < 1e-15);
        let (fx, _) = sc.forcing(g);
        for iy in 0..32 {
            let y = g.coord(iy);
            assert!((fx.at(0, iy) - (0.01 * y.cos() + 0.00125 * (2.0 * y).cos())).abs() < 1e-17);
        }
    }
}
