//! Incompressible Navier-Stokes in vorticity-streamfunction form, used as
//! an independent reference for the NSHJ and C2 solvers.
//!
//! The streamfunction comes from a direct spectral inversion of a discrete
//! Laplacian; velocity is `v = (Dy psi, -Dx psi)` and the vorticity update is
//!
//! ```text
//! w' = w + dt [ -Dx(vx w) - Dy(vy w) + nu (DxDx + DyDy) w + Dx fy - Dy fx ]
//! ```
//!
//! The flux form of the advection keeps `sum(w)` exactly conserved.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{dx, dy, Field2D, GridSpec};
use crate::nshj::PhysicsParams;
use crate::scalar::Real;

/// Discrete Laplacian inverted by the Poisson solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianStencil {
    /// Compact 5-point stencil, `(f[i+1] - 2 f[i] + f[i-1]) / h^2` per axis.
    FivePoint,
    /// `Dx Dx + Dy Dy` built from the 3-point centered first derivative.
    /// It is the operator linking `psi` to the vorticity of
    /// `(Dy psi, -Dx psi)`; modes with both wavenumbers in `{0, n/2}` are
    /// in its null space and are projected out.
    Centered,
}

impl LaplacianStencil {
    pub fn apply<T: Real>(self, f: &Field2D<T>) -> Field2D<T> {
        match self {
            LaplacianStencil::Centered => {
                let a = dx(&dx(f));
                let b = dy(&dy(f));
                a.zip_map(&b, |p, q| p + q).expect("same grid")
            }
            LaplacianStencil::FivePoint => {
                let grid = *f.grid();
                let h2 = grid.spacing() * grid.spacing();
                let v = f.values();
                let two = T::lit(2.0);
                let values = (0..grid.len())
                    .map(|k| {
                        let xs = v[grid.shifted(k, 1, 0)] - two * v[k] + v[grid.shifted(k, -1, 0)];
                        let ys = v[grid.shifted(k, 0, 1)] - two * v[k] + v[grid.shifted(k, 0, -1)];
                        (xs + ys) / h2
                    })
                    .collect();
                Field2D::from_values(grid, values).expect("same grid")
            }
        }
    }
}

/// Direct solver for `L psi = -w` on the periodic grid.
pub struct PoissonSolver<T: Real> {
    grid: GridSpec<T>,
    stencil: LaplacianStencil,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    /// `-symbol(L)` per mode; zero marks a projected-out mode.
    eigen: Vec<T>,
}

impl<T: Real> std::fmt::Debug for PoissonSolver<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PoissonSolver")
            .field("n", &self.grid.n())
            .field("stencil", &self.stencil)
            .finish()
    }
}

impl<T: Real> PoissonSolver<T> {
    pub fn new(grid: GridSpec<T>, stencil: LaplacianStencil) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let h = grid.spacing();
        let h2 = h * h;
        let axis: Vec<T> = (0..n)
            .map(|m| {
                let theta = T::TAU() * T::from_usize_lossy(m) / T::from_usize_lossy(n);
                match stencil {
                    LaplacianStencil::FivePoint => (T::lit(2.0) - T::lit(2.0) * theta.cos()) / h2,
                    LaplacianStencil::Centered => theta.sin().powi(2) / h2,
                }
            })
            .collect();
        let null = |m: usize| match stencil {
            LaplacianStencil::FivePoint => m == 0,
            LaplacianStencil::Centered => m == 0 || m == n / 2,
        };
        let mut eigen = vec![T::zero(); n * n];
        for my in 0..n {
            for mx in 0..n {
                if !(null(mx) && null(my)) {
                    eigen[my * n + mx] = axis[mx] + axis[my];
                }
            }
        }
        Self {
            grid,
            stencil,
            forward,
            inverse,
            eigen,
        }
    }

    pub fn stencil(&self) -> LaplacianStencil {
        self.stencil
    }

    fn fft2(&self, buf: &mut [Complex<T>], fft: &Arc<dyn Fft<T>>) {
        let n = self.grid.n();
        fft.process(buf);
        transpose(buf, n);
        fft.process(buf);
        transpose(buf, n);
    }

    /// Streamfunction with zero mean and no null-space content.
    pub fn solve(&self, omega: &Field2D<T>) -> Result<Field2D<T>> {
        if omega.grid() != &self.grid {
            return Err(Error::Dimension("vorticity grid differs from solver grid".into()));
        }
        let n = self.grid.n();
        let mut buf: Vec<Complex<T>> = omega.values().iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.fft2(&mut buf, &self.forward);
        for (c, &lam) in buf.iter_mut().zip(&self.eigen) {
            *c = if lam == T::zero() { Complex::new(T::zero(), T::zero()) } else { *c / lam };
        }
        self.fft2(&mut buf, &self.inverse);
        let norm = T::one() / T::from_usize_lossy(n * n);
        let psi = Field2D::from_values(self.grid, buf.iter().map(|c| c.re * norm).collect())?;
        if !psi.is_finite() {
            return Err(Error::Numerical("non-finite streamfunction".into()));
        }
        Ok(psi)
    }
}

fn transpose<T: Copy>(buf: &mut [T], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Solves the 5-point Poisson problem `Lap(psi) = -(w - mean(w))`.
pub fn poisson_solve<T: Real>(omega: &Field2D<T>) -> Result<Field2D<T>> {
    PoissonSolver::new(*omega.grid(), LaplacianStencil::FivePoint).solve(omega)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VorticityState<T> {
    pub omega: Field2D<T>,
}

impl<T: Real> VorticityState<T> {
    pub fn new(omega: Field2D<T>) -> Self {
        Self { omega }
    }

    /// Discrete curl `Dx vy - Dy vx` of a velocity field.
    pub fn from_velocity(vx: &Field2D<T>, vy: &Field2D<T>) -> Result<Self> {
        Ok(Self {
            omega: dx(vy).zip_map(&dy(vx), |a, b| a - b)?,
        })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        self.omega.grid()
    }

    /// `sum(w^2)`.
    pub fn enstrophy(&self) -> T {
        self.omega.values().iter().map(|&v| v * v).sum()
    }
}

/// Vorticity-streamfunction solver bound to one grid.
#[derive(Debug)]
pub struct ReferenceNs<T: Real> {
    poisson: PoissonSolver<T>,
}

impl<T: Real> ReferenceNs<T> {
    /// Uses the centered Laplacian, which is consistent with the centered
    /// first derivatives used everywhere else.
    pub fn new(grid: GridSpec<T>) -> Self {
        Self::with_stencil(grid, LaplacianStencil::Centered)
    }

    pub fn with_stencil(grid: GridSpec<T>, stencil: LaplacianStencil) -> Self {
        Self {
            poisson: PoissonSolver::new(grid, stencil),
        }
    }

    pub fn poisson(&self) -> &PoissonSolver<T> {
        &self.poisson
    }

    /// `psi = solve(w)`, `v = (Dy psi, -Dx psi)`.
    pub fn velocity(&self, state: &VorticityState<T>) -> Result<(Field2D<T>, Field2D<T>)> {
        let psi = self.poisson.solve(&state.omega)?;
        Ok((dy(&psi), dx(&psi).scale(-T::one())))
    }

    fn step_at(&self, state: &VorticityState<T>, p: &PhysicsParams<T>, step: usize) -> Result<VorticityState<T>> {
        if state.grid() != p.grid() {
            return Err(Error::Dimension("forcing and vorticity grids differ".into()));
        }
        let w = &state.omega;
        let (vx, vy) = self.velocity(state)?;
        let flux_x = dx(&vx.zip_map(w, |a, b| a * b)?);
        let flux_y = dy(&vy.zip_map(w, |a, b| a * b)?);
        let lap = LaplacianStencil::Centered.apply(w);
        let curl = dx(&p.forcing_fy).zip_map(&dy(&p.forcing_fx), |a, b| a - b)?;
        let (dt, nu) = (p.dt, p.nu);
        let values: Vec<T> = (0..w.values().len())
            .map(|k| {
                let rhs = -flux_x.values()[k] - flux_y.values()[k] + nu * lap.values()[k] + curl.values()[k];
                w.values()[k] + dt * rhs
            })
            .collect();
        let omega = Field2D::from_values(*w.grid(), values)?;
        if !omega.is_finite() {
            return Err(Error::divergence("reference vorticity", step));
        }
        Ok(VorticityState { omega })
    }

    /// One explicit Euler step.
    pub fn step(&self, state: &VorticityState<T>, p: &PhysicsParams<T>) -> Result<VorticityState<T>> {
        self.step_at(state, p, 1)
    }

    /// `steps` Euler steps with `observer(step, &state)` after each.
    pub fn evolve(
        &self,
        state: &VorticityState<T>,
        p: &PhysicsParams<T>,
        steps: usize,
        mut observer: impl FnMut(usize, &VorticityState<T>),
    ) -> Result<VorticityState<T>> {
        let mut s = state.clone();
        for step in 1..=steps {
            s = self.step_at(&s, p, step)?;
            observer(step, &s);
        }
        Ok(s)
    }
}

/// One reference step with the default centered solver.
pub fn step_ns<T: Real>(state: &VorticityState<T>, p: &PhysicsParams<T>) -> Result<VorticityState<T>> {
    ReferenceNs::new(*state.grid()).step(state, p)
}

/// Velocity recovered through the default centered solver.
pub fn velocity_from_omega<T: Real>(state: &VorticityState<T>) -> Result<(Field2D<T>, Field2D<T>)> {
    ReferenceNs::new(*state.grid()).velocity(state)
}
