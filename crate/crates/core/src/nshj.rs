//! Explicit Euler integration of the discretized Navier-Stokes-Hamilton-Jacobi
//! system on the periodic grid.
//!
//! The velocity is split as `v = grad(chi) + A`; vorticity lives entirely in
//! `A`. One step reads every right-hand side at time `t`:
//!
//! ```text
//! rho' = rho - dt [ (Dx rho) vx + (Dy rho) vy + rho (Dx vx + Dy vy) ]
//! chi' = chi + dt [ nu (Dx vx + Dy vy) - cs2 (rho - 1) - (vx^2 + vy^2) / 2 ]
//! Ax'  = Ax  + dt (w vy - nu Dy w) + dt fx
//! Ay'  = Ay  + dt (nu Dx w - w vx) + dt fy
//! ```
//!
//! with `w = Dx Ay - Dy Ax`.

use crate::error::{Error, Result};
use crate::grid::{dx, dy, Field2D, GridSpec};
use crate::scalar::Real;

/// Explicit diffusion number `dt nu / h^2` above which a warning is logged.
pub const DIFFUSION_WARN: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct FluidState<T> {
    pub rho: Field2D<T>,
    pub chi: Field2D<T>,
    pub ax: Field2D<T>,
    pub ay: Field2D<T>,
}

impl<T: Real> FluidState<T> {
    pub fn new(rho: Field2D<T>, chi: Field2D<T>, ax: Field2D<T>, ay: Field2D<T>) -> Result<Self> {
        let g = rho.grid();
        if chi.grid() != g || ax.grid() != g || ay.grid() != g {
            return Err(Error::Dimension("fluid fields must share one grid".into()));
        }
        Ok(Self { rho, chi, ax, ay })
    }

    /// `rho = 1`, everything else zero.
    pub fn rest(grid: GridSpec<T>) -> Self {
        Self {
            rho: Field2D::constant(grid, T::one()),
            chi: Field2D::zeros(grid),
            ax: Field2D::zeros(grid),
            ay: Field2D::zeros(grid),
        }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        self.rho.grid()
    }

    pub fn fields(&self) -> [&Field2D<T>; 4] {
        [&self.rho, &self.chi, &self.ax, &self.ay]
    }

    /// Concatenation `[rho, chi, ax, ay]`, length `4G`.
    pub fn to_vector(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(4 * self.grid().len());
        for f in self.fields() {
            out.extend_from_slice(f.values());
        }
        out
    }

    /// Inverse of [`FluidState::to_vector`].
    pub fn from_vector(grid: GridSpec<T>, v: &[T]) -> Result<Self> {
        let g = grid.len();
        if v.len() != 4 * g {
            return Err(Error::Dimension(format!(
                "state vector needs {} entries, got {}",
                4 * g,
                v.len()
            )));
        }
        let block = |i: usize| Field2D::from_values(grid, v[i * g..(i + 1) * g].to_vec());
        Ok(Self {
            rho: block(0)?,
            chi: block(1)?,
            ax: block(2)?,
            ay: block(3)?,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.fields().iter().all(|f| f.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicsParams<T> {
    /// Kinematic viscosity.
    pub nu: T,
    /// Squared sound speed.
    pub cs2: T,
    pub dt: T,
    pub forcing_fx: Field2D<T>,
    pub forcing_fy: Field2D<T>,
}

impl<T: Real> PhysicsParams<T> {
    pub fn new(nu: T, cs2: T, dt: T, forcing_fx: Field2D<T>, forcing_fy: Field2D<T>) -> Result<Self> {
        if !(nu >= T::zero() && cs2 >= T::zero() && dt > T::zero()) {
            return Err(Error::Domain(format!(
                "need nu >= 0, cs2 >= 0, dt > 0 (got nu={nu}, cs2={cs2}, dt={dt})"
            )));
        }
        if forcing_fx.grid() != forcing_fy.grid() {
            return Err(Error::Dimension("forcing components on different grids".into()));
        }
        let p = Self {
            nu,
            cs2,
            dt,
            forcing_fx,
            forcing_fy,
        };
        let d = p.diffusion_number();
        if d > T::lit(DIFFUSION_WARN) {
            log::warn!("explicit diffusion number dt*nu/h^2 = {d} exceeds {DIFFUSION_WARN}");
        }
        Ok(p)
    }

    /// Unforced parameters on `grid`.
    pub fn unforced(grid: GridSpec<T>, nu: T, cs2: T, dt: T) -> Result<Self> {
        Self::new(nu, cs2, dt, Field2D::zeros(grid), Field2D::zeros(grid))
    }

    pub fn grid(&self) -> &GridSpec<T> {
        self.forcing_fx.grid()
    }

    /// `dt nu / h^2`.
    pub fn diffusion_number(&self) -> T {
        let h = self.grid().spacing();
        self.dt * self.nu / (h * h)
    }
}

/// `v = grad(chi) + A`.
pub fn velocity<T: Real>(s: &FluidState<T>) -> (Field2D<T>, Field2D<T>) {
    let vx = add(&dx(&s.chi), &s.ax);
    let vy = add(&dy(&s.chi), &s.ay);
    (vx, vy)
}

/// `w = Dx Ay - Dy Ax`.
pub fn vorticity<T: Real>(s: &FluidState<T>) -> Field2D<T> {
    let a = dx(&s.ay);
    let b = dy(&s.ax);
    let values = a.values().iter().zip(b.values()).map(|(&p, &q)| p - q).collect();
    Field2D::from_values(*s.grid(), values).expect("same grid")
}

fn add<T: Real>(a: &Field2D<T>, b: &Field2D<T>) -> Field2D<T> {
    let values = a.values().iter().zip(b.values()).map(|(&p, &q)| p + q).collect();
    Field2D::from_values(*a.grid(), values).expect("same grid")
}

fn check_grids<T: Real>(s: &FluidState<T>, p: &PhysicsParams<T>) -> Result<()> {
    if s.grid() != p.grid() {
        return Err(Error::Dimension(format!(
            "state grid n={} vs forcing grid n={}",
            s.grid().n(),
            p.grid().n()
        )));
    }
    Ok(())
}

pub(crate) fn step_at<T: Real>(s: &FluidState<T>, p: &PhysicsParams<T>, step: usize) -> Result<FluidState<T>> {
    check_grids(s, p)?;
    let grid = *s.grid();
    let (vx, vy) = velocity(s);
    let w = vorticity(s);
    let div = add(&dx(&vx), &dy(&vy));
    let drx = dx(&s.rho);
    let dry = dy(&s.rho);
    let dwx = dx(&w);
    let dwy = dy(&w);

    let (dt, nu, cs2) = (p.dt, p.nu, p.cs2);
    let half = T::lit(0.5);
    let g = grid.len();
    let mut rho = Vec::with_capacity(g);
    let mut chi = Vec::with_capacity(g);
    let mut ax = Vec::with_capacity(g);
    let mut ay = Vec::with_capacity(g);
    let fx = p.forcing_fx.values();
    let fy = p.forcing_fy.values();
    for k in 0..g {
        let (u, v, wk, d) = (vx.values()[k], vy.values()[k], w.values()[k], div.values()[k]);
        let r = s.rho.values()[k];
        rho.push(r - dt * (drx.values()[k] * u + dry.values()[k] * v + r * d));
        chi.push(s.chi.values()[k] + dt * (nu * d - cs2 * (r - T::one()) - half * (u * u + v * v)));
        ax.push(s.ax.values()[k] + dt * (wk * v - nu * dwy.values()[k]) + dt * fx[k]);
        ay.push(s.ay.values()[k] + dt * (nu * dwx.values()[k] - wk * u) + dt * fy[k]);
    }
    let next = FluidState {
        rho: Field2D::from_values(grid, rho)?,
        chi: Field2D::from_values(grid, chi)?,
        ax: Field2D::from_values(grid, ax)?,
        ay: Field2D::from_values(grid, ay)?,
    };
    for (name, f) in ["rho", "chi", "ax", "ay"].iter().zip(next.fields()) {
        if !f.is_finite() {
            return Err(Error::divergence(format!("nshj field {name}"), step));
        }
    }
    Ok(next)
}

/// One explicit Euler step.
pub fn step_nshj<T: Real>(s: &FluidState<T>, p: &PhysicsParams<T>) -> Result<FluidState<T>> {
    step_at(s, p, 1)
}

/// Runs `steps` Euler steps, calling `observer(step, &state)` after each.
pub fn evolve<T: Real>(
    s: &FluidState<T>,
    p: &PhysicsParams<T>,
    steps: usize,
    mut observer: impl FnMut(usize, &FluidState<T>),
) -> Result<FluidState<T>> {
    let mut state = s.clone();
    for step in 1..=steps {
        state = step_at(&state, p, step)?;
        observer(step, &state);
    }
    Ok(state)
}
