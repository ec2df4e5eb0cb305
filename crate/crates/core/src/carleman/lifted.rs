//! Second-order lifted state and its linear evolution.
//!
//! With `u = J1`, `M = J2` and `w = A u + B:M`, one step is
//!
//! ```text
//! J1' = w + F
//! J2' = A M A^T + w F^T + F w^T + F F^T
//! ```
//!
//! `A M A^T` is formed as two sparse-times-dense passes, so the largest
//! buffers are the state's `J2` and one scratch matrix of the same size.

use rayon::prelude::*;

use super::assemble::CarlemanOperators;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::nshj::FluidState;
use crate::scalar::Real;

/// First-order vector `J1` (length `4G`) and dense symmetric second moment
/// `J2` stored row-major, both triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct C2State<T> {
    dim: usize,
    pub j1: Vec<T>,
    pub j2: Vec<T>,
}

impl<T: Real> C2State<T> {
    pub fn from_parts(j1: Vec<T>, j2: Vec<T>) -> Result<Self> {
        let dim = j1.len();
        if j2.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "j2 must be {dim}x{dim}, got {} entries",
                j2.len()
            )));
        }
        Ok(Self { dim, j1, j2 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn j2_at(&self, p: usize, q: usize) -> T {
        self.j2[p * self.dim + q]
    }

    /// `max |J2[p,q] - J2[q,p]|`.
    pub fn asymmetry(&self) -> T {
        let d = self.dim;
        let mut worst = T::zero();
        for p in 0..d {
            for q in p + 1..d {
                worst = worst.max((self.j2[p * d + q] - self.j2[q * d + p]).abs());
            }
        }
        worst
    }

    /// Frobenius norm of `J2`.
    pub fn j2_norm(&self) -> T {
        self.j2.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.j1.iter().chain(&self.j2).all(|v| v.is_finite())
    }
}

/// Exact lift: `J1 = flatten(s)`, `J2 = J1 J1^T`.
pub fn lift<T: Real>(s: &FluidState<T>) -> C2State<T> {
    let j1 = s.to_vector();
    let dim = j1.len();
    let mut j2 = vec![T::zero(); dim * dim];
    j2.par_chunks_mut(dim).zip(&j1).for_each(|(row, &a)| {
        for (m, &b) in row.iter_mut().zip(&j1) {
            *m = a * b;
        }
    });
    C2State { dim, j1, j2 }
}

/// The four fields encoded in `J1`.
pub fn readout<T: Real>(state: &C2State<T>, grid: &GridSpec<T>) -> Result<FluidState<T>> {
    FluidState::from_vector(*grid, &state.j1)
}

/// `||J2 - J1 J1^T||_F / max(||J1||^2, eps)`.
pub fn closure_defect<T: Real>(state: &C2State<T>) -> T {
    let d = state.dim;
    let norm2: T = state.j1.iter().map(|&v| v * v).sum();
    let defect: T = state
        .j2
        .par_chunks(d)
        .zip(&state.j1)
        .map(|(row, &a)| {
            row.iter()
                .zip(&state.j1)
                .map(|(&m, &b)| {
                    let e = m - a * b;
                    e * e
                })
                .sum::<T>()
        })
        .collect::<Vec<T>>()
        .into_iter()
        .sum();
    defect.sqrt() / norm2.max(T::epsilon())
}

/// Reusable scratch for [`C2Stepper::step`].
#[derive(Debug)]
pub struct C2Stepper<T> {
    dim: usize,
    scratch: Vec<T>,
    au: Vec<T>,
    bm: Vec<T>,
    steps: usize,
}

impl<T: Real> C2Stepper<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            scratch: vec![T::zero(); dim * dim],
            au: vec![T::zero(); dim],
            bm: vec![T::zero(); dim],
            steps: 0,
        }
    }

    /// Scalars held by this stepper.
    pub fn allocated_elements(&self) -> usize {
        self.scratch.len() + self.au.len() + self.bm.len()
    }

    /// Advances `state` in place by one step of the lifted linear system.
    pub fn step(&mut self, state: &mut C2State<T>, ops: &CarlemanOperators<T>) -> Result<()> {
        let d = self.dim;
        if state.dim != d || ops.dim() != d {
            return Err(Error::Dimension(format!(
                "stepper dim {d}, state dim {}, operator dim {}",
                state.dim,
                ops.dim()
            )));
        }
        self.steps += 1;
        let a = &ops.a_op;
        let f = &ops.f_vec;

        // w = A u + B:M, from the lifted J2 rather than u u^T
        a.mul_vec_into(&state.j1, &mut self.au);
        ops.b_op.contract_into(&state.j2, &mut self.bm);
        for (w, &b) in self.au.iter_mut().zip(&self.bm) {
            *w += b;
        }
        let w = &self.au;

        // scratch = A M
        let m = &state.j2;
        self.scratch.par_chunks_mut(d).enumerate().for_each(|(i, out)| {
            out.iter_mut().for_each(|v| *v = T::zero());
            let (cols, vals) = a.row(i);
            for (&k, &coef) in cols.iter().zip(vals) {
                let src = &m[k * d..(k + 1) * d];
                for (o, &s) in out.iter_mut().zip(src) {
                    *o += coef * s;
                }
            }
        });

        // M' = (A M) A^T + w F^T + F w^T + F F^T, written over M row by row
        let am = &self.scratch;
        state.j2.par_chunks_mut(d).enumerate().for_each(|(i, out)| {
            let am_row = &am[i * d..(i + 1) * d];
            let (fi, wi) = (f[i], w[i]);
            for (j, o) in out.iter_mut().enumerate() {
                let (cols, vals) = a.row(j);
                let mut acc = T::zero();
                for (&k, &coef) in cols.iter().zip(vals) {
                    acc += coef * am_row[k];
                }
                *o = acc + fi * w[j] + wi * f[j] + fi * f[j];
            }
        });

        for ((j1, &wv), &fv) in state.j1.iter_mut().zip(w).zip(f) {
            *j1 = wv + fv;
        }

        if !state.is_finite() {
            return Err(Error::divergence("c2 lifted state", self.steps));
        }
        Ok(())
    }
}

/// One lifted step with freshly allocated scratch.
pub fn step_c2<T: Real>(state: &C2State<T>, ops: &CarlemanOperators<T>) -> Result<C2State<T>> {
    let mut next = state.clone();
    C2Stepper::new(state.dim).step(&mut next, ops)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carleman::assemble::assemble_operators;
    use crate::grid::Field2D;
    use crate::nshj::{step_nshj, PhysicsParams};

    fn kolmogorov(grid: GridSpec<f64>, u0: f64) -> FluidState<f64> {
        FluidState::new(
            Field2D::constant(grid, 1.0),
            Field2D::zeros(grid),
            Field2D::from_fn(grid, |_, y| u0 * y.cos()),
            Field2D::from_fn(grid, |x, _| u0 * x.cos()),
        )
        .unwrap()
    }

    fn physics(grid: GridSpec<f64>, f0: f64, cs2: f64) -> PhysicsParams<f64> {
        let fx = Field2D::from_fn(grid, |_, y| f0 * y.cos());
        PhysicsParams::new(1.0 / 6.0, cs2, 0.012, fx, Field2D::zeros(grid)).unwrap()
    }

    #[test]
    fn lift_structure() {
        let grid = GridSpec::new(4).unwrap();
        let zero = FluidState::new(
            Field2D::zeros(grid),
            Field2D::zeros(grid),
            Field2D::zeros(grid),
            Field2D::zeros(grid),
        )
        .unwrap();
        let z = lift(&zero);
        assert!(z.j1.iter().chain(&z.j2).all(|&v| v == 0.0));

        let s = kolmogorov(grid, 0.3);
        let l = lift(&s);
        let trace: f64 = (0..l.dim()).map(|p| l.j2_at(p, p)).sum();
        let norm2: f64 = l.j1.iter().map(|v| v * v).sum();
        assert!((trace - norm2).abs() < 1e-14);
        for p in 0..l.dim() {
            assert_eq!(l.j2_at(p, p), l.j1[p] * l.j1[p]);
        }
        assert_eq!(closure_defect(&l), 0.0);
        assert_eq!(readout(&l, &grid).unwrap(), s);
        assert_eq!(&l.j1[..grid.len()], s.rho.values());
    }

    #[test]
    fn zero_state_without_forcing_stays_zero() {
        let grid = GridSpec::new(4).unwrap();
        let p = physics(grid, 0.0, 0.0);
        let ops = assemble_operators(grid, &p).unwrap();
        let dim = ops.dim();
        let mut state = C2State::from_parts(vec![0.0; dim], vec![0.0; dim * dim]).unwrap();
        let mut stepper = C2Stepper::new(dim);
        for _ in 0..20 {
            stepper.step(&mut state, &ops).unwrap();
        }
        assert!(state.j1.iter().chain(&state.j2).all(|&v| v == 0.0));
    }

    #[test]
    fn first_step_matches_nshj_from_rest() {
        let grid = GridSpec::new(8).unwrap();
        let p = physics(grid, 0.009, 1.0 / 3.0);
        let ops = assemble_operators(grid, &p).unwrap();
        let rest = FluidState::rest(grid);
        let next = step_c2(&lift(&rest), &ops).unwrap();
        let direct = step_nshj(&rest, &p).unwrap();
        let got = readout(&next, &grid).unwrap();
        let err = got
            .to_vector()
            .iter()
            .zip(direct.to_vector())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-15, "{err}");
    }

    #[test]
    fn defect_after_one_step_is_small() {
        let grid = GridSpec::new(8).unwrap();
        let p = physics(grid, 0.009, 1.0 / 3.0);
        let ops = assemble_operators(grid, &p).unwrap();
        let s = step_c2(&lift(&kolmogorov(grid, 0.05)), &ops).unwrap();
        let d = closure_defect(&s);
        assert!(d.is_finite() && d < 1e-4, "{d}");
        assert!(d > 0.0);
    }

    #[test]
    fn memory_is_two_dense_matrices() {
        let grid = GridSpec::<f64>::new(4).unwrap();
        let dim = 4 * grid.len();
        let stepper = C2Stepper::<f64>::new(dim);
        let state = lift(&FluidState::rest(grid));
        let total = stepper.allocated_elements() + state.j1.len() + state.j2.len();
        assert_eq!(total, 2 * dim * dim + 3 * dim);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let grid = GridSpec::new(4).unwrap();
        let ops = assemble_operators(grid, &physics(grid, 0.0, 0.3)).unwrap();
        let mut state = lift(&FluidState::rest(GridSpec::new(6).unwrap()));
        assert!(C2Stepper::new(ops.dim()).step(&mut state, &ops).is_err());
        assert!(C2State::from_parts(vec![0.0; 3], vec![0.0; 8]).is_err());
    }

    #[test]
    fn stepping_is_deterministic() {
        let grid = GridSpec::new(4).unwrap();
        let ops = assemble_operators(grid, &physics(grid, 0.02, 1.0 / 3.0)).unwrap();
        let run = || {
            let mut s = lift(&kolmogorov(grid, 0.05));
            let mut st = C2Stepper::new(ops.dim());
            for _ in 0..30 {
                st.step(&mut s, &ops).unwrap();
            }
            s
        };
        assert_eq!(run(), run());
    }
}
