//! Collects the terms of one explicit NSHJ step into a constant vector, a
//! sparse linear operator and a sparse symmetric bilinear tensor over the
//! flattened state `J = [rho, chi, ax, ay]`.
//!
//! Every per-node quantity of the step (velocity, vorticity, divergence, ...)
//! is first written as a sparse linear form over `J`. Products of two forms
//! expand into bilinear entries; everything else is linear.

use std::collections::BTreeMap;

use super::sparse::{BilinearEntry, BilinearTensor, CsrMatrix};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::nshj::PhysicsParams;
use crate::scalar::Real;

/// Which of the four NSHJ fields a flat state index belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldKind {
    Rho = 0,
    Chi = 1,
    Ax = 2,
    Ay = 3,
}

impl FieldKind {
    pub const ALL: [FieldKind; 4] = [FieldKind::Rho, FieldKind::Chi, FieldKind::Ax, FieldKind::Ay];

    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Rho => "rho",
            FieldKind::Chi => "chi",
            FieldKind::Ax => "ax",
            FieldKind::Ay => "ay",
        }
    }
}

/// `(field, node)` pair addressing one entry of the flattened state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CompositeIndex {
    pub field: FieldKind,
    pub node: usize,
}

impl CompositeIndex {
    /// `field * G + node`.
    #[inline]
    pub fn flat(self, nodes: usize) -> usize {
        self.field as usize * nodes + self.node
    }

    pub fn from_flat(flat: usize, nodes: usize) -> Option<Self> {
        let field = *FieldKind::ALL.get(flat / nodes)?;
        Some(Self {
            field,
            node: flat % nodes,
        })
    }
}

/// Sparse linear form `sum c_i J[i]`; entries may repeat until merged.
type Form<T> = Vec<(usize, T)>;

fn merge<T: Real>(mut form: Form<T>) -> Form<T> {
    form.sort_by_key(|&(i, _)| i);
    let mut out: Form<T> = Vec::with_capacity(form.len());
    for (i, c) in form {
        match out.last_mut() {
            Some((j, acc)) if *j == i => *acc += c,
            _ => out.push((i, c)),
        }
    }
    out.retain(|&(_, c)| c != T::zero());
    out
}

fn scaled<T: Real>(form: Form<T>, s: T) -> Form<T> {
    form.into_iter().map(|(i, c)| (i, c * s)).collect()
}

/// Builds the per-node linear forms of the discretized step.
struct FormBuilder<T> {
    grid: GridSpec<T>,
    nodes: usize,
    inv_two_h: T,
}

impl<T: Real> FormBuilder<T> {
    fn new(grid: GridSpec<T>) -> Self {
        let h = grid.spacing();
        Self {
            nodes: grid.len(),
            inv_two_h: T::one() / (h + h),
            grid,
        }
    }

    fn var(&self, field: FieldKind, node: usize) -> Form<T> {
        vec![(CompositeIndex { field, node }.flat(self.nodes), T::one())]
    }

    /// Centered difference of the form produced by `f`, along `(sx, sy)`.
    fn diff(&self, node: usize, sx: isize, sy: isize, f: impl Fn(usize) -> Form<T>) -> Form<T> {
        let mut out = scaled(f(self.grid.shifted(node, sx, sy)), self.inv_two_h);
        out.extend(scaled(f(self.grid.shifted(node, -sx, -sy)), -self.inv_two_h));
        out
    }

    fn d_field(&self, field: FieldKind, node: usize, sx: isize, sy: isize) -> Form<T> {
        self.diff(node, sx, sy, |m| self.var(field, m))
    }

    fn vx(&self, node: usize) -> Form<T> {
        let mut f = self.d_field(FieldKind::Chi, node, 1, 0);
        f.extend(self.var(FieldKind::Ax, node));
        f
    }

    fn vy(&self, node: usize) -> Form<T> {
        let mut f = self.d_field(FieldKind::Chi, node, 0, 1);
        f.extend(self.var(FieldKind::Ay, node));
        f
    }

    fn vorticity(&self, node: usize) -> Form<T> {
        let mut f = self.d_field(FieldKind::Ay, node, 1, 0);
        f.extend(scaled(self.d_field(FieldKind::Ax, node, 0, 1), -T::one()));
        f
    }

    fn divergence(&self, node: usize) -> Form<T> {
        let mut f = self.diff(node, 1, 0, |m| self.vx(m));
        f.extend(self.diff(node, 0, 1, |m| self.vy(m)));
        f
    }
}

/// Accumulates symmetrized bilinear coefficients for one output row.
struct RowProducts<T> {
    coefs: BTreeMap<(usize, usize), T>,
}

impl<T: Real> RowProducts<T> {
    fn new() -> Self {
        Self {
            coefs: BTreeMap::new(),
        }
    }

    /// Adds `c * p(J) * q(J)`, split evenly over `(beta, gamma)` and
    /// `(gamma, beta)`.
    fn add(&mut self, c: T, p: &Form<T>, q: &Form<T>) {
        let half = T::lit(0.5) * c;
        for &(i, ci) in p {
            for &(j, cj) in q {
                let v = half * ci * cj;
                *self.coefs.entry((i, j)).or_insert(T::zero()) += v;
                *self.coefs.entry((j, i)).or_insert(T::zero()) += v;
            }
        }
    }

    fn drain_into(self, alpha: usize, out: &mut Vec<BilinearEntry<T>>) {
        out.extend(
            self.coefs
                .into_iter()
                .filter(|&(_, c)| c != T::zero())
                .map(|((beta, gamma), coef)| BilinearEntry {
                    alpha,
                    beta,
                    gamma,
                    coef,
                }),
        );
    }
}

/// Constant, linear and bilinear parts of one explicit NSHJ step:
/// `J(t + dt) = A J + B:(J (x) J) + F`.
#[derive(Debug, Clone)]
pub struct CarlemanOperators<T> {
    pub a_op: CsrMatrix<T>,
    pub b_op: BilinearTensor<T>,
    pub f_vec: Vec<T>,
    pub grid: GridSpec<T>,
    pub physics: PhysicsParams<T>,
}

impl<T: Real> CarlemanOperators<T> {
    /// Lifted dimension `4G`.
    pub fn dim(&self) -> usize {
        self.f_vec.len()
    }

    /// `A J + B:(J (x) J) + F` for an exact rank-one second moment.
    pub fn apply(&self, j: &[T]) -> Vec<T> {
        let lin = self.a_op.mul_vec(j);
        let quad = self.b_op.contract_outer(j);
        lin.iter()
            .zip(&quad)
            .zip(&self.f_vec)
            .map(|((&l, &q), &f)| l + q + f)
            .collect()
    }
}

/// Term collection for the discretized NSHJ step on `grid` with `physics`.
pub fn assemble_operators<T: Real>(
    grid: GridSpec<T>,
    physics: &PhysicsParams<T>,
) -> Result<CarlemanOperators<T>> {
    if physics.grid() != &grid {
        return Err(Error::Dimension("physics forcing lives on a different grid".into()));
    }
    let fb = FormBuilder::new(grid);
    let g = grid.len();
    let dim = 4 * g;
    let (dt, nu, cs2) = (physics.dt, physics.nu, physics.cs2);
    let half = T::lit(0.5);

    let mut rows: Vec<Form<T>> = Vec::with_capacity(dim);
    let mut bilinear = Vec::new();

    // rho rows: linear part is the identity, the rest is quadratic
    for n in 0..g {
        rows.push(fb.var(FieldKind::Rho, n));
        let mut prod = RowProducts::new();
        prod.add(-dt, &fb.d_field(FieldKind::Rho, n, 1, 0), &fb.vx(n));
        prod.add(-dt, &fb.d_field(FieldKind::Rho, n, 0, 1), &fb.vy(n));
        prod.add(-dt, &fb.var(FieldKind::Rho, n), &fb.divergence(n));
        prod.drain_into(CompositeIndex { field: FieldKind::Rho, node: n }.flat(g), &mut bilinear);
    }

    for n in 0..g {
        let mut row = fb.var(FieldKind::Chi, n);
        row.extend(scaled(fb.divergence(n), dt * nu));
        row.extend(scaled(fb.var(FieldKind::Rho, n), -dt * cs2));
        rows.push(row);
        let mut prod = RowProducts::new();
        let (vx, vy) = (fb.vx(n), fb.vy(n));
        prod.add(-dt * half, &vx, &vx);
        prod.add(-dt * half, &vy, &vy);
        prod.drain_into(CompositeIndex { field: FieldKind::Chi, node: n }.flat(g), &mut bilinear);
    }

    for n in 0..g {
        let mut row = fb.var(FieldKind::Ax, n);
        row.extend(scaled(fb.diff(n, 0, 1, |m| fb.vorticity(m)), -dt * nu));
        rows.push(row);
        let mut prod = RowProducts::new();
        prod.add(dt, &fb.vorticity(n), &fb.vy(n));
        prod.drain_into(CompositeIndex { field: FieldKind::Ax, node: n }.flat(g), &mut bilinear);
    }

    for n in 0..g {
        let mut row = fb.var(FieldKind::Ay, n);
        row.extend(scaled(fb.diff(n, 1, 0, |m| fb.vorticity(m)), dt * nu));
        rows.push(row);
        let mut prod = RowProducts::new();
        prod.add(-dt, &fb.vorticity(n), &fb.vx(n));
        prod.drain_into(CompositeIndex { field: FieldKind::Ay, node: n }.flat(g), &mut bilinear);
    }

    let a_op = CsrMatrix::from_rows(dim, rows.into_iter().map(merge));
    let b_op = BilinearTensor::from_sorted(dim, bilinear);

    let mut f_vec = vec![T::zero(); dim];
    for n in 0..g {
        f_vec[g + n] = dt * cs2;
        f_vec[2 * g + n] = dt * physics.forcing_fx.values()[n];
        f_vec[3 * g + n] = dt * physics.forcing_fy.values()[n];
    }

    Ok(CarlemanOperators {
        a_op,
        b_op,
        f_vec,
        grid,
        physics: physics.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Field2D;
    use crate::nshj::{step_nshj, FluidState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn physics(grid: GridSpec<f64>, f0: f64) -> PhysicsParams<f64> {
        let fx = Field2D::from_fn(grid, |_, y| f0 * y.cos());
        PhysicsParams::new(1.0 / 6.0, 1.0 / 3.0, 0.012, fx, Field2D::zeros(grid)).unwrap()
    }

    fn random_state(grid: GridSpec<f64>, rng: &mut ChaCha8Rng) -> FluidState<f64> {
        let mut f = |c: f64, s: f64| Field2D::from_fn(grid, |_, _| c + s * rng.gen_range(-1.0..1.0));
        FluidState::new(f(1.0, 0.2), f(0.0, 0.5), f(0.0, 0.5), f(0.0, 0.5)).unwrap()
    }

    #[test]
    fn composite_index_is_bijective() {
        let g = 16;
        for flat in 0..4 * g {
            let c = CompositeIndex::from_flat(flat, g).unwrap();
            assert_eq!(c.flat(g), flat);
        }
        assert!(CompositeIndex::from_flat(4 * g, g).is_none());
        assert_eq!(CompositeIndex::from_flat(3, g).unwrap().field, FieldKind::Rho);
    }

    #[test]
    fn inviscid_silent_operators_are_identity() {
        let grid = GridSpec::new(8).unwrap();
        let p = PhysicsParams::unforced(grid, 0.0, 0.0, 0.05).unwrap();
        let ops = assemble_operators(grid, &p).unwrap();
        assert_eq!(ops.a_op.nnz(), ops.dim());
        for i in 0..ops.dim() {
            assert_eq!(ops.a_op.row(i), (&[i][..], &[1.0][..]));
        }
        assert!(ops.f_vec.iter().all(|&f| f == 0.0));
        assert!(!ops.b_op.is_empty());
    }

    #[test]
    fn structure_invariants() {
        let grid = GridSpec::new(8).unwrap();
        let ops = assemble_operators(grid, &physics(grid, 0.009)).unwrap();
        assert!(ops.a_op.max_row_nnz() <= 13, "{}", ops.a_op.max_row_nnz());

        let mut seen = std::collections::HashMap::new();
        for e in ops.b_op.entries() {
            seen.insert((e.alpha, e.beta, e.gamma), e.coef);
        }
        for e in ops.b_op.entries() {
            if e.beta != e.gamma {
                assert_eq!(seen.get(&(e.alpha, e.gamma, e.beta)), Some(&e.coef));
            }
        }
    }

    #[test]
    fn forcing_vector_layout() {
        let grid = GridSpec::new(16).unwrap();
        let p = physics(grid, 0.009);
        let ops = assemble_operators(grid, &p).unwrap();
        let g = grid.len();
        let dt = p.dt;
        assert!(ops.f_vec[..g].iter().all(|&f| f == 0.0));
        assert!(ops.f_vec[g..2 * g].iter().all(|&f| f == dt * (1.0 / 3.0)));
        for node in 0..g {
            let (_, iy) = grid.coords_of(node);
            let expect = dt * (0.009 * grid.coord(iy).cos());
            assert!((ops.f_vec[2 * g + node] - expect).abs() < 1e-18);
            assert_eq!(ops.f_vec[3 * g + node], 0.0);
        }
    }

    #[test]
    fn reproduces_nshj_step_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [4usize, 8] {
            let grid = GridSpec::new(n).unwrap();
            let p = physics(grid, 0.02);
            let ops = assemble_operators(grid, &p).unwrap();
            for _ in 0..10 {
                let s = random_state(grid, &mut rng);
                let j = s.to_vector();
                let lifted = ops.apply(&j);
                let direct = step_nshj(&s, &p).unwrap().to_vector();
                let err = lifted.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(err < 1e-13, "n={n} err={err}");
            }
        }
    }
}
