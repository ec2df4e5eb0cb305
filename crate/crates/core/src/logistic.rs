//! Forced logistic decay `x' = -a x + b x^2 + f` and its Carleman
//! truncations.
//!
//! Everything here is integrated with explicit Euler. The closed forms
//! (`attractors`, `c2_fixed_point`, `compare_expansions`) are the exact
//! steady states the integrators must approach.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Magnitude beyond which an integration is declared divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticParams<T> {
    /// Linear decay rate.
    pub a: T,
    /// Quadratic growth coefficient.
    pub b: T,
    /// Constant forcing.
    pub f: T,
}

impl<T: Real> LogisticParams<T> {
    pub fn new(a: T, b: T, f: T) -> Result<Self> {
        if !(a > T::zero() && b > T::zero() && f >= T::zero()) {
            return Err(Error::Domain(format!(
                "need a > 0, b > 0, f >= 0 (got a={a}, b={b}, f={f})"
            )));
        }
        Ok(Self { a, b, f })
    }

    /// Picks `a` so that `b f / a^2 = g2`.
    pub fn from_g2(b: T, f: T, g2: T) -> Result<Self> {
        if !(g2 > T::zero()) {
            return Err(Error::Domain(format!("g2 must be positive, got {g2}")));
        }
        Self::new((b * f / g2).sqrt(), b, f)
    }

    /// Growth-to-decay ratio `g^2 = b f / a^2`.
    pub fn g2(&self) -> T {
        self.b * self.f / (self.a * self.a)
    }

    /// Capacity `a / b` of the unforced logistic.
    pub fn capacity(&self) -> T {
        self.a / self.b
    }

    #[inline]
    fn rhs(&self, x: T) -> T {
        -self.a * x + self.b * x * x + self.f
    }
}

/// Uniformly sampled trajectory of a (possibly vector-valued) state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    t0: T,
    dt: T,
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn new(t0: T, dt: T, dim: usize) -> Self {
        Self {
            t0,
            dt,
            dim,
            data: Vec::new(),
        }
    }

    /// Scalar trajectory from samples starting at `t0`.
    pub fn from_scalars(t0: T, dt: T, values: Vec<T>) -> Self {
        Self {
            t0,
            dt,
            dim: 1,
            data: values,
        }
    }

    pub fn push(&mut self, sample: &[T]) {
        debug_assert_eq!(sample.len(), self.dim);
        self.data.extend_from_slice(sample);
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// Time of the first sample.
    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn time(&self, i: usize) -> T {
        self.t0 + T::from_usize_lossy(i) * self.dt
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn sample(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn last(&self) -> Option<&[T]> {
        self.len().checked_sub(1).map(|i| self.sample(i))
    }

    /// Series of one component.
    pub fn component(&self, j: usize) -> Vec<T> {
        self.data.iter().skip(j).step_by(self.dim).copied().collect()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            t0: self.t0,
            dt: self.dt,
            dim: self.dim,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

fn check_dt<T: Real>(dt: T) -> Result<()> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::Domain(format!("dt must be positive, got {dt}")));
    }
    Ok(())
}

fn guard<T: Real>(state: &[T], what: &str, step: usize) -> Result<()> {
    let limit = T::lit(DIVERGENCE_THRESHOLD);
    if state.iter().any(|v| !v.is_finite() || v.abs() > limit) {
        return Err(Error::divergence(what, step));
    }
    Ok(())
}

/// Stable and unstable fixed points, `(a/2b)(1 -/+ sqrt(1 - 4 g^2))`.
pub fn attractors<T: Real>(p: &LogisticParams<T>) -> Result<(T, T)> {
    let g2 = p.g2();
    let four = T::lit(4.0);
    if !(g2 < T::lit(0.25)) {
        return Err(Error::Domain(format!(
            "g2 = {g2} >= 1/4: no real attractors, solution runs away"
        )));
    }
    let root = (T::one() - four * g2).sqrt();
    let half_cap = p.a / (p.b + p.b);
    Ok((half_cap * (T::one() - root), half_cap * (T::one() + root)))
}

/// Steady state of the two-level Carleman system: `(f/a) / (1 - g^2)`.
pub fn c2_fixed_point<T: Real>(p: &LogisticParams<T>) -> Result<T> {
    let g2 = p.g2();
    if !(g2 < T::one()) {
        return Err(Error::Domain(format!("g2 = {g2} >= 1: C2 steady state has a pole")));
    }
    Ok((p.f / p.a) / (T::one() - g2))
}

/// Explicit Euler on the nonlinear equation.
pub fn euler_logistic<T: Real>(
    x0: T,
    p: &LogisticParams<T>,
    dt: T,
    steps: usize,
) -> Result<Trajectory<T>> {
    check_dt(dt)?;
    let mut traj = Trajectory::new(T::zero(), dt, 1);
    let mut x = x0;
    traj.push(&[x]);
    for step in 1..=steps {
        x = x + dt * p.rhs(x);
        guard(&[x], "logistic", step)?;
        traj.push(&[x]);
    }
    Ok(traj)
}

/// Euler on `x1' = -a x1 + b x2 + f`, `x2' = -2 a x2 + 2 f x1`, started
/// from the exact lift `(x0, x0^2)`.
pub fn c2_logistic<T: Real>(
    x0: T,
    p: &LogisticParams<T>,
    dt: T,
    steps: usize,
) -> Result<Trajectory<T>> {
    c2_logistic_from(x0, x0 * x0, p, dt, steps)
}

/// As [`c2_logistic`] with an arbitrary second-level initial value.
pub fn c2_logistic_from<T: Real>(
    x1: T,
    x2: T,
    p: &LogisticParams<T>,
    dt: T,
    steps: usize,
) -> Result<Trajectory<T>> {
    check_dt(dt)?;
    let two = T::lit(2.0);
    let mut traj = Trajectory::new(T::zero(), dt, 2);
    let (mut x1, mut x2) = (x1, x2);
    traj.push(&[x1, x2]);
    for step in 1..=steps {
        let d1 = (-p.a * x1 + p.b * x2) + p.f;
        let d2 = two * (-p.a * x2) + two * p.f * x1;
        x1 = x1 + dt * d1;
        x2 = x2 + dt * d2;
        guard(&[x1, x2], "c2 logistic", step)?;
        traj.push(&[x1, x2]);
    }
    Ok(traj)
}

/// Order-`k_max` truncation of the unforced hierarchy
/// `x_k' = k(-a x_k + b x_{k+1})` with `x_{K+1} = 0`.
pub fn carleman_k_logistic<T: Real>(
    x0: T,
    a: T,
    b: T,
    k_max: usize,
    dt: T,
    steps: usize,
) -> Result<Trajectory<T>> {
    check_dt(dt)?;
    if k_max == 0 {
        return Err(Error::Domain("truncation order must be >= 1".into()));
    }
    let mut x: Vec<T> = (1..=k_max).map(|k| x0.powi(k as i32)).collect();
    let mut next = vec![T::zero(); k_max];
    let mut traj = Trajectory::new(T::zero(), dt, k_max);
    traj.push(&x);
    for step in 1..=steps {
        for k in 0..k_max {
            let upper = if k + 1 < k_max { x[k + 1] } else { T::zero() };
            let order = T::from_usize_lossy(k + 1);
            next[k] = x[k] + dt * (order * (-a * x[k] + b * upper));
        }
        std::mem::swap(&mut x, &mut next);
        guard(&x, "carleman hierarchy", step)?;
        traj.push(&x);
    }
    Ok(traj)
}

/// Closed-form samples of the unforced logistic,
/// `x(t) = a x0 e^{-at} / (a - b x0 (1 - e^{-at}))`.
pub fn exact_unforced<T: Real>(x0: T, a: T, b: T, dt: T, steps: usize) -> Result<Trajectory<T>> {
    check_dt(dt)?;
    let mut traj = Trajectory::new(T::zero(), dt, 1);
    for i in 0..=steps {
        let e = (-a * dt * T::from_usize_lossy(i)).exp();
        let denom = a - b * x0 * (T::one() - e);
        if !(denom > T::zero()) {
            return Err(Error::divergence("exact logistic (blow-up)", i));
        }
        traj.push(&[a * x0 * e / denom]);
    }
    Ok(traj)
}

/// Sliding window mean over `[t - tau, t + tau]` by the trapezoidal rule.
///
/// `tau` must be an integer multiple of the sample spacing. Only times
/// whose full window lies inside the trajectory are returned, so the output
/// is `2 tau / dt` samples shorter and starts at `t0 + tau`.
pub fn time_average<T: Real>(traj: &Trajectory<T>, tau: T) -> Result<Trajectory<T>> {
    if !(tau >= T::zero()) {
        return Err(Error::Domain(format!("tau must be >= 0, got {tau}")));
    }
    if tau == T::zero() {
        return Ok(traj.clone());
    }
    let ratio = tau / traj.dt();
    let m = ratio.round();
    if (ratio - m).abs() > T::lit(1e-6) * ratio || m < T::one() {
        return Err(Error::Domain(format!(
            "tau = {tau} is not a positive multiple of dt = {}",
            traj.dt()
        )));
    }
    let m = m.to_usize().unwrap_or(0);
    let len = traj.len();
    if len < 2 * m + 1 {
        return Err(Error::Domain(format!(
            "window of {} samples exceeds trajectory of {len}",
            2 * m + 1
        )));
    }
    let dim = traj.dim();
    let half = T::lit(0.5);
    let norm = T::one() / T::from_usize_lossy(2 * m);
    let mut out = Trajectory::new(traj.time(m), traj.dt(), dim);
    let mut acc = vec![T::zero(); dim];
    for centre in m..len - m {
        for (j, a) in acc.iter_mut().enumerate() {
            let lo = traj.sample(centre - m)[j];
            let hi = traj.sample(centre + m)[j];
            let mut s = half * (lo + hi);
            for i in centre - m + 1..centre + m {
                s += traj.sample(i)[j];
            }
            *a = s * norm;
        }
        out.push(&acc);
    }
    Ok(out)
}

/// Largest violation of the filtered power hierarchy
/// `dX_k/dt = k(-a X_k + b X_{k+1})`, where `X_k` is the time average of
/// `x^k` and the time derivative is a centered difference.
pub fn filter_residual<T: Real>(
    x_traj: &Trajectory<T>,
    k: usize,
    tau: T,
    a: T,
    b: T,
) -> Result<T> {
    if k == 0 {
        return Err(Error::Domain("k must be >= 1".into()));
    }
    if x_traj.dim() != 1 {
        return Err(Error::Dimension("filter_residual needs a scalar trajectory".into()));
    }
    let xk = time_average(&x_traj.map(|v| v.powi(k as i32)), tau)?;
    let xk1 = time_average(&x_traj.map(|v| v.powi(k as i32 + 1)), tau)?;
    if xk.len() < 3 {
        return Err(Error::Domain("too few filtered samples for a derivative".into()));
    }
    let order = T::from_usize_lossy(k);
    let two_dt = xk.dt() + xk.dt();
    let worst = (1..xk.len() - 1)
        .map(|i| {
            let deriv = (xk.sample(i + 1)[0] - xk.sample(i - 1)[0]) / two_dt;
            (deriv - order * (-a * xk.sample(i)[0] + b * xk1.sample(i)[0])).abs()
        })
        .fold(T::zero(), T::max);
    Ok(worst)
}

/// Steady states normalised by the linear response `f/a`:
/// `(exact, c2) = ((1 - sqrt(1 - 4g^2)) / 2g^2, 1 / (1 - g^2))`.
///
/// The exact ratio is evaluated as `2 / (1 + sqrt(1 - 4g^2))`, the same
/// quantity without the cancellation at small `g^2`.
pub fn compare_expansions<T: Real>(g2: T) -> Result<(T, T)> {
    if !(g2 < T::lit(0.25)) || g2 < T::zero() {
        return Err(Error::Domain(format!("g2 = {g2} outside [0, 1/4)")));
    }
    let two = T::lit(2.0);
    let exact = two / (T::one() + (T::one() - T::lit(4.0) * g2).sqrt());
    let c2 = T::one() / (T::one() - g2);
    Ok((exact, c2))
}
