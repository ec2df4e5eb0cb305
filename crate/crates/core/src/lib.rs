//! Second-order Carleman (C2) linearization of forced dissipative dynamics.
//!
//! Two systems are covered. The forced logistic equation ([`logistic`]) has
//! closed-form steady states for both the nonlinear equation and its C2
//! truncation. The 2D periodic forced fluid in
//! Navier-Stokes-Hamilton-Jacobi form ([`nshj`]) is lifted to
//! `(J, J (x) J)` and evolved linearly by [`carleman`]; [`reference_ns`]
//! provides an independent incompressible solver and [`diagnostics`] the
//! measurements used to compare them.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common case.

pub mod carleman;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod logistic;
pub mod nshj;
pub mod reference_ns;
pub mod scalar;
pub mod scenario;

pub use error::{Error, Result};
pub use scalar::Real;

pub type GridSpecF64 = grid::GridSpec<f64>;
pub type Field2DF64 = grid::Field2D<f64>;
pub type FluidStateF64 = nshj::FluidState<f64>;
pub type PhysicsParamsF64 = nshj::PhysicsParams<f64>;
pub type CarlemanOperatorsF64 = carleman::CarlemanOperators<f64>;
pub type C2StateF64 = carleman::C2State<f64>;
pub type LogisticParamsF64 = logistic::LogisticParams<f64>;
pub type TrajectoryF64 = logistic::Trajectory<f64>;
pub type VorticityStateF64 = reference_ns::VorticityState<f64>;
pub type ProbeSeriesF64 = diagnostics::ProbeSeries<f64>;
pub type FlowSetupF64 = scenario::FlowSetup<f64>;

pub type GridSpecF32 = grid::GridSpec<f32>;
pub type Field2DF32 = grid::Field2D<f32>;
pub type FluidStateF32 = nshj::FluidState<f32>;
pub type PhysicsParamsF32 = nshj::PhysicsParams<f32>;
pub type C2StateF32 = carleman::C2State<f32>;
pub type LogisticParamsF32 = logistic::LogisticParams<f32>;
