//! Finite-volume simulation of obstacle-constrained linear scalar conservation laws
//!
//! ```text
//! q_t + (V_eps(o(x) - q) q)_x = 0
//! ```
//!
//! where the regularized Heaviside `V_eps` slows transport as the density
//! approaches the obstacle `o`. The crate provides the inviscid Godunov
//! solver, its viscous approximation, the semi-analytic description of the
//! `eps -> 0` limit (coincidence region, limit velocity, boundary-curve
//! speeds) and the measured diagnostics used in convergence studies.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases fix the scalar to `f64`.

pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod godunov;
pub mod limit;
pub mod model;
mod scalar;
pub mod velocity;
pub mod viscous;

pub use error::{Error, Result};
pub use evolution::{evolve_with, Evolution, EvolveFailure, Snapshot, SnapshotSummary, StepStats, TimeStepper};
pub use scalar::Scalar;

pub type Grid64 = model::Grid<f64>;
pub type CellField64 = model::CellField<f64>;
pub type Obstacle64 = model::Obstacle<f64>;
pub type InitialDatum64 = model::InitialDatum<f64>;
pub type Scenario64 = model::Scenario<f64>;
pub type VelocityModel64 = velocity::VelocityModel<f64>;
pub type GodunovSolver64 = godunov::GodunovSolver<f64>;
pub type ViscousSolver64 = viscous::ViscousSolver<f64>;
pub type Evolution64 = evolution::Evolution<f64>;
pub type CoincidenceRegion64 = limit::CoincidenceRegion<f64>;
pub type FrontState64 = limit::FrontState<f64>;
pub type DiagnosticsRecord64 = diagnostics::DiagnosticsRecord<f64>;
