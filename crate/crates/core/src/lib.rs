//! Time-dependent reliability of fault-tolerant sensor / compute architectures.
//!
//! An architecture is written `SooN_S/MooN_M`: at least `S` of `N_S` identical
//! sensors and at least `M` of `N_M` identical MCUs must operate. Component
//! lifetimes are independent exponentials and failed components are never
//! restored.
//!
//! Three independent routes compute the survival probability `R(t)`:
//!
//! * [`ctmc`] builds the `(N_M+1)(N_S+1)`-state Markov chain and solves it by
//!   uniformization,
//! * [`analytic`] evaluates the binomial k-out-of-n closed form,
//! * [`montecarlo`] samples component lifetimes.
//!
//! [`analysis`] ranks and compares whole families of architectures.

pub mod analysis;
pub mod analytic;
pub mod architecture;
pub mod ctmc;
mod error;
pub mod montecarlo;

pub use analysis::{ComparisonReport, ReliabilityCurve, Solver, SolverTag};
pub use architecture::{ArchitectureSpec, DiagnosisClass, Layer, SelfDiagnosis};
pub use ctmc::{GeneratorMatrix, ProbabilityVector, StateSpace, SystemState};
pub use error::{Error, Result};
pub use montecarlo::{McConfig, McEstimate};

/// Default sensor failure rate, per hour.
pub const DEFAULT_LAMBDA_SENSOR: f64 = 1e-5;
/// Default MCU failure rate, per hour.
pub const DEFAULT_LAMBDA_MCU: f64 = 1e-4;
/// Default Poisson truncation tolerance of the transient solver.
pub const DEFAULT_EPS: f64 = 1e-12;
