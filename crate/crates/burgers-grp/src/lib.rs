//! Finite-volume solver for the multidimensional periodic Burgers equation
//! built around a generalized Riemann problem (GRP) flux with an artificial
//! viscosity that restores entropy stability across shocks.
//!
//! The crate is organised around the lifecycle of one explicit time step:
//!
//! * [`mesh`] — periodic uniform Cartesian grids in 1, 2 or 3 dimensions,
//!   with face/cell indexing and jump/average algebra;
//! * [`field`] — piecewise-constant cell states and the cell-average
//!   projection of pointwise initial data;
//! * [`reconstruction`] — dimension-by-dimension minmod gradients, the
//!   piecewise-linear lift and its face traces;
//! * [`flux`] — the Godunov value at a face, the GRP flux, the
//!   entropy-conservative flux, the stabilized flux and the full
//!   dissipation-factor decomposition of their differences;
//! * [`stepper`] — forward Euler updates, time-step control and run
//!   orchestration with per-step observers;
//! * [`diagnostics`] — numerical audits of the scheme's entropy balance,
//!   entropy inequality, weak-BV accumulation, dissipation bounds and
//!   consistency residuals;
//! * [`oracles`] — exact solutions (characteristics, planar Riemann
//!   problems), error norms and mesh-refinement convergence studies.
//!
//! The library is `no_std`-compatible (requires `alloc`); the default `std`
//! feature only switches the math backend from `libm` to the standard
//! library.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod burgers;
pub mod convergence;
pub mod diagnostics;
pub mod field;
pub mod flux;
pub(crate) mod math;
pub mod mesh;
pub mod oracles;
pub mod quadrature;
pub mod reconstruction;
pub mod stepper;

pub use field::Field;
pub use flux::{CaseLabel, FluxBreakdown, SchemeParams, SchemeVariant};
pub use mesh::{FaceId, Mesh};
pub use reconstruction::{FaceReconstruction, GradientField};
pub use stepper::{RunConfig, StepObserver, TimeControls, Trajectory};
