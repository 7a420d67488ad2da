//! Phase-space representations of finite and infinite dimensional quantum
//! systems: Wigner and Weyl functions for Heisenberg-Weyl oscillators,
//! symmetric SU(N) irreps and their tensor products.

pub mod error;
pub mod kernels;
pub mod liealgebra;
pub mod linalg;
pub mod measures;
pub mod rotations;
pub mod states;
pub mod statmech;
pub mod transforms;

pub use error::{Error, Result};
pub use kernels::{Displacement, Kernel, KernelSpec, Side};
pub use liealgebra::{Algebra, BasisLabel, SystemDescriptor};
pub use linalg::{MatrixJson, OperatorMatrix, C64};
pub use measures::{ManifoldTag, QuadratureGrid};
pub use rotations::PhasePoint;
pub use states::{build_state, StateSpec};
pub use statmech::{Record, ThermalSpec};
pub use transforms::{GridOptions, PhaseFunction, PhaseSpace, StratonovichReport, VerifyOptions};
