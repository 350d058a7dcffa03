//! Pseudo-spectral simulation of a stochastic Hamilton–Jacobi–Bellman equation
//! with transport noise on the periodic box `[0, 2π)^n`:
//!
//! ```text
//! du = Σ_i 𝓛_i u ∘ dW_i + (V + μΔu - ½|∇u|²) dt,   𝓛_i = a_i ∂_i + b_i
//! ```
//!
//! Modules build on one another: [`spectral`] fields and transforms,
//! [`transport`] operators, [`truncation`] of the nonlinearity, [`noise`] paths,
//! [`integrators`], the [`mild`] Picard solver, reference [`oracles`] and the
//! config-driven [`campaign`] runner.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod campaign;
pub mod error;
pub mod integrators;
pub mod io;
pub mod mild;
pub mod noise;
pub mod oracles;
pub mod sampling;
pub mod spectral;
pub mod transport;
pub mod truncation;

pub use error::{Error, Result};
pub use integrators::{integrate, Scheme, SobolevIndex, SolverConfig, Termination, Trajectory, Truncation};
pub use noise::{sample_path, NoisePath};
pub use spectral::{SpatialField, SpectralField, TorusGrid};
pub use transport::TransportOperator;
pub use truncation::CutoffSpec;
