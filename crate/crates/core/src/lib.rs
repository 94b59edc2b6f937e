//! Plane waves of the complex Klein-Gordon equation
//! `u_tt − u_xx + f(|u|²)u = 0` on the line.
//!
//! The crate bundles the pieces needed to study their stability:
//!
//! * [`model`]: polynomial nonlinearities, the dispersion relation
//!   `ω² = k² + f(a²)`, the spectral condition and phase modulations.
//! * [`field`]: periodic grids, spectral derivatives and initial data.
//! * [`solver`]: a Strang-splitting pseudospectral integrator.
//! * [`polar`]: amplitude/phase decomposition, norm diagnostics and
//!   power-law fits.
//! * [`energy`]: the conserved co-moving energy.
//! * [`spectral`]: operator-pencil spectra and closed-form classification.

pub mod energy;
pub mod error;
pub mod field;
pub mod model;
pub mod polar;
mod quad;
pub mod roots;
pub mod solver;
pub mod spectral;

/// Version of this crate, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use field::{PeriodicGrid, Perturbation, State};
pub use model::{Nonlinearity, PhaseModulation, PlaneWave, Regime};
