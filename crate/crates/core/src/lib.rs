//! Pseudo-spectral laboratory for the incompressible Navier–Stokes equations
//! on the periodic cube: Leray-projected dynamics, dissipation and regularity
//! diagnostics, spherical-harmonic analysis, blowup monitoring and ensemble
//! means.

pub mod blowup;
pub mod cutoff;
pub mod diagnostics;
pub mod ensemble;
pub mod dynamics;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod harmonics;
pub mod io;
pub mod ops;
mod par;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
pub use field::{SpectralVelocityField, TensorFieldSample};
pub use grid::WaveGrid;
