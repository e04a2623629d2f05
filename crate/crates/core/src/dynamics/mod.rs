//! Time integration of the unforced incompressible Navier-Stokes equation.

pub mod config;
pub mod init;
pub mod nonlinear;
pub mod simulate;
pub mod stepper;
pub mod weak;

pub use config::{Dealias, Forcing, Scheme, SimulationConfig};
pub use init::{initial_data, InitDescriptor};
pub use nonlinear::{convective_term, nonlinear_term};
pub use simulate::{simulate, simulate_from, simulate_with, Simulation};
pub use stepper::{rhs, step, TrajectorySample};
pub use weak::weak_residual;
