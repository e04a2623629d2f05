//! Dissipation, energy, entropy and regularity diagnostics.

pub mod dissipation;
pub mod entropy;
pub mod mixed;
pub mod regularity;

pub use dissipation::{dissipation_report, energy_identity_residual, ComponentRates, DissipationReport, EnergyIdentity};
pub use entropy::{entropy_surrogate, normalized_mean_state, EntropySurrogate};
pub use mixed::{admissible, mixed_norm, spatial_norm};
pub use regularity::{regularity_ledger, RegularityLedger};
