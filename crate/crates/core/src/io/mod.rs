//! Persistence, configuration and report emission.

pub mod config;
pub mod manifest;
pub mod nssf;
pub mod output;
pub mod samples;

pub use config::{simulation_config, to_key_values, KeyValues, RunConfig};
pub use manifest::{RunManifest, MANIFEST_FILE};
pub use nssf::{decode, encode, load_field, save_field};
pub use samples::{load_samples, RawSamples};
