//! Spherical and solid harmonics, expansions on a ball, and the initial-data classifier.

pub mod bessel;
pub mod classify;
pub mod construct;
pub mod epsilon;
pub mod expansion;
pub mod quadrature;
pub mod ylm;

pub use bessel::{spherical_bessel, spherical_bessel_derivative, spherical_jn, spherical_yn};
pub use classify::{
    classify_coefficients, classify_initial_data, classify_profile, Classification, ClassifierSettings, DataClass,
    HarmonicProfile, CLASSIFIER_TOLERANCE,
};
pub use construct::field_with_profile;
pub use epsilon::{epsilon_expansion, DecayClass, EpsilonExpansion};
pub use expansion::{
    expand, expand_real, reconstruct, solid_basis, solid_smooth, young_bound, ExpansionOptions, HarmonicCoefficients,
    RadialNodes,
};
pub use quadrature::{BallQuadrature, SphericalPoint};
pub use ylm::{lm_index, ylm, ylm_all};
