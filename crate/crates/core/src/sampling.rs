//! Seeded random fields for tests, verification and examples.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::SpectralVelocityField;
use crate::grid::WaveGrid;
use crate::ops::leray_project;

/// Random real field on `|k_i| <= kmax`, with no projection, Nyquist or
/// zero-mode cleanup beyond reality.
pub fn random_raw(g: WaveGrid, nu: f64, kmax: i64, seed: u64) -> SpectralVelocityField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = SpectralVelocityField::zeros(g, nu);
    for idx in 0..g.len() {
        let k = g.k_of(idx);
        if k.iter().any(|v| v.abs() > kmax) || g.is_nyquist(idx) {
            continue;
        }
        let mut v = [Complex64::default(); 3];
        for z in v.iter_mut() {
            *z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        u.set_mode(idx, v);
    }
    u.symmetrize();
    u
}

/// Random divergence-free, drift-free real field on `|k_i| <= kmax`.
pub fn random_solenoidal(g: WaveGrid, nu: f64, kmax: i64, seed: u64) -> SpectralVelocityField {
    let mut u = random_raw(g, nu, kmax, seed);
    u.set_mode(0, [Complex64::default(); 3]);
    leray_project(&u)
}
