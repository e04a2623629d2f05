//! Linear spectral operators: Leray projection, Stokes powers, Sobolev
//! norms, drift removal and velocity gradients.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{SpectralVelocityField, TensorFieldSample};
use crate::par::ordered_sum;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Orthogonal projection onto divergence-free fields, mode by mode:
/// `û ← û - κ(κ·û)/|κ|²`. The zero mode passes through.
pub fn leray_project(f: &SpectralVelocityField) -> SpectralVelocityField {
    let g = *f.grid();
    let tab = g.tables();
    let mut out = f.clone();
    let modes: Vec<[Complex64; 3]> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let m = f.mode(i);
            let k2 = tab.kappa_sq[i];
            if k2 == 0.0 {
                return m;
            }
            let q = tab.kappa[i];
            let dot = (m[0] * q[0] + m[1] * q[1] + m[2] * q[2]) / k2;
            [m[0] - dot * q[0], m[1] - dot * q[1], m[2] - dot * q[2]]
        })
        .collect();
    for (i, m) in modes.into_iter().enumerate() {
        out.set_mode(i, m);
    }
    out
}

fn stokes_symbol(f: &SpectralVelocityField, s: f64) -> Result<impl Fn(usize) -> f64 + Sync + '_> {
    if s < 0.0 {
        if f.nu() == 0.0 {
            return Err(Error::ZeroViscosity);
        }
        if f.drift().iter().any(|z| z.norm_sqr() > 0.0) {
            return Err(Error::ZeroModeNotInvertible);
        }
    }
    let g = *f.grid();
    let nu = f.nu();
    Ok(move |i: usize| {
        let k2 = g.kappa_sq(i);
        if s == 0.0 {
            1.0
        } else if k2 == 0.0 {
            0.0
        } else {
            (nu * k2).powf(s)
        }
    })
}

/// `A^s u` with `A = -νΔ`, ν taken from the field.
pub fn stokes_apply(u: &SpectralVelocityField, s: f64) -> Result<SpectralVelocityField> {
    let sym = stokes_symbol(u, s)?;
    Ok(u.map_modes(sym))
}

/// `‖u‖_{H_s} = (L³ Σ_k (ν|κ|²)^s |û_k|²)^{1/2}`.
pub fn sobolev_norm(u: &SpectralVelocityField, s: f64) -> Result<f64> {
    let sym = stokes_symbol(u, s)?;
    let sum = ordered_sum(u.grid().len(), |i| {
        let m = u.mode(i);
        let w = m[0].norm_sqr() + m[1].norm_sqr() + m[2].norm_sqr();
        if w == 0.0 {
            0.0
        } else {
            sym(i) * w
        }
    });
    Ok((u.grid().volume() * sum).sqrt())
}

/// Galilean drift removal: zeroes the mean velocity `û_0`.
pub fn remove_drift(u: &SpectralVelocityField) -> SpectralVelocityField {
    let mut out = u.clone();
    out.set_mode(0, [Complex64::default(); 3]);
    out
}

/// Rate-of-stress and vorticity quantities of a velocity field.
#[derive(Debug, Clone)]
pub struct FieldGradients {
    /// `S_ij = ∂_j u_i`.
    pub stress_rate: TensorFieldSample,
    /// `σ = (S + Sᵀ)/2`.
    pub strain: TensorFieldSample,
    /// `ω = ∇ × u`.
    pub vorticity: SpectralVelocityField,
    /// `∂_j ω_i`.
    pub vorticity_gradient: TensorFieldSample,
}

/// Spectral gradient tensor `T_ij = iκ_j v̂_i`.
pub fn gradient_tensor(v: &SpectralVelocityField) -> TensorFieldSample {
    let g = *v.grid();
    let mut entries: [[Vec<Complex64>; 3]; 3] = Default::default();
    for (i, row) in entries.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = v.component(i)
                .par_iter()
                .enumerate()
                .map(|(idx, z)| I * g.kappa(idx)[j] * z)
                .collect();
        }
    }
    TensorFieldSample { grid: g, entries }
}

/// Spectral curl `ω̂ = iκ × û`.
pub fn curl(u: &SpectralVelocityField) -> SpectralVelocityField {
    let g = *u.grid();
    let mut out = u.clone();
    let tab = g.tables();
    let modes: Vec<[Complex64; 3]> = (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let q = tab.kappa[idx];
            let m = u.mode(idx);
            [
                I * (q[1] * m[2] - q[2] * m[1]),
                I * (q[2] * m[0] - q[0] * m[2]),
                I * (q[0] * m[1] - q[1] * m[0]),
            ]
        })
        .collect();
    for (idx, m) in modes.into_iter().enumerate() {
        out.set_mode(idx, m);
    }
    out
}

pub fn field_gradients(u: &SpectralVelocityField) -> FieldGradients {
    let stress_rate = gradient_tensor(u);
    let mut strain = stress_rate.clone();
    for i in 0..3 {
        for j in i..3 {
            let sym: Vec<Complex64> = stress_rate.entries[i][j]
                .iter()
                .zip(&stress_rate.entries[j][i])
                .map(|(a, b)| 0.5 * (a + b))
                .collect();
            strain.entries[j][i] = sym.clone();
            strain.entries[i][j] = sym;
        }
    }
    let vorticity = curl(u);
    let vorticity_gradient = gradient_tensor(&vorticity);
    FieldGradients { stress_rate, strain, vorticity, vorticity_gradient }
}
