//! Torus fields with a prescribed harmonic profile.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use std::collections::BTreeMap;

use super::classify::{field_profile, profile_of_samples, ClassifierSettings, HarmonicProfile};
use crate::error::{Error, Result};
use crate::field::SpectralVelocityField;
use crate::grid::WaveGrid;

/// Largest wavenumber component used by the constructor; smaller grids use
/// their whole dealiased band.
pub const CONSTRUCT_KMAX: i64 = 5;

fn polarizations(k: [i64; 3]) -> [[f64; 3]; 2] {
    let kf = k.map(|v| v as f64);
    let kn = kf.iter().map(|v| v * v).sum::<f64>().sqrt();
    let kh = kf.map(|v| v / kn);
    let pick = if kh[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d: f64 = (0..3).map(|i| pick[i] * kh[i]).sum();
    let mut e1 = [0.0; 3];
    for i in 0..3 {
        e1[i] = pick[i] - d * kh[i];
    }
    let n1 = e1.iter().map(|v| v * v).sum::<f64>().sqrt();
    e1 = e1.map(|v| v / n1);
    let e2 = [
        kh[1] * e1[2] - kh[2] * e1[1],
        kh[2] * e1[0] - kh[0] * e1[2],
        kh[0] * e1[1] - kh[1] * e1[0],
    ];
    [e1, e2]
}

/// Half-space wavevectors with `0 < max|k_i| ≤ kmax`.
fn half_space(kmax: i64) -> Vec<[i64; 3]> {
    let r = -kmax..=kmax;
    let mut out = Vec::new();
    for a in r.clone() {
        for b in r.clone() {
            for c in r.clone() {
                let k = [a, b, c];
                if k > [0, 0, 0] {
                    out.push(k);
                }
            }
        }
    }
    out
}

/// Minimum-norm divergence-free real field, built from modes with
/// `|k_i|` up to the dealias cutoff (at most `CONSTRUCT_KMAX`), whose harmonic profile equals `target`.
pub fn field_with_profile(grid: WaveGrid, nu: f64, target: &HarmonicProfile) -> Result<SpectralVelocityField> {
    field_with_profile_using(grid, nu, target, &ClassifierSettings::new(target.lmax))
}

pub fn field_with_profile_using(
    grid: WaveGrid,
    nu: f64,
    target: &HarmonicProfile,
    settings: &ClassifierSettings,
) -> Result<SpectralVelocityField> {
    let kmax = grid.dealias_cutoff().min(CONSTRUCT_KMAX);
    if kmax < 1 {
        return Err(Error::BandOutsideGrid(format!("N = {} has no dealiased modes for profile construction", grid.n())));
    }
    if target.values.len() != 3 || target.lmax != settings.lmax {
        return Err(Error::InvalidHarmonicIndex("target profile must have three components at the settings degree".into()));
    }
    let length = grid.length();
    let quad = settings.quadrature(length)?;
    let opts = settings.options(length);
    let centre = 0.5 * length;
    let scale = 2.0 * std::f64::consts::PI / length;
    let points: Vec<[f64; 3]> = quad.points().iter().map(|p| p.cartesian().map(|v| v + centre)).collect();

    let mut basis: Vec<([i64; 3], [Complex64; 3])> = Vec::new();
    for k in half_space(kmax) {
        for e in polarizations(k) {
            for z in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
                basis.push((k, e.map(|v| z * v)));
            }
        }
    }
    let columns: Vec<Vec<f64>> = basis
        .par_iter()
        .map(|(k, v)| {
            let mut samples = [vec![0.0; points.len()], vec![0.0; points.len()], vec![0.0; points.len()]];
            for (i, x) in points.iter().enumerate() {
                let ph = scale * (k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2]);
                let e = Complex64::from_polar(1.0, ph);
                for c in 0..3 {
                    samples[c][i] = 2.0 * (v[c] * e).re;
                }
            }
            profile_of_samples(&quad, &samples, &opts).map(|p| p.flatten())
        })
        .collect::<Result<_>>()?;
    let rows = columns[0].len();
    let m = DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i]);
    let t = DVector::from_vec(target.flatten());
    let chol = (&m * m.transpose())
        .cholesky()
        .ok_or_else(|| Error::LinearAlgebra("profile map is rank deficient".into()))?;
    let build = |x: &DVector<f64>| -> Result<SpectralVelocityField> {
        let mut acc: BTreeMap<[i64; 3], [Complex64; 3]> = BTreeMap::new();
        for ((k, v), c) in basis.iter().zip(x.iter()) {
            let e = acc.entry(*k).or_default();
            for i in 0..3 {
                e[i] += v[i] * *c;
            }
        }
        let mut u = SpectralVelocityField::zeros(grid, nu);
        for (k, v) in acc {
            u.set_mode_pair(k, v)?;
        }
        Ok(u)
    };
    let mut x = m.transpose() * chol.solve(&t);
    for _ in 0..3 {
        let r = &t - &m * &x;
        x += m.transpose() * chol.solve(&r);
    }
    let mut u = build(&x)?;
    // the same corrections against the profile actually measured on the field
    for _ in 0..3 {
        let r = &t - DVector::from_vec(field_profile(&u, settings)?.flatten());
        x += m.transpose() * chol.solve(&r);
        u = build(&x)?;
    }
    let resid = (DVector::from_vec(field_profile(&u, settings)?.flatten()) - &t).norm();
    if resid > 1e-9 * t.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::LinearAlgebra(format!("profile not reachable, residual {resid:.3e}")));
    }
    Ok(u)
}
