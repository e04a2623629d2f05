//! Three-dimensional complex FFT on `N³` row-major tables.
//!
//! Forward transforms divide by `N³` so that the zero coefficient is the
//! spatial mean; inverse transforms are unnormalized Fourier sums.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::WaveGrid;

type Plan = Arc<dyn Fft<f64>>;

fn plan(n: usize, direction: FftDirection) -> Plan {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    let key = (n, direction == FftDirection::Forward);
    let mut cache = CACHE.get_or_init(Default::default).lock().unwrap();
    cache
        .entry(key)
        .or_insert_with(|| FftPlanner::new().plan_fft(n, direction))
        .clone()
}

const TILE: usize = 16;

// data[a][b][c] -> out[c][a][b], i.e. transpose of an (n² × n) matrix
fn rotate_axes(data: &[Complex64], out: &mut [Complex64], n: usize) {
    let rows = n * n;
    let tile = TILE.min(n);
    out.par_chunks_mut(tile * rows).enumerate().for_each(|(cb, block)| {
        let c0 = cb * tile;
        let width = block.len() / rows;
        for r0 in (0..rows).step_by(tile) {
            for r in r0..(r0 + tile).min(rows) {
                let src = &data[r * n + c0..r * n + c0 + width];
                for (dc, v) in src.iter().enumerate() {
                    block[dc * rows + r] = *v;
                }
            }
        }
    });
}

fn transform_in_place(data: &mut Vec<Complex64>, n: usize, direction: FftDirection) {
    let fft = plan(n, direction);
    let scratch_len = fft.get_inplace_scratch_len();
    let mut tmp = vec![Complex64::default(); data.len()];
    for _ in 0..3 {
        data.par_chunks_mut(n * 64).for_each_init(
            || vec![Complex64::default(); scratch_len],
            |scratch, lines| fft.process_with_scratch(lines, scratch),
        );
        rotate_axes(data, &mut tmp, n);
        std::mem::swap(data, &mut tmp);
    }
}

/// Forward transform of complex samples, normalized by `1/N³`.
pub fn forward(grid: &WaveGrid, samples: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(grid, samples.len())?;
    let mut data = samples.to_vec();
    transform_in_place(&mut data, grid.n(), FftDirection::Forward);
    let scale = 1.0 / grid.len() as f64;
    data.par_iter_mut().for_each(|v| *v *= scale);
    Ok(data)
}

/// Forward transform of real samples.
pub fn forward_real(grid: &WaveGrid, samples: &[f64]) -> Result<Vec<Complex64>> {
    check_len(grid, samples.len())?;
    let data: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    forward(grid, &data)
}

/// Inverse transform, `u(x) = Σ_k û_k e^{iκ·x}`.
pub fn inverse(grid: &WaveGrid, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(grid, coeffs.len())?;
    let mut data = coeffs.to_vec();
    transform_in_place(&mut data, grid.n(), FftDirection::Inverse);
    Ok(data)
}

/// Inverse transform keeping the real part, for conjugate-symmetric tables.
pub fn inverse_real(grid: &WaveGrid, coeffs: &[Complex64]) -> Result<Vec<f64>> {
    Ok(inverse(grid, coeffs)?.into_iter().map(|z| z.re).collect())
}

/// Two real inverse transforms through one complex transform.
pub fn inverse_real_pair(grid: &WaveGrid, a: &[Complex64], b: &[Complex64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len(grid, a.len())?;
    check_len(grid, b.len())?;
    Ok(inverse_packed(grid, a.iter().zip(b).map(|(x, y)| x + Complex64::i() * y).collect()))
}

/// Inverse transform of `â + i b̂` split into the real tables `a` and `b`.
pub(crate) fn inverse_packed(grid: &WaveGrid, mut data: Vec<Complex64>) -> (Vec<f64>, Vec<f64>) {
    transform_in_place(&mut data, grid.n(), FftDirection::Inverse);
    data.into_iter().map(|z| (z.re, z.im)).unzip()
}

/// Two real forward transforms through one complex transform.
pub fn forward_real_pair(grid: &WaveGrid, x: &[f64], y: &[f64]) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    check_len(grid, x.len())?;
    check_len(grid, y.len())?;
    Ok(forward_packed(grid, x.iter().zip(y).map(|(a, b)| Complex64::new(*a, *b)).collect()))
}

/// Spectra of `x` and `y` from the samples `x + iy`.
pub(crate) fn forward_packed(grid: &WaveGrid, mut z: Vec<Complex64>) -> (Vec<Complex64>, Vec<Complex64>) {
    transform_in_place(&mut z, grid.n(), FftDirection::Forward);
    let scale = 1.0 / grid.len() as f64;
    let t = grid.tables();
    (0..z.len())
        .map(|i| {
            let w = z[t.conj[i]].conj();
            (0.5 * scale * (z[i] + w), Complex64::new(0.0, -0.5 * scale) * (z[i] - w))
        })
        .unzip()
}

fn check_len(grid: &WaveGrid, got: usize) -> Result<()> {
    if got != grid.len() {
        return Err(Error::SizeMismatch { expected: grid.len(), got });
    }
    Ok(())
}
