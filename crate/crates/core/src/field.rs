//! Divergence-free real velocity fields stored as truncated Fourier tables.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::WaveGrid;
use crate::par::ordered_sum;

/// Relative divergence tolerance for the incompressibility invariant.
pub const DIV_TOLERANCE: f64 = 1e-12;

/// Velocity field `u(x) = Σ_k û_k e^{iκ·x}` on the periodic cube.
///
/// The viscosity travels with the field because it fixes the Stokes
/// operator `A = -νΔ` that defines the fractional norms.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVelocityField {
    grid: WaveGrid,
    nu: f64,
    time: Option<f64>,
    coeffs: [Vec<Complex64>; 3],
}

impl SpectralVelocityField {
    pub fn zeros(grid: WaveGrid, nu: f64) -> Self {
        let z = vec![Complex64::default(); grid.len()];
        Self { grid, nu, time: None, coeffs: [z.clone(), z.clone(), z] }
    }

    /// Wraps raw coefficient tables. No invariant is enforced here.
    pub fn from_coeffs(grid: WaveGrid, nu: f64, coeffs: [Vec<Complex64>; 3]) -> Result<Self> {
        for c in &coeffs {
            if c.len() != grid.len() {
                return Err(Error::SizeMismatch { expected: grid.len(), got: c.len() });
            }
        }
        Ok(Self { grid, nu, time: None, coeffs })
    }

    /// Transforms physical samples and clears the Nyquist planes.
    pub fn from_physical(grid: WaveGrid, nu: f64, samples: [&[f64]; 3]) -> Result<Self> {
        let mut coeffs: [Vec<Complex64>; 3] = Default::default();
        for (c, s) in coeffs.iter_mut().zip(samples) {
            *c = fft::forward_real(&grid, s)?;
        }
        let mut f = Self { grid, nu, time: None, coeffs };
        f.clear_nyquist();
        Ok(f)
    }

    /// Builds a field by evaluating `f` at every collocation point.
    pub fn from_fn(grid: WaveGrid, nu: f64, f: impl Fn([f64; 3]) -> [f64; 3] + Sync) -> Result<Self> {
        let vals: Vec<[f64; 3]> = (0..grid.len()).into_par_iter().map(|i| f(grid.point(i))).collect();
        let comp = |c: usize| vals.iter().map(|v| v[c]).collect::<Vec<_>>();
        let (x, y, z) = (comp(0), comp(1), comp(2));
        Self::from_physical(grid, nu, [&x, &y, &z])
    }

    pub fn grid(&self) -> &WaveGrid {
        &self.grid
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn time(&self) -> Option<f64> {
        self.time
    }

    pub fn with_time(mut self, t: Option<f64>) -> Self {
        self.time = t;
        self
    }

    pub fn set_time(&mut self, t: Option<f64>) {
        self.time = t;
    }

    pub fn coeffs(&self) -> &[Vec<Complex64>; 3] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Vec<Complex64>; 3] {
        &mut self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.coeffs[c]
    }

    /// Coefficient vector `û_k` at a flat index.
    #[inline]
    pub fn mode(&self, idx: usize) -> [Complex64; 3] {
        [self.coeffs[0][idx], self.coeffs[1][idx], self.coeffs[2][idx]]
    }

    #[inline]
    pub fn set_mode(&mut self, idx: usize, v: [Complex64; 3]) {
        for c in 0..3 {
            self.coeffs[c][idx] = v[c];
        }
    }

    /// Sets `û_k = v` and `û_{-k} = conj(v)`.
    pub fn set_mode_pair(&mut self, k: [i64; 3], v: [Complex64; 3]) -> Result<()> {
        let idx = self
            .grid
            .flat_of(k)
            .ok_or_else(|| Error::BandOutsideGrid(format!("wavevector {k:?} not retained")))?;
        let cj = self.grid.conjugate_index(idx);
        if cj == idx {
            for c in 0..3 {
                self.coeffs[c][idx] = Complex64::new(v[c].re, 0.0);
            }
        } else {
            self.set_mode(idx, v);
            self.set_mode(cj, [v[0].conj(), v[1].conj(), v[2].conj()]);
        }
        Ok(())
    }

    /// Physical-space samples of each component.
    pub fn to_physical(&self) -> Result<[Vec<f64>; 3]> {
        let parts: Vec<Vec<f64>> = self
            .coeffs
            .par_iter()
            .map(|c| fft::inverse_real(&self.grid, c))
            .collect::<Result<_>>()?;
        let mut it = parts.into_iter();
        Ok([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])
    }

    /// Direct Fourier-sum evaluation at an arbitrary point.
    pub fn evaluate_at(&self, x: [f64; 3]) -> [f64; 3] {
        let s = 2.0 * std::f64::consts::PI / self.grid.length();
        let mut out = [0.0; 3];
        for idx in 0..self.grid.len() {
            let m = self.mode(idx);
            if m.iter().all(|z| *z == Complex64::default()) {
                continue;
            }
            let k = self.grid.k_of(idx);
            let phase = s * (k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2]);
            let e = Complex64::from_polar(1.0, phase);
            for c in 0..3 {
                out[c] += (m[c] * e).re;
            }
        }
        out
    }

    /// Nonzero modes as `(flat index, coefficient)` pairs.
    pub fn support(&self) -> Vec<(usize, [Complex64; 3])> {
        (0..self.grid.len())
            .map(|i| (i, self.mode(i)))
            .filter(|(_, m)| m.iter().any(|z| z.norm_sqr() > 0.0))
            .collect()
    }

    pub fn clear_nyquist(&mut self) {
        let t = self.grid.tables();
        for c in self.coeffs.iter_mut() {
            c.par_iter_mut().enumerate().for_each(|(i, z)| {
                if t.nyquist[i] {
                    *z = Complex64::default();
                }
            });
        }
    }

    /// Zeroes every mode removed by the 2/3 rule.
    pub fn dealias(&mut self) {
        let t = self.grid.tables();
        for c in self.coeffs.iter_mut() {
            c.par_iter_mut().enumerate().for_each(|(i, z)| {
                if t.truncated[i] {
                    *z = Complex64::default();
                }
            });
        }
    }

    /// Replaces each pair by its conjugate-symmetric average.
    pub fn symmetrize(&mut self) {
        let t = self.grid.tables();
        for c in self.coeffs.iter_mut() {
            let src = c.clone();
            c.par_iter_mut().enumerate().for_each(|(i, z)| {
                *z = 0.5 * (src[i] + src[t.conj[i]].conj());
            });
        }
    }

    /// Squared coefficient sum `Σ_k |û_k|²`.
    pub fn coeff_norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| ordered_sum(c.len(), |i| c[i].norm_sqr())).sum()
    }

    /// `L³ Σ_k Re(û_k · conj v̂_k)`, the H inner product.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        let s: f64 = (0..3)
            .map(|c| {
                let (a, b) = (&self.coeffs[c], &other.coeffs[c]);
                ordered_sum(a.len(), |i| (a[i] * b[i].conj()).re)
            })
            .sum();
        Ok(self.grid.volume() * s)
    }

    /// Per-component H inner products `(u_i, v_i)`.
    pub fn inner_components(&self, other: &Self) -> Result<[f64; 3]> {
        self.check_same_grid(other)?;
        let v = self.grid.volume();
        let mut out = [0.0; 3];
        for (c, o) in out.iter_mut().enumerate() {
            let (a, b) = (&self.coeffs[c], &other.coeffs[c]);
            *o = v * ordered_sum(a.len(), |i| (a[i] * b[i].conj()).re);
        }
        Ok(out)
    }

    /// H (bare L₂) norm.
    pub fn norm_h(&self) -> f64 {
        (self.grid.volume() * self.coeff_norm_sqr()).sqrt()
    }

    /// `‖∇u‖²_H = L³ Σ |κ|² |û_k|²`.
    pub fn grad_norm_sqr(&self) -> f64 {
        let g = self.grid;
        let t = g.tables();
        let s = ordered_sum(g.len(), |i| {
            let k2 = t.kappa_sq[i];
            k2 * (self.coeffs[0][i].norm_sqr() + self.coeffs[1][i].norm_sqr() + self.coeffs[2][i].norm_sqr())
        });
        g.volume() * s
    }

    /// Largest relative divergence `max_k |κ·û_k| / (Σ_k |κ|²|û_k|²)^{1/2}`.
    pub fn divergence_residual(&self) -> f64 {
        let g = self.grid;
        let t = g.tables();
        let max_div = (0..g.len())
            .into_par_iter()
            .map(|i| {
                let q = t.kappa[i];
                let m = self.mode(i);
                (m[0] * q[0] + m[1] * q[1] + m[2] * q[2]).norm()
            })
            .reduce(|| 0.0, f64::max);
        let grad = self.grad_norm_sqr() / g.volume();
        if grad == 0.0 {
            0.0
        } else {
            max_div / grad.sqrt()
        }
    }

    /// Largest `|û_{-k} - conj(û_k)|` relative to the largest coefficient.
    pub fn reality_defect(&self) -> f64 {
        let g = self.grid;
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for c in &self.coeffs {
            for i in 0..g.len() {
                worst = worst.max((c[g.conjugate_index(i)] - c[i].conj()).norm());
                scale = scale.max(c[i].norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// Mean velocity `û_0`.
    pub fn drift(&self) -> [Complex64; 3] {
        self.mode(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.iter().all(|z| *z == Complex64::default()))
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// `a·self + b·other`, keeping metadata of `self`.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let mut out = self.clone();
        for c in 0..3 {
            out.coeffs[c]
                .par_iter_mut()
                .zip(&other.coeffs[c])
                .for_each(|(x, y)| *x = *x * a + *y * b);
        }
        Ok(out)
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            c.par_iter_mut().for_each(|z| *z *= a);
        }
        out
    }

    /// Applies a real per-mode multiplier.
    pub fn map_modes(&self, f: impl Fn(usize) -> f64 + Sync) -> Self {
        let w: Vec<f64> = (0..self.grid.len()).into_par_iter().map(&f).collect();
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            c.par_iter_mut().zip(&w).for_each(|(z, w)| *z *= w);
        }
        out
    }
}

/// Nine coefficient tables of a rank-2 tensor field, `entries[i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorFieldSample {
    pub grid: WaveGrid,
    pub entries: [[Vec<Complex64>; 3]; 3],
}

impl TensorFieldSample {
    pub fn transpose(&self) -> Self {
        let mut entries: [[Vec<Complex64>; 3]; 3] = Default::default();
        for i in 0..3 {
            for j in 0..3 {
                entries[i][j] = self.entries[j][i].clone();
            }
        }
        Self { grid: self.grid, entries }
    }

    /// Largest coefficient magnitude over all entries.
    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .flat_map(|c| c.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Physical samples of entry `(i, j)`.
    pub fn entry_physical(&self, i: usize, j: usize) -> Result<Vec<f64>> {
        fft::inverse_real(&self.grid, &self.entries[i][j])
    }
}
