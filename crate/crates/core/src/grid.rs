//! Truncated integer wavevector lattice on the periodic cube.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Cubic grid of `n` modes per dimension on a cube of side `length`.
///
/// Storage index `i` in `0..n` maps to the integer wavenumber `i` for
/// `i <= n/2` and `i - n` otherwise, so the retained range is
/// `-n/2 < k <= n/2`. Tables are stored row-major with the x index slowest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveGrid {
    n: usize,
    length: f64,
}

impl WaveGrid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n % 2 != 0 {
            return Err(Error::InvalidGrid("N must be even".into()));
        }
        if n < 4 {
            return Err(Error::InvalidGrid(format!("N must be at least 4, got {n}")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidGrid(format!("L must be positive, got {length}")));
        }
        Ok(Self { n, length })
    }

    /// Grid with the default period `L = 2π`, where `κ = k`.
    pub fn periodic(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Total number of modes (and collocation points), `N³`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cube volume `L³`.
    pub fn volume(&self) -> f64 {
        self.length.powi(3)
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Integer wavenumber of a storage index along one axis.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Storage index of an integer wavenumber, if retained.
    #[inline]
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k > half || k <= -half {
            return None;
        }
        Some(if k >= 0 { k as usize } else { (k + self.n as i64) as usize })
    }

    #[inline]
    pub fn flat(&self, i0: usize, i1: usize, i2: usize) -> usize {
        (i0 * self.n + i1) * self.n + i2
    }

    #[inline]
    pub fn unflat(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    /// Integer wavevector of a flat index.
    #[inline]
    pub fn k_of(&self, idx: usize) -> [i64; 3] {
        let (a, b, c) = self.unflat(idx);
        [self.wavenumber(a), self.wavenumber(b), self.wavenumber(c)]
    }

    /// Flat index of an integer wavevector, if retained.
    pub fn flat_of(&self, k: [i64; 3]) -> Option<usize> {
        Some(self.flat(self.index_of(k[0])?, self.index_of(k[1])?, self.index_of(k[2])?))
    }

    /// Physical wavevector `κ = 2πk/L`.
    #[inline]
    pub fn kappa(&self, idx: usize) -> [f64; 3] {
        let s = 2.0 * PI / self.length;
        let k = self.k_of(idx);
        [s * k[0] as f64, s * k[1] as f64, s * k[2] as f64]
    }

    #[inline]
    pub fn kappa_sq(&self, idx: usize) -> f64 {
        let q = self.kappa(idx);
        q[0] * q[0] + q[1] * q[1] + q[2] * q[2]
    }

    /// Flat index of `-k`. Closed for every index because Nyquist rows map
    /// to themselves.
    #[inline]
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let n = self.n;
        let (a, b, c) = self.unflat(idx);
        self.flat((n - a) % n, (n - b) % n, (n - c) % n)
    }

    /// True when any component sits on the unpaired Nyquist plane `k_i = N/2`.
    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let (a, b, c) = self.unflat(idx);
        let h = self.n / 2;
        a == h || b == h || c == h
    }

    /// Largest integer wavenumber kept by the 2/3 rule: `3|k| < N`.
    pub fn dealias_cutoff(&self) -> i64 {
        ((self.n - 1) / 3) as i64
    }

    #[inline]
    pub fn is_dealiased_out(&self, idx: usize) -> bool {
        let c = self.dealias_cutoff();
        self.k_of(idx).iter().any(|k| k.abs() > c)
    }

    /// Largest retained physical wavenumber magnitude along an axis.
    pub fn kappa_max(&self) -> f64 {
        2.0 * PI / self.length * (self.n / 2 - 1) as f64
    }

    /// Per-index lookup tables, built once per grid and shared.
    pub(crate) fn tables(&self) -> Arc<GridTables> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Arc<GridTables>>>> = OnceLock::new();
        let mut cache = CACHE.get_or_init(Default::default).lock().unwrap();
        cache.entry((self.n, self.length.to_bits())).or_insert_with(|| Arc::new(GridTables::new(self))).clone()
    }

    /// Collocation point coordinates of a flat index.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let (a, b, c) = self.unflat(idx);
        let h = self.spacing();
        [a as f64 * h, b as f64 * h, c as f64 * h]
    }
}

pub(crate) struct GridTables {
    pub kappa: Vec<[f64; 3]>,
    pub kappa_sq: Vec<f64>,
    pub conj: Vec<usize>,
    pub nyquist: Vec<bool>,
    /// Removed by the 2/3 rule or on the Nyquist plane.
    pub truncated: Vec<bool>,
}

impl GridTables {
    fn new(g: &WaveGrid) -> Self {
        let idx = 0..g.len();
        Self {
            kappa: idx.clone().map(|i| g.kappa(i)).collect(),
            kappa_sq: idx.clone().map(|i| g.kappa_sq(i)).collect(),
            conj: idx.clone().map(|i| g.conjugate_index(i)).collect(),
            nyquist: idx.clone().map(|i| g.is_nyquist(i)).collect(),
            truncated: idx.map(|i| g.is_dealiased_out(i) || g.is_nyquist(i)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n4_wavenumbers() {
        let g = WaveGrid::periodic(4).unwrap();
        let ks: Vec<i64> = (0..4).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, -1]);
    }

    #[test]
    fn rejects_bad_parameters() {
        let e = WaveGrid::periodic(3).unwrap_err();
        assert!(e.to_string().contains("N must be even"));
        assert!(WaveGrid::periodic(2).is_err());
        assert!(WaveGrid::new(8, 0.0).is_err());
        assert!(WaveGrid::new(8, -1.0).is_err());
    }

    #[test]
    fn kappa_scales_with_length() {
        let g = WaveGrid::new(32, 1.0).unwrap();
        let idx = g.flat_of([1, 0, 0]).unwrap();
        let q = g.kappa(idx);
        assert!((q[0] - 2.0 * PI).abs() < 1e-15);
        assert_eq!(q[1], 0.0);
        assert_eq!(q[2], 0.0);
    }

    #[test]
    fn conjugate_is_involution() {
        let g = WaveGrid::periodic(8).unwrap();
        for idx in 0..g.len() {
            let c = g.conjugate_index(idx);
            assert_eq!(g.conjugate_index(c), idx);
            if !g.is_nyquist(idx) {
                let k = g.k_of(idx);
                assert_eq!(g.k_of(c), [-k[0], -k[1], -k[2]]);
            }
        }
    }

    #[test]
    fn dealias_cutoff_values() {
        assert_eq!(WaveGrid::periodic(32).unwrap().dealias_cutoff(), 10);
        assert_eq!(WaveGrid::periodic(64).unwrap().dealias_cutoff(), 21);
        assert_eq!(WaveGrid::periodic(8).unwrap().dealias_cutoff(), 2);
    }
}
