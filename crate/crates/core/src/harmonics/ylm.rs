//! Orthonormal spherical harmonics with the Condon–Shortley phase.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Largest degree with tested accuracy.
pub const LMAX_SUPPORTED: usize = 32;

/// Flat position of `(l, m)` in an `l`-major table of length `(lmax + 1)²`.
pub fn lm_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Fully normalized associated Legendre values `P̄_l^m(x)` for `0 ≤ m ≤ l ≤ lmax`,
/// so that `Y_lm = P̄_l^m(cos θ) e^{imφ}`. Stored with [`legendre_index`].
pub fn legendre_table(lmax: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; (lmax + 1) * (lmax + 2) / 2];
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            pmm *= -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s;
        }
        p[legendre_index(m, m)] = pmm;
        if m == lmax {
            break;
        }
        let mut prev2 = pmm;
        let mut prev1 = (2.0 * m as f64 + 3.0).sqrt() * x * pmm;
        p[legendre_index(m + 1, m)] = prev1;
        for l in m + 2..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            let cur = a * (x * prev1 - b * prev2);
            p[legendre_index(l, m)] = cur;
            prev2 = prev1;
            prev1 = cur;
        }
    }
    p
}

pub fn legendre_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

fn check(l: usize, m: i64) -> Result<()> {
    if m.unsigned_abs() as usize > l || l > LMAX_SUPPORTED {
        return Err(Error::InvalidHarmonicIndex(format!("(l, m) = ({l}, {m})")));
    }
    Ok(())
}

pub fn ylm(l: usize, m: i64, theta: f64, phi: f64) -> Result<Complex64> {
    check(l, m)?;
    let p = legendre_table(l, theta.cos());
    Ok(from_table(&p, l, m, phi))
}

pub(crate) fn from_table(p: &[f64], l: usize, m: i64, phi: f64) -> Complex64 {
    let am = m.unsigned_abs() as usize;
    let y = Complex64::from_polar(p[legendre_index(l, am)], am as f64 * phi);
    if m < 0 {
        if am % 2 == 1 { -y.conj() } else { y.conj() }
    } else {
        y
    }
}

/// All `Y_lm(θ, φ)` for `l ≤ lmax`, ordered by [`lm_index`].
pub fn ylm_all(lmax: usize, theta: f64, phi: f64) -> Vec<Complex64> {
    let p = legendre_table(lmax, theta.cos());
    let mut out = Vec::with_capacity((lmax + 1) * (lmax + 1));
    for l in 0..=lmax {
        for m in -(l as i64)..=l as i64 {
            out.push(from_table(&p, l, m, phi));
        }
    }
    out
}

/// Real orthonormal harmonics: `√2 (-1)^m Re Y_lm` for `m > 0`,
/// `√2 (-1)^m Im Y_l|m|` for `m < 0`, `Y_l0` for `m = 0`.
pub fn real_ylm_all(lmax: usize, theta: f64, phi: f64) -> Vec<f64> {
    let p = legendre_table(lmax, theta.cos());
    let mut out = Vec::with_capacity((lmax + 1) * (lmax + 1));
    for l in 0..=lmax {
        for m in -(l as i64)..=l as i64 {
            let am = m.unsigned_abs() as usize;
            let y = from_table(&p, l, am as i64, phi);
            let sign = if am % 2 == 1 { -1.0 } else { 1.0 };
            out.push(match m.signum() {
                0 => y.re,
                1 => sign * 2f64.sqrt() * y.re,
                _ => sign * 2f64.sqrt() * y.im,
            });
        }
    }
    out
}

/// Complex coefficients `F_m` of a real function to real-basis coefficients.
pub fn complex_to_real(l: usize, f: &[Complex64]) -> Vec<f64> {
    let li = l as i64;
    let at = |m: i64| f[(m + li) as usize];
    (-li..=li)
        .map(|m| {
            let am = m.abs();
            let sign = if am % 2 == 1 { -1.0 } else { 1.0 };
            let r = std::f64::consts::FRAC_1_SQRT_2;
            match m.signum() {
                0 => at(0).re,
                1 => (r * (sign * at(am) + at(-am))).re,
                _ => (Complex64::i() * r * (sign * at(am) - at(-am))).re,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let y00 = ylm(0, 0, 0.7, 2.1).unwrap();
        assert!((y00.re - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15 && y00.im == 0.0);
        let t = 1.1;
        let y10 = ylm(1, 0, t, 0.3).unwrap();
        assert!((y10.re - (3.0 / (4.0 * PI)).sqrt() * t.cos()).abs() < 1e-15);
        // Y_11 = -√(3/8π) sin θ e^{iφ}
        let y11 = ylm(1, 1, t, 0.3).unwrap();
        let e = -(3.0 / (8.0 * PI)).sqrt() * t.sin() * Complex64::from_polar(1.0, 0.3);
        assert!((y11 - e).norm() < 1e-15);
        // Y_22 = ¼√(15/2π) sin²θ e^{2iφ}
        let y22 = ylm(2, 2, t, 0.3).unwrap();
        let e = 0.25 * (15.0 / (2.0 * PI)).sqrt() * t.sin().powi(2) * Complex64::from_polar(1.0, 0.6);
        assert!((y22 - e).norm() < 1e-15);
    }

    #[test]
    fn negative_order_symmetry() {
        for (l, m) in [(1, 1), (3, 2), (5, 3)] {
            let a = ylm(l, m, 0.4, 1.3).unwrap();
            let b = ylm(l, -m, 0.4, 1.3).unwrap();
            let s = if m % 2 == 1 { -1.0 } else { 1.0 };
            assert!((b - s * a.conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn invalid_order_is_an_error() {
        assert!(matches!(ylm(2, 3, 0.1, 0.1), Err(Error::InvalidHarmonicIndex(_))));
    }

    #[test]
    fn stable_at_high_degree() {
        // addition theorem at coincident points: Σ_m |Y_lm|² = (2l+1)/4π
        for l in [16, 32] {
            let s: f64 = (-(l as i64)..=l as i64).map(|m| ylm(l, m, 0.9, 0.2).unwrap().norm_sqr()).sum();
            assert!((s - (2 * l + 1) as f64 / (4.0 * PI)).abs() < 1e-12);
        }
    }

    #[test]
    fn real_conversion_matches_real_basis() {
        let (t, p) = (0.8, 2.5);
        let l = 3;
        let f: Vec<Complex64> = (0..7).map(|i| Complex64::new(i as f64 * 0.3 - 1.0, 0.1 * i as f64)).collect();
        // build a real function from f and its conjugate partner
        let mut g = f.clone();
        for m in -3i64..=3 {
            let s = if m.abs() % 2 == 1 { -1.0 } else { 1.0 };
            g[(m + 3) as usize] = 0.5 * (f[(m + 3) as usize] + s * f[(-m + 3) as usize].conj());
        }
        let val: Complex64 = (-3i64..=3).map(|m| g[(m + 3) as usize] * ylm(l, m, t, p).unwrap()).sum();
        let a = complex_to_real(l, &g);
        let r = real_ylm_all(l, t, p);
        let val_r: f64 = (0..7).map(|i| a[i] * r[9 + i]).sum();
        assert!(val.im.abs() < 1e-14);
        assert!((val.re - val_r).abs() < 1e-14);
    }
}
