//! Spherical Bessel functions of the first and second kind.

use crate::error::{Error, Result};

/// `j_0..=j_lmax` at `x` by Miller's downward recurrence, normalized with
/// `Σ (2n+1) j_n² = 1`.
pub fn spherical_jn_all(lmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; lmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if x < 0.0 {
        let mut v = spherical_jn_all(lmax, -x);
        for (l, j) in v.iter_mut().enumerate() {
            if l % 2 == 1 {
                *j = -*j;
            }
        }
        return v;
    }
    let start = lmax.max(x.ceil() as usize) + 40 + (x.cbrt() * 6.0) as usize;
    let mut f = vec![0.0; start + 2];
    f[start] = 1.0;
    for n in (1..=start).rev() {
        f[n - 1] = (2 * n + 1) as f64 / x * f[n] - f[n + 1];
        if f[n - 1].abs() > 1e100 {
            for v in f[n - 1..].iter_mut() {
                *v *= 1e-100;
            }
        }
    }
    let sum: f64 = f.iter().enumerate().map(|(n, v)| (2 * n + 1) as f64 * v * v).sum();
    let mut scale = 1.0 / sum.sqrt();
    // fix the sign against whichever closed form is better conditioned
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    let flip = if j0.abs() >= j1.abs() { j0 * f[0] < 0.0 } else { j1 * f[1] < 0.0 };
    if flip {
        scale = -scale;
    }
    for l in 0..=lmax {
        out[l] = f[l] * scale;
    }
    out
}

/// `y_0..=y_lmax` at `x > 0` by upward recurrence.
pub fn spherical_yn_all(lmax: usize, x: f64) -> Result<Vec<f64>> {
    if x <= 0.0 {
        return Err(Error::Singularity(format!("Neumann function y_l at x = {x}")));
    }
    let (s, c) = x.sin_cos();
    let mut out = vec![0.0; lmax + 1];
    out[0] = -c / x;
    if lmax >= 1 {
        out[1] = -c / (x * x) - s / x;
    }
    for n in 1..lmax {
        out[n + 1] = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
    }
    Ok(out)
}

pub fn spherical_jn(l: usize, x: f64) -> f64 {
    spherical_jn_all(l, x)[l]
}

pub fn spherical_yn(l: usize, x: f64) -> Result<f64> {
    Ok(spherical_yn_all(l, x)?[l])
}

/// `(j_l(x), y_l(x))`.
pub fn spherical_bessel(l: usize, x: f64) -> Result<(f64, f64)> {
    Ok((spherical_jn(l, x), spherical_yn(l, x)?))
}

/// `(j_l', y_l')` from `z_l' = z_{l-1} - (l+1)/x z_l`, with `z_0' = -z_1`.
pub fn spherical_bessel_derivative(l: usize, x: f64) -> Result<(f64, f64)> {
    let j = spherical_jn_all(l + 1, x);
    let y = spherical_yn_all(l + 1, x)?;
    if l == 0 {
        return Ok((-j[1], -y[1]));
    }
    let c = (l + 1) as f64 / x;
    Ok((j[l - 1] - c * j[l], y[l - 1] - c * y[l]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        for x in [1e-3, 0.5, 3.0, 17.2, 99.0] {
            let (s, c) = f64::sin_cos(x);
            let (j0, y0) = spherical_bessel(0, x).unwrap();
            assert!((j0 - s / x).abs() <= 1e-14 * (s / x).abs().max(1e-300) + 1e-17);
            assert!((y0 + c / x).abs() <= 1e-14 * (c / x).abs());
            let j2 = (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x);
            if x > 0.1 {
                assert!((spherical_jn(2, x) - j2).abs() < 1e-13 * j2.abs().max(1.0 / x));
            }
        }
        assert_eq!(spherical_jn(0, 0.0), 1.0);
        assert_eq!(spherical_jn(3, 0.0), 0.0);
    }

    #[test]
    fn small_argument_series() {
        // j_l(x) ≈ x^l / (2l+1)!!
        let x: f64 = 1e-3;
        let mut df = 1.0;
        for l in 0..=20usize {
            if l > 0 {
                df *= (2 * l + 1) as f64;
            }
            let lead = x.powi(l as i32) / df;
            let corr = 1.0 - x * x / (2.0 * (2 * l + 3) as f64);
            assert!((spherical_jn(l, x) / (lead * corr) - 1.0).abs() < 1e-12, "l = {l}");
        }
    }

    #[test]
    fn neumann_singular_at_origin() {
        assert!(matches!(spherical_yn(0, 0.0), Err(Error::Singularity(_))));
    }

    #[test]
    fn wronskian() {
        for l in 0..=10 {
            for i in 0..200 {
                let x = 0.1 + 49.9 * i as f64 / 199.0;
                let (j, y) = spherical_bessel(l, x).unwrap();
                let (dj, dy) = spherical_bessel_derivative(l, x).unwrap();
                let w = (j * dy - dj * y) * x * x;
                assert!((w - 1.0).abs() < 1e-10, "l={l} x={x} w={w}");
            }
        }
    }

    #[test]
    fn parity_for_negative_argument() {
        assert!((spherical_jn(3, -2.0) + spherical_jn(3, 2.0)).abs() < 1e-16);
    }
}
