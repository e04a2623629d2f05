//! Initial-data constructors.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::SpectralVelocityField;
use crate::grid::WaveGrid;
use crate::harmonics::classify::HarmonicProfile;
use crate::harmonics::construct::field_with_profile;
use crate::ops::leray_project;

#[derive(Debug, Clone, PartialEq)]
pub enum InitDescriptor {
    /// `u = (sin x cos y, -cos x sin y, 0)` in units where the period is 2π.
    TaylorGreen,
    /// `u = p cos(κ·x)`, with `p` projected onto the plane normal to `k`.
    SingleMode { k: [i64; 3], polarization: [f64; 3] },
    /// Seeded random phases on shells `k_min <= |k| <= k_max` with shell
    /// energy proportional to `|k|^slope`, normalized to unit mean-square speed.
    RandomBand { k_min: f64, k_max: f64, slope: f64 },
    /// Field whose ball expansion profile is the uniform mean profile.
    HarmonicMean { lmax: usize },
    /// Field whose ball expansion profile is orthogonal to every mean direction.
    StrictlyTurbulent { l: usize },
}

impl fmt::Display for InitDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TaylorGreen => write!(f, "taylor-green"),
            Self::SingleMode { k, polarization: p } => {
                write!(f, "single-mode({},{},{};{:?},{:?},{:?})", k[0], k[1], k[2], p[0], p[1], p[2])
            }
            Self::RandomBand { k_min, k_max, slope } => {
                write!(f, "random-band({k_min:?},{k_max:?},{slope:?})")
            }
            Self::HarmonicMean { lmax } => write!(f, "harmonic-mean({lmax})"),
            Self::StrictlyTurbulent { l } => write!(f, "strictly-turbulent({l})"),
        }
    }
}

fn parse_args(s: &str) -> Option<(&str, Option<&str>)> {
    let s = s.trim();
    match s.find('(') {
        None => Some((s, None)),
        Some(open) => {
            let inner = s[open + 1..].strip_suffix(')')?;
            Some((&s[..open], Some(inner)))
        }
    }
}

fn numbers<T: FromStr>(s: &str, n: usize) -> Option<Vec<T>> {
    let v: Vec<T> = s.split(',').map(|x| x.trim().parse().ok()).collect::<Option<_>>()?;
    (v.len() == n).then_some(v)
}

impl FromStr for InitDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownDescriptor(s.to_string());
        let (name, args) = parse_args(s).ok_or_else(bad)?;
        match (name, args) {
            ("taylor-green", None) => Ok(Self::TaylorGreen),
            ("single-mode", Some(a)) => {
                let (k, p) = a.split_once(';').ok_or_else(bad)?;
                let k: Vec<i64> = numbers(k, 3).ok_or_else(bad)?;
                let p: Vec<f64> = numbers(p, 3).ok_or_else(bad)?;
                Ok(Self::SingleMode { k: [k[0], k[1], k[2]], polarization: [p[0], p[1], p[2]] })
            }
            ("random-band", Some(a)) => {
                let v: Vec<f64> = numbers(a, 3).ok_or_else(bad)?;
                Ok(Self::RandomBand { k_min: v[0], k_max: v[1], slope: v[2] })
            }
            ("harmonic-mean", None) => Ok(Self::HarmonicMean { lmax: 2 }),
            ("harmonic-mean", Some(a)) => {
                Ok(Self::HarmonicMean { lmax: a.trim().parse().map_err(|_| bad())? })
            }
            ("strictly-turbulent", Some(a)) => {
                Ok(Self::StrictlyTurbulent { l: a.trim().parse().map_err(|_| bad())? })
            }
            _ => Err(bad()),
        }
    }
}

/// Builds a divergence-free, drift-free, real initial field.
pub fn initial_data(
    descriptor: &InitDescriptor,
    grid: WaveGrid,
    nu: f64,
    seed: u64,
) -> Result<SpectralVelocityField> {
    let mut u = match descriptor {
        InitDescriptor::TaylorGreen => taylor_green(grid, nu)?,
        InitDescriptor::SingleMode { k, polarization } => single_mode(grid, nu, *k, *polarization)?,
        InitDescriptor::RandomBand { k_min, k_max, slope } => {
            random_band(grid, nu, *k_min, *k_max, *slope, seed)?
        }
        InitDescriptor::HarmonicMean { lmax } => {
            field_with_profile(grid, nu, &HarmonicProfile::smooth(*lmax))?
        }
        InitDescriptor::StrictlyTurbulent { l } => {
            field_with_profile(grid, nu, &HarmonicProfile::strictly_turbulent(*l, *l)?)?
        }
    };
    u.set_time(Some(0.0));
    Ok(u)
}

fn taylor_green(grid: WaveGrid, nu: f64) -> Result<SpectralVelocityField> {
    if grid.n() < 6 {
        return Err(Error::BandOutsideGrid("taylor-green needs N >= 6".into()));
    }
    let mut u = SpectralVelocityField::zeros(grid, nu);
    for sx in [-1i64, 1] {
        for sy in [-1i64, 1] {
            let idx = grid.flat_of([sx, sy, 0]).unwrap();
            // sin x cos y -> -i sx/4 ; -cos x sin y -> i sy/4
            u.set_mode(
                idx,
                [
                    Complex64::new(0.0, -(sx as f64) / 4.0),
                    Complex64::new(0.0, sy as f64 / 4.0),
                    Complex64::default(),
                ],
            );
        }
    }
    Ok(u)
}

fn single_mode(grid: WaveGrid, nu: f64, k: [i64; 3], p: [f64; 3]) -> Result<SpectralVelocityField> {
    if k == [0, 0, 0] {
        return Err(Error::BandOutsideGrid("single-mode wavevector must be nonzero".into()));
    }
    let idx = grid
        .flat_of(k)
        .filter(|&i| !grid.is_nyquist(i))
        .ok_or_else(|| Error::BandOutsideGrid(format!("wavevector {k:?} not retained")))?;
    let _ = idx;
    let mut u = SpectralVelocityField::zeros(grid, nu);
    let half = |x: f64| Complex64::new(0.5 * x, 0.0);
    u.set_mode_pair(k, [half(p[0]), half(p[1]), half(p[2])])?;
    let u = leray_project(&u);
    if u.norm_h() == 0.0 {
        return Err(Error::InvalidConfig("polarization parallel to wavevector".into()));
    }
    Ok(u)
}

fn random_band(
    grid: WaveGrid,
    nu: f64,
    k_min: f64,
    k_max: f64,
    slope: f64,
    seed: u64,
) -> Result<SpectralVelocityField> {
    let cutoff = grid.dealias_cutoff() as f64;
    if !(k_min >= 1.0) || !(k_max >= k_min) || k_max > cutoff {
        return Err(Error::BandOutsideGrid(format!(
            "band [{k_min}, {k_max}] must satisfy 1 <= k_min <= k_max <= {cutoff}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = SpectralVelocityField::zeros(grid, nu);
    // canonical half space, visited in storage order
    for idx in 0..grid.len() {
        let k = grid.k_of(idx);
        let r = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
        if r < k_min || r > k_max || grid.conjugate_index(idx) < idx {
            continue;
        }
        let mut v = [Complex64::default(); 3];
        for z in v.iter_mut() {
            let (a, b): (f64, f64) = (rng.random(), rng.random());
            // Box-Muller normal pair
            let rad = (-2.0 * (1.0 - a).ln()).sqrt();
            let th = 2.0 * std::f64::consts::PI * b;
            *z = Complex64::new(rad * th.cos(), rad * th.sin());
        }
        u.set_mode_pair(k, v)?;
    }
    let mut u = leray_project(&u);
    let shells = shell_energies(&u);
    let scale: Vec<f64> = shells
        .iter()
        .enumerate()
        .map(|(s, &e)| if e > 0.0 { ((s as f64).powf(slope) / e).sqrt() } else { 0.0 })
        .collect();
    u = u.map_modes(|i| scale[shell_of(&grid, i)]);
    let total = u.coeff_norm_sqr();
    if total == 0.0 {
        return Err(Error::BandOutsideGrid(format!("band [{k_min}, {k_max}] holds no modes")));
    }
    Ok(u.scaled(1.0 / total.sqrt()))
}

/// Integer shell index `round(|k|)` of a flat index.
pub fn shell_of(grid: &WaveGrid, idx: usize) -> usize {
    let k = grid.k_of(idx);
    (((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt()).round() as usize
}

/// `Σ_{shell} |û_k|²` per integer shell.
pub fn shell_energies(u: &SpectralVelocityField) -> Vec<f64> {
    let g = u.grid();
    let max_shell = ((3.0f64).sqrt() * (g.n() / 2) as f64).ceil() as usize + 1;
    let mut out = vec![0.0; max_shell + 1];
    for idx in 0..g.len() {
        let m = u.mode(idx);
        out[shell_of(g, idx)] += m[0].norm_sqr() + m[1].norm_sqr() + m[2].norm_sqr();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_green_coefficients_are_exact() {
        let g = WaveGrid::periodic(8).unwrap();
        let u = initial_data(&InitDescriptor::TaylorGreen, g, 0.01, 0).unwrap();
        let support: Vec<[i64; 3]> = u.support().iter().map(|(i, _)| g.k_of(*i)).collect();
        assert_eq!(support.len(), 4);
        assert!(support.iter().all(|k| k[0].abs() == 1 && k[1].abs() == 1 && k[2] == 0));
        let phys = u.to_physical().unwrap();
        for idx in 0..g.len() {
            let p = g.point(idx);
            assert!((phys[0][idx] - p[0].sin() * p[1].cos()).abs() < 1e-15);
            assert!((phys[1][idx] + p[0].cos() * p[1].sin()).abs() < 1e-15);
        }
        assert_eq!(u.divergence_residual(), 0.0);
    }

    #[test]
    fn random_band_is_deterministic_and_valid() {
        let g = WaveGrid::periodic(16).unwrap();
        let d = InitDescriptor::RandomBand { k_min: 1.0, k_max: 4.0, slope: -5.0 / 3.0 };
        let a = initial_data(&d, g, 0.01, 42).unwrap();
        let b = initial_data(&d, g, 0.01, 42).unwrap();
        let c = initial_data(&d, g, 0.01, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.divergence_residual() < 1e-13);
        assert!(a.reality_defect() == 0.0);
        assert_eq!(a.drift(), [Complex64::default(); 3]);
        assert!((a.coeff_norm_sqr() - 1.0).abs() < 1e-12);
        let shells = shell_energies(&a);
        for s in 2..=4 {
            let ratio = shells[s] / shells[1];
            assert!((ratio - (s as f64).powf(-5.0 / 3.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn band_outside_grid_rejected() {
        let g = WaveGrid::periodic(8).unwrap();
        let d = InitDescriptor::RandomBand { k_min: 1.0, k_max: 5.0, slope: 0.0 };
        assert!(matches!(initial_data(&d, g, 0.01, 0), Err(Error::BandOutsideGrid(_))));
    }

    #[test]
    fn descriptor_parsing() {
        let cases = [
            "taylor-green",
            "single-mode(1,0,0;0,1,0)",
            "random-band(1,4,-1.6666666666666667)",
            "harmonic-mean(2)",
            "strictly-turbulent(1)",
        ];
        for c in cases {
            let d: InitDescriptor = c.parse().unwrap();
            let again: InitDescriptor = d.to_string().parse().unwrap();
            assert_eq!(d, again);
        }
        assert!(matches!("vortex-ring".parse::<InitDescriptor>(), Err(Error::UnknownDescriptor(_))));
        assert_eq!("harmonic-mean".parse::<InitDescriptor>().unwrap(), InitDescriptor::HarmonicMean { lmax: 2 });
    }

    #[test]
    fn single_mode_is_projected() {
        let g = WaveGrid::periodic(8).unwrap();
        let d = InitDescriptor::SingleMode { k: [1, 0, 0], polarization: [1.0, 2.0, 0.0] };
        let u = initial_data(&d, g, 0.1, 0).unwrap();
        let idx = g.flat_of([1, 0, 0]).unwrap();
        assert_eq!(u.mode(idx), [Complex64::default(), Complex64::new(1.0, 0.0), Complex64::default()]);
    }
}
