//! Scale-invariant entropy surrogate.
//!
//! `S(u) = ln(|Ω|^{1/2} ‖u‖_{L²} / ‖u‖_{L¹})`, evaluated with grid quadrature.
//! Cauchy–Schwarz on the grid gives `S ≥ 0` with equality exactly when `|u|`
//! is constant on the grid, so the normalized mean state sits at zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpectralVelocityField;
use crate::grid::WaveGrid;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropySurrogate {
    pub value: f64,
    /// Same functional applied to each velocity component; `None` for an
    /// identically vanishing component.
    pub components: [Option<f64>; 3],
}

fn surrogate(volume: f64, cell: f64, mags: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut l1, mut l2) = (0.0, 0.0);
    for m in mags {
        l1 += m;
        l2 += m * m;
    }
    if l1 == 0.0 {
        return None;
    }
    let (l1, l2) = (l1 * cell, (l2 * cell).sqrt());
    Some((volume.sqrt() * l2 / l1).ln())
}

pub fn entropy_surrogate(u: &SpectralVelocityField) -> Result<EntropySurrogate> {
    let g = u.grid();
    let phys = u.to_physical()?;
    let cell = g.spacing().powi(3);
    let vol = g.volume();
    let value = surrogate(
        vol,
        cell,
        (0..g.len()).map(|i| (phys[0][i].powi(2) + phys[1][i].powi(2) + phys[2][i].powi(2)).sqrt()),
    )
    .ok_or(Error::ZeroField)?;
    let components = [0, 1, 2].map(|c| surrogate(vol, cell, phys[c].iter().map(|v| v.abs())));
    Ok(EntropySurrogate { value, components })
}

/// Constant field along `direction` with unit `L¹` norm.
pub fn normalized_mean_state(grid: WaveGrid, nu: f64, direction: [f64; 3]) -> Result<SpectralVelocityField> {
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroField);
    }
    let scale = 1.0 / (norm * grid.volume());
    let mut u = SpectralVelocityField::zeros(grid, nu);
    u.set_mode(0, direction.map(|d| Complex64::new(d * scale, 0.0)));
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_state_is_zero() {
        let g = WaveGrid::periodic(8).unwrap();
        let u = normalized_mean_state(g, 0.1, [1.0, -2.0, 0.5]).unwrap();
        let s = entropy_surrogate(&u).unwrap();
        assert!(s.value.abs() <= 1e-12);
        assert!(s.components.iter().all(|c| c.unwrap().abs() <= 1e-12));
    }

    #[test]
    fn scale_invariant_and_nonnegative() {
        let u = crate::sampling::random_solenoidal(WaveGrid::periodic(16).unwrap(), 0.1, 4, 9);
        let a = entropy_surrogate(&u).unwrap();
        let b = entropy_surrogate(&u.scaled(-37.5)).unwrap();
        assert!(a.value > 0.0);
        assert!((a.value - b.value).abs() < 1e-12);
    }

    #[test]
    fn single_cosine_value() {
        // grid means of cos² and |cos| on the collocation points
        let n = 32;
        let g = WaveGrid::periodic(n).unwrap();
        let u = SpectralVelocityField::from_fn(g, 0.1, |x| [0.0, x[0].cos(), 0.0]).unwrap();
        let s = entropy_surrogate(&u).unwrap();
        let xs = (0..n).map(|j| (2.0 * std::f64::consts::PI * j as f64 / n as f64).cos());
        let l1 = xs.clone().map(f64::abs).sum::<f64>() / n as f64;
        let l2 = (xs.map(|c| c * c).sum::<f64>() / n as f64).sqrt();
        let expected = (l2 / l1).ln();
        assert!((s.value - expected).abs() < 1e-12);
        assert_eq!(s.components[0], None);
    }

    #[test]
    fn zero_field_is_rejected() {
        let u = SpectralVelocityField::zeros(WaveGrid::periodic(8).unwrap(), 0.1);
        assert!(matches!(entropy_surrogate(&u), Err(Error::ZeroField)));
    }
}
