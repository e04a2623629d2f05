//! Serrin-type mixed space-time norms `L^r(0,T; L^s)`.

use crate::dynamics::TrajectorySample;
use crate::error::{Error, Result};
use crate::diagnostics::regularity::trapezoid;

/// Accepts `(r, s)` on the critical line `2/r + 3/s = 3/2` with `2 ≤ s ≤ 6`.
/// `r = ∞` is allowed and gives the supremum over samples.
pub fn admissible(r: f64, s: f64) -> bool {
    if !(2.0..=6.0).contains(&s) || r.is_nan() || r < 1.0 {
        return false;
    }
    let inv_r = if r.is_infinite() { 0.0 } else { 1.0 / r };
    (2.0 * inv_r + 3.0 / s - 1.5).abs() <= 1e-12
}

/// `m·(Σ (v_i/m)^p w)^{1/p}` with `m = max v_i`, so scaling `v` by a power
/// of two scales the result by exactly that factor.
fn scaled_power_mean(v: &[f64], weight: impl Fn(usize) -> f64, p: f64) -> f64 {
    let m = v.iter().copied().fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    let sum: f64 = v.iter().enumerate().map(|(i, x)| (x / m).powf(p) * weight(i)).sum();
    m * sum.powf(1.0 / p)
}

/// `‖u(t)‖_{L^s}` with grid quadrature of the Euclidean magnitude.
pub fn spatial_norm(sample: &TrajectorySample, s: f64) -> Result<f64> {
    let g = sample.u.grid();
    let p = sample.u.to_physical()?;
    let mag: Vec<f64> = (0..g.len()).map(|i| (p[0][i].powi(2) + p[1][i].powi(2) + p[2][i].powi(2)).sqrt()).collect();
    let w = g.spacing().powi(3);
    Ok(scaled_power_mean(&mag, |_| w, s))
}

pub fn mixed_norm(trajectory: &[TrajectorySample], r: f64, s: f64) -> Result<f64> {
    if !admissible(r, s) {
        return Err(Error::InadmissibleExponents { r, s });
    }
    if trajectory.is_empty() || (r.is_finite() && trajectory.len() < 2) {
        return Err(Error::TrajectoryTooShort { found: trajectory.len(), needed: 2 });
    }
    let norms = trajectory.iter().map(|x| spatial_norm(x, s)).collect::<Result<Vec<_>>>()?;
    if r.is_infinite() {
        return Ok(norms.iter().copied().fold(0.0, f64::max));
    }
    let t: Vec<f64> = trajectory.iter().map(|x| x.t).collect();
    let m = norms.iter().copied().fold(0.0, f64::max);
    if m == 0.0 {
        return Ok(0.0);
    }
    Ok(m * trapezoid(&t, |i| (norms[i] / m).powf(r)).powf(1.0 / r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SpectralVelocityField;
    use crate::grid::WaveGrid;

    #[test]
    fn admissibility_line() {
        assert!(admissible(2.0, 6.0));
        assert!(admissible(f64::INFINITY, 2.0));
        assert!(admissible(4.0, 3.0));
        assert!(!admissible(2.0, 3.0));
        assert!(!admissible(1.0, 1.0));
    }

    #[test]
    fn inadmissible_is_an_error() {
        let g = WaveGrid::periodic(8).unwrap();
        let t = vec![TrajectorySample::new(0.0, SpectralVelocityField::zeros(g, 0.1))];
        assert!(matches!(mixed_norm(&t, 3.0, 3.0), Err(Error::InadmissibleExponents { .. })));
    }
}
