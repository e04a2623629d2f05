//! Residual of the weak (test-function) form of the momentum equation.

use crate::cutoff::CutoffFunction;
use crate::dynamics::nonlinear::convective_term;
use crate::dynamics::stepper::TrajectorySample;
use crate::error::{Error, Result};
use crate::field::SpectralVelocityField;

fn grad_inner(u: &SpectralVelocityField, v: &SpectralVelocityField) -> Result<f64> {
    let g = *u.grid();
    let ku = u.map_modes(|i| g.kappa_sq(i));
    ku.inner(v)
}

/// `|∫_{t1}^{t2} [-(u,∂_tφ) + ν(∇u,∇φ) + ((u·∇)u,φ)] dt - (u(t1),φ(t1)) + (u(t2),φ(t2))|`
/// with trapezoid quadrature over the samples and linear interpolation at
/// interval ends that fall between samples.
pub fn weak_residual(
    trajectory: &[TrajectorySample],
    phi: &CutoffFunction,
    t1: f64,
    t2: f64,
) -> Result<f64> {
    let (first, last) = match (trajectory.first(), trajectory.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => return Err(Error::TrajectoryTooShort { found: 0, needed: 2 }),
    };
    let eps = 1e-12 * (last - first).abs().max(1.0);
    if t1 < first - eps || t2 > last + eps || t1 > t2 {
        return Err(Error::IntervalOutsideTrajectory { t1, t2, start: first, end: last });
    }
    let grid = *trajectory[0].u.grid();

    // (t, integrand, (u, φ))
    let eval = |s: &TrajectorySample| -> Result<(f64, f64, f64)> {
        let u = &s.u;
        let p = phi.at(grid, s.t)?;
        let dp = phi.time_derivative(grid, s.t)?;
        let adv = convective_term(u)?;
        let integrand = -u.inner(&dp)? + u.nu() * grad_inner(u, &p)? + adv.inner(&p)?;
        Ok((s.t, integrand, u.inner(&p)?))
    };

    let lo = trajectory.iter().rposition(|s| s.t <= t1 + eps).unwrap_or(0);
    let hi = trajectory.iter().position(|s| s.t >= t2 - eps).unwrap_or(trajectory.len() - 1);
    let pts: Vec<(f64, f64, f64)> = trajectory[lo..=hi].iter().map(eval).collect::<Result<_>>()?;

    let interp = |t: f64| -> (f64, f64, f64) {
        let j = pts.iter().rposition(|p| p.0 <= t).unwrap_or(0).min(pts.len().saturating_sub(2));
        if pts.len() == 1 {
            return pts[0];
        }
        let (a, b) = (pts[j], pts[j + 1]);
        let w = if b.0 > a.0 { (t - a.0) / (b.0 - a.0) } else { 0.0 };
        (t, a.1 + w * (b.1 - a.1), a.2 + w * (b.2 - a.2))
    };

    let mut nodes = vec![interp(t1)];
    nodes.extend(pts.iter().copied().filter(|p| p.0 > t1 + eps && p.0 < t2 - eps));
    nodes.push(interp(t2));
    let integral: f64 = nodes.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
    let start = nodes.first().unwrap().2;
    let end = nodes.last().unwrap().2;
    Ok((integral - start + end).abs())
}
