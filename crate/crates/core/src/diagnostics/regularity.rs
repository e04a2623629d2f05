//! Leray–Hopf regularity ledger for a trajectory.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{convective_term, rhs, Dealias, TrajectorySample};
use crate::error::{Error, Result};
use crate::ops::sobolev_norm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityLedger {
    pub t: Vec<f64>,
    /// `‖u(t)‖_H`
    pub h: Vec<f64>,
    /// `‖u(t)‖_{H¹}`
    pub h1: Vec<f64>,
    /// `‖∂_t u(t)‖_{H⁻¹}`
    pub dudt_hm1: Vec<f64>,
    /// `‖(u·∇)u(t)‖_{H⁻¹}`
    pub advection_hm1: Vec<f64>,
    /// `sup_t ‖u‖_H`
    pub linf_h: f64,
    /// `(∫ ‖u‖²_{H¹} dt)^{1/2}`
    pub l2_h1: f64,
    /// `(∫ ‖∂_t u‖^{4/3}_{H⁻¹} dt)^{3/4}`
    pub l43_dudt: f64,
    /// `(∫ ‖(u·∇)u‖^{4/3}_{H⁻¹} dt)^{3/4}`
    pub l43_advection: f64,
}

pub(crate) fn trapezoid(t: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    (1..t.len()).map(|i| 0.5 * (t[i] - t[i - 1]) * (f(i) + f(i - 1))).sum()
}

/// Ledger of the norms in which weak solutions are controlled. Samples
/// without a stored time derivative get the two-thirds dealiased RHS.
pub fn regularity_ledger(trajectory: &[TrajectorySample]) -> Result<RegularityLedger> {
    if trajectory.is_empty() {
        return Err(Error::TrajectoryTooShort { found: 0, needed: 1 });
    }
    let n = trajectory.len();
    let mut led = RegularityLedger {
        t: Vec::with_capacity(n),
        h: Vec::with_capacity(n),
        h1: Vec::with_capacity(n),
        dudt_hm1: Vec::with_capacity(n),
        advection_hm1: Vec::with_capacity(n),
        linf_h: 0.0,
        l2_h1: 0.0,
        l43_dudt: 0.0,
        l43_advection: 0.0,
    };
    for s in trajectory {
        if s.u.nu() == 0.0 {
            return Err(Error::ZeroViscosity);
        }
        let du = match &s.du_dt {
            Some(d) => d.clone(),
            None => rhs(&s.u, Dealias::TwoThirds)?.0,
        };
        let mut adv = convective_term(&s.u)?;
        adv.set_mode(0, [Complex64::default(); 3]);
        led.t.push(s.t);
        led.h.push(s.u.norm_h());
        led.h1.push(sobolev_norm(&s.u, 0.5)?);
        led.dudt_hm1.push(sobolev_norm(&du, -0.5)?);
        led.advection_hm1.push(sobolev_norm(&adv, -0.5)?);
    }
    led.linf_h = led.h.iter().copied().fold(0.0, f64::max);
    led.l2_h1 = trapezoid(&led.t, |i| led.h1[i].powi(2)).sqrt();
    led.l43_dudt = trapezoid(&led.t, |i| led.dudt_hm1[i].powf(4.0 / 3.0)).powf(0.75);
    led.l43_advection = trapezoid(&led.t, |i| led.advection_hm1[i].powf(4.0 / 3.0)).powf(0.75);
    Ok(led)
}
