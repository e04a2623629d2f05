//! Turbulent and viscous dissipation functionals of a trajectory sample.
//!
//! The free component index of the nonlinear and temporal functionals is
//! kept: every functional is computed per velocity component and published
//! both component-wise and as a Euclidean aggregate. Pairings are H inner
//! products over the cube.

use serde::{Deserialize, Serialize};

use crate::dynamics::stepper::TrajectorySample;
use crate::error::{Error, Result};
use crate::field::SpectralVelocityField;
use crate::ops::curl;

/// Tolerance on the sign monitor for component rates.
pub const SIGN_TOLERANCE: f64 = 1e-12;

/// Per-component rate with its two aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct ComponentRates(pub [f64; 3]);

impl ComponentRates {
    /// Contracted (summed) value.
    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Euclidean aggregate.
    pub fn euclidean(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissipationReport {
    pub t: f64,
    pub nu: f64,
    /// `(u_i, P((u·∇)u)_i)` per component.
    pub nl_components: ComponentRates,
    /// `-(u_i, ∂_t u_i)` per component.
    pub temp_components: ComponentRates,
    /// Euclidean aggregate of `nl_components`.
    pub nu_t_nl: f64,
    /// Euclidean aggregate of `temp_components`.
    pub nu_t_temp: f64,
    /// `nu_t_nl + nu_t_temp`.
    pub nu_t: f64,
    /// `nu_t + ν`.
    pub nu_tot: f64,
    /// `ν‖∇u‖²_H`.
    pub viscous_rate: f64,
    /// `½‖u‖²_H`.
    pub energy: f64,
    /// `½‖ω‖²_H`.
    pub enstrophy: f64,
    pub div_residual: f64,
    /// Sign monitor: `[nonlinear, temporal]` has a component below `-SIGN_TOLERANCE`.
    pub sign_violations: [bool; 2],
}

/// Dissipation functionals of a sample carrying its discrete time derivative.
pub fn dissipation_report(sample: &TrajectorySample) -> Result<DissipationReport> {
    let du = sample.du_dt.as_ref().ok_or(Error::MissingTimeDerivative(sample.t))?;
    let u = &sample.u;
    let nu = u.nu();
    let g = *u.grid();
    // P((u·∇)u) = νΔu - ∂_t u
    let tab = g.tables();
    let lap = u.map_modes(|i| -nu * tab.kappa_sq[i]);
    let adv = lap.lin_comb(1.0, du, -1.0)?;
    let nl = ComponentRates(u.inner_components(&adv)?);
    let temp_raw = u.inner_components(du)?;
    let temp = ComponentRates(temp_raw.map(|v| -v));
    Ok(compose(sample.t, u, nl, temp))
}

fn compose(t: f64, u: &SpectralVelocityField, nl: ComponentRates, temp: ComponentRates) -> DissipationReport {
    let nu = u.nu();
    let nu_t_nl = nl.euclidean();
    let nu_t_temp = temp.euclidean();
    let nu_t = nu_t_nl + nu_t_temp;
    let w = curl(u);
    DissipationReport {
        t,
        nu,
        nl_components: nl,
        temp_components: temp,
        nu_t_nl,
        nu_t_temp,
        nu_t,
        nu_tot: nu_t + nu,
        viscous_rate: nu * u.grad_norm_sqr(),
        energy: 0.5 * u.norm_h().powi(2),
        enstrophy: 0.5 * w.norm_h().powi(2),
        div_residual: u.divergence_residual(),
        sign_violations: [nl.min() < -SIGN_TOLERANCE, temp.min() < -SIGN_TOLERANCE],
    }
}

/// Residuals of the energy identity `(∂_t u, u) = -ν‖∇u‖²`, normalized by energy.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyIdentity {
    pub t: Vec<f64>,
    /// Pairing of the stored discrete right-hand side with `u`, every sample.
    pub pairing: Vec<f64>,
    /// `dE/dt` from three-point differences of sampled energies, interior
    /// samples only (`t[1..n-1]`).
    pub discrete: Vec<f64>,
}

impl EnergyIdentity {
    pub fn max_pairing(&self) -> f64 {
        self.pairing.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_discrete(&self) -> f64 {
        self.discrete.iter().copied().fold(0.0, f64::max)
    }
}

pub fn energy_identity_residual(trajectory: &[TrajectorySample]) -> Result<EnergyIdentity> {
    if trajectory.len() < 3 {
        return Err(Error::TrajectoryTooShort { found: trajectory.len(), needed: 3 });
    }
    let mut t = Vec::with_capacity(trajectory.len());
    let mut pairing = Vec::with_capacity(trajectory.len());
    let mut energy = Vec::with_capacity(trajectory.len());
    let mut dissipation = Vec::with_capacity(trajectory.len());
    for s in trajectory {
        let du = s.du_dt.as_ref().ok_or(Error::MissingTimeDerivative(s.t))?;
        let e = 0.5 * s.u.norm_h().powi(2);
        let visc = s.u.nu() * s.u.grad_norm_sqr();
        let r = (du.inner(&s.u)? + visc).abs();
        t.push(s.t);
        pairing.push(if e > 0.0 { r / e } else { r });
        energy.push(e);
        dissipation.push(visc);
    }
    let discrete = (1..trajectory.len() - 1)
        .map(|n| {
            let (h0, h1) = (t[n] - t[n - 1], t[n + 1] - t[n]);
            let de = -h1 / (h0 * (h0 + h1)) * energy[n - 1]
                + (h1 - h0) / (h0 * h1) * energy[n]
                + h0 / (h1 * (h0 + h1)) * energy[n + 1];
            let r = (de + dissipation[n]).abs();
            if energy[n] > 0.0 { r / energy[n] } else { r }
        })
        .collect();
    Ok(EnergyIdentity { t, pairing, discrete })
}
