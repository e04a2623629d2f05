//! Time stepping of `∂_t u = νΔu - P((u·∇)u)` with the viscous term
//! handled exactly (ETD) or implicitly (Crank-Nicolson).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::config::{Dealias, Scheme, SimulationConfig};
use crate::dynamics::nonlinear::advection_projected;
use crate::error::{Error, Result};
use crate::field::SpectralVelocityField;
use crate::grid::WaveGrid;

/// One stored state of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub u: SpectralVelocityField,
    /// Discrete right-hand side `νΔu - P((u·∇)u)` evaluated at `u`.
    pub du_dt: Option<SpectralVelocityField>,
    /// Largest collocation speed, recorded when `du_dt` was evaluated.
    pub max_speed: Option<f64>,
}

impl TrajectorySample {
    pub fn new(t: f64, u: SpectralVelocityField) -> Self {
        Self { t, u, du_dt: None, max_speed: None }
    }

    /// Attaches the discrete right-hand side.
    pub fn with_rhs(mut self, dealias: Dealias) -> Result<Self> {
        let (rhs, speed) = rhs(&self.u, dealias)?;
        self.du_dt = Some(rhs);
        self.max_speed = Some(speed);
        Ok(self)
    }
}

/// Nonlinear forcing `-P((u·∇)u)` with the mean mode removed.
fn advective_forcing(u: &SpectralVelocityField, dealias: Dealias) -> Result<(SpectralVelocityField, f64)> {
    let adv = advection_projected(u, dealias == Dealias::TwoThirds)?;
    let mut n = adv.term.scaled(-1.0);
    n.set_mode(0, [Complex64::default(); 3]);
    Ok((n, adv.max_speed))
}

/// `νΔu - P((u·∇)u)` and the max collocation speed of `u`.
pub fn rhs(u: &SpectralVelocityField, dealias: Dealias) -> Result<(SpectralVelocityField, f64)> {
    let (n, speed) = advective_forcing(u, dealias)?;
    let g = *u.grid();
    let nu = u.nu();
    let tab = g.tables();
    let lin = u.map_modes(|i| -nu * tab.kappa_sq[i]);
    Ok((lin.lin_comb(1.0, &n, 1.0)?.with_time(u.time()), speed))
}

/// `(e^z - 1)/z`.
pub(crate) fn phi1(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.exp_m1() / z
    }
}

/// `(e^z - 1 - z)/z²`, with a Taylor series near zero.
pub(crate) fn phi2(z: f64) -> f64 {
    if z.abs() < 1e-2 {
        let mut term = 0.5;
        let mut sum = 0.5;
        for n in 3..12 {
            term *= z / n as f64;
            sum += term;
        }
        sum
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// `Σ_f w_f(k) û_f(k)`.
fn combine<const F: usize>(fields: [&SpectralVelocityField; F], w: &[[f64; F]]) -> SpectralVelocityField {
    let mut out = fields[0].clone();
    for c in 0..3 {
        out.coeffs_mut()[c].par_iter_mut().enumerate().for_each(|(i, z)| {
            *z = fields.iter().zip(&w[i]).map(|(field, w)| field.component(c)[i] * w).sum();
        });
    }
    out
}

/// Per-mode weights of the two stages of a scheme.
struct StageWeights {
    first: Vec<[f64; 2]>,
    second: Vec<[f64; 3]>,
}

impl StageWeights {
    fn new(kappa_sq: &[f64], nu: f64, h: f64, scheme: Scheme) -> Self {
        let z = |i: usize| -nu * kappa_sq[i] * h;
        let n = kappa_sq.len();
        match scheme {
            Scheme::EtdRk2 => Self {
                first: (0..n).into_par_iter().map(|i| [z(i).exp(), h * phi1(z(i))]).collect(),
                second: (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let p = h * phi2(z(i));
                        [1.0, p, -p]
                    })
                    .collect(),
            },
            Scheme::ImexCn => {
                let ratio = |i: usize| (1.0 + 0.5 * z(i)) / (1.0 - 0.5 * z(i));
                Self {
                    first: (0..n).into_par_iter().map(|i| [ratio(i), h / (1.0 - 0.5 * z(i))]).collect(),
                    second: (0..n)
                        .into_par_iter()
                        .map(|i| {
                            let half = 0.5 * h / (1.0 - 0.5 * z(i));
                            [ratio(i), half, half]
                        })
                        .collect(),
                }
            }
        }
    }

    fn cached(g: &WaveGrid, nu: f64, h: f64, scheme: Scheme) -> Arc<Self> {
        type Key = (usize, u64, u64, u64, bool);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<StageWeights>>>> = OnceLock::new();
        let key = (g.n(), g.length().to_bits(), nu.to_bits(), h.to_bits(), scheme == Scheme::EtdRk2);
        let mut cache = CACHE.get_or_init(Default::default).lock().unwrap();
        if cache.len() > 16 {
            cache.clear();
        }
        cache.entry(key).or_insert_with(|| Arc::new(Self::new(&g.tables().kappa_sq, nu, h, scheme))).clone()
    }
}

/// Advances one sample by `cfg.dt`.
pub fn step(sample: &TrajectorySample, cfg: &SimulationConfig) -> Result<TrajectorySample> {
    cfg.forcing.validate()?;
    let u = sample.u.clone().with_nu(cfg.nu);
    let g = *u.grid();
    let h = cfg.dt;
    let nu = cfg.nu;

    let (n0, speed) = match (&sample.du_dt, sample.max_speed) {
        (Some(d), Some(s)) => {
            let tab = g.tables();
            let lin = u.map_modes(|i| -nu * tab.kappa_sq[i]);
            (d.lin_comb(1.0, &lin, -1.0)?, s)
        }
        _ => advective_forcing(&u, cfg.dealias)?,
    };
    let limit = cfg.cfl_limit(speed);
    if h > limit {
        return Err(Error::CflViolation { max_velocity: speed, limit, dt: h });
    }

    let w = StageWeights::cached(&g, nu, h, cfg.scheme);
    let next = match cfg.scheme {
        Scheme::EtdRk2 => {
            let a = combine([&u, &n0], &w.first);
            let (na, _) = advective_forcing(&a, cfg.dealias)?;
            combine([&a, &na, &n0], &w.second)
        }
        Scheme::ImexCn => {
            let pre = combine([&u, &n0], &w.first);
            let (np, _) = advective_forcing(&pre, cfg.dealias)?;
            combine([&u, &n0, &np], &w.second)
        }
    };
    let t = sample.t + h;
    let mut next = next.with_time(Some(t));
    next.set_mode(0, [Complex64::default(); 3]);
    TrajectorySample::new(t, next).with_rhs(cfg.dealias)
}
