use std::fmt;
use std::str::FromStr;

use crate::dynamics::init::InitDescriptor;
use crate::error::{Error, Result};
use crate::grid::WaveGrid;

/// Advective stability constant in `dt <= c_adv · Δx / max|u|`.
pub const CFL_CONSTANT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Crank-Nicolson viscous term with a Heun predictor-corrector for advection.
    ImexCn,
    /// Exponential time differencing, second-order Runge-Kutta.
    EtdRk2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dealias {
    TwoThirds,
    None,
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "imex-cn" => Ok(Self::ImexCn),
            "etd-rk2" => Ok(Self::EtdRk2),
            _ => Err(Error::InvalidConfig(format!("unknown scheme {s:?}"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ImexCn => "imex-cn",
            Self::EtdRk2 => "etd-rk2",
        })
    }
}

impl FromStr for Dealias {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-thirds" => Ok(Self::TwoThirds),
            "none" => Ok(Self::None),
            _ => Err(Error::InvalidConfig(format!("unknown dealias mode {s:?}"))),
        }
    }
}

impl fmt::Display for Dealias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::TwoThirds => "two-thirds",
            Self::None => "none",
        })
    }
}

/// Stirring force. Only the unforced case is supported.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Forcing {
    #[default]
    Zero,
    Constant([f64; 3]),
}

impl Forcing {
    pub fn validate(&self) -> Result<()> {
        match self {
            Forcing::Zero => Ok(()),
            Forcing::Constant(f) if f.iter().all(|v| *v == 0.0) => Ok(()),
            Forcing::Constant(_) => Err(Error::ForcingUnsupported),
        }
    }
}

/// Reproducible description of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub grid: WaveGrid,
    pub nu: f64,
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    pub dealias: Dealias,
    pub init: InitDescriptor,
    pub output_every: usize,
    pub seed: u64,
    pub forcing: Forcing,
}

impl SimulationConfig {
    pub fn new(grid: WaveGrid, nu: f64, dt: f64, t_final: f64, init: InitDescriptor) -> Self {
        Self {
            grid,
            nu,
            dt,
            t_final,
            scheme: Scheme::EtdRk2,
            dealias: Dealias::TwoThirds,
            init,
            output_every: 1,
            seed: 0,
            forcing: Forcing::Zero,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 0.0) || !self.nu.is_finite() {
            return Err(Error::InvalidConfig(format!("viscosity must be >= 0, got {}", self.nu)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.dt < self.t_final) || !self.t_final.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "dt = {} must be smaller than t-final = {}",
                self.dt, self.t_final
            )));
        }
        if self.output_every == 0 {
            return Err(Error::InvalidConfig("output-every must be >= 1".into()));
        }
        self.forcing.validate()
    }

    /// Number of steps, `round(T/dt)`.
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    /// Largest admissible step for a given maximum speed.
    pub fn cfl_limit(&self, max_speed: f64) -> f64 {
        if max_speed == 0.0 {
            f64::INFINITY
        } else {
            CFL_CONSTANT * self.grid.spacing() / max_speed
        }
    }
}
