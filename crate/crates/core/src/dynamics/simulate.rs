use crate::diagnostics::dissipation::{dissipation_report, DissipationReport};
use crate::dynamics::config::SimulationConfig;
use crate::dynamics::init::initial_data;
use crate::dynamics::stepper::{step, TrajectorySample};
use crate::error::Result;
use crate::field::SpectralVelocityField;

/// Emitted samples of a run and their dissipation reports.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub samples: Vec<TrajectorySample>,
    pub reports: Vec<DissipationReport>,
}

/// Runs `cfg` from its descriptor, calling `sink` on every emitted sample.
pub fn simulate_with(
    cfg: &SimulationConfig,
    sink: impl FnMut(&TrajectorySample, &DissipationReport) -> Result<()>,
) -> Result<()> {
    cfg.validate()?;
    let u0 = initial_data(&cfg.init, cfg.grid, cfg.nu, cfg.seed)?;
    simulate_from(cfg, u0, sink)
}

/// Runs `cfg` from explicit initial data.
pub fn simulate_from(
    cfg: &SimulationConfig,
    u0: SpectralVelocityField,
    mut sink: impl FnMut(&TrajectorySample, &DissipationReport) -> Result<()>,
) -> Result<()> {
    cfg.validate()?;
    let u0 = u0.with_nu(cfg.nu).with_time(Some(0.0));
    let mut sample = TrajectorySample::new(0.0, u0).with_rhs(cfg.dealias)?;
    sink(&sample, &dissipation_report(&sample)?)?;
    let steps = cfg.steps();
    for n in 1..=steps {
        let mut next = step(&sample, cfg)?;
        // sample times as n·dt, not accumulated sums
        next.t = n as f64 * cfg.dt;
        next.u.set_time(Some(next.t));
        if n % cfg.output_every == 0 || n == steps {
            sink(&next, &dissipation_report(&next)?)?;
        }
        sample = next;
    }
    Ok(())
}

/// Runs `cfg` and collects every emitted sample.
pub fn simulate(cfg: &SimulationConfig) -> Result<Simulation> {
    let mut samples = Vec::new();
    let mut reports = Vec::new();
    simulate_with(cfg, |s, r| {
        samples.push(s.clone());
        reports.push(r.clone());
        Ok(())
    })?;
    Ok(Simulation { samples, reports })
}
