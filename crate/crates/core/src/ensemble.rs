//! Finite ensemble means of perturbed runs, compared with the heat flow of
//! the mean initial data.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::diagnostics::dissipation::DissipationReport;
use crate::dynamics::{initial_data, nonlinear_term, simulate_from, InitDescriptor, SimulationConfig, TrajectorySample};
use crate::error::{Error, Result};
use crate::field::SpectralVelocityField;
use crate::ops::sobolev_norm;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Perturbation {
    /// Uniform random phase on every mode, moduli kept.
    RandomPhase,
    /// Pairs `(v, −v)` of random-phase variants.
    SignFlip,
    /// Base plus `amplitude` times a unit-rms random band field.
    BandNoise { amplitude: f64 },
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::RandomPhase => write!(f, "random-phase"),
            Self::SignFlip => write!(f, "sign-flip"),
            Self::BandNoise { amplitude } => write!(f, "band-noise({amplitude:?})"),
        }
    }
}

impl FromStr for Perturbation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "random-phase" => return Ok(Self::RandomPhase),
            "sign-flip" => return Ok(Self::SignFlip),
            _ => {}
        }
        s.strip_prefix("band-noise(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|a| a.trim().parse().ok())
            .map(|amplitude| Self::BandNoise { amplitude })
            .ok_or_else(|| Error::InvalidConfig(format!("unknown perturbation {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub count: usize,
    pub base_init: InitDescriptor,
    /// Multiplies the base initial field.
    pub amplitude: f64,
    pub perturbation: Perturbation,
    pub seed: u64,
    pub config: SimulationConfig,
    /// Prefix sizes at which the mean is evaluated; `count` is always included.
    pub checkpoints: Vec<usize>,
}

impl EnsembleSpec {
    pub fn new(config: SimulationConfig, count: usize, perturbation: Perturbation) -> Self {
        Self {
            count,
            base_init: config.init.clone(),
            amplitude: 1.0,
            perturbation,
            seed: config.seed,
            config,
            checkpoints: vec![count],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidConfig("ensemble count must be at least 1".into()));
        }
        if self.perturbation == Perturbation::SignFlip && self.count % 2 == 1 {
            return Err(Error::InvalidConfig("sign-flip ensembles need an even count".into()));
        }
        if self.checkpoints.iter().any(|c| *c == 0 || *c > self.count) {
            return Err(Error::InvalidConfig("checkpoints must lie in 1..=count".into()));
        }
        self.config.validate()
    }

    fn sorted_checkpoints(&self) -> Vec<usize> {
        let mut c = self.checkpoints.clone();
        c.push(self.count);
        c.sort_unstable();
        c.dedup();
        c
    }
}

/// Multiplies each half-space mode by an independent `e^{iθ}`.
pub fn random_phase(u: &SpectralVelocityField, rng: &mut impl Rng) -> SpectralVelocityField {
    let g = *u.grid();
    let mut out = u.clone();
    for idx in 0..g.len() {
        let k = g.k_of(idx);
        if k <= [0, 0, 0] {
            continue;
        }
        let z = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        let m = u.mode(idx).map(|v| v * z);
        out.set_mode(idx, m);
        out.set_mode(g.conjugate_index(idx), m.map(|v| v.conj()));
    }
    out
}

fn member_rng(seed: u64, member: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(member as u64 + 1);
    rng
}

/// Initial data of ensemble member `j`.
pub fn member_initial_data(spec: &EnsembleSpec, base: &SpectralVelocityField, j: usize) -> Result<SpectralVelocityField> {
    Ok(match spec.perturbation {
        Perturbation::RandomPhase => random_phase(base, &mut member_rng(spec.seed, j)),
        Perturbation::SignFlip => {
            let v = random_phase(base, &mut member_rng(spec.seed, j / 2));
            if j % 2 == 1 { v.scaled(-1.0) } else { v }
        }
        Perturbation::BandNoise { amplitude } => {
            let g = spec.config.grid;
            let band = InitDescriptor::RandomBand { k_min: 1.0, k_max: (g.dealias_cutoff() as f64).min(4.0), slope: 0.0 };
            let noise_seed = member_rng(spec.seed, j).random::<u64>();
            let noise = initial_data(&band, g, spec.config.nu, noise_seed)?;
            base.lin_comb(1.0, &noise, amplitude)?
        }
    })
}

/// `û_k(t) = û_k(0) e^{−ν|κ|²t}`.
pub fn heat_solution(u0: &SpectralVelocityField, t: f64) -> Result<SpectralVelocityField> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let g = *u0.grid();
    let nu = u0.nu();
    let mut out = u0.map_modes(|i| (-nu * g.kappa_sq(i) * t).exp());
    out.set_time(u0.time().map(|s| s + t));
    Ok(out)
}

/// Coefficient-wise mean of trajectories sharing grid and sample times.
pub fn ensemble_mean(trajectories: &[Vec<TrajectorySample>]) -> Result<Vec<TrajectorySample>> {
    let first = trajectories.first().ok_or_else(|| Error::EnsembleMismatch("empty ensemble".into()))?;
    let mut acc: Vec<TrajectorySample> = first.clone();
    for tr in &trajectories[1..] {
        if tr.len() != acc.len() {
            return Err(Error::EnsembleMismatch(format!("{} samples against {}", tr.len(), acc.len())));
        }
        for (a, s) in acc.iter_mut().zip(tr) {
            accumulate(a, s)?;
        }
    }
    let w = 1.0 / trajectories.len() as f64;
    Ok(acc.into_iter().map(|s| scale_sample(&s, w)).collect())
}

fn accumulate(acc: &mut TrajectorySample, s: &TrajectorySample) -> Result<()> {
    if acc.t != s.t {
        return Err(Error::EnsembleMismatch(format!("sample time {} against {}", s.t, acc.t)));
    }
    if acc.u.grid() != s.u.grid() {
        return Err(Error::GridMismatch);
    }
    acc.u = acc.u.lin_comb(1.0, &s.u, 1.0)?;
    acc.du_dt = match (acc.du_dt.take(), &s.du_dt) {
        (Some(a), Some(b)) => Some(a.lin_comb(1.0, b, 1.0)?),
        _ => None,
    };
    acc.max_speed = None;
    Ok(())
}

fn scale_sample(s: &TrajectorySample, w: f64) -> TrajectorySample {
    TrajectorySample { t: s.t, u: s.u.scaled(w), du_dt: s.du_dt.as_ref().map(|d| d.scaled(w)), max_speed: None }
}

/// Least-squares fit `ln y = a + b ln N` with a 95% Student-t interval on `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub ci95: (f64, f64),
    pub r2: f64,
}

pub fn fit_power_law(n: &[f64], y: &[f64]) -> Result<ScalingFit> {
    let pts: Vec<(f64, f64)> = n.iter().zip(y).filter(|(_, y)| **y > 0.0).map(|(n, y)| (n.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return Err(Error::TrajectoryTooShort { found: pts.len(), needed: 2 });
    }
    let m = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let ci95 = if pts.len() > 2 {
        let dof = m - 2.0;
        let se = (sse / dof / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::LinearAlgebra(e.to_string()))?.inverse_cdf(0.975);
        (slope - t * se, slope + t * se)
    } else {
        (f64::NEG_INFINITY, f64::INFINITY)
    };
    Ok(ScalingFit { slope, intercept, ci95, r2: if syy > 0.0 { 1.0 - sse / syy } else { 1.0 } })
}

/// Mean statistics of the first `count` members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointReport {
    pub count: usize,
    pub t: Vec<f64>,
    /// `‖M_N(u)(t) − heat(M_N(u₀), t)‖_H`
    pub deviation: Vec<f64>,
    /// Same in `H₁`.
    pub deviation_h1: Vec<f64>,
    /// Euclidean norm of the member-averaged nonlinear component rates.
    pub mean_nu_t_nl: Vec<f64>,
    /// Euclidean norm of the member-averaged temporal component rates.
    pub mean_nu_t_temp: Vec<f64>,
    /// Nonlinear functional evaluated on the mean field.
    pub nu_t_nl_of_mean: Vec<f64>,
    pub max_deviation: f64,
    /// Root mean square over samples of `mean_nu_t_nl`.
    pub mean_nu_t_nl_rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanReport {
    pub perturbation: String,
    pub checkpoints: Vec<CheckpointReport>,
    /// Fit of `max_deviation` against the member count; the decay exponent is `-slope`.
    pub deviation_fit: Option<ScalingFit>,
    /// Fit of `mean_nu_t_nl_rms` against the member count.
    pub nu_t_nl_fit: Option<ScalingFit>,
}

impl MeanReport {
    pub fn deviation_exponent(&self) -> Option<f64> {
        self.deviation_fit.as_ref().map(|f| -f.slope)
    }
}

struct Partial {
    u: Vec<SpectralVelocityField>,
    du: Vec<SpectralVelocityField>,
    nl: Vec<[f64; 3]>,
    temp: Vec<[f64; 3]>,
    t: Vec<f64>,
}

type MemberRun = (Vec<TrajectorySample>, Vec<DissipationReport>);

fn run_member(spec: &EnsembleSpec, base: &SpectralVelocityField, j: usize) -> Result<MemberRun> {
    let u0 = member_initial_data(spec, base, j)?;
    let mut samples = Vec::new();
    let mut reports = Vec::new();
    simulate_from(&spec.config, u0, |s, r| {
        samples.push(s.clone());
        reports.push(r.clone());
        Ok(())
    })?;
    Ok((samples, reports))
}

fn summarize(p: &Partial, count: usize) -> Result<CheckpointReport> {
    let w = 1.0 / count as f64;
    let u0 = p.u[0].scaled(w);
    let mut rep = CheckpointReport {
        count,
        t: p.t.clone(),
        deviation: Vec::new(),
        deviation_h1: Vec::new(),
        mean_nu_t_nl: Vec::new(),
        mean_nu_t_temp: Vec::new(),
        nu_t_nl_of_mean: Vec::new(),
        max_deviation: 0.0,
        mean_nu_t_nl_rms: 0.0,
    };
    for (i, t) in p.t.iter().enumerate() {
        let mean = p.u[i].scaled(w);
        let diff = mean.lin_comb(1.0, &heat_solution(&u0, *t)?, -1.0)?;
        rep.deviation.push(diff.norm_h());
        rep.deviation_h1.push(if diff.nu() > 0.0 { sobolev_norm(&diff, 0.5)? } else { f64::NAN });
        let norm = |v: [f64; 3]| (v.iter().map(|x| (x * w).powi(2)).sum::<f64>()).sqrt();
        rep.mean_nu_t_nl.push(norm(p.nl[i]));
        rep.mean_nu_t_temp.push(norm(p.temp[i]));
        let nl = nonlinear_term(&mean)?;
        let c = mean.inner_components(&nl)?;
        rep.nu_t_nl_of_mean.push(c.iter().map(|x| x * x).sum::<f64>().sqrt());
    }
    rep.max_deviation = rep.deviation.iter().copied().fold(0.0, f64::max);
    let n = rep.mean_nu_t_nl.len() as f64;
    rep.mean_nu_t_nl_rms = (rep.mean_nu_t_nl.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    Ok(rep)
}

/// Runs the ensemble in parallel batches, folding members into running sums
/// in member order, and reports every checkpoint.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<MeanReport> {
    spec.validate()?;
    let base = initial_data(&spec.base_init, spec.config.grid, spec.config.nu, spec.seed)?.scaled(spec.amplitude);
    let checkpoints = spec.sorted_checkpoints();
    let batch = rayon::current_num_threads().max(1);
    let mut partial: Option<Partial> = None;
    let mut reports = Vec::new();
    let mut next_cp = 0;
    let mut j0 = 0;
    while j0 < spec.count {
        let j1 = (j0 + batch).min(spec.count);
        let runs: Vec<MemberRun> = (j0..j1).into_par_iter().map(|j| run_member(spec, &base, j)).collect::<Result<_>>()?;
        for (offset, (samples, reps)) in runs.into_iter().enumerate() {
            let j = j0 + offset;
            match partial.as_mut() {
                None => {
                    partial = Some(Partial {
                        t: samples.iter().map(|s| s.t).collect(),
                        u: samples.iter().map(|s| s.u.clone()).collect(),
                        du: samples.iter().map(|s| s.du_dt.clone().unwrap()).collect(),
                        nl: reps.iter().map(|r| r.nl_components.0).collect(),
                        temp: reps.iter().map(|r| r.temp_components.0).collect(),
                    });
                }
                Some(p) => {
                    if samples.len() != p.t.len() {
                        return Err(Error::EnsembleMismatch(format!("member {j} has {} samples", samples.len())));
                    }
                    for (i, (s, r)) in samples.iter().zip(&reps).enumerate() {
                        p.u[i] = p.u[i].lin_comb(1.0, &s.u, 1.0)?;
                        p.du[i] = p.du[i].lin_comb(1.0, s.du_dt.as_ref().unwrap(), 1.0)?;
                        for c in 0..3 {
                            p.nl[i][c] += r.nl_components.0[c];
                            p.temp[i][c] += r.temp_components.0[c];
                        }
                    }
                }
            }
            if next_cp < checkpoints.len() && j + 1 == checkpoints[next_cp] {
                reports.push(summarize(partial.as_ref().unwrap(), j + 1)?);
                next_cp += 1;
            }
        }
        j0 = j1;
    }
    let fit = |f: &dyn Fn(&CheckpointReport) -> f64| -> Option<ScalingFit> {
        if reports.len() < 2 {
            return None;
        }
        let n: Vec<f64> = reports.iter().map(|r| r.count as f64).collect();
        let y: Vec<f64> = reports.iter().map(f).collect();
        fit_power_law(&n, &y).ok()
    };
    Ok(MeanReport {
        perturbation: spec.perturbation.to_string(),
        deviation_fit: fit(&|r| r.max_deviation),
        nu_t_nl_fit: fit(&|r| r.mean_nu_t_nl_rms),
        checkpoints: reports,
    })
}

pub fn mean_heat_deviation(spec: &EnsembleSpec) -> Result<MeanReport> {
    run_ensemble(spec)
}

/// Ensemble-averaged dissipation series of the full ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanDissipation {
    pub t: Vec<f64>,
    pub mean_nu_t_nl: Vec<f64>,
    pub mean_nu_t_temp: Vec<f64>,
    pub nu_t_nl_of_mean: Vec<f64>,
}

pub fn mean_dissipation_check(spec: &EnsembleSpec) -> Result<MeanDissipation> {
    let mut s = spec.clone();
    s.checkpoints = vec![spec.count];
    let r = run_ensemble(&s)?.checkpoints.pop().ok_or_else(|| Error::EnsembleMismatch("no checkpoint".into()))?;
    Ok(MeanDissipation { t: r.t, mean_nu_t_nl: r.mean_nu_t_nl, mean_nu_t_temp: r.mean_nu_t_temp, nu_t_nl_of_mean: r.nu_t_nl_of_mean })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::init::shell_energies;
    use crate::grid::WaveGrid;
    use crate::ops::{leray_project, stokes_apply};

    fn cfg(t_final: f64) -> SimulationConfig {
        let g = WaveGrid::periodic(16).unwrap();
        let init = InitDescriptor::RandomBand { k_min: 1.0, k_max: 3.0, slope: 0.0 };
        SimulationConfig::new(g, 0.05, 0.01, t_final, init)
    }

    #[test]
    fn random_phase_preserves_structure() {
        let u = crate::sampling::random_solenoidal(WaveGrid::periodic(16).unwrap(), 0.1, 5, 3);
        let v = random_phase(&u, &mut member_rng(9, 4));
        assert!(v.divergence_residual() < 1e-12);
        assert_eq!(v.reality_defect(), 0.0);
        assert!(v.drift().iter().all(|z| z.norm() == 0.0));
        for (a, b) in shell_energies(&u).iter().zip(shell_energies(&v)) {
            assert!((a - b).abs() <= 1e-14 * a.max(1e-300));
        }
        assert!(v.lin_comb(1.0, &u, -1.0).unwrap().norm_h() > 0.1 * u.norm_h());
    }

    #[test]
    fn heat_solution_closed_forms() {
        let g = WaveGrid::periodic(8).unwrap();
        let mut u = SpectralVelocityField::zeros(g, 0.01);
        let z = Complex64::default();
        u.set_mode_pair([1, 1, 0], [Complex64::new(0.5, 0.0), Complex64::new(-0.5, 0.0), z]).unwrap();
        assert_eq!(heat_solution(&u, 0.0).unwrap().coeffs(), u.coeffs());
        let h = heat_solution(&u, 1.0).unwrap();
        let idx = g.flat_of([1, 1, 0]).unwrap();
        assert!((h.mode(idx)[0].re - 0.5 * (-0.02f64).exp()).abs() < 1e-16);
        assert!(matches!(heat_solution(&u, -1.0), Err(Error::NegativeTime(_))));
        let w = crate::sampling::random_solenoidal(WaveGrid::periodic(8).unwrap(), 0.01, 2, 1);
        let lhs = heat_solution(&heat_solution(&w, 0.3).unwrap(), 0.4).unwrap();
        let rhs = heat_solution(&w, 0.7).unwrap();
        assert!(lhs.lin_comb(1.0, &rhs, -1.0).unwrap().norm_h() < 1e-15 * w.norm_h());
    }

    #[test]
    fn mean_of_pair_and_linearity() {
        let g = WaveGrid::periodic(8).unwrap();
        let u = crate::sampling::random_solenoidal(g, 0.1, 2, 5);
        let tr = |f: &SpectralVelocityField| vec![TrajectorySample::new(0.0, f.clone())];
        let single = ensemble_mean(&[tr(&u)]).unwrap();
        assert_eq!(single[0].u.coeffs(), u.coeffs());
        let pair = ensemble_mean(&[tr(&u), tr(&u.scaled(-1.0))]).unwrap();
        assert!(pair[0].u.is_zero());
        let v = crate::sampling::random_solenoidal(g, 0.1, 2, 6);
        let m = ensemble_mean(&[tr(&u), tr(&v)]).unwrap()[0].u.clone();
        let pm = ensemble_mean(&[tr(&leray_project(&u)), tr(&leray_project(&v))]).unwrap()[0].u.clone();
        assert!(leray_project(&m).lin_comb(1.0, &pm, -1.0).unwrap().norm_h() < 1e-14 * m.norm_h());
        let sm = ensemble_mean(&[tr(&stokes_apply(&u, 1.0).unwrap()), tr(&stokes_apply(&v, 1.0).unwrap())]).unwrap();
        let am = stokes_apply(&m, 1.0).unwrap();
        assert!(am.lin_comb(1.0, &sm[0].u, -1.0).unwrap().norm_h() < 1e-14 * am.norm_h());
        let shifted = vec![TrajectorySample::new(1.0, u.clone())];
        assert!(matches!(ensemble_mean(&[tr(&u), shifted]), Err(Error::EnsembleMismatch(_))));
    }

    #[test]
    fn single_member_without_noise_is_the_run() {
        let mut spec = EnsembleSpec::new(cfg(0.1), 1, Perturbation::BandNoise { amplitude: 0.0 });
        spec.checkpoints = vec![1];
        let r = run_ensemble(&spec).unwrap();
        let c = &r.checkpoints[0];
        assert_eq!(c.deviation[0], 0.0);
        assert!(c.max_deviation > 0.0);
        // identical members give the single-run rates
        let mut two = spec.clone();
        two.count = 2;
        two.checkpoints = vec![1, 2];
        let r2 = run_ensemble(&two).unwrap();
        assert!((r2.checkpoints[1].mean_nu_t_nl[3] - c.mean_nu_t_nl[3]).abs() < 1e-14 * c.mean_nu_t_nl[3]);
    }

    #[test]
    fn sign_flip_mean_is_second_order() {
        let dev = |amp: f64| {
            let mut spec = EnsembleSpec::new(cfg(0.2), 2, Perturbation::SignFlip);
            spec.amplitude = amp;
            let r = run_ensemble(&spec).unwrap();
            let c = &r.checkpoints[0];
            assert!(c.nu_t_nl_of_mean[0] == 0.0);
            c.max_deviation
        };
        let (a, b) = (dev(1e-3), dev(2e-3));
        assert!((b / a - 4.0).abs() < 0.01, "{}", b / a);
    }

    #[test]
    fn power_law_fit() {
        let n = [16.0, 64.0, 256.0];
        let y: Vec<f64> = n.iter().map(|n: &f64| 3.0 * n.powf(-0.5)).collect();
        let f = fit_power_law(&n, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!(f.ci95.0 <= f.slope && f.slope <= f.ci95.1);
    }

    #[test]
    fn perturbation_parsing() {
        for p in [Perturbation::RandomPhase, Perturbation::SignFlip, Perturbation::BandNoise { amplitude: 0.25 }] {
            assert_eq!(p.to_string().parse::<Perturbation>().unwrap(), p);
        }
        assert!("gaussian".parse::<Perturbation>().is_err());
    }
}
