//! Blowup monitor: analyticity strip width, the BKM integral, and the
//! floor-versus-slope geometry of the turbulent dissipation series.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::diagnostics::dissipation::DissipationReport;
use crate::diagnostics::regularity::trapezoid;
use crate::dynamics::init::shell_energies;
use crate::dynamics::{nonlinear_term, TrajectorySample};
use crate::error::{Error, Result};
use crate::field::SpectralVelocityField;
use crate::harmonics::classify::sample_on_ball;
use crate::harmonics::expansion::{expand_real, ExpansionOptions, RadialNodes};
use crate::harmonics::quadrature::BallQuadrature;
use crate::harmonics::ylm::lm_index;
use crate::ops::curl;

pub const SPECTRUM_NOISE_FLOOR: f64 = 1e-28;
pub const MIN_SHELLS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFit {
    /// Analyticity half-width; `None` when the tail is not exponential.
    pub delta: Option<f64>,
    pub alpha: f64,
    pub log_c: f64,
    pub r2: f64,
    /// First and last shell entering the fit.
    pub window: (usize, usize),
    pub non_exponential: bool,
    /// `δ κ_max < 1`.
    pub under_resolved: bool,
}

/// Fits `ln E = ln C + α ln κ − 2δκ` to a shell spectrum; `energy[s]` belongs
/// to wavenumber `kappa[s]`. The window runs from the spectral peak to the
/// last shell above the noise floor and never reaches the top sixth.
pub fn fit_spectrum(kappa: &[f64], energy: &[f64]) -> Result<SpectrumFit> {
    if kappa.len() != energy.len() {
        return Err(Error::SizeMismatch { expected: kappa.len(), got: energy.len() });
    }
    fit_window(kappa, energy, (energy.len() * 5) / 6)
}

fn fit_window(kappa: &[f64], energy: &[f64], usable_top: usize) -> Result<SpectrumFit> {
    let mut peak = None;
    for i in (0..usable_top).filter(|&i| kappa[i] > 0.0) {
        if peak.is_none_or(|p: usize| energy[i] > energy[p]) {
            peak = Some(i);
        }
    }
    let peak = peak.ok_or(Error::TooFewShells { found: 0, needed: MIN_SHELLS })?;
    let emax = energy[peak];
    let last = (peak..usable_top)
        .take_while(|&i| energy[i] > SPECTRUM_NOISE_FLOOR * emax.max(f64::MIN_POSITIVE) && energy[i] > 0.0)
        .last()
        .unwrap_or(peak);
    let shells: Vec<usize> = (peak..=last).filter(|&i| energy[i] > 0.0).collect();
    if shells.len() < MIN_SHELLS {
        return Err(Error::TooFewShells { found: shells.len(), needed: MIN_SHELLS });
    }
    let a = DMatrix::from_fn(shells.len(), 3, |r, c| {
        let k = kappa[shells[r]];
        match c {
            0 => 1.0,
            1 => k.ln(),
            _ => -2.0 * k,
        }
    });
    let b = DVector::from_iterator(shells.len(), shells.iter().map(|&i| energy[i].ln()));
    let x = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::LinearAlgebra(e.to_string()))?;
    let resid = &a * &x - &b;
    let mean = b.mean();
    let sst: f64 = b.iter().map(|v| (v - mean).powi(2)).sum();
    let r2 = if sst > 0.0 { 1.0 - resid.norm_squared() / sst } else { 1.0 };
    let delta = x[2];
    let span = kappa[last] - kappa[peak];
    let non_exponential = !(2.0 * delta * span > 1e-2);
    let kmax = kappa[usable_top.saturating_sub(1)];
    Ok(SpectrumFit {
        delta: (!non_exponential).then_some(delta),
        alpha: x[1],
        log_c: x[0],
        r2,
        window: (peak, last),
        non_exponential,
        under_resolved: !non_exponential && delta * kmax < 1.0,
    })
}

/// Shell spectrum `(κ_s, E_s)` over the complete spherical shells `0..=N/2`.
pub fn shell_spectrum(u: &SpectralVelocityField) -> (Vec<f64>, Vec<f64>) {
    let g = u.grid();
    let top = g.n() / 2;
    let scale = 2.0 * std::f64::consts::PI / g.length();
    let vol = g.volume();
    let e = shell_energies(u);
    let kappa = (0..=top).map(|s| scale * s as f64).collect();
    let energy = (0..=top).map(|s| 0.5 * vol * e[s]).collect();
    (kappa, energy)
}

/// Strip width of a field. For fields confined to the two-thirds band the
/// fit also stops at the dealiasing cutoff, where shells become incomplete.
pub fn analyticity_strip_width(u: &SpectralVelocityField) -> Result<SpectrumFit> {
    let g = u.grid();
    let (k, e) = shell_spectrum(u);
    let dealiased = (0..g.len()).all(|i| !g.is_dealiased_out(i) || u.mode(i).iter().all(|z| z.norm_sqr() == 0.0));
    let mut top = (e.len() * 5) / 6;
    if dealiased {
        top = top.min(g.dealias_cutoff() as usize + 1);
    }
    fit_window(&k, &e, top)
}

/// `max_x |ω(x)|` over collocation points.
pub fn vorticity_sup(u: &SpectralVelocityField) -> Result<f64> {
    let w = curl(u).to_physical()?;
    Ok((0..u.grid().len())
        .map(|i| (w[0][i].powi(2) + w[1][i].powi(2) + w[2][i].powi(2)).sqrt())
        .fold(0.0, f64::max))
}

/// Running trapezoid integrals of `‖ω‖_∞`; the last entry is the BKM integral.
pub fn bkm_partials(t: &[f64], omega_sup: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    for i in 0..t.len() {
        if i > 0 {
            acc += 0.5 * (t[i] - t[i - 1]) * (omega_sup[i] + omega_sup[i - 1]);
        }
        out.push(acc);
    }
    out
}

pub fn bkm_integral(trajectory: &[TrajectorySample]) -> Result<f64> {
    let t: Vec<f64> = trajectory.iter().map(|s| s.t).collect();
    let w = trajectory.iter().map(|s| vorticity_sup(&s.u)).collect::<Result<Vec<_>>>()?;
    Ok(trapezoid(&t, |i| w[i]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayBounds {
    pub nu_t_floor: f64,
    pub d_min: f64,
    /// Local decrease rate `−dν_t/dt` at every sample.
    pub rates: Vec<f64>,
}

/// Floor and minimal decrease rate of a `ν_t` series. Rates are local
/// least-squares slopes over `±max(1, n/8)` samples.
pub fn decay_law_bounds(t: &[f64], nu_t: &[f64]) -> Result<DecayBounds> {
    if t.len() != nu_t.len() {
        return Err(Error::SizeMismatch { expected: t.len(), got: nu_t.len() });
    }
    let n = t.len();
    if n < 8 {
        return Err(Error::TrajectoryTooShort { found: n, needed: 8 });
    }
    let h = (n / 8).max(1);
    let rates: Vec<f64> = (0..n)
        .map(|i| {
            let (lo, hi) = (i.saturating_sub(h), (i + h).min(n - 1));
            let m = (hi - lo + 1) as f64;
            let tm = t[lo..=hi].iter().sum::<f64>() / m;
            let ym = nu_t[lo..=hi].iter().sum::<f64>() / m;
            let sxy: f64 = (lo..=hi).map(|j| (t[j] - tm) * (nu_t[j] - ym)).sum();
            let sxx: f64 = (lo..=hi).map(|j| (t[j] - tm).powi(2)).sum();
            -sxy / sxx
        })
        .collect();
    Ok(DecayBounds {
        nu_t_floor: nu_t.iter().copied().fold(f64::INFINITY, f64::min),
        d_min: rates.iter().copied().fold(f64::INFINITY, f64::min),
        rates,
    })
}

/// Time at which the line `a − d_min t` meets the floor.
pub fn excluded_region_time(nu_t_at_0: f64, nu_t_floor: f64, d_min: f64) -> Result<Option<f64>> {
    if !(nu_t_at_0 > nu_t_floor) {
        return Err(Error::DegenerateGeometry { initial: nu_t_at_0, floor: nu_t_floor });
    }
    Ok((d_min > 0.0).then(|| (nu_t_at_0 - nu_t_floor) / d_min))
}

/// `ℓ = 1` content of the nonlinear dissipation density `u·P((u·∇)u)` on the
/// inscribed ball.
pub fn blowup_mode_amplitude(u: &SpectralVelocityField, n_radial: usize, n_k: usize) -> Result<f64> {
    let length = u.grid().length();
    let quad = BallQuadrature::new(0.5 * length, 1, n_radial)?;
    let nl = nonlinear_term(u)?;
    let (a, b) = (sample_on_ball(u, &quad), sample_on_ball(&nl, &quad));
    let density: Vec<f64> = (0..quad.len()).map(|i| (0..3).map(|c| a[c][i] * b[c][i]).sum()).collect();
    let opts = ExpansionOptions { lmax: 1, nodes: RadialNodes::dirichlet(0.5 * length, n_k), singular: false };
    let c = expand_real(&quad, &density, &opts)?;
    let mut s = 0.0;
    for m in -1..=1 {
        let z: num_complex::Complex64 = c.f.iter().map(|row| row[lm_index(1, m)]).sum();
        s += z.norm_sqr();
    }
    Ok(s.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ResolutionFlags {
    pub under_resolved: bool,
    pub non_exponential: bool,
    pub fit_failed: bool,
}

impl ResolutionFlags {
    pub fn any(&self) -> bool {
        self.under_resolved || self.non_exponential || self.fit_failed
    }

    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.under_resolved {
            parts.push("under-resolved");
        }
        if self.non_exponential {
            parts.push("non-exponential");
        }
        if self.fit_failed {
            parts.push("fit-failed");
        }
        parts.join("|")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupRow {
    pub t: f64,
    pub delta: Option<f64>,
    pub r2: Option<f64>,
    pub bkm_partial: f64,
    pub nu_t: f64,
    pub d_est: f64,
    pub flags: ResolutionFlags,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSeries {
    pub amplitude: Vec<f64>,
    pub floor: f64,
    pub d_min: f64,
    pub t_star: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupDiagnostics {
    pub rows: Vec<BlowupRow>,
    pub bkm_integral: f64,
    pub nu_t_floor: f64,
    pub d_min: f64,
    pub t_star: Option<f64>,
    /// `t_star` lies beyond the last sample.
    pub t_star_extrapolated: bool,
    /// Decay law read from the `ℓ = 1` component of the dissipation density.
    pub l1_mode: Option<ModeSeries>,
}

impl BlowupDiagnostics {
    pub fn flagged_times(&self) -> Vec<f64> {
        self.rows.iter().filter(|r| r.flags.any()).map(|r| r.t).collect()
    }
}

fn geometry(t: &[f64], series: &[f64]) -> Result<(f64, f64, Option<f64>, Vec<f64>)> {
    let b = decay_law_bounds(t, series)?;
    let t_star = match excluded_region_time(series[0], b.nu_t_floor, b.d_min) {
        Ok(v) => v,
        Err(Error::DegenerateGeometry { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok((b.nu_t_floor, b.d_min, t_star, b.rates))
}

/// Full monitor over a trajectory and its dissipation reports.
pub fn monitor(
    trajectory: &[TrajectorySample],
    reports: &[DissipationReport],
    harmonic_mode: bool,
) -> Result<BlowupDiagnostics> {
    if trajectory.len() != reports.len() {
        return Err(Error::SizeMismatch { expected: trajectory.len(), got: reports.len() });
    }
    let t: Vec<f64> = trajectory.iter().map(|s| s.t).collect();
    let nu_t: Vec<f64> = reports.iter().map(|r| r.nu_t).collect();
    let omega = trajectory.iter().map(|s| vorticity_sup(&s.u)).collect::<Result<Vec<_>>>()?;
    let partial = bkm_partials(&t, &omega);
    let (floor, d_min, t_star, rates) = geometry(&t, &nu_t)?;
    let rows = trajectory
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let (delta, r2, flags) = match analyticity_strip_width(&s.u) {
                Ok(f) => (
                    f.delta,
                    Some(f.r2),
                    ResolutionFlags { under_resolved: f.under_resolved, non_exponential: f.non_exponential, fit_failed: false },
                ),
                Err(_) => (None, None, ResolutionFlags { fit_failed: true, ..Default::default() }),
            };
            BlowupRow { t: s.t, delta, r2, bkm_partial: partial[i], nu_t: nu_t[i], d_est: rates[i], flags }
        })
        .collect();
    let l1_mode = if harmonic_mode {
        let amp = trajectory.iter().map(|s| blowup_mode_amplitude(&s.u, 12, 4)).collect::<Result<Vec<_>>>()?;
        let (floor, d_min, t_star, _) = geometry(&t, &amp)?;
        Some(ModeSeries { amplitude: amp, floor, d_min, t_star })
    } else {
        None
    };
    let end = *t.last().unwrap_or(&0.0);
    Ok(BlowupDiagnostics {
        rows,
        bkm_integral: *partial.last().unwrap_or(&0.0),
        nu_t_floor: floor,
        d_min,
        t_star,
        t_star_extrapolated: t_star.is_some_and(|ts| ts > end),
        l1_mode,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::WaveGrid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn synthetic(delta: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let k: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let e = k.iter().map(|k| if *k == 0.0 { 0.0 } else { k.powi(4) * (-2.0 * delta * k).exp() }).collect();
        (k, e)
    }

    #[test]
    fn recovers_synthetic_strip_width() {
        for d in [0.1, 0.5, 2.0] {
            let (k, e) = synthetic(d, 96);
            let f = fit_spectrum(&k, &e).unwrap();
            assert!((f.delta.unwrap() - d).abs() < 0.05 * d, "{d}: {:?}", f.delta);
            assert!(f.r2 > 0.999);
        }
    }

    #[test]
    fn white_spectrum_is_flagged() {
        let k: Vec<f64> = (0..32).map(|i| i as f64).collect();
        let f = fit_spectrum(&k, &vec![1.0; 32]).unwrap();
        assert!(f.non_exponential && f.delta.is_none());
    }

    #[test]
    fn too_few_shells() {
        let (k, e) = synthetic(0.5, 6);
        assert!(matches!(fit_spectrum(&k, &e), Err(Error::TooFewShells { .. })));
    }

    #[test]
    fn heat_flow_widens_the_strip() {
        // analytic band: |û_k|² ∝ e^{-2δ₀|κ|}, evolved by the heat semigroup
        let g = WaveGrid::periodic(32).unwrap();
        let nu = 0.05;
        let d0 = 0.4;
        let base = crate::sampling::random_solenoidal(g, nu, 10, 12).map_modes(|i| {
            let k = g.kappa_sq(i).sqrt();
            if k == 0.0 { 0.0 } else { (-d0 * k).exp() }
        });
        let mut last = 0.0;
        for t in [0.0, 0.2, 0.5] {
            let u = base.map_modes(|i| (-nu * g.kappa_sq(i) * t).exp());
            let d = analyticity_strip_width(&u).unwrap().delta.unwrap();
            assert!(d >= last);
            last = d;
        }
    }

    #[test]
    fn bkm_closed_forms() {
        let t: Vec<f64> = (0..11).map(|i| 0.1 * i as f64).collect();
        let p = bkm_partials(&t, &vec![3.0; 11]);
        assert!((p[10] - 3.0).abs() < 1e-14);
        let g = WaveGrid::periodic(8).unwrap();
        let z = vec![TrajectorySample::new(0.0, SpectralVelocityField::zeros(g, 0.1)); 3];
        assert_eq!(bkm_integral(&z).unwrap(), 0.0);
        // additivity over adjacent intervals
        let w: Vec<f64> = t.iter().map(|x| (x * 3.0).sin() + 2.0).collect();
        let full = bkm_partials(&t, &w)[10];
        let a = bkm_partials(&t[..6], &w[..6])[5];
        let b = bkm_partials(&t[5..], &w[5..])[5];
        assert!((full - a - b).abs() < 1e-14);
    }

    #[test]
    fn linear_decay_geometry() {
        let t: Vec<f64> = (0..20).map(|i| 0.1 * i as f64).collect();
        let y: Vec<f64> = t.iter().map(|t| 1.5 - 0.4 * t).collect();
        let b = decay_law_bounds(&t, &y).unwrap();
        assert!((b.nu_t_floor - (1.5 - 0.4 * 1.9)).abs() < 1e-14);
        assert!((b.d_min - 0.4).abs() < 1e-12);
        let c = decay_law_bounds(&t, &vec![0.3; 20]).unwrap();
        assert_eq!(c.d_min, 0.0);
        assert!(decay_law_bounds(&t[..7], &y[..7]).is_err());
    }

    #[test]
    fn noisy_slope_recovery() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t: Vec<f64> = (0..400).map(|i| 0.01 * i as f64).collect();
        let y: Vec<f64> = t.iter().map(|t| 2.0 - 0.3 * t + 1e-3 * rng.random_range(-1.0..1.0)).collect();
        let b = decay_law_bounds(&t, &y).unwrap();
        assert!((b.d_min - 0.3).abs() < 0.03, "{}", b.d_min);
    }

    #[test]
    fn excluded_region_cases() {
        assert_eq!(excluded_region_time(1.0, 0.2, 0.4).unwrap(), Some(2.0));
        assert_eq!(excluded_region_time(1.0, 0.2, 0.0).unwrap(), None);
        assert_eq!(excluded_region_time(1.0, 0.2, -0.1).unwrap(), None);
        assert!(matches!(excluded_region_time(0.2, 0.2, 1.0), Err(Error::DegenerateGeometry { .. })));
    }
}
