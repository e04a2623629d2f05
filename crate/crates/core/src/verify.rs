//! Fast built-in invariant suite behind `ns-lab verify`.

use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::blowup::{excluded_region_time, fit_spectrum};
use crate::diagnostics::{entropy_surrogate, normalized_mean_state};
use crate::dynamics::{initial_data, nonlinear_term, simulate_with, InitDescriptor, SimulationConfig};
use crate::ensemble::heat_solution;
use crate::grid::WaveGrid;
use crate::harmonics::{
    classify_profile, expand, reconstruct, spherical_bessel, spherical_bessel_derivative, ylm_all, BallQuadrature,
    DataClass, ExpansionOptions, HarmonicCoefficients, HarmonicProfile, RadialNodes, CLASSIFIER_TOLERANCE,
};
use crate::io::nssf::{decode, encode};
use crate::ops::{leray_project, sobolev_norm};
use crate::sampling::{random_raw, random_solenoidal};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Check = fn() -> Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg.into()) }
}

fn projector() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for (i, n) in [8, 16].into_iter().enumerate() {
        let g = WaveGrid::periodic(n).map_err(|e| e.to_string())?;
        for s in 0..10 {
            let f = random_raw(g, 0.1, n as i64 / 2, 100 * i as u64 + s);
            let p = leray_project(&f);
            let pp = leray_project(&p);
            let idem = pp.lin_comb(1.0, &p, -1.0).map_err(|e| e.to_string())?.norm_h() / p.norm_h();
            let q = f.lin_comb(1.0, &p, -1.0).map_err(|e| e.to_string())?;
            let orth = q.inner(&p).map_err(|e| e.to_string())?.abs() / (f.norm_h() * f.norm_h());
            worst = worst.max(idem).max(orth).max(p.divergence_residual());
        }
    }
    ensure(worst <= 1e-12, format!("worst defect {worst:.3e}"))?;
    Ok(format!("worst defect {worst:.3e}"))
}

fn taylor_green() -> Result<String, String> {
    let g = WaveGrid::periodic(16).map_err(|e| e.to_string())?;
    let nu = 0.01;
    let cfg = SimulationConfig::new(g, nu, 1e-3, 0.1, InitDescriptor::TaylorGreen);
    let mut e0 = None;
    let (mut err, mut nl): (f64, f64) = (0.0, 0.0);
    simulate_with(&cfg, |s, _| {
        let h = s.u.norm_h();
        let h0 = *e0.get_or_insert(h);
        err = err.max((h - h0 * (-2.0 * nu * s.t).exp()).abs() / h0);
        nl = nl.max(nonlinear_term(&s.u)?.norm_h());
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    ensure(err <= 1e-6 && nl <= 1e-12, format!("energy error {err:.3e}, projected advection {nl:.3e}"))?;
    Ok(format!("energy error {err:.3e}"))
}

fn neutrality() -> Result<String, String> {
    let g = WaveGrid::periodic(16).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for s in 0..10 {
        let u = random_solenoidal(g, 0.1, 5, 500 + s);
        let nl = nonlinear_term(&u).map_err(|e| e.to_string())?;
        let h1 = sobolev_norm(&u, 0.5).map_err(|e| e.to_string())?;
        worst = worst.max(nl.inner(&u).map_err(|e| e.to_string())?.abs() / (h1 * h1));
    }
    ensure(worst <= 1e-12, format!("{worst:.3e}"))?;
    Ok(format!("relative transfer {worst:.3e}"))
}

fn harmonics_gram() -> Result<String, String> {
    let lmax = 8;
    let q = BallQuadrature::new(1.0, lmax, 1).map_err(|e| e.to_string())?;
    let nphi = q.phi.len();
    let tables: Vec<Vec<Complex64>> =
        (0..q.n_angular()).map(|a| ylm_all(lmax, q.theta[a / nphi], q.phi[a % nphi])).collect();
    let nlm = (lmax + 1) * (lmax + 1);
    let mut worst: f64 = 0.0;
    for i in 0..nlm {
        for j in 0..nlm {
            let s: Complex64 =
                tables.iter().enumerate().map(|(a, y)| y[i] * y[j].conj() * q.angular_weight(a / nphi)).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((s - target).norm());
        }
    }
    ensure(worst <= 1e-10, format!("Gram deviation {worst:.3e}"))?;
    Ok(format!("Gram deviation {worst:.3e}"))
}

fn bessel_wronskian() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for l in 0..=10 {
        for i in 0..100 {
            let x = 0.1 + 49.9 * i as f64 / 99.0;
            let (j, y) = spherical_bessel(l, x).map_err(|e| e.to_string())?;
            let (dj, dy) = spherical_bessel_derivative(l, x).map_err(|e| e.to_string())?;
            worst = worst.max(((j * dy - dj * y) * x * x - 1.0).abs());
        }
    }
    ensure(worst <= 1e-10, format!("{worst:.3e}"))?;
    Ok(format!("relative Wronskian defect {worst:.3e}"))
}

fn expansion_round_trip() -> Result<String, String> {
    let lmax = 4;
    let quad = BallQuadrature::new(1.0, lmax, 20).map_err(|e| e.to_string())?;
    let nodes = RadialNodes::dirichlet(1.0, 5);
    let mut c = HarmonicCoefficients::zeros(lmax, nodes.clone(), false);
    for (n, row) in c.f.iter_mut().enumerate() {
        for (i, z) in row.iter_mut().enumerate() {
            *z = Complex64::new(((7 * i + 3 * n) % 11) as f64 / 11.0 - 0.5, ((5 * i + n) % 7) as f64 / 7.0 - 0.5);
        }
    }
    let pts = quad.points();
    let f = reconstruct(&c, &pts).map_err(|e| e.to_string())?;
    let opts = ExpansionOptions { lmax, nodes, singular: false };
    let g = reconstruct(&expand(&quad, &f, &opts).map_err(|e| e.to_string())?, &pts).map_err(|e| e.to_string())?;
    let scale = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let err = f.iter().zip(&g).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
    ensure(err <= 1e-8, format!("{err:.3e}"))?;
    Ok(format!("relative round-trip error {err:.3e}"))
}

fn classifier() -> Result<String, String> {
    let mut margin = f64::INFINITY;
    for lmax in [1, 2, 4] {
        let cases = [
            (HarmonicProfile::smooth(lmax), DataClass::Smooth),
            (HarmonicProfile::strictly_turbulent(lmax, 1).map_err(|e| e.to_string())?, DataClass::StrictlyTurbulent),
            (HarmonicProfile::turbulent(lmax).map_err(|e| e.to_string())?, DataClass::Turbulent),
        ];
        for (p, label) in cases {
            let c = classify_profile(&p, CLASSIFIER_TOLERANCE).map_err(|e| e.to_string())?;
            ensure(c.label == label, format!("lmax {lmax}: expected {label}, got {}", c.label))?;
            margin = margin.min(c.margin);
        }
    }
    ensure(margin >= 1e6, format!("margin {margin:.3e}"))?;
    Ok(format!("smallest margin {margin:.3e}"))
}

fn blowup_geometry() -> Result<String, String> {
    ensure(excluded_region_time(1.0, 0.2, 0.4).map_err(|e| e.to_string())? == Some(2.0), "T* of (1, 0.2, 0.4)")?;
    ensure(excluded_region_time(1.0, 0.2, 0.0).map_err(|e| e.to_string())?.is_none(), "T* with d_min = 0")?;
    let mut worst: f64 = 0.0;
    for d in [0.1, 0.5, 2.0] {
        let k: Vec<f64> = (0..96).map(|i| i as f64).collect();
        let e: Vec<f64> = k.iter().map(|k| if *k == 0.0 { 0.0 } else { k.powi(4) * (-2.0 * d * k).exp() }).collect();
        let f = fit_spectrum(&k, &e).map_err(|e| e.to_string())?;
        let got = f.delta.ok_or("no strip width")?;
        worst = worst.max((got - d).abs() / d);
    }
    ensure(worst <= 0.05, format!("strip width error {worst:.3e}"))?;
    Ok(format!("strip width error {worst:.3e}"))
}

fn entropy() -> Result<String, String> {
    let g = WaveGrid::periodic(8).map_err(|e| e.to_string())?;
    let s0 = entropy_surrogate(&normalized_mean_state(g, 0.1, [0.3, -1.0, 2.0]).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?
        .value;
    ensure(s0.abs() <= 1e-12, format!("mean state {s0:.3e}"))?;
    let mut low = f64::INFINITY;
    for s in 0..10 {
        let u = random_solenoidal(g, 0.1, 3, 900 + s);
        low = low.min(entropy_surrogate(&u).map_err(|e| e.to_string())?.value);
    }
    ensure(low >= -1e-12, format!("minimum {low:.3e}"))?;
    Ok(format!("mean state {s0:.3e}, minimum over random states {low:.3e}"))
}

fn persistence() -> Result<String, String> {
    let g = WaveGrid::new(8, 1.7).map_err(|e| e.to_string())?;
    for s in 0..10 {
        let u = random_raw(g, 0.01 * s as f64, 4, 40 + s).with_time(Some(s as f64 / 3.0));
        let bytes = encode(&u);
        ensure(encode(&decode(&bytes).map_err(|e| e.to_string())?) == bytes, "round trip differs")?;
    }
    let bytes = encode(&random_raw(g, 0.1, 4, 1));
    let mut magic = bytes.clone();
    magic[1] = b'Z';
    let mut version = bytes.clone();
    version[4] = b'9';
    let errs = [decode(&magic), decode(&version), decode(&bytes[..100])].map(|r| r.err().map(|e| e.to_string()));
    ensure(errs.iter().all(Option::is_some), "corruption accepted")?;
    ensure(errs[0] != errs[1] && errs[1] != errs[2] && errs[0] != errs[2], "errors not distinct")?;
    Ok("bit-exact, three distinct errors".into())
}

fn heat_semigroup() -> Result<String, String> {
    let g = WaveGrid::periodic(8).map_err(|e| e.to_string())?;
    let u = initial_data(&InitDescriptor::RandomBand { k_min: 1.0, k_max: 2.0, slope: 0.0 }, g, 0.05, 3)
        .map_err(|e| e.to_string())?;
    let a = heat_solution(&heat_solution(&u, 0.25).map_err(|e| e.to_string())?, 0.5).map_err(|e| e.to_string())?;
    let b = heat_solution(&u, 0.75).map_err(|e| e.to_string())?;
    let d = a.lin_comb(1.0, &b, -1.0).map_err(|e| e.to_string())?.norm_h() / u.norm_h();
    ensure(d <= 1e-14, format!("{d:.3e}"))?;
    Ok(format!("semigroup defect {d:.3e}"))
}

pub const CHECKS: &[(&str, Check)] = &[
    ("projector", projector),
    ("taylor-green", taylor_green),
    ("energy-neutrality", neutrality),
    ("harmonics-gram", harmonics_gram),
    ("bessel-wronskian", bessel_wronskian),
    ("expansion-round-trip", expansion_round_trip),
    ("classifier-closure", classifier),
    ("blowup-geometry", blowup_geometry),
    ("entropy-surrogate", entropy),
    ("nssf1-persistence", persistence),
    ("heat-semigroup", heat_semigroup),
];

pub fn fast_suite() -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|(name, f)| {
            let start = Instant::now();
            let r = f();
            let seconds = start.elapsed().as_secs_f64();
            match r {
                Ok(detail) => CheckResult { name, passed: true, detail, seconds },
                Err(detail) => CheckResult { name, passed: false, detail, seconds },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn fast_suite_passes() {
        for r in super::fast_suite() {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
