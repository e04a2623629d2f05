//! Smooth / turbulent / strictly-turbulent classification of initial data.
//!
//! Data enter as real harmonic profiles `a[c][l][m]`: one real coefficient
//! per velocity component and `(l, m)`, with radial nodes summed out. At
//! each degree the `m`-vector is split along the uniform unit vector; the
//! resulting per-degree means are split again along the uniform unit vector
//! over degrees.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

use super::expansion::{expand_real, ExpansionOptions, HarmonicCoefficients, RadialNodes};
use super::quadrature::BallQuadrature;
use super::ylm::{complex_to_real, lm_index};
use crate::error::{Error, Result};
use crate::field::SpectralVelocityField;
use crate::par::Neumaier;

pub const CLASSIFIER_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataClass {
    Smooth,
    Turbulent,
    StrictlyTurbulent,
}

impl fmt::Display for DataClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DataClass::Smooth => "smooth",
            DataClass::Turbulent => "turbulent",
            DataClass::StrictlyTurbulent => "strictly-turbulent",
        })
    }
}

/// Real coefficients `values[c][l][m + l]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicProfile {
    pub lmax: usize,
    pub values: Vec<Vec<Vec<f64>>>,
}

impl HarmonicProfile {
    pub fn zeros(lmax: usize, components: usize) -> Self {
        let per = (0..=lmax).map(|l| vec![0.0; 2 * l + 1]).collect::<Vec<_>>();
        Self { lmax, values: vec![per; components] }
    }

    /// Uniform in `m` at every degree, uniform over degrees, in every component.
    pub fn smooth(lmax: usize) -> Self {
        let mut p = Self::zeros(lmax, 3);
        for comp in p.values.iter_mut() {
            for (l, v) in comp.iter_mut().enumerate() {
                v.fill(1.0 / ((2 * l + 1) as f64).sqrt());
            }
        }
        p
    }

    /// `(1, 0, …, 0, -1)/√2` over `m` at degree `l` in the first component.
    pub fn strictly_turbulent(lmax: usize, l: usize) -> Result<Self> {
        if l == 0 || l > lmax {
            return Err(Error::InvalidHarmonicIndex(format!(
                "strictly turbulent profile needs 1 <= l <= lmax, got l = {l}, lmax = {lmax}"
            )));
        }
        let mut p = Self::zeros(lmax, 3);
        let v = &mut p.values[0][l];
        v[0] = std::f64::consts::FRAC_1_SQRT_2;
        v[2 * l] = -std::f64::consts::FRAC_1_SQRT_2;
        Ok(p)
    }

    /// Sum of the smooth and the degree-one strictly turbulent profiles.
    pub fn turbulent(lmax: usize) -> Result<Self> {
        Self::smooth(lmax).add(&Self::strictly_turbulent(lmax, 1)?)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.lmax != other.lmax || self.values.len() != other.values.len() {
            return Err(Error::InvalidHarmonicIndex("profiles of different shape".into()));
        }
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().flatten().flatten().zip(other.values.iter().flatten().flatten()) {
            *a += b;
        }
        Ok(out)
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.values.iter().flatten().flatten().copied().collect()
    }

    pub fn norm(&self) -> f64 {
        self.flatten().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Collapse per-component coefficients: sum over radial nodes, then
    /// convert to the real basis.
    pub fn from_coefficients(coeffs: &[HarmonicCoefficients]) -> Result<Self> {
        let first = coeffs.first().ok_or(Error::EmptyExpansion)?;
        let lmax = first.lmax;
        let mut p = Self::zeros(lmax, coeffs.len());
        for (c, hc) in coeffs.iter().enumerate() {
            if hc.lmax != lmax || hc.f.is_empty() {
                return Err(Error::EmptyExpansion);
            }
            for l in 0..=lmax {
                let summed: Vec<_> = (-(l as i64)..=l as i64)
                    .map(|m| hc.f.iter().map(|row| row[lm_index(l, m)]).sum())
                    .collect();
                p.values[c][l] = complex_to_real(l, &summed);
            }
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeDiagnostics {
    pub component: usize,
    pub l: usize,
    /// Projection on the uniform `m` direction.
    pub m_mean: f64,
    /// Norm of the part orthogonal to it.
    pub m_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: DataClass,
    pub tolerance: f64,
    /// Smallest ratio by which a deciding statistic clears the threshold.
    pub margin: f64,
    pub norm: f64,
    pub degrees: Vec<DegreeDiagnostics>,
    /// Per component, projection of the degree means on the uniform degree direction.
    pub l_mean: Vec<f64>,
    pub l_residual: Vec<f64>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 { f64::INFINITY } else { num / den }
}

pub fn classify_profile(profile: &HarmonicProfile, tolerance: f64) -> Result<Classification> {
    let norm = profile.norm();
    if profile.values.is_empty() || norm == 0.0 {
        return Err(Error::EmptyExpansion);
    }
    let mut degrees = Vec::new();
    let mut l_mean = Vec::new();
    let mut l_residual = Vec::new();
    for (c, comp) in profile.values.iter().enumerate() {
        let mut means = Vec::with_capacity(comp.len());
        for (l, v) in comp.iter().enumerate() {
            let u = 1.0 / (v.len() as f64).sqrt();
            let p: f64 = v.iter().sum::<f64>() * u;
            let r = v.iter().map(|x| (x - p * u).powi(2)).sum::<f64>().sqrt();
            degrees.push(DegreeDiagnostics { component: c, l, m_mean: p, m_residual: r });
            means.push(p);
        }
        let u = 1.0 / (means.len() as f64).sqrt();
        let q: f64 = means.iter().sum::<f64>() * u;
        l_mean.push(q);
        l_residual.push(means.iter().map(|x| (x - q * u).powi(2)).sum::<f64>().sqrt());
    }
    let thr = tolerance * norm;
    let max_res = degrees.iter().map(|d| d.m_residual).chain(l_residual.iter().copied()).fold(0.0, f64::max);
    let max_mean = degrees.iter().map(|d| d.m_mean.abs()).fold(0.0, f64::max);
    let (label, margin) = if max_res <= thr {
        (DataClass::Smooth, ratio(thr, max_res).min(ratio(max_mean, thr)))
    } else if max_mean <= thr {
        (DataClass::StrictlyTurbulent, ratio(thr, max_mean).min(ratio(max_res, thr)))
    } else {
        (DataClass::Turbulent, ratio(max_res, thr).min(ratio(max_mean, thr)))
    };
    Ok(Classification { label, tolerance, margin, norm, degrees, l_mean, l_residual })
}

pub fn classify_coefficients(coeffs: &[HarmonicCoefficients], tolerance: f64) -> Result<Classification> {
    classify_profile(&HarmonicProfile::from_coefficients(coeffs)?, tolerance)
}

/// Spherical analysis of torus data on the largest inscribed ball.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSettings {
    pub lmax: usize,
    pub n_radial: usize,
    pub n_k: usize,
    pub tolerance: f64,
}

impl ClassifierSettings {
    pub fn new(lmax: usize) -> Self {
        Self { lmax, n_radial: 12, n_k: 4, tolerance: CLASSIFIER_TOLERANCE }
    }

    pub fn quadrature(&self, length: f64) -> Result<BallQuadrature> {
        BallQuadrature::new(0.5 * length, self.lmax, self.n_radial)
    }

    pub fn options(&self, length: f64) -> ExpansionOptions {
        ExpansionOptions { lmax: self.lmax, nodes: RadialNodes::dirichlet(0.5 * length, self.n_k), singular: false }
    }
}

/// Velocity samples on the quadrature nodes of a ball centred in the cube,
/// by direct Fourier summation over the field's support.
pub fn sample_on_ball(u: &SpectralVelocityField, quad: &BallQuadrature) -> [Vec<f64>; 3] {
    let g = u.grid();
    let centre = 0.5 * g.length();
    let support: Vec<([f64; 3], [num_complex::Complex64; 3])> =
        u.support().into_iter().map(|(i, v)| (g.kappa(i), v)).collect();
    let vals: Vec<[f64; 3]> = quad
        .points()
        .par_iter()
        .map(|p| {
            let x = p.cartesian().map(|v| v + centre);
            let mut out = [Neumaier::default(); 3];
            for (k, v) in &support {
                let e = num_complex::Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
                for c in 0..3 {
                    out[c].add((v[c] * e).re);
                }
            }
            out.map(|s| s.value())
        })
        .collect();
    [0, 1, 2].map(|c| vals.iter().map(|v| v[c]).collect())
}

pub(crate) fn profile_of_samples(
    quad: &BallQuadrature,
    samples: &[Vec<f64>; 3],
    opts: &ExpansionOptions,
) -> Result<HarmonicProfile> {
    let coeffs = samples.iter().map(|s| expand_real(quad, s, opts)).collect::<Result<Vec<_>>>()?;
    HarmonicProfile::from_coefficients(&coeffs)
}

pub fn field_profile(u: &SpectralVelocityField, settings: &ClassifierSettings) -> Result<HarmonicProfile> {
    let l = u.grid().length();
    let quad = settings.quadrature(l)?;
    profile_of_samples(&quad, &sample_on_ball(u, &quad), &settings.options(l))
}

pub fn classify_initial_data(u: &SpectralVelocityField, settings: &ClassifierSettings) -> Result<Classification> {
    classify_profile(&field_profile(u, settings)?, settings.tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_close() {
        for lmax in [1, 2, 4] {
            let s = classify_profile(&HarmonicProfile::smooth(lmax), CLASSIFIER_TOLERANCE).unwrap();
            assert_eq!(s.label, DataClass::Smooth);
            assert!(s.margin >= 1e6);
            let st = classify_profile(&HarmonicProfile::strictly_turbulent(lmax, lmax).unwrap(), CLASSIFIER_TOLERANCE)
                .unwrap();
            assert_eq!(st.label, DataClass::StrictlyTurbulent);
            assert!(st.margin >= 1e6);
            let t = classify_profile(&HarmonicProfile::turbulent(lmax).unwrap(), CLASSIFIER_TOLERANCE).unwrap();
            assert_eq!(t.label, DataClass::Turbulent);
            assert!(t.margin >= 1e6);
        }
    }

    #[test]
    fn empty_profile_is_rejected() {
        assert!(matches!(
            classify_profile(&HarmonicProfile::zeros(2, 3), CLASSIFIER_TOLERANCE),
            Err(Error::EmptyExpansion)
        ));
        assert!(HarmonicProfile::strictly_turbulent(2, 0).is_err());
    }

    #[test]
    fn labels_display() {
        assert_eq!(DataClass::StrictlyTurbulent.to_string(), "strictly-turbulent");
    }
}
