//! Space-time test functions `φ(x, t) = Σ α_k(t) a_k(x)` built from
//! divergence-free Fourier modes and compactly supported C¹ time profiles.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralVelocityField;
use crate::grid::WaveGrid;

/// Piecewise-cubic C¹ plateau: zero before `knots[0]`, smooth rise to
/// `amplitude` on `[knots[0], knots[1]]`, flat until `knots[2]`, smooth fall
/// to zero at `knots[3]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeProfile {
    knots: [f64; 4],
    amplitude: f64,
}

impl TimeProfile {
    pub fn new(knots: [f64; 4], amplitude: f64) -> Result<Self> {
        let ok = knots[0] < knots[1] && knots[1] <= knots[2] && knots[2] < knots[3];
        if !ok || knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidConfig(format!("time profile knots must increase: {knots:?}")));
        }
        Ok(Self { knots, amplitude })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.knots[0], self.knots[3])
    }

    pub fn value(&self, t: f64) -> f64 {
        let [a, b, c, d] = self.knots;
        let smooth = |s: f64| s * s * (3.0 - 2.0 * s);
        self.amplitude
            * if t <= a || t >= d {
                0.0
            } else if t < b {
                smooth((t - a) / (b - a))
            } else if t <= c {
                1.0
            } else {
                smooth((d - t) / (d - c))
            }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let [a, b, c, d] = self.knots;
        let dsmooth = |s: f64| 6.0 * s * (1.0 - s);
        self.amplitude
            * if t <= a || t >= d {
                0.0
            } else if t < b {
                dsmooth((t - a) / (b - a)) / (b - a)
            } else if t <= c {
                0.0
            } else {
                -dsmooth((d - t) / (d - c)) / (d - c)
            }
    }
}

/// One term `α(t) a(x)` with `a(x) = c e^{iκ·x} + c̄ e^{-iκ·x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffTerm {
    pub k: [i64; 3],
    pub polarization: [Complex64; 3],
    pub profile: TimeProfile,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CutoffFunction {
    terms: Vec<CutoffTerm>,
}

impl CutoffFunction {
    pub fn new(terms: Vec<CutoffTerm>) -> Result<Self> {
        for t in &terms {
            if t.k == [0, 0, 0] {
                return Err(Error::InvalidConfig("cutoff mode must have nonzero wavevector".into()));
            }
            let dot: Complex64 = (0..3).map(|i| t.polarization[i] * t.k[i] as f64).sum();
            let kn = t.k.iter().map(|v| (v * v) as f64).sum::<f64>().sqrt();
            let pn = t.polarization.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if dot.norm() > 1e-12 * kn * pn {
                return Err(Error::InvalidConfig(format!(
                    "polarization of mode {:?} is not orthogonal to its wavevector",
                    t.k
                )));
            }
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[CutoffTerm] {
        &self.terms
    }

    fn assemble(&self, grid: WaveGrid, t: f64, weight: impl Fn(&TimeProfile, f64) -> f64) -> Result<SpectralVelocityField> {
        let mut f = SpectralVelocityField::zeros(grid, 0.0);
        for term in &self.terms {
            let idx = grid
                .flat_of(term.k)
                .filter(|&i| !grid.is_nyquist(i))
                .ok_or_else(|| Error::BandOutsideGrid(format!("cutoff mode {:?} not retained", term.k)))?;
            let cj = grid.conjugate_index(idx);
            let w = weight(&term.profile, t);
            let mut m = f.mode(idx);
            let mut mc = f.mode(cj);
            for c in 0..3 {
                m[c] += term.polarization[c] * w;
                mc[c] += term.polarization[c].conj() * w;
            }
            f.set_mode(idx, m);
            f.set_mode(cj, mc);
        }
        Ok(f)
    }

    /// `φ(·, t)` as a spectral field.
    pub fn at(&self, grid: WaveGrid, t: f64) -> Result<SpectralVelocityField> {
        self.assemble(grid, t, |p, t| p.value(t))
    }

    /// `∂_t φ(·, t)`.
    pub fn time_derivative(&self, grid: WaveGrid, t: f64) -> Result<SpectralVelocityField> {
        self.assemble(grid, t, |p, t| p.derivative(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_is_c1_with_compact_support() {
        let p = TimeProfile::new([-0.5, 0.2, 0.6, 1.0], 2.0).unwrap();
        assert_eq!(p.value(-0.5), 0.0);
        assert_eq!(p.value(1.0), 0.0);
        assert_eq!(p.value(1.5), 0.0);
        assert_eq!(p.value(0.4), 2.0);
        for &t in &[-0.5, 0.2, 0.6, 1.0] {
            let h = 1e-7;
            assert!((p.value(t + h) - p.value(t - h)).abs() < 1e-6);
            assert!((p.derivative(t + h) - p.derivative(t - h)).abs() < 1e-5);
        }
        for &t in &[-0.3, 0.0, 0.1, 0.7, 0.9] {
            let h = 1e-6;
            let fd = (p.value(t + h) - p.value(t - h)) / (2.0 * h);
            assert!((fd - p.derivative(t)).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_compressive_polarization() {
        let p = TimeProfile::new([0.0, 0.1, 0.2, 0.3], 1.0).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let z = Complex64::default();
        let term = CutoffTerm { k: [1, 0, 0], polarization: [one, z, z], profile: p };
        assert!(CutoffFunction::new(vec![term]).is_err());
    }

    #[test]
    fn assembled_field_is_real_and_solenoidal() {
        let g = WaveGrid::periodic(8).unwrap();
        let p = TimeProfile::new([0.0, 0.1, 0.2, 0.3], 1.0).unwrap();
        let term = CutoffTerm {
            k: [1, 1, 0],
            polarization: [Complex64::new(1.0, 0.5), Complex64::new(-1.0, -0.5), Complex64::new(0.0, 2.0)],
            profile: p,
        };
        let phi = CutoffFunction::new(vec![term]).unwrap().at(g, 0.15).unwrap();
        assert_eq!(phi.reality_defect(), 0.0);
        assert!(phi.divergence_residual() < 1e-15);
    }
}
