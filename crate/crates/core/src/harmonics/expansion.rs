//! Solid-harmonic expansion on a ball and its reconstruction.
//!
//! The continuum wavenumber integral is replaced by a sum over the nodes
//! `k_n = nπ/R`, `n = 1..=n_k`, each carrying the weight `k_n Δk` with
//! `Δk = π/R`. The radial profile of each angular coefficient is fitted to
//! the basis by weighted least squares with the `r² dr` measure.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::bessel::{spherical_jn_all, spherical_yn_all};
use super::quadrature::{BallQuadrature, SphericalPoint};
use super::ylm::{lm_index, ylm_all, LMAX_SUPPORTED};
use crate::error::{Error, Result};

/// Discretized wavenumber nodes with their integration weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialNodes {
    pub k: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialNodes {
    pub fn dirichlet(radius: f64, n_k: usize) -> Self {
        let dk = PI / radius;
        let k: Vec<f64> = (1..=n_k).map(|n| n as f64 * dk).collect();
        let weights = k.iter().map(|k| k * dk).collect();
        Self { k, weights }
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }
}

/// `F_klm` and optional `S_klm`, stored `[node][lm_index(l, m)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicCoefficients {
    pub lmax: usize,
    pub nodes: RadialNodes,
    pub f: Vec<Vec<Complex64>>,
    pub s: Option<Vec<Vec<Complex64>>>,
}

impl HarmonicCoefficients {
    pub fn zeros(lmax: usize, nodes: RadialNodes, singular: bool) -> Self {
        let nlm = (lmax + 1) * (lmax + 1);
        let table = vec![vec![Complex64::default(); nlm]; nodes.len()];
        Self { lmax, s: singular.then(|| table.clone()), f: table, nodes }
    }

    pub fn f_at(&self, n: usize, l: usize, m: i64) -> Complex64 {
        self.f[n][lm_index(l, m)]
    }

    pub fn s_at(&self, n: usize, l: usize, m: i64) -> Option<Complex64> {
        self.s.as_ref().map(|s| s[n][lm_index(l, m)])
    }

    /// Squared norm over all stored coefficients.
    pub fn norm_sqr(&self) -> f64 {
        let part = |t: &Vec<Vec<Complex64>>| t.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>();
        part(&self.f) + self.s.as_ref().map_or(0.0, part)
    }

    /// Largest violation of `c(l, -m) = (-1)^m conj c(l, m)`.
    pub fn conjugation_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let tables = std::iter::once(&self.f).chain(self.s.as_ref());
        for t in tables {
            for row in t {
                for l in 0..=self.lmax {
                    for m in 0..=l as i64 {
                        let s = if m % 2 == 1 { -1.0 } else { 1.0 };
                        let d = row[lm_index(l, -m)] - s * row[lm_index(l, m)].conj();
                        worst = worst.max(d.norm());
                    }
                }
            }
        }
        worst
    }
}

fn radial_factor(k: f64) -> f64 {
    (2.0 / PI).sqrt() * k
}

/// `(Ψ_smooth, Ψ_hat)` at `k`, `(l, m)` and point `p`.
pub fn solid_basis(k: f64, l: usize, m: i64, p: SphericalPoint) -> Result<(Complex64, Complex64)> {
    let y = super::ylm::ylm(l, m, p.theta, p.phi)?;
    let x = k * p.r;
    let j = spherical_jn_all(l, x)[l];
    let yn = spherical_yn_all(l, x)?[l];
    Ok((radial_factor(k) * j * y, radial_factor(k) * yn * y))
}

/// Regular branch alone; defined at the origin.
pub fn solid_smooth(k: f64, l: usize, m: i64, p: SphericalPoint) -> Result<Complex64> {
    let y = super::ylm::ylm(l, m, p.theta, p.phi)?;
    Ok(radial_factor(k) * spherical_jn_all(l, k * p.r)[l] * y)
}

/// Real radial basis values `w_n √(2/π) k_n z_l(k_n r)` for both branches.
pub(crate) fn radial_basis(nodes: &RadialNodes, l: usize, r: f64, singular: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut js = Vec::with_capacity(nodes.len());
    let mut ys = Vec::new();
    for (k, w) in nodes.k.iter().zip(&nodes.weights) {
        let c = w * radial_factor(*k);
        js.push(c * spherical_jn_all(l, k * r)[l]);
        if singular {
            ys.push(c * spherical_yn_all(l, k * r)?[l]);
        }
    }
    Ok((js, ys))
}

/// Weighted least-squares solver for one degree `l`: maps radial samples to
/// `[F_1..F_nk, S_1..S_nk]`.
pub(crate) struct RadialFit {
    pinv: DMatrix<f64>,
    sqrt_w: Vec<f64>,
}

impl RadialFit {
    pub(crate) fn new(quad: &BallQuadrature, nodes: &RadialNodes, l: usize, singular: bool) -> Result<Self> {
        let nr = quad.r.len();
        let ncols = nodes.len() * if singular { 2 } else { 1 };
        if nodes.is_empty() {
            return Err(Error::EmptyExpansion);
        }
        if nr < ncols {
            return Err(Error::InvalidConfig(format!("{nr} radial samples cannot resolve {ncols} radial coefficients")));
        }
        let sqrt_w: Vec<f64> = quad.r.iter().zip(&quad.r_weights).map(|(r, w)| r * w.sqrt()).collect();
        let mut a = DMatrix::<f64>::zeros(nr, ncols);
        for (i, r) in quad.r.iter().enumerate() {
            let (js, ys) = radial_basis(nodes, l, *r, singular)?;
            for (c, v) in js.iter().chain(&ys).enumerate() {
                a[(i, c)] = v * sqrt_w[i];
            }
        }
        let scale: Vec<f64> = (0..ncols)
            .map(|c| {
                let n = a.column(c).norm();
                if n > 0.0 { 1.0 / n } else { 1.0 }
            })
            .collect();
        for (c, s) in scale.iter().enumerate() {
            a.column_mut(c).scale_mut(*s);
        }
        let svd = a.svd(true, true);
        let smax = svd.singular_values.max();
        let pinv = svd
            .pseudo_inverse(1e-13 * smax)
            .map_err(|e| Error::LinearAlgebra(e.to_string()))?;
        let mut pinv = pinv;
        for (c, s) in scale.iter().enumerate() {
            pinv.row_mut(c).scale_mut(*s);
        }
        Ok(Self { pinv, sqrt_w })
    }

    /// Coefficients for real radial samples.
    pub(crate) fn solve(&self, samples: &[f64]) -> Vec<f64> {
        let b: Vec<f64> = samples.iter().zip(&self.sqrt_w).map(|(v, w)| v * w).collect();
        let x = &self.pinv * nalgebra::DVector::from_vec(b);
        x.iter().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionOptions {
    pub lmax: usize,
    pub nodes: RadialNodes,
    /// Also fit the irregular branch.
    pub singular: bool,
}

/// Angular projections `c_lm(r_i) = ∫ f conj(Y_lm) dΩ` at every radius.
pub(crate) fn angular_projection(quad: &BallQuadrature, samples: &[Complex64], lmax: usize) -> Vec<Vec<Complex64>> {
    let nphi = quad.phi.len();
    let tables: Vec<Vec<Complex64>> = (0..quad.n_angular())
        .map(|a| ylm_all(lmax, quad.theta[a / nphi], quad.phi[a % nphi]))
        .collect();
    let na = quad.n_angular();
    let nlm = (lmax + 1) * (lmax + 1);
    (0..quad.r.len())
        .into_par_iter()
        .map(|ir| {
            let mut c = vec![Complex64::default(); nlm];
            for (a, y) in tables.iter().enumerate() {
                let w = quad.angular_weight(a / nphi);
                let f = samples[ir * na + a] * w;
                for (ci, yi) in c.iter_mut().zip(y) {
                    *ci += f * yi.conj();
                }
            }
            c
        })
        .collect()
}

fn check_layout(quad: &BallQuadrature, n: usize, lmax: usize) -> Result<()> {
    if n != quad.len() {
        return Err(Error::NodeMismatch { expected: quad.len(), got: n });
    }
    if lmax > quad.lmax() || lmax > LMAX_SUPPORTED {
        return Err(Error::InvalidHarmonicIndex(format!(
            "lmax {lmax} exceeds quadrature degree {}",
            quad.lmax()
        )));
    }
    Ok(())
}

pub fn expand(quad: &BallQuadrature, samples: &[Complex64], opts: &ExpansionOptions) -> Result<HarmonicCoefficients> {
    check_layout(quad, samples.len(), opts.lmax)?;
    let proj = angular_projection(quad, samples, opts.lmax);
    let mut out = HarmonicCoefficients::zeros(opts.lmax, opts.nodes.clone(), opts.singular);
    let nk = opts.nodes.len();
    for l in 0..=opts.lmax {
        let fit = RadialFit::new(quad, &opts.nodes, l, opts.singular)?;
        for m in -(l as i64)..=l as i64 {
            let idx = lm_index(l, m);
            let re: Vec<f64> = proj.iter().map(|c| c[idx].re).collect();
            let im: Vec<f64> = proj.iter().map(|c| c[idx].im).collect();
            let (xr, xi) = (fit.solve(&re), fit.solve(&im));
            for n in 0..nk {
                out.f[n][idx] = Complex64::new(xr[n], xi[n]);
                if let Some(s) = out.s.as_mut() {
                    s[n][idx] = Complex64::new(xr[nk + n], xi[nk + n]);
                }
            }
        }
    }
    Ok(out)
}

pub fn expand_real(quad: &BallQuadrature, samples: &[f64], opts: &ExpansionOptions) -> Result<HarmonicCoefficients> {
    let z: Vec<Complex64> = samples.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    expand(quad, &z, opts)
}

pub fn reconstruct(coeffs: &HarmonicCoefficients, points: &[SphericalPoint]) -> Result<Vec<Complex64>> {
    let singular = coeffs.s.as_ref().is_some_and(|s| s.iter().flatten().any(|z| *z != Complex64::default()));
    points
        .par_iter()
        .map(|p| {
            if singular && p.r <= 0.0 {
                return Err(Error::Singularity(format!("irregular branch at r = {}", p.r)));
            }
            let y = ylm_all(coeffs.lmax, p.theta, p.phi);
            let mut acc = Complex64::default();
            for l in 0..=coeffs.lmax {
                let (js, ys) = radial_basis(&coeffs.nodes, l, p.r, singular)?;
                for m in -(l as i64)..=l as i64 {
                    let idx = lm_index(l, m);
                    let mut radial = Complex64::default();
                    for (n, j) in js.iter().enumerate() {
                        radial += coeffs.f[n][idx] * j;
                    }
                    if let Some(s) = coeffs.s.as_ref().filter(|_| singular) {
                        for (n, yv) in ys.iter().enumerate() {
                            radial += s[n][idx] * yv;
                        }
                    }
                    acc += radial * y[idx];
                }
            }
            Ok(acc)
        })
        .collect()
}

/// Young's bound `a^p/p + b^q/q` with `1/p + 1/q = 1`, for `p > 1`.
pub fn young_bound(a: f64, b: f64, p: f64) -> f64 {
    let q = p / (p - 1.0);
    a.abs().powf(p) / p + b.abs().powf(q) / q
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(lmax: usize) -> (BallQuadrature, ExpansionOptions) {
        let quad = BallQuadrature::new(1.5, lmax, 24).unwrap();
        let opts = ExpansionOptions { lmax, nodes: RadialNodes::dirichlet(1.5, 6), singular: false };
        (quad, opts)
    }

    #[test]
    fn l0_closed_form() {
        let k = 2.0;
        let p = SphericalPoint { r: 0.7, theta: 0.3, phi: 1.0 };
        let (s, _) = solid_basis(k, 0, 0, p).unwrap();
        let e = (2.0 / PI).sqrt() * k * (k * 0.7f64).sin() / (k * 0.7) / (4.0 * PI).sqrt();
        assert!((s.re - e).abs() < 1e-15 && s.im == 0.0);
    }

    #[test]
    fn origin_behaviour() {
        let p = SphericalPoint { r: 0.0, theta: 0.3, phi: 1.0 };
        assert_eq!(solid_smooth(2.0, 3, 1, p).unwrap().norm(), 0.0);
        assert!(matches!(solid_basis(2.0, 3, 1, p), Err(Error::Singularity(_))));
    }

    #[test]
    fn single_basis_function_is_concentrated() {
        let (quad, opts) = setup(4);
        let (n0, l0, m0) = (2usize, 3usize, -2i64);
        let k0 = opts.nodes.k[n0];
        let samples: Vec<Complex64> =
            quad.points().iter().map(|p| solid_smooth(k0, l0, m0, *p).unwrap()).collect();
        let c = expand(&quad, &samples, &opts).unwrap();
        let target = 1.0 / opts.nodes.weights[n0];
        let hit = c.f_at(n0, l0, m0);
        assert!((hit.re - target).abs() < 1e-8 * target && hit.im.abs() < 1e-8 * target);
        let off = (c.norm_sqr() - hit.norm_sqr()).max(0.0).sqrt();
        assert!(off <= 1e-8 * hit.norm(), "off-index mass {off}");
    }

    #[test]
    fn constant_has_only_l0() {
        let (quad, opts) = setup(3);
        let c = expand_real(&quad, &vec![2.5; quad.len()], &opts).unwrap();
        let total = c.norm_sqr().sqrt();
        for n in 0..opts.nodes.len() {
            for l in 1..=3 {
                for m in -(l as i64)..=l as i64 {
                    assert!(c.f_at(n, l, m).norm() < 1e-13 * total);
                }
            }
        }
    }

    fn random_coeffs(lmax: usize, nodes: RadialNodes, seed: u64, real: bool) -> HarmonicCoefficients {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = HarmonicCoefficients::zeros(lmax, nodes, false);
        for row in c.f.iter_mut() {
            for z in row.iter_mut() {
                *z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
            if real {
                for l in 0..=lmax {
                    row[lm_index(l, 0)].im = 0.0;
                    for m in 1..=l as i64 {
                        let s = if m % 2 == 1 { -1.0 } else { 1.0 };
                        row[lm_index(l, -m)] = s * row[lm_index(l, m)].conj();
                    }
                }
            }
        }
        c
    }

    #[test]
    fn round_trip_bandlimited() {
        let (quad, opts) = setup(5);
        let c = random_coeffs(5, opts.nodes.clone(), 3, false);
        let pts = quad.points();
        let f = reconstruct(&c, &pts).unwrap();
        let c2 = expand(&quad, &f, &opts).unwrap();
        let g = reconstruct(&c2, &pts).unwrap();
        let scale = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let err = f.iter().zip(&g).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-8 * scale, "{err}");
    }

    #[test]
    fn real_input_gives_conjugate_symmetric_coefficients() {
        let (quad, opts) = setup(4);
        let c = random_coeffs(4, opts.nodes.clone(), 8, true);
        let f = reconstruct(&c, &quad.points()).unwrap();
        assert!(f.iter().map(|z| z.im.abs()).fold(0.0, f64::max) < 1e-12);
        let re: Vec<f64> = f.iter().map(|z| z.re).collect();
        let c2 = expand_real(&quad, &re, &opts).unwrap();
        assert!(c2.conjugation_defect() < 1e-12 * c2.norm_sqr().sqrt());
    }

    #[test]
    fn singular_part_vanishes_for_regular_data() {
        let quad = BallQuadrature::new(1.0, 2, 32).unwrap();
        let opts = ExpansionOptions { lmax: 2, nodes: RadialNodes::dirichlet(1.0, 3), singular: true };
        let mut c = random_coeffs(2, opts.nodes.clone(), 1, false);
        c.s = None;
        let f = reconstruct(&c, &quad.points()).unwrap();
        let c2 = expand(&quad, &f, &opts).unwrap();
        let s_norm: f64 = c2.s.as_ref().unwrap().iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(s_norm < 1e-8 * c2.norm_sqr().sqrt(), "{s_norm}");
    }

    #[test]
    fn reconstruct_matches_direct_sum() {
        let nodes = RadialNodes::dirichlet(2.0, 3);
        let mut c = HarmonicCoefficients::zeros(3, nodes.clone(), false);
        c.f[1][lm_index(2, -1)] = Complex64::new(0.3, -0.8);
        c.f[2][lm_index(3, 3)] = Complex64::new(-1.1, 0.2);
        c.f[0][lm_index(0, 0)] = Complex64::new(0.5, 0.0);
        let pts = [
            SphericalPoint { r: 0.4, theta: 0.2, phi: 5.0 },
            SphericalPoint { r: 1.9, theta: 2.9, phi: 0.1 },
        ];
        let got = reconstruct(&c, &pts).unwrap();
        for (p, g) in pts.iter().zip(&got) {
            let direct = nodes.weights[1] * c.f[1][lm_index(2, -1)] * solid_smooth(nodes.k[1], 2, -1, *p).unwrap()
                + nodes.weights[2] * c.f[2][lm_index(3, 3)] * solid_smooth(nodes.k[2], 3, 3, *p).unwrap()
                + nodes.weights[0] * c.f[0][lm_index(0, 0)] * solid_smooth(nodes.k[0], 0, 0, *p).unwrap();
            assert!((direct - g).norm() < 1e-12 * direct.norm().max(1.0));
        }
        let zero = HarmonicCoefficients::zeros(3, nodes, true);
        assert!(reconstruct(&zero, &pts).unwrap().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn mismatched_samples_are_rejected() {
        let (quad, opts) = setup(2);
        assert!(matches!(expand_real(&quad, &[1.0; 5], &opts), Err(Error::NodeMismatch { .. })));
    }

    #[test]
    fn young_bounds_quadrature_cross_terms() {
        let (quad, opts) = setup(3);
        let c = random_coeffs(3, opts.nodes.clone(), 5, false);
        let f = reconstruct(&c, &quad.points()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let (i, j) = (rng.random_range(0..f.len()), rng.random_range(0..f.len()));
            let (a, b) = (f[i].norm() * quad.volume_weight(i), f[j].norm());
            for p in [1.25, 2.0, 3.0, 6.0] {
                assert!(a * b <= young_bound(a, b, p) * (1.0 + 1e-14));
            }
        }
    }
}
