//! Expansion of a nonnegative dissipation-rate density on a ball.
//!
//! `ε(r, θ, φ) = Σ_{lm} C_lm Y^r_lm(θ, φ) Σ_k w_k √(2/π) k [F_kl j_l(kr) + S_kl y_l(kr)]`
//! with real harmonics `Y^r_lm`. The radial coefficients carry no `m`: at
//! each degree the `m`-dependence is factored out by a rank-one
//! decomposition of the angular coefficient table.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::expansion::{RadialFit, RadialNodes};
use super::quadrature::BallQuadrature;
use super::ylm::{lm_index, real_ylm_all};
use crate::error::{Error, Result};

pub const NEGATIVE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DecayClass {
    /// Only the lowest degree carries weight.
    Flat,
    /// Fitted log-log slope of the per-degree radial energy.
    Algebraic { slope: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonExpansion {
    pub lmax: usize,
    pub nodes: RadialNodes,
    /// Unit vector over `m` at each degree, stored by `lm_index`.
    pub c: Vec<f64>,
    /// `f[l][n]`.
    pub f: Vec<Vec<f64>>,
    pub s: Option<Vec<Vec<f64>>>,
    /// Per-degree radial energy `Σ_n F_nl² + S_nl²`.
    pub degree_energy: Vec<f64>,
    pub decay: DecayClass,
    /// Norm of the part of the angular table not captured by the rank-one factors.
    pub separation_residual: f64,
}

pub fn epsilon_expansion(
    quad: &BallQuadrature,
    samples: &[f64],
    lmax: usize,
    nodes: &RadialNodes,
    singular: bool,
) -> Result<EpsilonExpansion> {
    if samples.len() != quad.len() {
        return Err(Error::NodeMismatch { expected: quad.len(), got: samples.len() });
    }
    if lmax > quad.lmax() {
        return Err(Error::InvalidHarmonicIndex(format!("lmax {lmax} exceeds quadrature degree {}", quad.lmax())));
    }
    if let Some((index, value)) = samples.iter().copied().enumerate().find(|(_, v)| *v < -NEGATIVE_TOLERANCE) {
        return Err(Error::NegativeDissipation { index, value });
    }
    let nphi = quad.phi.len();
    let na = quad.n_angular();
    let nlm = (lmax + 1) * (lmax + 1);
    let tables: Vec<Vec<f64>> =
        (0..na).map(|a| real_ylm_all(lmax, quad.theta[a / nphi], quad.phi[a % nphi])).collect();
    let nr = quad.r.len();
    let mut ang = vec![vec![0.0; nlm]; nr];
    for (ir, row) in ang.iter_mut().enumerate() {
        for (a, y) in tables.iter().enumerate() {
            let v = samples[ir * na + a] * quad.angular_weight(a / nphi);
            for (ri, yi) in row.iter_mut().zip(y) {
                *ri += v * yi;
            }
        }
    }

    let table_norm = ang.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    let mut c = vec![0.0; nlm];
    let mut f = Vec::with_capacity(lmax + 1);
    let mut s = singular.then(Vec::new);
    let mut degree_energy = Vec::with_capacity(lmax + 1);
    let mut sep = 0.0;
    let nk = nodes.len();
    for l in 0..=lmax {
        let width = 2 * l + 1;
        let x = DMatrix::from_fn(nr, width, |i, j| ang[i][lm_index(l, j as i64 - l as i64)]);
        let svd = x.clone().svd(true, true);
        let (u, vt) = (svd.u.as_ref().unwrap(), svd.v_t.as_ref().unwrap());
        let (mut best, mut sigma) = (0, 0.0);
        for (i, sv) in svd.singular_values.iter().enumerate() {
            if *sv > sigma {
                sigma = *sv;
                best = i;
            }
        }
        let mut cv: Vec<f64> = vt.row(best).iter().copied().collect();
        let mut radial: Vec<f64> = u.column(best).iter().map(|v| v * sigma).collect();
        let pivot = cv.iter().copied().fold(0.0, |a: f64, b| if b.abs() > a.abs() { b } else { a });
        if pivot < 0.0 {
            cv.iter_mut().for_each(|v| *v = -*v);
            radial.iter_mut().for_each(|v| *v = -*v);
        }
        if sigma <= 1e-14 * table_norm {
            cv.iter_mut().for_each(|v| *v = 0.0);
            radial.iter_mut().for_each(|v| *v = 0.0);
        }
        for (j, v) in cv.iter().enumerate() {
            c[lm_index(l, j as i64 - l as i64)] = *v;
        }
        let rank1 = DMatrix::from_fn(nr, width, |i, j| radial[i] * cv[j]);
        sep += (&x - rank1).norm_squared();

        let fit = RadialFit::new(quad, nodes, l, singular)?;
        let coef = fit.solve(&radial);
        f.push(coef[..nk].to_vec());
        let mut e: f64 = coef[..nk].iter().map(|v| v * v).sum();
        if let Some(s) = s.as_mut() {
            e += coef[nk..].iter().map(|v| v * v).sum::<f64>();
            s.push(coef[nk..].to_vec());
        }
        degree_energy.push(e);
    }
    let decay = classify_decay(&degree_energy);
    Ok(EpsilonExpansion {
        lmax,
        nodes: nodes.clone(),
        c,
        f,
        s,
        degree_energy,
        decay,
        separation_residual: sep.sqrt(),
    })
}

fn classify_decay(energy: &[f64]) -> DecayClass {
    let total: f64 = energy.iter().sum();
    let pts: Vec<(f64, f64)> = energy
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, e)| **e > 1e-24 * total)
        .map(|(l, e)| ((l as f64).ln(), e.ln()))
        .collect();
    if pts.is_empty() {
        return DecayClass::Flat;
    }
    if pts.len() == 1 {
        return DecayClass::Algebraic { slope: 0.0 };
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    DecayClass::Algebraic { slope: sxy / sxx }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::expansion::radial_basis;

    #[test]
    fn constant_is_flat() {
        let quad = BallQuadrature::new(1.0, 3, 16).unwrap();
        let nodes = RadialNodes::dirichlet(1.0, 4);
        let e = epsilon_expansion(&quad, &vec![0.7; quad.len()], 3, &nodes, false).unwrap();
        assert_eq!(e.decay, DecayClass::Flat);
        assert!((e.c[0] - 1.0).abs() < 1e-14);
        assert!(e.c[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn single_product_is_recovered() {
        let quad = BallQuadrature::new(1.0, 2, 20).unwrap();
        let nodes = RadialNodes::dirichlet(1.0, 4);
        // j_0(πr) ≥ 0 on the unit ball, so the product is a valid density
        let samples: Vec<f64> = quad
            .points()
            .iter()
            .map(|p| {
                let (js, _) = radial_basis(&nodes, 0, p.r, false).unwrap();
                0.8 * js[0] * real_ylm_all(0, p.theta, p.phi)[0]
            })
            .collect();
        let e = epsilon_expansion(&quad, &samples, 2, &nodes, false).unwrap();
        assert!((e.f[0][0] - 0.8).abs() < 1e-10);
        for n in 1..4 {
            assert!(e.f[0][n].abs() < 1e-10);
        }
        for l in 1..=2 {
            assert!(e.degree_energy[l] < 1e-20);
        }
        assert!(e.separation_residual < 1e-12);
    }

    #[test]
    fn negative_samples_are_rejected() {
        let quad = BallQuadrature::new(1.0, 1, 4).unwrap();
        let mut s = vec![1.0; quad.len()];
        s[7] = -1e-6;
        let err = epsilon_expansion(&quad, &s, 1, &RadialNodes::dirichlet(1.0, 2), false).unwrap_err();
        assert!(matches!(err, Error::NegativeDissipation { index: 7, .. }));
    }
}
