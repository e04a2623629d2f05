//! Tensor-product quadrature on a ball.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// A point in spherical coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalPoint {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SphericalPoint {
    pub fn cartesian(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [self.r * st * cp, self.r * st * sp, self.r * ct]
    }
}

/// Gauss–Legendre in `r` on `(r_min, R)` and in `cos θ`, uniform in `φ`.
/// Samples are ordered radius-major, then `θ`, then `φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallQuadrature {
    pub radius: f64,
    pub r_min: f64,
    pub r: Vec<f64>,
    pub r_weights: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_weights: Vec<f64>,
    pub phi: Vec<f64>,
    pub phi_weight: f64,
    lmax: usize,
}

impl BallQuadrature {
    /// Angular rule exact for products of harmonics up to degree `lmax`.
    pub fn new(radius: f64, lmax: usize, n_radial: usize) -> Result<Self> {
        if !(radius > 0.0) || n_radial == 0 {
            return Err(Error::InvalidConfig(format!("ball radius {radius} with {n_radial} radial nodes")));
        }
        let r_min = 1e-6 * radius;
        let (xr, wr) = gauss_legendre(n_radial);
        let half = 0.5 * (radius - r_min);
        let r = xr.iter().map(|x| r_min + half * (x + 1.0)).collect();
        let r_weights = wr.iter().map(|w| w * half).collect();
        let (xt, theta_weights) = gauss_legendre(2 * (lmax + 1));
        let theta = xt.iter().map(|x| x.acos()).collect();
        let n_phi = 4 * (lmax + 1);
        let phi = (0..n_phi).map(|i| 2.0 * PI * i as f64 / n_phi as f64).collect();
        Ok(Self {
            radius,
            r_min,
            r,
            r_weights,
            theta,
            theta_weights,
            phi,
            phi_weight: 2.0 * PI / n_phi as f64,
            lmax,
        })
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn n_angular(&self) -> usize {
        self.theta.len() * self.phi.len()
    }

    pub fn len(&self) -> usize {
        self.r.len() * self.n_angular()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> Vec<SphericalPoint> {
        let mut out = Vec::with_capacity(self.len());
        for &r in &self.r {
            for &theta in &self.theta {
                for &phi in &self.phi {
                    out.push(SphericalPoint { r, theta, phi });
                }
            }
        }
        out
    }

    /// Surface weight of angular node `(it, ip)`.
    pub fn angular_weight(&self, it: usize) -> f64 {
        self.theta_weights[it] * self.phi_weight
    }

    /// Volume weight `r² dr dΩ` of sample `idx`.
    pub fn volume_weight(&self, idx: usize) -> f64 {
        let na = self.n_angular();
        let ir = idx / na;
        let it = (idx % na) / self.phi.len();
        self.r[ir] * self.r[ir] * self.r_weights[ir] * self.angular_weight(it)
    }
}
