//! Pseudo-spectral advection term `P((u·∇)u)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::fft;
use crate::field::SpectralVelocityField;
use crate::ops::leray_project;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Advection term together with the largest collocation speed seen.
pub(crate) struct Advection {
    pub term: SpectralVelocityField,
    pub max_speed: f64,
}

/// `(u·∇)u` on the collocation grid, transformed back, optionally
/// truncated by the 2/3 rule. Not projected.
pub(crate) fn advection_raw(u: &SpectralVelocityField, dealias: bool) -> Result<Advection> {
    let g = *u.grid();
    let mut src = u.clone();
    if dealias {
        src.dealias();
    }
    let tab = g.tables();
    // 3 velocity components followed by the 9 derivatives ∂_j u_i, two per transform
    let spectral = |t: usize, i: usize| -> Complex64 {
        if t < 3 {
            src.component(t)[i]
        } else {
            let (c, j) = ((t - 3) / 3, (t - 3) % 3);
            I * tab.kappa[i][j] * src.component(c)[i]
        }
    };
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..6)
        .into_par_iter()
        .map(|p| {
            let packed = (0..g.len()).map(|i| spectral(2 * p, i) + I * spectral(2 * p + 1, i)).collect();
            fft::inverse_packed(&g, packed)
        })
        .collect();
    let tables: Vec<Vec<f64>> = pairs.into_iter().flat_map(|(a, b)| [a, b]).collect();
    let max_speed = (0..g.len())
        .into_par_iter()
        .map(|p| (tables[0][p].powi(2) + tables[1][p].powi(2) + tables[2][p].powi(2)).sqrt())
        .reduce(|| 0.0, f64::max);
    let product = |i: usize, p: usize| -> f64 { (0..3).map(|j| tables[j][p] * tables[3 + 3 * i + j][p]).sum() };
    let (packed, last): (Vec<Complex64>, Vec<Complex64>) = (0..g.len())
        .into_par_iter()
        .map(|p| (Complex64::new(product(0, p), product(1, p)), Complex64::new(product(2, p), 0.0)))
        .unzip();
    let (c0, c1) = fft::forward_packed(&g, packed);
    let c2 = fft::forward(&g, &last)?;
    let comps = vec![c0, c1, c2];
    let mut it = comps.into_iter();
    let mut term = SpectralVelocityField::from_coeffs(
        g,
        u.nu(),
        [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()],
    )?
    .with_time(u.time());
    if dealias {
        term.dealias();
    } else {
        term.clear_nyquist();
    }
    term.symmetrize();
    Ok(Advection { term, max_speed })
}

/// `ω × u` from a 2/3-truncated `u`. Differs from `(u·∇)u` by the gradient
/// `∇|u|²/2`, so both project to the same field.
fn rotational(u: &SpectralVelocityField) -> Result<Advection> {
    let g = *u.grid();
    let mut src = u.clone();
    src.dealias();
    let tab = g.tables();
    let w = |c: usize, i: usize| -> Complex64 {
        let (a, b) = ((c + 1) % 3, (c + 2) % 3);
        let q = tab.kappa[i];
        I * (q[a] * src.component(b)[i] - q[b] * src.component(a)[i])
    };
    let spectral = |t: usize, i: usize| if t < 3 { src.component(t)[i] } else { w(t - 3, i) };
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..3)
        .into_par_iter()
        .map(|p| {
            let packed = (0..g.len()).map(|i| spectral(2 * p, i) + I * spectral(2 * p + 1, i)).collect();
            fft::inverse_packed(&g, packed)
        })
        .collect();
    let t: Vec<Vec<f64>> = pairs.into_iter().flat_map(|(a, b)| [a, b]).collect();
    let max_speed = (0..g.len())
        .into_par_iter()
        .map(|p| (t[0][p].powi(2) + t[1][p].powi(2) + t[2][p].powi(2)).sqrt())
        .reduce(|| 0.0, f64::max);
    let cross = |c: usize, p: usize| {
        let (a, b) = ((c + 1) % 3, (c + 2) % 3);
        t[3 + a][p] * t[b][p] - t[3 + b][p] * t[a][p]
    };
    let (packed, last): (Vec<Complex64>, Vec<Complex64>) = (0..g.len())
        .into_par_iter()
        .map(|p| (Complex64::new(cross(0, p), cross(1, p)), Complex64::new(cross(2, p), 0.0)))
        .unzip();
    let (c0, c1) = fft::forward_packed(&g, packed);
    let c2 = fft::forward(&g, &last)?;
    let mut term = SpectralVelocityField::from_coeffs(g, u.nu(), [c0, c1, c2])?.with_time(u.time());
    term.dealias();
    term.symmetrize();
    Ok(Advection { term, max_speed })
}

pub(crate) fn advection_projected(u: &SpectralVelocityField, dealias: bool) -> Result<Advection> {
    let raw = if dealias { rotational(u)? } else { advection_raw(u, false)? };
    Ok(Advection { term: leray_project(&raw.term), max_speed: raw.max_speed })
}

/// `P((u·∇)u)` with the 2/3 rule applied before and after the product.
pub fn nonlinear_term(u: &SpectralVelocityField) -> Result<SpectralVelocityField> {
    Ok(advection_projected(u, true)?.term)
}

/// Unprojected, dealiased `(u·∇)u`.
pub fn convective_term(u: &SpectralVelocityField) -> Result<SpectralVelocityField> {
    Ok(advection_raw(u, true)?.term)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::WaveGrid;
    use crate::sampling::random_solenoidal;

    #[test]
    fn constant_field_has_no_advection() {
        let g = WaveGrid::periodic(8).unwrap();
        let mut u = SpectralVelocityField::zeros(g, 0.1);
        u.set_mode(0, [Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0), Complex64::default()]);
        assert!(nonlinear_term(&u).unwrap().norm_h() < 1e-14);
    }

    #[test]
    fn shear_flow_self_advection_vanishes() {
        let g = WaveGrid::periodic(16).unwrap();
        let u = SpectralVelocityField::from_fn(g, 0.1, |p| [0.0, p[0].sin(), 0.0]).unwrap();
        assert!(nonlinear_term(&u).unwrap().norm_h() < 1e-13);
    }

    #[test]
    fn taylor_green_advection_is_a_gradient() {
        let g = WaveGrid::periodic(16).unwrap();
        let u = SpectralVelocityField::from_fn(g, 0.1, |p| {
            [p[0].sin() * p[1].cos(), -p[0].cos() * p[1].sin(), 0.0]
        })
        .unwrap();
        let raw = convective_term(&u).unwrap();
        // (u·∇)u = -¼∇(cos 2x + cos 2y) = (½ sin 2x, ½ sin 2y, 0)
        let phys = raw.to_physical().unwrap();
        for idx in 0..g.len() {
            let p = g.point(idx);
            assert!((phys[0][idx] - 0.5 * (2.0 * p[0]).sin()).abs() < 1e-13);
            assert!((phys[1][idx] - 0.5 * (2.0 * p[1]).sin()).abs() < 1e-13);
        }
        assert!(nonlinear_term(&u).unwrap().norm_h() <= 1e-12 * u.norm_h());
    }

    #[test]
    fn output_is_divergence_free_and_energy_neutral() {
        let g = WaveGrid::periodic(16).unwrap();
        let u = random_solenoidal(g, 0.1, 5, 3);
        let n = nonlinear_term(&u).unwrap();
        assert!(n.divergence_residual() < 1e-12);
        let h1 = crate::ops::sobolev_norm(&u, 1.0).unwrap();
        assert!(n.inner(&u).unwrap().abs() <= 1e-12 * h1 * h1);
    }

    #[test]
    fn rotational_form_projects_like_convective_form() {
        let g = WaveGrid::periodic(16).unwrap();
        let u = random_solenoidal(g, 0.1, g.dealias_cutoff(), 5);
        let rot = nonlinear_term(&u).unwrap();
        let conv = leray_project(&convective_term(&u).unwrap());
        let diff = rot.lin_comb(1.0, &conv, -1.0).unwrap().norm_h();
        assert!(diff <= 1e-13 * conv.norm_h(), "{diff}");
    }
}
