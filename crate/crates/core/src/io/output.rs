//! CSV emitters. Floats are written with 17 significant digits; absent
//! values are empty cells.

use std::path::Path;

use crate::blowup::BlowupDiagnostics;
use crate::diagnostics::{DissipationReport, RegularityLedger};
use crate::ensemble::MeanReport;
use crate::error::{Error, Result};
use crate::harmonics::ylm::lm_index;
use crate::harmonics::HarmonicCoefficients;

pub const DISSIPATION_SCHEMA: &str = "dissipation/1";
pub const REGULARITY_SCHEMA: &str = "regularity/1";
pub const BLOWUP_SCHEMA: &str = "blowup/1";
pub const HARMONICS_SCHEMA: &str = "harmonics/1";
pub const ENSEMBLE_SCHEMA: &str = "ensemble-series/1";

pub const DISSIPATION_COLUMNS: &[&str] = &[
    "t", "energy", "enstrophy", "nu_t_nl", "nu_t_temp", "nu_t", "nu_tot", "div_residual", "viscous_rate", "nl_x",
    "nl_y", "nl_z", "temp_x", "temp_y", "temp_z", "sign_violation",
];
pub const REGULARITY_COLUMNS: &[&str] = &["t", "h", "h1", "dudt_hm1", "advection_hm1"];
pub const BLOWUP_COLUMNS: &[&str] = &["t", "delta", "r2", "bkm_partial", "nu_t", "d_est", "flags"];
pub const HARMONICS_COLUMNS: &[&str] = &["k_index", "l", "m", "re_F", "im_F", "re_S", "im_S", "component"];
pub const ENSEMBLE_COLUMNS: &[&str] = &[
    "count", "t", "deviation", "deviation_h1", "mean_nu_t_nl", "mean_nu_t_temp", "nu_t_nl_of_mean",
];

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

pub(crate) fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn dissipation_row(r: &DissipationReport) -> Vec<String> {
    let mut row: Vec<String> =
        [r.t, r.energy, r.enstrophy, r.nu_t_nl, r.nu_t_temp, r.nu_t, r.nu_tot, r.div_residual, r.viscous_rate]
            .into_iter()
            .chain(r.nl_components.0)
            .chain(r.temp_components.0)
            .map(fmt_f64)
            .collect();
    let flag = match r.sign_violations {
        [false, false] => "",
        [true, false] => "nl",
        [false, true] => "temp",
        [true, true] => "nl|temp",
    };
    row.push(flag.to_string());
    row
}

pub fn write_dissipation_csv(path: &Path, reports: &[DissipationReport]) -> Result<()> {
    write_rows(path, DISSIPATION_COLUMNS, reports.iter().map(dissipation_row))
}

pub fn write_regularity_csv(path: &Path, led: &RegularityLedger) -> Result<()> {
    let rows = (0..led.t.len())
        .map(|i| [led.t[i], led.h[i], led.h1[i], led.dudt_hm1[i], led.advection_hm1[i]].map(fmt_f64).to_vec());
    write_rows(path, REGULARITY_COLUMNS, rows)
}

pub fn write_blowup_csv(path: &Path, d: &BlowupDiagnostics) -> Result<()> {
    let rows = d.rows.iter().map(|r| {
        vec![
            fmt_f64(r.t),
            fmt_opt(r.delta),
            fmt_opt(r.r2),
            fmt_f64(r.bkm_partial),
            fmt_f64(r.nu_t),
            fmt_f64(r.d_est),
            r.flags.label(),
        ]
    });
    write_rows(path, BLOWUP_COLUMNS, rows)
}

/// One block of rows per component; `k_index` counts radial nodes from 1.
pub fn write_harmonics_csv(path: &Path, coeffs: &[HarmonicCoefficients]) -> Result<()> {
    let mut rows = Vec::new();
    for (c, hc) in coeffs.iter().enumerate() {
        for n in 0..hc.nodes.len() {
            for l in 0..=hc.lmax {
                for m in -(l as i64)..=l as i64 {
                    let f = hc.f[n][lm_index(l, m)];
                    let s = hc.s.as_ref().map(|s| s[n][lm_index(l, m)]);
                    rows.push(vec![
                        (n + 1).to_string(),
                        l.to_string(),
                        m.to_string(),
                        fmt_f64(f.re),
                        fmt_f64(f.im),
                        fmt_opt(s.map(|z| z.re)),
                        fmt_opt(s.map(|z| z.im)),
                        c.to_string(),
                    ]);
                }
            }
        }
    }
    write_rows(path, HARMONICS_COLUMNS, rows)
}

pub fn write_ensemble_csv(path: &Path, r: &MeanReport) -> Result<()> {
    let mut rows = Vec::new();
    for c in &r.checkpoints {
        for i in 0..c.t.len() {
            let mut row = vec![c.count.to_string()];
            row.extend(
                [c.t[i], c.deviation[i], c.deviation_h1[i], c.mean_nu_t_nl[i], c.mean_nu_t_temp[i], c.nu_t_nl_of_mean[i]]
                    .map(fmt_f64),
            );
            rows.push(row);
        }
    }
    write_rows(path, ENSEMBLE_COLUMNS, rows)
}
