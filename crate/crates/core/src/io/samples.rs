//! Raw point samples on ball quadrature nodes.
//!
//! CSV with header `r,theta,phi,<value columns...>`, one row per node in
//! [`BallQuadrature::points`] order.

use std::path::Path;

use crate::error::{Error, Result};
use crate::harmonics::{BallQuadrature, SphericalPoint};
use crate::io::output::{fmt_f64, write_rows};

pub const SAMPLES_SCHEMA: &str = "samples/1";

#[derive(Debug, Clone, PartialEq)]
pub struct RawSamples {
    pub points: Vec<SphericalPoint>,
    pub names: Vec<String>,
    /// One vector per value column.
    pub values: Vec<Vec<f64>>,
}

impl RawSamples {
    /// Fails unless the rows sit on the nodes of `quad`, in order.
    pub fn check_nodes(&self, quad: &BallQuadrature) -> Result<()> {
        let nodes = quad.points();
        if nodes.len() != self.points.len() {
            return Err(Error::NodeMismatch { expected: nodes.len(), got: self.points.len() });
        }
        let tol = 1e-12 * quad.radius.max(1.0);
        for (i, (a, b)) in nodes.iter().zip(&self.points).enumerate() {
            if (a.r - b.r).abs() > tol || (a.theta - b.theta).abs() > 1e-12 || (a.phi - b.phi).abs() > 1e-12 {
                return Err(Error::InvalidConfig(format!("sample {i} is not on quadrature node {a:?}")));
            }
        }
        Ok(())
    }
}

pub fn parse_samples(text: &str) -> Result<RawSamples> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().map_err(bad)?.iter().map(str::to_string).collect();
    if header.len() < 4 || header[..3] != ["r", "theta", "phi"] {
        return Err(Error::UnrecognizedFormat);
    }
    let mut out = RawSamples { points: Vec::new(), names: header[3..].to_vec(), values: vec![Vec::new(); header.len() - 3] };
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(bad)?;
        let x = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::InvalidConfig(format!("row {}: {e}", row + 1))))
            .collect::<Result<Vec<_>>>()?;
        out.points.push(SphericalPoint { r: x[0], theta: x[1], phi: x[2] });
        for (c, v) in x[3..].iter().enumerate() {
            out.values[c].push(*v);
        }
    }
    Ok(out)
}

pub fn load_samples(path: impl AsRef<Path>) -> Result<RawSamples> {
    parse_samples(&std::fs::read_to_string(path)?)
}

pub fn write_samples(path: &Path, s: &RawSamples) -> Result<()> {
    let mut header = vec!["r", "theta", "phi"];
    header.extend(s.names.iter().map(String::as_str));
    let rows = s.points.iter().enumerate().map(|(i, p)| {
        let mut row = vec![fmt_f64(p.r), fmt_f64(p.theta), fmt_f64(p.phi)];
        row.extend(s.values.iter().map(|v| fmt_f64(v[i])));
        row
    });
    write_rows(path, &header, rows)
}

fn bad(e: csv::Error) -> Error {
    Error::InvalidConfig(format!("samples: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_on_nodes() {
        let quad = BallQuadrature::new(0.7, 2, 3).unwrap();
        let points = quad.points();
        let values = vec![points.iter().map(|p| p.r * p.theta.cos()).collect()];
        let s = RawSamples { points, names: vec!["f".into()], values };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        write_samples(&path, &s).unwrap();
        let back = load_samples(&path).unwrap();
        assert_eq!(back, s);
        back.check_nodes(&quad).unwrap();
        assert!(back.check_nodes(&BallQuadrature::new(0.7, 3, 3).unwrap()).is_err());
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(matches!(parse_samples("x,y,z,f\n1,2,3,4\n"), Err(Error::UnrecognizedFormat)));
    }
}
