//! Flat `key=value` configuration files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dynamics::{InitDescriptor, SimulationConfig};
use crate::error::{Error, Result};
use crate::grid::WaveGrid;

/// Keys understood by simulation runs.
pub const SIMULATION_KEYS: &[&str] =
    &["n", "length", "nu", "dt", "t-final", "scheme", "dealias", "init", "output-every", "seed", "out-dir"];

/// Extra keys understood by ensemble runs.
pub const ENSEMBLE_KEYS: &[&str] = &["count", "perturbation", "amplitude", "checkpoints"];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key=value, got {raw:?}", no + 1)))?;
            let k = k.trim().to_string();
            if entries.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(Error::InvalidConfig(format!("line {}: duplicate key {k:?}", no + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl fmt::Display) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| Error::InvalidConfig(format!("cannot parse {key} = {v:?}"))))
            .transpose()
    }

    pub fn required<T: FromStr>(&self, key: &str) -> Result<T> {
        self.parsed(key)?.ok_or_else(|| Error::InvalidConfig(format!("missing key {key:?}")))
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&[&str]]) -> Result<()> {
        for k in self.entries.keys() {
            if !allowed.iter().any(|set| set.contains(&k.as_str())) {
                return Err(Error::InvalidConfig(format!("unknown key {k:?}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for KeyValues {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// A simulation configuration and its output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub simulation: SimulationConfig,
    pub out_dir: Option<PathBuf>,
}

pub fn simulation_config(kv: &KeyValues) -> Result<RunConfig> {
    let n: usize = kv.required("n")?;
    let length = kv.parsed("length")?.unwrap_or(2.0 * std::f64::consts::PI);
    let grid = WaveGrid::new(n, length)?;
    let init: InitDescriptor = kv.required("init")?;
    let mut cfg = SimulationConfig::new(grid, kv.required("nu")?, kv.required("dt")?, kv.required("t-final")?, init);
    if let Some(s) = kv.parsed("scheme")? {
        cfg.scheme = s;
    }
    if let Some(d) = kv.parsed("dealias")? {
        cfg.dealias = d;
    }
    if let Some(o) = kv.parsed("output-every")? {
        cfg.output_every = o;
    }
    if let Some(s) = kv.parsed("seed")? {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(RunConfig { simulation: cfg, out_dir: kv.get("out-dir").map(PathBuf::from) })
}

/// Inverse of [`simulation_config`].
pub fn to_key_values(cfg: &SimulationConfig, out_dir: Option<&Path>) -> KeyValues {
    let mut kv = KeyValues::default();
    kv.set("n", cfg.grid.n());
    kv.set("length", format!("{:?}", cfg.grid.length()));
    kv.set("nu", format!("{:?}", cfg.nu));
    kv.set("dt", format!("{:?}", cfg.dt));
    kv.set("t-final", format!("{:?}", cfg.t_final));
    kv.set("scheme", cfg.scheme);
    kv.set("dealias", cfg.dealias);
    kv.set("init", &cfg.init);
    kv.set("output-every", cfg.output_every);
    kv.set("seed", cfg.seed);
    if let Some(d) = out_dir {
        kv.set("out-dir", d.display());
    }
    kv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Dealias, Scheme};

    const TEXT: &str = "# Taylor-Green reference\nn = 16\nnu=0.01\ndt=0.001\nt-final=0.1\ninit=taylor-green\nscheme=imex-cn\ndealias=none # no truncation\n";

    #[test]
    fn parses_and_round_trips() {
        let kv = KeyValues::parse(TEXT).unwrap();
        let run = simulation_config(&kv).unwrap();
        assert_eq!(run.simulation.grid.n(), 16);
        assert_eq!(run.simulation.scheme, Scheme::ImexCn);
        assert_eq!(run.simulation.dealias, Dealias::None);
        assert_eq!(run.simulation.init, InitDescriptor::TaylorGreen);
        let again = simulation_config(&KeyValues::parse(&to_key_values(&run.simulation, None).to_string()).unwrap())
            .unwrap();
        assert_eq!(again.simulation, run.simulation);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(KeyValues::parse("n 16").is_err());
        assert!(KeyValues::parse("n=16\nn=32").is_err());
        let kv = KeyValues::parse("n=16\nbogus=1").unwrap();
        assert!(kv.check_keys(&[SIMULATION_KEYS]).is_err());
        assert!(simulation_config(&KeyValues::parse("n=16").unwrap()).is_err());
    }
}
