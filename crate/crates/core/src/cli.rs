use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ns_lab::blowup::monitor;
use ns_lab::diagnostics::{dissipation_report, energy_identity_residual, regularity_ledger, DissipationReport};
use ns_lab::dynamics::{simulate_with, Dealias, TrajectorySample};
use ns_lab::ensemble::{run_ensemble, EnsembleSpec, Perturbation};
use ns_lab::harmonics::{
    classify::sample_on_ball, classify_coefficients, expand_real, BallQuadrature, ExpansionOptions, HarmonicCoefficients,
    RadialNodes, CLASSIFIER_TOLERANCE,
};
use ns_lab::io::config::{ENSEMBLE_KEYS, SIMULATION_KEYS};
use ns_lab::io::output::{
    write_blowup_csv, write_dissipation_csv, write_ensemble_csv, write_harmonics_csv, write_regularity_csv,
    BLOWUP_SCHEMA, DISSIPATION_SCHEMA, ENSEMBLE_SCHEMA, HARMONICS_SCHEMA, REGULARITY_SCHEMA,
};
use ns_lab::io::{load_field, load_samples, save_field, simulation_config, to_key_values, KeyValues, RunManifest};
use ns_lab::io::{MANIFEST_FILE, nssf::MAGIC};
use ns_lab::verify::fast_suite;
use ns_lab::Error;

pub const THREADS_ENV: &str = "NS_LAB_THREADS";
const SNAPSHOT_DIR: &str = "snapshots";
const CONFIG_ECHO: &str = "config.txt";

#[derive(Debug, Parser)]
#[command(name = "ns-lab", version, about = "Pseudo-spectral Navier-Stokes laboratory on the periodic cube")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a configured run, writing snapshots and dissipation diagnostics.
    Simulate(SimulateArgs),
    /// Recompute dissipation and regularity diagnostics from stored snapshots.
    Analyze(AnalyzeArgs),
    /// Spherical-harmonic expansion on a ball.
    #[command(subcommand)]
    Harmonics(HarmonicsCommand),
    /// Analyticity-strip and decay-law monitoring of a trajectory.
    Blowup(BlowupArgs),
    /// Ensemble mean against the heat flow of the mean initial data.
    Ensemble(EnsembleArgs),
    /// Run the built-in invariant suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// key=value config, or a manifest.json from an earlier run.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Directory written by `simulate`.
    #[arg(long)]
    traj: PathBuf,
    /// Dissipation CSV [default: <traj>/analysis/dissipation.csv]
    #[arg(long)]
    report: Option<PathBuf>,
    /// Regularity CSV [default: <traj>/analysis/regularity.csv]
    #[arg(long)]
    ledger: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum HarmonicsCommand {
    /// Write expansion coefficients of each component as CSV.
    Expand(ExpandArgs),
    /// Label initial data as smooth, turbulent or strictly turbulent.
    Classify(ExpandArgs),
}

#[derive(Debug, Args)]
struct ExpandArgs {
    /// NSSF1 snapshot or raw samples CSV (r,theta,phi,values...).
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    lmax: usize,
    /// Coefficient CSV for `expand`, classification JSON for `classify`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 12)]
    n_radial: usize,
    #[arg(long, default_value_t = 4)]
    n_k: usize,
    /// Fit the irregular radial branch as well.
    #[arg(long)]
    singular: bool,
    /// Ball radius; defaults to half the box for snapshots, required for raw samples.
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(Debug, Args)]
struct BlowupArgs {
    #[arg(long)]
    traj: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Summary JSON [default: <out> with extension .json]
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Also track the dipole mode of the nonlinear transfer density.
    #[arg(long)]
    harmonic_mode: bool,
}

#[derive(Debug, Args)]
struct EnsembleArgs {
    /// Simulation keys, optionally with count, perturbation, amplitude, checkpoints.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    count: Option<usize>,
    /// random-phase, sign-flip or band-noise(<amp>)
    #[arg(long)]
    perturbation: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated member counts at which the mean is reported.
    #[arg(long, value_delimiter = ',')]
    checkpoints: Vec<usize>,
    #[arg(long)]
    amplitude: Option<f64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Directory for verify.json and the manifest.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Run(Error),
    Checks(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(Error::Io(e))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Run(e) => write!(f, "{e}"),
            Failure::Checks(n) => write!(f, "{n} verification check(s) failed"),
        }
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            _ => 1,
        }
    }
}

type Outcome = Result<(), Failure>;

pub fn run(argv: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Err(f) = configure_threads() {
        eprintln!("error: {f}");
        return f.exit_code();
    }
    let r = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => analyze(a),
        Command::Harmonics(HarmonicsCommand::Expand(a)) => harmonics(a, false),
        Command::Harmonics(HarmonicsCommand::Classify(a)) => harmonics(a, true),
        Command::Blowup(a) => blowup(a),
        Command::Ensemble(a) => ensemble(a),
        Command::Verify(a) => verify(a),
    };
    match r {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}

fn configure_threads() -> Outcome {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| Failure::Usage(format!("{THREADS_ENV}={v:?} is not a thread count")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Run(Error::InvalidConfig(e.to_string())))?;
    }
    Ok(())
}

fn load_config(path: &Path) -> Result<KeyValues, Failure> {
    if path.extension().is_some_and(|e| e == "json") {
        let m = RunManifest::load(path)?;
        let mut kv = KeyValues::default();
        for (k, v) in &m.config {
            kv.set(k, v);
        }
        Ok(kv)
    } else {
        Ok(KeyValues::load(path)?)
    }
}

/// Path of `file` relative to `root` when it lies below it.
fn relative(root: &Path, file: &Path) -> String {
    let (Ok(r), Ok(f)) = (root.canonicalize(), file.canonicalize()) else { return file.display().to_string() };
    f.strip_prefix(&r).map(|p| p.display().to_string()).unwrap_or_else(|_| f.display().to_string())
}

fn add(m: &mut RunManifest, root: &Path, file: &Path, schema: Option<&str>) -> Outcome {
    m.add_file(root, &relative(root, file), schema)?;
    Ok(())
}

fn parent_dir(p: &Path) -> PathBuf {
    match p.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn create_parent(p: &Path) -> Outcome {
    std::fs::create_dir_all(parent_dir(p))?;
    Ok(())
}

fn write_json(path: &Path, v: &impl serde::Serialize) -> Outcome {
    let text = serde_json::to_string_pretty(v).map_err(std::io::Error::other)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn finish(mut m: RunManifest, dir: &Path, name: &str, start: Instant, steps: u64) -> Outcome {
    m.timings.wall_seconds = start.elapsed().as_secs_f64();
    m.timings.steps = steps;
    m.timings.seconds_per_step = (steps > 0).then(|| m.timings.wall_seconds / steps as f64);
    m.finalize();
    write_json(&dir.join(name), &m)
}

fn snapshot_name(step: usize) -> String {
    format!("u_{step:06}.nssf")
}

fn simulate(a: SimulateArgs) -> Outcome {
    let start = Instant::now();
    let mut kv = load_config(&a.config)?;
    kv.check_keys(&[SIMULATION_KEYS])?;
    let rc = simulation_config(&kv)?;
    let out = a
        .out_dir
        .or(rc.out_dir.clone())
        .ok_or_else(|| Failure::Usage("no output directory: pass --out-dir or set out-dir".into()))?;
    let cfg = rc.simulation;
    std::fs::create_dir_all(out.join(SNAPSHOT_DIR))?;
    let mut reports = Vec::new();
    let mut snaps = Vec::new();
    simulate_with(&cfg, |s, r| {
        let name = format!("{SNAPSHOT_DIR}/{}", snapshot_name((s.t / cfg.dt).round() as usize));
        save_field(&s.u, out.join(&name))?;
        snaps.push(name);
        reports.push(r.clone());
        Ok(())
    })?;
    write_dissipation_csv(&out.join("dissipation.csv"), &reports)?;
    let echo = to_key_values(&cfg, None);
    std::fs::write(out.join(CONFIG_ECHO), echo.to_string())?;
    kv = echo;
    let mut m = RunManifest::new("simulate", kv.entries().clone(), vec![cfg.seed]);
    for s in &snaps {
        m.add_file(&out, s, Some("nssf1"))?;
    }
    m.add_file(&out, "dissipation.csv", Some(DISSIPATION_SCHEMA))?;
    m.add_file(&out, CONFIG_ECHO, None)?;
    m.summary = dissipation_summary(&reports);
    finish(m, &out, MANIFEST_FILE, start, cfg.steps() as u64)
}

fn dissipation_summary(reports: &[DissipationReport]) -> serde_json::Value {
    let last = reports.last();
    json!({
        "samples": reports.len(),
        "final_t": last.map(|r| r.t),
        "final_energy": last.map(|r| r.energy),
        "max_div_residual": reports.iter().map(|r| r.div_residual).fold(0.0, f64::max),
        "sign_violations": reports.iter().filter(|r| r.sign_violations.iter().any(|v| *v)).count(),
    })
}

struct Trajectory {
    config: KeyValues,
    samples: Vec<TrajectorySample>,
}

fn load_trajectory(dir: &Path) -> Result<Trajectory, Failure> {
    let config = KeyValues::load(dir.join(CONFIG_ECHO))?;
    let dealias: Dealias = config.parsed("dealias")?.unwrap_or(Dealias::TwoThirds);
    let mut names: Vec<PathBuf> = std::fs::read_dir(dir.join(SNAPSHOT_DIR))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    names.retain(|p| p.extension().is_some_and(|e| e == "nssf"));
    names.sort();
    let samples = names
        .iter()
        .map(|p| {
            let u = load_field(p)?;
            let t = u.time().ok_or_else(|| Error::InvalidConfig(format!("{} has no time stamp", p.display())))?;
            TrajectorySample::new(t, u).with_rhs(dealias)
        })
        .collect::<Result<Vec<_>, _>>()?;
    if samples.is_empty() {
        return Err(Failure::Run(Error::TrajectoryTooShort { found: 0, needed: 1 }));
    }
    Ok(Trajectory { config, samples })
}

fn analyze(a: AnalyzeArgs) -> Outcome {
    let start = Instant::now();
    let traj = load_trajectory(&a.traj)?;
    let report = a.report.unwrap_or_else(|| a.traj.join("analysis/dissipation.csv"));
    let ledger_path = a.ledger.unwrap_or_else(|| a.traj.join("analysis/regularity.csv"));
    create_parent(&report)?;
    create_parent(&ledger_path)?;
    let reports = traj.samples.iter().map(dissipation_report).collect::<Result<Vec<_>, _>>()?;
    let ledger = regularity_ledger(&traj.samples)?;
    write_dissipation_csv(&report, &reports)?;
    write_regularity_csv(&ledger_path, &ledger)?;
    let identity = if traj.samples.len() >= 3 { Some(energy_identity_residual(&traj.samples)?) } else { None };
    let dir = parent_dir(&report);
    let seeds = traj.config.parsed("seed")?.into_iter().collect();
    let mut m = RunManifest::new("analyze", traj.config.entries().clone(), seeds);
    add(&mut m, &dir, &report, Some(DISSIPATION_SCHEMA))?;
    add(&mut m, &dir, &ledger_path, Some(REGULARITY_SCHEMA))?;
    let mut summary = dissipation_summary(&reports);
    summary["energy_identity_pairing"] = json!(identity.as_ref().map(|i| i.max_pairing()));
    summary["energy_identity_discrete"] = json!(identity.as_ref().map(|i| i.max_discrete()));
    summary["linf_h"] = json!(ledger.linf_h);
    summary["l2_h1"] = json!(ledger.l2_h1);
    summary["l43_dudt"] = json!(ledger.l43_dudt);
    summary["l43_advection"] = json!(ledger.l43_advection);
    m.summary = summary;
    finish(m, &dir, "analyze-manifest.json", start, 0)
}

fn harmonics(a: ExpandArgs, classify: bool) -> Outcome {
    let start = Instant::now();
    let is_snapshot = std::fs::read(&a.input)?.starts_with(&MAGIC[..4]);
    let (columns, radius) = if is_snapshot {
        let u = load_field(&a.input)?;
        let radius = a.radius.unwrap_or(0.5 * u.grid().length());
        let quad = BallQuadrature::new(radius, a.lmax, a.n_radial)?;
        (sample_on_ball(&u, &quad).to_vec(), radius)
    } else {
        let s = load_samples(&a.input)?;
        let radius = a.radius.ok_or_else(|| Failure::Usage("raw samples need --radius".into()))?;
        s.check_nodes(&BallQuadrature::new(radius, a.lmax, a.n_radial)?)?;
        (s.values, radius)
    };
    let quad = BallQuadrature::new(radius, a.lmax, a.n_radial)?;
    let opts = ExpansionOptions { lmax: a.lmax, nodes: RadialNodes::dirichlet(radius, a.n_k), singular: a.singular };
    let coeffs = columns.iter().map(|c| expand_real(&quad, c, &opts)).collect::<Result<Vec<HarmonicCoefficients>, _>>()?;
    let class = classify_coefficients(&coeffs, CLASSIFIER_TOLERANCE)?;
    create_parent(&a.out)?;
    if classify {
        write_json(&a.out, &class)?;
    } else {
        write_harmonics_csv(&a.out, &coeffs)?;
    }
    let mut config = BTreeMap::new();
    config.insert("in".into(), a.input.display().to_string());
    config.insert("lmax".into(), a.lmax.to_string());
    config.insert("n-radial".into(), a.n_radial.to_string());
    config.insert("n-k".into(), a.n_k.to_string());
    config.insert("singular".into(), a.singular.to_string());
    config.insert("radius".into(), format!("{radius:?}"));
    let dir = parent_dir(&a.out);
    let mut m = RunManifest::new(if classify { "harmonics classify" } else { "harmonics expand" }, config, Vec::new());
    add(&mut m, &dir, &a.out, if classify { Some("classification/1") } else { Some(HARMONICS_SCHEMA) })?;
    m.summary = json!({
        "label": class.label.to_string(),
        "margin": class.margin,
        "tolerance": class.tolerance,
        "conjugation_defect": coeffs.iter().map(HarmonicCoefficients::conjugation_defect).fold(0.0, f64::max),
    });
    println!("{} (margin {:.3e})", class.label, class.margin);
    finish(m, &dir, "harmonics-manifest.json", start, 0)
}

fn blowup(a: BlowupArgs) -> Outcome {
    let start = Instant::now();
    let traj = load_trajectory(&a.traj)?;
    let reports = traj.samples.iter().map(dissipation_report).collect::<Result<Vec<_>, _>>()?;
    let d = monitor(&traj.samples, &reports, a.harmonic_mode)?;
    create_parent(&a.out)?;
    write_blowup_csv(&a.out, &d)?;
    let summary_path = a.summary.unwrap_or_else(|| a.out.with_extension("json"));
    create_parent(&summary_path)?;
    let summary = json!({
        "schema": "blowup-summary/1",
        "nu_t_floor": d.nu_t_floor,
        "d_min": d.d_min,
        "t_star": d.t_star,
        "t_star_extrapolated": d.t_star_extrapolated,
        "bkm_integral": d.bkm_integral,
        "flagged_times": d.flagged_times(),
        "l1_mode": d.l1_mode,
    });
    write_json(&summary_path, &summary)?;
    let dir = parent_dir(&a.out);
    let seeds = traj.config.parsed("seed")?.into_iter().collect();
    let mut m = RunManifest::new("blowup", traj.config.entries().clone(), seeds);
    add(&mut m, &dir, &a.out, Some(BLOWUP_SCHEMA))?;
    add(&mut m, &dir, &summary_path, Some("blowup-summary/1"))?;
    m.summary = summary;
    finish(m, &dir, "blowup-manifest.json", start, 0)
}

fn ensemble(a: EnsembleArgs) -> Outcome {
    let start = Instant::now();
    let mut kv = load_config(&a.config)?;
    kv.check_keys(&[SIMULATION_KEYS, ENSEMBLE_KEYS])?;
    if let Some(c) = a.count {
        kv.set("count", c);
    }
    if let Some(p) = &a.perturbation {
        kv.set("perturbation", p);
    }
    if let Some(x) = a.amplitude {
        kv.set("amplitude", format!("{x:?}"));
    }
    if !a.checkpoints.is_empty() {
        kv.set("checkpoints", a.checkpoints.iter().map(usize::to_string).collect::<Vec<_>>().join(","));
    }
    let cfg = simulation_config(&kv)?.simulation;
    let count = kv.parsed("count")?.ok_or_else(|| Failure::Usage("no member count: pass --count".into()))?;
    let pert: Perturbation =
        kv.parsed("perturbation")?.ok_or_else(|| Failure::Usage("no perturbation: pass --perturbation".into()))?;
    let mut spec = EnsembleSpec::new(cfg, count, pert);
    if let Some(x) = kv.parsed("amplitude")? {
        spec.amplitude = x;
    }
    if let Some(c) = kv.get("checkpoints") {
        spec.checkpoints = c
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| Error::InvalidConfig(format!("bad checkpoint {s:?}"))))
            .collect::<Result<_, _>>()?;
    }
    let report = run_ensemble(&spec)?;
    std::fs::create_dir_all(&a.out)?;
    write_json(&a.out.join("mean-report.json"), &report)?;
    write_ensemble_csv(&a.out.join("ensemble.csv"), &report)?;
    let mut m = RunManifest::new("ensemble", kv.entries().clone(), vec![spec.seed]);
    m.add_file(&a.out, "mean-report.json", Some("mean-report/1"))?;
    m.add_file(&a.out, "ensemble.csv", Some(ENSEMBLE_SCHEMA))?;
    m.summary = json!({
        "count": count,
        "deviation_exponent": report.deviation_exponent(),
        "nu_t_nl_slope": report.nu_t_nl_fit.as_ref().map(|f| f.slope),
    });
    let steps = (count * spec.config.steps()) as u64;
    finish(m, &a.out, MANIFEST_FILE, start, steps)
}

fn verify(a: VerifyArgs) -> Outcome {
    let start = Instant::now();
    let results = fast_suite();
    for r in &results {
        println!("{} {:<22} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    std::fs::create_dir_all(&a.out_dir)?;
    write_json(&a.out_dir.join("verify.json"), &results)?;
    let mut m = RunManifest::new("verify", BTreeMap::new(), Vec::new());
    m.add_file(&a.out_dir, "verify.json", Some("verify/1"))?;
    m.summary = json!({ "checks": results.len(), "failed": failed });
    finish(m, &a.out_dir, "verify-manifest.json", start, 0)?;
    if failed > 0 { Err(Failure::Checks(failed)) } else { Ok(()) }
}
