use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ns_lab::harmonics::BallQuadrature;
use ns_lab::io::samples::{write_samples, RawSamples};
use ns_lab::io::RunManifest;

fn ns_lab(args: &[&str], threads: Option<&str>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ns-lab"));
    c.args(args);
    match threads {
        Some(t) => c.env("NS_LAB_THREADS", t),
        None => c.env_remove("NS_LAB_THREADS"),
    };
    c.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn p(x: &Path) -> &str {
    x.to_str().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn read_column(path: &Path, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let i = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[i].parse().unwrap()).collect()
}

const TAYLOR_GREEN: &str = "n = 32\nnu = 0.01\ndt = 1e-3\nt-final = 0.2\ninit = taylor-green\noutput-every = 20\n";

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = ns_lab(&["verify", "--out-dir", p(dir.path())], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(dir.path().join("verify-manifest.json").exists());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&ns_lab(&["simulate"], None)), 2);
    assert_eq!(code(&ns_lab(&["frobnicate"], None)), 2);
    assert_eq!(code(&ns_lab(&["verify", "--bogus"], None)), 2);
    assert_eq!(code(&ns_lab(&["verify"], Some("many"))), 2);
}

#[test]
fn numerical_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cfl.cfg", "n = 16\nnu = 0.01\ndt = 1\nt-final = 10\ninit = taylor-green\n");
    let o = ns_lab(&["simulate", "--config", p(&cfg), "--out-dir", p(&dir.path().join("run"))], None);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("CFL"));
}

#[test]
fn taylor_green_analysis_matches_exact_decay() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tg.cfg", TAYLOR_GREEN);
    let run = dir.path().join("run");
    assert_eq!(code(&ns_lab(&["simulate", "--config", p(&cfg), "--out-dir", p(&run)], None)), 0);
    let report = dir.path().join("out/dissipation.csv");
    let ledger = dir.path().join("out/regularity.csv");
    let o = ns_lab(&["analyze", "--traj", p(&run), "--report", p(&report), "--ledger", p(&ledger)], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = read_column(&report, "t");
    let e = read_column(&report, "energy");
    assert_eq!(t.len(), 11);
    for (t, v) in t.iter().zip(&e) {
        assert!((v - e[0] * (-4.0 * 0.01 * t).exp()).abs() <= 1e-6 * e[0], "t = {t}");
    }
    assert_eq!(std::fs::read(&report).unwrap(), std::fs::read(run.join("dissipation.csv")).unwrap());
    let m = RunManifest::load(&dir.path().join("out/analyze-manifest.json")).unwrap();
    assert_eq!(m.files.len(), 2);
}

#[test]
fn manifest_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "r.cfg", "n = 16\nnu = 0.05\ndt = 2e-3\nt-final = 0.02\ninit = random-band(1,3,-1)\nseed = 7\noutput-every = 5\n");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(code(&ns_lab(&["simulate", "--config", p(&cfg), "--out-dir", p(&a)], None)), 0);
    let manifest = a.join("manifest.json");
    assert_eq!(code(&ns_lab(&["simulate", "--config", p(&manifest), "--out-dir", p(&b)], Some("3"))), 0);
    let ma = RunManifest::load(&manifest).unwrap();
    let mb = RunManifest::load(&b.join("manifest.json")).unwrap();
    assert_eq!(ma.files, mb.files);
    assert_eq!(ma.inventory_hash, mb.inventory_hash);
    assert!(ma.files.iter().filter(|f| f.path.ends_with(".nssf")).count() == 3);
}

#[test]
fn ensemble_output_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e.cfg", "n = 8\nnu = 0.05\ndt = 1e-2\nt-final = 0.05\ninit = random-band(1,2,0)\n");
    let mut hashes = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("ens{threads}"));
        let args = ["ensemble", "--config", p(&cfg), "--count", "6", "--perturbation", "random-phase", "--checkpoints", "2,4", "--out", p(&out)];
        let o = ns_lab(&args, Some(threads));
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        hashes.push(RunManifest::load(&out.join("manifest.json")).unwrap().inventory_hash);
    }
    assert_eq!(hashes[0], hashes[1]);
}

#[test]
fn blowup_reports_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "b.cfg", "n = 16\nnu = 0.05\ndt = 5e-3\nt-final = 0.1\ninit = random-band(1,4,-2)\nseed = 3\noutput-every = 2\n");
    let run = dir.path().join("run");
    assert_eq!(code(&ns_lab(&["simulate", "--config", p(&cfg), "--out-dir", p(&run)], None)), 0);
    let out = dir.path().join("blowup.csv");
    let o = ns_lab(&["blowup", "--traj", p(&run), "--out", p(&out)], None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("blowup.json")).unwrap()).unwrap();
    for key in ["nu_t_floor", "d_min", "t_star"] {
        assert!(summary.get(key).is_some(), "{key}");
    }
    assert_eq!(read_column(&out, "t").len(), 11);
}

#[test]
fn harmonics_expand_accepts_raw_samples() {
    let dir = tempfile::tempdir().unwrap();
    let quad = BallQuadrature::new(1.0, 2, 6).unwrap();
    let points = quad.points();
    let values = vec![points.iter().map(|q| q.r * q.theta.cos()).collect()];
    let samples = dir.path().join("s.csv");
    write_samples(&samples, &RawSamples { points, names: vec!["f".into()], values }).unwrap();
    let out = dir.path().join("c.csv");
    let args = ["harmonics", "expand", "--in", p(&samples), "--lmax", "2", "--n-radial", "6", "--n-k", "3", "--radius", "1", "--out", p(&out)];
    let o = ns_lab(&args, None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let l = read_column(&out, "l");
    let re = read_column(&out, "re_F");
    let energy = |f: &dyn Fn(f64) -> bool| l.iter().zip(&re).filter(|(l, _)| f(**l)).map(|(_, v)| v * v).sum::<f64>();
    assert!(energy(&|l| l != 1.0) <= 1e-20 * energy(&|l| l == 1.0));
    let no_radius = ["harmonics", "expand", "--in", p(&samples), "--lmax", "2", "--out", p(&out)];
    assert_eq!(code(&ns_lab(&no_radius, None)), 2);
}
