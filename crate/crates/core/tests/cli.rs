use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use rustfft::num_complex::Complex64;

use bfamily::scenario::diagnostics::parse_diagnostics_csv;
use bfamily::scenario::{write_snapshot, Snapshot};
use bfamily::spectral::{GridSpec, SpectralField};

fn bfamily(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bfamily"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    let out_dir = dir.join("out");
    std::fs::write(&path, format!("output_dir = {:?}\n{body}", out_dir.to_str().unwrap())).unwrap();
    path.to_str().unwrap().to_owned()
}

const SMALL_CH: &str = r#"
b = 2.0

[grid]
n_points = 256
box_length = 80.0

[evolve]
t_final = 1.0
sample_interval = 0.25
require_sign_certificate = true

[init]
family = "momentum_bump"
amplitude = 0.2
width = 2.0
"#;

#[test]
fn run_writes_a_complete_directory() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_CH);
    let out = bfamily(&["run", "--config", &config]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("run completed"));

    let run = dir.path().join("out");
    for file in [
        "config.toml",
        "diagnostics.csv",
        "diagnostics.sigma_hat.dat",
        "diagnostics.km_sigma_bound.dat",
        "gevrey.csv",
        "initial.bgev",
        "final.bgev",
        "manifest.toml",
    ] {
        assert!(run.join(file).is_file(), "missing {file}");
    }
    let rows = parse_diagnostics_csv(&std::fs::read_to_string(run.join("diagnostics.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows.windows(2).all(|w| w[1].t > w[0].t));
    assert_eq!(rows.last().unwrap().t, 1.0);
    let manifest = std::fs::read_to_string(run.join("manifest.toml")).unwrap();
    assert!(manifest.contains("status = \"completed\""));
    assert!(manifest.contains("exit_code = 0"));
}

#[test]
fn radius_of_planted_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let g = GridSpec::new(128, 2.0 * PI).unwrap();
    let field = SpectralField::from_modes(g, move |k| Complex64::new((-0.5 * g.xi(k).abs()).exp(), 0.0)).to_real();
    let path = dir.path().join("planted.bgev");
    write_snapshot(&path, &Snapshot::new(0.0, 2.0, field)).unwrap();

    let out = bfamily(&["radius", "--snapshot", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let sigma: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("sigma_hat   = "))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!((sigma - 0.5).abs() < 1e-6, "{text}");
}

#[test]
fn norms_report() {
    let dir = tempfile::tempdir().unwrap();
    let g = GridSpec::new(64, 2.0 * PI).unwrap();
    let field = bfamily::spectral::RealField::from_fn(g, f64::sin).unwrap();
    let path = dir.path().join("sine.bgev");
    write_snapshot(&path, &Snapshot::new(0.5, -1.0, field)).unwrap();
    let out = bfamily(&["norms", "--snapshot", path.to_str().unwrap(), "--sigma", "1", "--s", "2", "--m", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("L2"));
    assert!(text.contains("Gevrey"));
    assert!(text.contains("HM(m=2)"));
}

#[test]
fn taylor_and_bound_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_CH);
    let out = bfamily(&["taylor", "--config", &config, "--order", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("k,l2_norm\n"));
    assert_eq!(text.lines().filter(|l| l.contains(',')).count(), 12);
    assert!(text.contains("time radius estimate"));

    let out = bfamily(&["bound", "--config", &config]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("t,sigma_bound,radius_bound,sigma_hat"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    assert_eq!(bfamily(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(bfamily(&["--help"]).status.code(), Some(0));

    let low_s = write_config(
        dir.path(),
        "b = 2.0\n[init]\nfamily = \"sech\"\n[diagnostics]\nsigma_list = [0.5]\ns = 1.0\n",
    );
    let out = bfamily(&["run", "--config", &low_s]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("s > 3/2"));

    let missing = dir.path().join("nope.toml");
    assert_eq!(bfamily(&["run", "--config", missing.to_str().unwrap()]).status.code(), Some(3));

    let corrupt = dir.path().join("bad.bgev");
    std::fs::write(&corrupt, b"BGEV\x01\x00\x00\x00garbage").unwrap();
    assert_eq!(bfamily(&["radius", "--snapshot", corrupt.to_str().unwrap()]).status.code(), Some(3));

    // a sign-changing datum with the certificate requested is a configuration error
    let uncertified = write_config(
        dir.path(),
        "b = 2.0\n[evolve]\nrequire_sign_certificate = true\n[init]\nfamily = \"sine\"\n",
    );
    assert_eq!(bfamily(&["run", "--config", &uncertified]).status.code(), Some(1));

    // a single harmonic leaves no modes at k >= 4 for the radius fit
    let g = GridSpec::new(64, 2.0 * PI).unwrap();
    let flat = bfamily::spectral::RealField::from_fn(g, |x| x.cos()).unwrap();
    let path = dir.path().join("flat.bgev");
    write_snapshot(&path, &Snapshot::new(0.0, 2.0, flat)).unwrap();
    assert_eq!(bfamily(&["radius", "--snapshot", path.to_str().unwrap()]).status.code(), Some(2));
}
