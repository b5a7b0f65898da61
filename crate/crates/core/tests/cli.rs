use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_pa-superres");

const CONFIG: &str = r#"
[grid]
n = 1024
dt = 2.0e-9

[law]
alpha0_db_cm_mhz_y = 0.4942081816217317
exponent_y = 1.543241168958696
c0_m_s = 1540.0
f_ref_hz = 1.0e6
dispersion = "on"

[experiment]
r_list = [0.001, 0.003]
snr = 100.0
seed = 11

[phantom]
kind = "single-delta"
positions = [1.024e-6]
amplitudes = [1.0]

[dr]
lambda_factor = 0.05
iterations = [5, 30]

[benchmark]
separation_factors = [0.5, 1.0, 2.0, 4.0]

[output]
dir = "results"
"#;

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn setup() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, CONFIG).unwrap();
    (dir, cfg)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn error_line(o: &Output) -> serde_json::Value {
    let text = stderr(o);
    let last = text.lines().last().expect("no stderr");
    serde_json::from_str(last).unwrap_or_else(|_| panic!("not JSON: {last}"))
}

#[test]
fn cutoff_from_flags() {
    let o = run(&["cutoff", "--alpha-db", "0.5", "--y", "1.5", "--c0", "1540", "--r", "0.02", "--snr", "100"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    for key in ["omega_cut=", "f_cut=", "delta_space=", "delta_time=", "c_at_cut=", "snr_used=", "r="] {
        assert!(out.contains(key), "{key} missing in {out}");
    }
}

#[test]
fn cutoff_json_and_files() {
    let (dir, cfg) = setup();
    let out = dir.path().join("o");
    let o = run(&["cutoff", "--config", s(&cfg), "--json", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 2);
    assert!(arr[0]["f_cut"].as_f64().unwrap() > arr[1]["f_cut"].as_f64().unwrap());
    assert!(out.join("cutoff.txt").exists() && out.join("cutoff.json").exists());
}

#[test]
fn verbose_prints_conversion_formula() {
    let o = run(&["--verbose", "cutoff", "--alpha-db", "0.5", "--y", "1.5", "--c0", "1540", "--r", "0.02", "--snr", "100"]);
    assert!(o.status.success());
    let err = stderr(&o);
    assert!(err.contains("ln(10)/20") && err.contains("2*pi*1e6"), "{err}");
    let quiet = run(&["cutoff", "--alpha-db", "0.5", "--y", "1.5", "--c0", "1540", "--r", "0.02", "--snr", "100"]);
    assert!(!stderr(&quiet).contains("ln(10)"));
}

#[test]
fn simulate_reconstruct_plot_pipeline() {
    let (dir, cfg) = setup();
    let out = dir.path().join("sim");
    let o = run(&["simulate", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["phantom.csv", "measurement_0.csv", "measurement_1.csv", "simulate.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("simulate.json")).unwrap()).unwrap();
    assert_eq!(manifest["measurements"].as_array().unwrap().len(), 2);
    let first = fs::read_to_string(out.join("measurement_1.csv")).unwrap();
    assert!(first.starts_with("t,p\n"));

    let input = out.join("measurement_1.csv");
    for method in ["tsvd", "dr"] {
        let rec = dir.path().join(method);
        let o = run(&["reconstruct", "--config", s(&cfg), "--input", s(&input), "--method", method, "--iters", "25", "--out", s(&rec)]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(fs::read_to_string(rec.join("reconstruction.csv")).unwrap().starts_with("t,p\n"));
        let diag = fs::read_to_string(rec.join("diagnostics.csv")).unwrap();
        assert!(diag.starts_with("iter,residual,objective,fp_residual\n"));
        if method == "dr" {
            assert_eq!(diag.lines().count(), 26);
        }
    }

    let plots = dir.path().join("plots");
    let o = run(&["plotdata", "--config", s(&cfg), "--out", s(&plots)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["fig_tsvd.csv", "fig_tsvd.svg", "fig_dr.csv", "fig_dr.svg"] {
        assert!(plots.join(f).exists(), "{f}");
    }
    let header = fs::read_to_string(plots.join("fig_dr.csv")).unwrap();
    assert_eq!(header.lines().next().unwrap(), "t,phantom,tsvd,dr5,dr30");

    let custom = dir.path().join("custom");
    let sig = format!("meas={}", s(&input));
    let o = run(&["plotdata", "--out", s(&custom), "--signal", &sig]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(custom.join("plot.csv").exists() && custom.join("plot.svg").exists());
}

#[test]
fn benchmark_files_are_byte_identical_across_runs() {
    let (dir, cfg) = setup();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let o = run(&["benchmark", "--config", s(&cfg), "--out", s(d), "--repeats", "2"]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).contains("tsvd: smallest resolved separation"));
    }
    for f in ["benchmark.csv", "benchmark.json", "benchmark_r0.csv", "benchmark_r0.json", "benchmark_r1.csv", "benchmark_r1.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_eq!(fs::read(a.join("benchmark.csv")).unwrap(), fs::read(a.join("benchmark_r1.csv")).unwrap());
}

#[test]
fn output_dir_defaults_to_config() {
    let (dir, cfg) = setup();
    let o = run(&["simulate", "--config", s(&cfg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("results").join("phantom.csv").exists());
}

#[test]
fn failures_exit_nonzero_with_json_error_line() {
    let o = run(&["simulate", "--config", "/nonexistent.toml"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_line(&o)["error"], "io");

    let o = run(&["cutoff", "--alpha-db", "0.5", "--y", "1.5", "--c0", "1540", "--r", "0.02", "--snr", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(error_line(&o)["message"].as_str().unwrap().contains("never below noise"));

    let o = run(&["cutoff", "--alpha-db", "0.5", "--y", "1.0", "--c0", "1540", "--r", "0.02", "--snr", "100"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_line(&o)["error"], "unsupported_exponent");

    let (dir, cfg) = setup();
    fs::write(&cfg, CONFIG.replace("snr = 100.0", "snr = 100.0\nbogus = 1")).unwrap();
    let o = run(&["benchmark", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_line(&o)["error"], "parse");

    let o = run(&["reconstruct", "--method", "magic"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_line(&o)["error"], "usage");

    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_succeeds() {
    let o = run(&["--help"]);
    assert!(o.status.success());
    for sub in ["simulate", "cutoff", "reconstruct", "benchmark", "plotdata"] {
        assert!(stdout(&o).contains(sub));
    }
}
