use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};
use tractdyn::tract::Window;
use tractdyn::Complex64;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tractdyn")).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["-o", dir.to_str().unwrap()]);
    run(&all)
}

fn read_json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

/// RGB of the pixel containing `z` in a P6 file.
fn pixel(ppm: &[u8], window: &Window, z: Complex64) -> [u8; 3] {
    let header = format!("P6\n{} {}\n255\n", window.width, window.height);
    assert!(ppm.starts_with(header.as_bytes()));
    let (i, j) = window.pixel_of(z).unwrap();
    let k = header.len() + 3 * (j * window.width + i);
    [ppm[k], ppm[k + 1], ppm[k + 2]]
}

#[test]
fn render_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["render", "--model", "exp", "--window", "-2,2,-2,2", "--res", "64x64"]);
    assert_ok(&out);
    let ppm = std::fs::read(dir.path().join("image.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n64 64\n255\n"));
    assert_eq!(ppm.len(), b"P6\n64 64\n255\n".len() + 64 * 64 * 3);
    let manifest = read_json(dir.path().join("manifest.json"));
    assert_eq!(manifest["subcommand"], "render");
    assert_eq!(manifest["effective"]["resolution"], serde_json::json!([64, 64]));
}

#[test]
fn preset_fig2_mid_basin_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&run_in(dir.path(), &["render", "--preset", "fig2-mid"]));
    let ppm = std::fs::read(dir.path().join("image.ppm")).unwrap();
    let w = Window::new(-5.0, 10.0, -10.0, 10.0, 300, 400).unwrap();
    assert_eq!(pixel(&ppm, &w, Complex64::new(0.0, 0.0)), [160, 160, 160]);
    assert_eq!(pixel(&ppm, &w, Complex64::new(8.0, 0.0)), [0, 0, 0]);
}

#[test]
fn preset_fig1_right_histogram() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&run_in(dir.path(), &["render", "--preset", "fig1-right"]));
    let info = read_json(dir.path().join("image.json"));
    let h = &info["histogram"];
    for class in ["basin", "escaping", "other"] {
        assert!(h[class].as_u64().unwrap() > 0, "{class} empty: {h}");
    }
    assert_eq!(info["config"]["model"], "example1:lambda=2");
}

#[test]
fn render_is_deterministic_across_workers() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["render", "--preset", "fig1-mid", "--res", "90x120"];
    let mut one = args.to_vec();
    one.extend(["--workers", "1"]);
    let mut four = args.to_vec();
    four.extend(["--workers", "4"]);
    assert_ok(&run_in(a.path(), &one));
    assert_ok(&run_in(b.path(), &four));
    for f in ["image.ppm", "image.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn growth_exp_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&run_in(dir.path(), &["growth", "--model", "exp", "--R", "1", "--rmin", "5", "--rmax", "100"]));
    let mut rows = csv::Reader::from_path(dir.path().join("profile.csv")).unwrap();
    let mut with_a = 0;
    for rec in rows.records() {
        let rec = rec.unwrap();
        let r: f64 = rec[0].parse().unwrap();
        if !rec[2].is_empty() {
            let a: f64 = rec[2].parse().unwrap();
            assert!((a / r - 1.0).abs() <= 0.01, "a/r = {} at r = {r}", a / r);
            with_a += 1;
        }
    }
    assert!(with_a > 100);
    assert!(dir.path().join("growth.json").exists());
}

#[test]
fn growth_single_row_omits_a() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&run_in(dir.path(), &["growth", "--model", "exp", "--R", "1", "--rmin", "5", "--rmax", "5"]));
    let csv = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1].split(',').nth(2), Some(""));
}

#[test]
fn growth_example1_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["growth", "--model", "example1", "--lambda", "1", "--R", "20", "--rmin", "3", "--rmax", "12"];
    assert_ok(&run_in(dir.path(), &args));
    let csv = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert!(csv.lines().count() > 1);
}

#[test]
fn growth_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["growth", "--model", "gamma", "--rmin", "20", "--rmax", "60"];
    assert_ok(&run_in(a.path(), &args));
    assert_ok(&run_in(b.path(), &args));
    for f in ["profile.csv", "growth.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn ode_bound_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["ode-bound", "f'' - z*f"]);
    assert_ok(&out);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["verdict"]["kind"], "Bound");
    assert_eq!(v["result"]["verdict"]["bound"], "1/2");
    assert_eq!(v["result"]["kappaCandidates"], serde_json::json!(["3/2"]));

    let out = run_in(dir.path(), &["ode-bound", "f' - f^2"]);
    assert_ok(&out);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["verdict"]["kind"], "SingletonS");
    assert_eq!(read_json(dir.path().join("ode.json")), v);
}

#[test]
fn ode_bound_from_json() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("eq.json");
    std::fs::write(&input, r#"[{"t":[0,1],"coeff":["1"]},{"t":[1],"coeff":["-1"]}]"#).unwrap();
    let out = run_in(dir.path(), &["ode-bound", "--json", input.to_str().unwrap(), "--verify"]);
    assert_ok(&out);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["verdict"]["bound"], "1");
    let slope = v["verification"]["slope"].as_f64().unwrap();
    assert!((slope - 1.0).abs() <= 0.02);
}

#[test]
fn wv_check_exp() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["wv-check", "--model", "exp", "--R", "1", "--r", "100", "--tau", "0.75"]);
    assert_ok(&out);
    let v = read_json(dir.path().join("wv.json"));
    let e = v["rel_err_value"].as_f64().unwrap();
    assert!((0.025..=0.075).contains(&e), "{e}");
}

#[test]
fn wv_sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["wv-check", "--model", "exp", "--rmin", "50", "--rmax", "200", "--log-step", "0.5", "--samples", "64"];
    assert_ok(&run_in(dir.path(), &args));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    // ln 4 / 0.5 rounds to 3 intervals, so 4 radii
    assert_eq!(csv.lines().count(), 1 + 4);
}

#[test]
fn tract_info_reports() {
    let dir = tempfile::tempdir().unwrap();
    assert_ok(&run_in(dir.path(), &["tract-info", "--model", "exp", "--R", "1", "--res", "64x64"]));
    let v = read_json(dir.path().join("tract.json"));
    assert_eq!(v["direct"], "direct_candidate");
    assert_eq!(v["model"], "exp");
    assert!(std::fs::read(dir.path().join("tract.pgm")).unwrap().starts_with(b"P5"));
}

#[test]
fn outer_seq_small() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["outer-seq", "--model", "exp", "--R", "1", "--steps", "1", "--nu", "256", "--ntheta", "512"];
    assert_ok(&run_in(dir.path(), &args));
    let v = read_json(dir.path().join("outer.json"));
    let log_r = v["steps"][0]["logR"].as_f64().unwrap();
    assert!(log_r > 48f64.ln(), "{log_r}");
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["render", "--res", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["render", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_in(dir.path(), &["render", "--model", "exp", "--R", "1e9", "--seed", "0,0", "--res", "16x16"]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    let out = run_in(dir.path(), &["growth", "--model", "exp", "--R", "1", "--rmin", "10", "--rmax", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_in(dir.path(), &["ode-bound", "f - f"]);
    assert_eq!(out.status.code(), Some(5));
    let out = run_in(dir.path(), &["ode-bound", "f'' - g"]);
    assert_eq!(out.status.code(), Some(5));
}
