use mellinfrac::io::write_samples;
use mellinfrac::{Complex64, LogGrid};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mellinfrac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mellinfrac"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// The single data row of an x,re,im result.
fn value_row(text: &str) -> (f64, f64, f64) {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,re,im"));
    let v: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect();
    (v[0], v[1], v[2])
}

#[test]
fn integrate_power_example() {
    let o = mellinfrac(&[
        "integrate",
        "--f",
        "power:b=1",
        "--alpha",
        "0.5",
        "--c",
        "1",
        "--x",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (x, re, im) = value_row(&stdout(&o));
    assert_eq!(x, 1.0);
    assert!((re - 0.5f64.sqrt()).abs() < 1e-7, "{re}");
    assert_eq!(im, 0.0);
}

#[test]
fn diffusion_at_alpha_two_is_a_config_error() {
    let o = mellinfrac(&["solve", "--problem", "diffusion", "--alpha", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cos(alpha pi/4) = 0"), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_two() {
    let cases: [&[&str]; 4] = [
        &["integrate", "--f", "nope", "--alpha", "1", "--x", "1"],
        &["integrate", "--f", "power:b=1", "--x", "1"],
        &[
            "integrate",
            "--f",
            "csv:/nonexistent/samples.csv",
            "--alpha",
            "1",
            "--x",
            "1",
        ],
        &["--config", "/nonexistent/run.json"],
    ];
    for args in cases {
        let o = mellinfrac(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
}

#[test]
fn computation_errors_exit_one() {
    // x^-3 is not in X_1, so the integral diverges at 0.
    let o = mellinfrac(&[
        "integrate",
        "--f",
        "power:b=-3",
        "--alpha",
        "0.5",
        "--c",
        "1",
        "--x",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stderr(&o).contains("computation failed"), "{}", stderr(&o));
}

#[test]
fn verify_fundamental_passes() {
    let o = mellinfrac(&["verify", "--suite", "fundamental"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("PASS criterion 4"), "{out}");
    assert!(out.contains("1/1 criteria passed"));
}

fn run_to(dir: &Path, name: &str) -> (Vec<u8>, serde_json::Value) {
    let out = dir.join(name);
    let o = mellinfrac(&[
        "differentiate",
        "--f",
        "exp:b=-1",
        "--alpha",
        "1.5",
        "--c",
        "0.5",
        "--x-min",
        "0.5",
        "--x-max",
        "4",
        "--n",
        "7",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let meta = fs::read_to_string(out.with_extension("json")).unwrap();
    (
        fs::read(&out).unwrap(),
        serde_json::from_str(&meta).unwrap(),
    )
}

#[test]
fn output_is_deterministic_with_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let (a, meta) = run_to(dir.path(), "a.csv");
    let (b, _) = run_to(dir.path(), "b.csv");
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 8);
    for key in [
        "command",
        "params",
        "grid",
        "tolerances",
        "results_path",
        "residuals",
    ] {
        assert!(meta.get(key).is_some(), "missing {key}");
    }
    assert_eq!(meta["command"], "differentiate");
    assert_eq!(meta["grid"]["n"], 7);
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let flags = [
        "integrate",
        "--f",
        "log_k:k=2",
        "--alpha",
        "0.7",
        "--mu",
        "1.5",
        "--x",
        "2",
    ];
    let mut printing = vec!["--print-config"];
    printing.extend(flags);
    let o = mellinfrac(&printing);
    assert!(o.status.success(), "{}", stderr(&o));
    let canonical = stdout(&o);
    let path = dir.path().join("run.json");
    fs::write(&path, &canonical).unwrap();
    let again = mellinfrac(&["--config", path.to_str().unwrap(), "--print-config"]);
    assert_eq!(stdout(&again), canonical);
    let from_file = mellinfrac(&["--config", path.to_str().unwrap()]);
    let from_flags = mellinfrac(&flags);
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, from_flags.stdout);
}

#[test]
fn sampled_csv_input() {
    let dir = tempfile::tempdir().unwrap();
    let grid = LogGrid::new(1e-3, 10.0, 801).unwrap();
    let xs = grid.points();
    let vs: Vec<Complex64> = xs.iter().map(|x| Complex64::new(x * x, 0.0)).collect();
    let path = dir.path().join("square.csv");
    write_samples(fs::File::create(&path).unwrap(), &xs, &vs).unwrap();
    let spec = format!("csv:{}", path.display());
    let o = mellinfrac(&[
        "integrate",
        "--f",
        &spec,
        "--alpha",
        "0.5",
        "--c",
        "1",
        "--x",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, re, _) = value_row(&stdout(&o));
    // J^alpha x^2 = (c + 2)^-alpha x^2, up to the interpolation error.
    let want = 3f64.powf(-0.5) * 4.0;
    assert!((re - want).abs() / want < 1e-4, "{re} vs {want}");
}

#[test]
fn transform_of_indicator() {
    let o = mellinfrac(&[
        "transform",
        "--f",
        "chi01",
        "--nu",
        "0.5",
        "--t-max",
        "2",
        "--t-n",
        "5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,re,im"));
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let want = 1.0 / Complex64::new(0.5, v[0]);
        assert!((Complex64::new(v[1], v[2]) - want).norm() < 1e-6, "{line}");
    }
}

#[test]
fn diffquot_limit_from_below() {
    let o = mellinfrac(&[
        "diffquot",
        "--f",
        "power:b=1",
        "--alpha",
        "0.5",
        "--c",
        "1",
        "--x-min",
        "0.5",
        "--x-max",
        "2",
        "--n",
        "3",
        "--from-below",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for line in stdout(&o).lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        // D^alpha x = (c + 1)^alpha x.
        let want = 2f64.sqrt() * v[0];
        assert!((v[1] - want).abs() / want < 1e-3, "{line}");
        assert_eq!(v[2], 0.0);
    }
    let o = mellinfrac(&[
        "diffquot",
        "--f",
        "power:b=1",
        "--alpha",
        "0.5",
        "--h",
        "0.9",
        "--x",
        "1",
        "--from-below",
    ]);
    assert_eq!(o.status.code(), Some(2));
}
