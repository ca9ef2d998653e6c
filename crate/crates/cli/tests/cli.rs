use std::fs;
use std::path::Path;
use std::process::Command as Process;

use translab_cli::{parse_args, run, Command};

const CONSERVATIVE: &str = "l0 = 0\nl1 = 1\nl2 = 2\nl3 = 3\nrho1 = 0\nrho2 = 0\nbeta = 0\n";
const DDD: &str = "l0 = 0\nl1 = 1\nl2 = 2\nl3 = 3\nrho1 = 1\nrho2 = 1\nbeta = 1\n";

fn binary() -> Process {
    Process::new(env!("CARGO_BIN_EXE_translab"))
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("c.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn invoke(args: &[&str]) -> i32 {
    let mut argv = vec!["translab"];
    argv.extend_from_slice(args);
    run(&parse_args(argv).unwrap())
}

#[test]
fn defaults_are_filled() {
    let spec = parse_args(["translab", "simulate", "--config", "c.toml", "--t-final", "10"]).unwrap();
    assert_eq!(spec.command, Command::Simulate);
    assert_eq!(spec.config_path.as_deref(), Some(Path::new("c.toml")));
    assert_eq!((spec.n1, spec.n2, spec.n3), (40, 40, 40));
    assert_eq!(spec.t_final, Some(10.0));
    assert_eq!(spec.dt, None);
    assert_eq!((spec.lambda_min, spec.lambda_max, spec.lambda_steps), (-50.0, 50.0, 2001));
    assert_eq!(spec.c4, None);
    assert!(!spec.dump_matrices);

    // options may precede the subcommand
    let spec = parse_args(["translab", "--n1", "7", "spectrum", "--lambda-min", "-3"]).unwrap();
    assert_eq!(spec.n1, 7);
    assert_eq!(spec.lambda_min, -3.0);
}

#[test]
fn usage_errors() {
    let err = parse_args(["translab", "resolvent", "--lambda-steps", "0"]).unwrap_err();
    assert_eq!(err.exit_code, 2);

    let err = parse_args(["translab"]).unwrap_err();
    assert_ne!(err.exit_code, 0);
    for name in Command::ALL {
        assert!(err.message.contains(name), "missing {name} in:\n{}", err.message);
    }

    for bad in [
        vec!["translab", "simulate", "--bogus"],
        vec!["translab", "explode"],
        vec!["translab", "simulate", "--dt", "-1"],
        vec!["translab", "simulate", "--n2", "0"],
        vec!["translab", "simulate", "--t-final", "nan"],
        vec!["translab", "resolvent", "--lambda-min", "5", "--lambda-max", "5"],
    ] {
        let err = parse_args(bad.clone()).unwrap_err();
        assert_eq!(err.exit_code, 2, "{bad:?}");
    }

    let out = binary().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let help = binary().arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn module_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.toml");
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        invoke(&["spectrum", "--config", missing.to_str().unwrap(), "--out-dir", out]),
        1
    );
    let typo = write_config(dir.path(), &format!("{DDD}betta = 3\n"));
    assert_eq!(invoke(&["spectrum", "--config", &typo, "--out-dir", out]), 1);
}

#[test]
fn verify_conservative_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONSERVATIVE);
    let out = dir.path().to_str().unwrap();
    let args = ["verify", "--config", &cfg, "--n1", "6", "--n2", "6", "--n3", "6", "--out-dir", out];
    assert_eq!(invoke(&args), 0);
    let report = fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(report.contains(r#""name": "energy_drift", "status": "pass""#), "{report}");
    assert!(report.contains(r#""regime": "Conservative""#));
    assert!(report.contains(r#""passed": true"#));
}

#[test]
fn verify_fails_with_tiny_c4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), DDD);
    let out = dir.path().to_str().unwrap();
    let args = [
        "verify", "--config", &cfg, "--n1", "5", "--n2", "5", "--n3", "5", "--c4", "1e-6",
        "--out-dir", out,
    ];
    assert_eq!(invoke(&args), 1);
    let report = fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(report.contains(r#""name": "lyapunov_sandwich", "status": "fail""#), "{report}");
    assert!(report.contains(r#""passed": false"#));
}

#[test]
fn spectrum_has_one_row_per_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), DDD);
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        invoke(&["spectrum", "--config", &cfg, "--n1", "4", "--n2", "5", "--n3", "3", "--out-dir", out]),
        0
    );
    let text = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let n = 2 * 4 + 5 - 1 + 2 * 3;
    assert_eq!(text.lines().count(), 1 + 2 * n);
    assert_eq!(text.lines().next(), Some("re,im"));
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let cfg = write_config(dir.path(), DDD);
        let out = dir.path().to_str().unwrap();
        let mesh = ["--n1", "4", "--n2", "4", "--n3", "4"];
        for sub in ["simulate", "spectrum", "resolvent", "decay", "modes"] {
            let mut args = vec![sub, "--config", &cfg, "--out-dir", out, "--t-final", "1"];
            args.extend_from_slice(&mesh);
            args.extend_from_slice(&["--lambda-steps", "101", "--snapshot-every", "50", "--dump-matrices"]);
            assert_eq!(invoke(&args), 0, "{sub}");
        }
    }
    let names = [
        "energy.csv", "snapshots.csv", "spectrum.csv", "resolvent.csv", "decay.json", "modes.csv",
        "S.coo", "M.coo", "D.coo", "K.coo",
    ];
    for name in names {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert!(!x.is_empty(), "{name} empty");
        assert_eq!(x, y, "{name} differs between runs");
    }
}

#[test]
fn simulate_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), DDD);
    let out = dir.path().to_str().unwrap();
    let args = [
        "simulate", "--config", &cfg, "--out-dir", out, "--n1", "3", "--n2", "3", "--n3", "3",
        "--dt", "0.01", "--t-final", "0.1", "--snapshot-every", "5", "--snapshot-points", "7",
    ];
    assert_eq!(invoke(&args), 0);
    let energy = fs::read_to_string(dir.path().join("energy.csv")).unwrap();
    let golden = include_str!("golden/energy_small.csv");
    assert_eq!(energy, golden);

    let snaps = fs::read_to_string(dir.path().join("snapshots.csv")).unwrap();
    let rows: Vec<Vec<f64>> = snaps
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    // snapshots at steps 0, 5, 10, seven positions each
    assert_eq!(rows.len(), 3 * 7);
    // clamped ends and the initial profile sin²(πx/3) at rest
    for r in &rows {
        if r[1] == 0.0 || r[1] == 3.0 {
            assert!(r[2].abs() < 1e-14 && r[3].abs() < 1e-14);
        }
    }
    let mid = rows.iter().find(|r| r[0] == 0.0 && r[1] == 1.5).unwrap();
    // linear interpolation error on the string: h²/8 · max|f''| ≈ 0.03
    let h = 1.0f64 / 3.0;
    let bound = h * h / 8.0 * 2.0 * (std::f64::consts::PI / 3.0).powi(2);
    assert!((mid[2] - 1.0).abs() <= bound, "{}", mid[2]);
    assert_eq!(mid[3], 0.0);
}

#[test]
fn modes_table_matches_oracles() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), DDD);
    let out = dir.path().to_str().unwrap();
    assert_eq!(invoke(&["modes", "--config", &cfg, "--out-dir", out]), 0);
    let text = fs::read_to_string(dir.path().join("modes.csv")).unwrap();
    let mut components = Vec::new();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let err: f64 = cols[6].parse().unwrap();
        let scale = cols[2].parse::<f64>().unwrap().hypot(cols[3].parse().unwrap());
        assert!(err <= 1e-2 * scale.max(1.0), "{line}");
        components.push(cols[0].to_string());
    }
    for c in ["string", "beam1", "beam2"] {
        assert!(components.iter().any(|x| x == c));
    }
}
