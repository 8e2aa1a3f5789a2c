use std::path::Path;
use std::process::{Command, Output};

use exact_rwa_cli::config::RunConfig;
use exact_rwa_cli::record::ResultRecord;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exact-rwa")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn record(out: &Output) -> ResultRecord {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn paper_config() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/paper.toml").to_string()
}

#[test]
fn shipped_config_is_the_default() {
    let shipped = RunConfig::load(Path::new(&paper_config())).unwrap();
    assert_eq!(shipped, RunConfig::default());
}

#[test]
fn unknown_keys_are_config_errors_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "[drive]\nA = 0.002\nsigmaa = 3.0\n");
    let out = run(&["functional", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sigmaa") && err.contains("line 3"), "{err}");

    let cfg = write_config(dir.path(), "range.toml", "[drive]\nomega = -1.0\n");
    let out = run(&["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("drive.omega"));

    assert_eq!(run(&["verify", "--integrand", "fIII"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn verify_passes_on_paper_parameters_and_catches_mutation() {
    let out = run(&["verify", "--config", &paper_config()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = record(&out);
    assert!(r.quantity("stroboscopic").unwrap().value <= 1e-6);

    let out = run(&["verify", "--mutate", "flip-second-order"]);
    assert_eq!(out.status.code(), Some(2));
    let r = record(&out);
    assert_eq!(r.details["failed"], serde_json::json!(["stroboscopic"]));

    // first order does not see the corrupted 1/ω² terms
    let out = run(&["verify", "--mutate", "flip-second-order", "--order", "1"]);
    let r = record(&out);
    let mutated_first = r.quantity("stroboscopic").unwrap().value;
    let out = run(&["verify", "--order", "1"]);
    assert_eq!(record(&out).quantity("stroboscopic").unwrap().value, mutated_first);
}

#[test]
fn zero_amplitude_verifies_trivially() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a0.toml", "[drive]\nA = 0.0\n");
    let out = run(&["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(record(&out).quantity("stroboscopic").unwrap().value, 0.0);
}

#[test]
fn trajectory_csv_shape_and_physics() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("traj.csv");
    let out = run(&["trajectory", "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.ends_with('\n'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,beta0,source,bx,by,bz"));
    let rows: Vec<(f64, String, [f64; 3])> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 6);
            let num = |i: usize| f[i].parse::<f64>().unwrap();
            (num(0), f[2].to_string(), [num(3), num(4), num(5)])
        })
        .collect();
    for (_, source, b) in &rows {
        let norm = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        if source == "rwa" {
            assert!(b[0].abs() < 1e-15);
        }
    }
    let t_c = 2.0 * std::f64::consts::PI;
    let pick = |s: &str| rows.iter().filter(|r| r.1 == s).collect::<Vec<_>>();
    let (exact, effective) = (pick("exact"), pick("effective"));
    assert_eq!(exact.len(), effective.len());
    let mut checked = 0;
    for (e, f) in exact.iter().zip(&effective) {
        assert_eq!(e.0, f.0);
        let k = e.0 / t_c;
        if (k - k.round()).abs() < 1e-9 {
            checked += 1;
            for i in 0..3 {
                assert!((e.2[i] - f.2[i]).abs() <= 1e-6, "t = {}", e.0);
            }
        }
    }
    assert!(checked > 40);
}

#[test]
fn exact_path_wobbles_once_per_period_at_strong_drive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "strong.toml",
        "[drive]\nA = 0.1\nsigma = 30.0\n[domain]\npreset = \"half\"\nt_gate_factor = 0.5\n[trajectory]\nsources = [\"exact\"]\nsamples_per_tc = 32\n",
    );
    let out = run(&["trajectory", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let bx: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    let turning = bx.windows(3).filter(|w| (w[1] - w[0]) * (w[2] - w[1]) < 0.0).count();
    let periods = 15.0 / (2.0 * std::f64::consts::PI);
    assert!(turning as f64 >= 1.5 * periods, "{turning} turning points");
    assert!(bx.iter().any(|x| x.abs() > 1e-3));
}

#[test]
fn functional_record_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.toml", "[functional]\nbeta0_points = 16\n[domain]\nt_gate_factor = 4.0\n");
    let a = record(&run(&["functional", "--config", &cfg]));
    let b = record(&run(&["functional", "--config", &cfg]));
    assert_eq!(ResultRecord { wall_time_s: 0.0, ..a.clone() }, ResultRecord { wall_time_s: 0.0, ..b });

    let again = write_config(dir.path(), "again.toml", &a.config.to_toml());
    let c = record(&run(&["functional", "--config", &again]));
    assert_eq!(c.config_hash, a.config_hash);
    assert_eq!(c.quantities, a.quantities);
    let q = &a.quantities[0];
    assert_eq!(q.label, "Q[fI]");
    assert!(q.display.contains('('));
}

#[test]
fn functional_full_domain_value() {
    let out = run(&["functional", "--config", &paper_config(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "Q[fI]");
    let value: f64 = row[1].parse().unwrap();
    assert!((value - 0.0991166116).abs() <= 1e-6, "{value}");
}

#[test]
fn constant_drive_functional_is_rate_times_area() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "const.toml",
        "[drive]\nenvelope = \"constant\"\n[domain]\npreset = \"half\"\nt_gate_factor = 1.5\n[functional]\nbeta0_points = 16\norder = 7\n",
    );
    let r = record(&run(&["functional", "--config", &cfg]));
    let fi = r.quantities[0].value;
    let r2 = record(&run(&["functional", "--config", &cfg, "--integrand", "fII"]));
    assert!(r2.quantities[0].value <= 1e-12);
    // the rate is |h_eff|, independent of the gauge
    let env = exact_rwa::drive::Envelope::constant(0.002);
    let order = exact_rwa::drive::EffSeriesOrder::new(7, &env).unwrap();
    let rate = exact_rwa::drive::h_eff(&env, 0.0, 0.3, order, 0.5).unwrap().0.norm();
    let area = 2.0 * std::f64::consts::PI * 1.5 * 4.0 * std::f64::consts::PI;
    assert!((fi - area * rate).abs() <= 1e-10 * fi, "{fi} vs {}", area * rate);
}

#[test]
fn envelope_only_minimization_gains_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "pc.toml", "[variational]\nfourier = false\n[functional]\nbeta0_points = 16\n[errors]\nbeta0_points = 8\n");
    let out = run(&["minimize", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let r = record(&out);
    assert!(r.improvement.unwrap() <= 5e-8);
    assert_eq!(r.verdict.unwrap().to_string(), "NOT_SIGNIFICANT");
}

#[test]
fn constant_drive_minimization_is_not_significant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "cmin.toml",
        "[drive]\nenvelope = \"constant\"\n[variational]\nM = 0\nN = 0\n[functional]\nbeta0_points = 16\n[errors]\nbeta0_points = 8\n",
    );
    let out = run(&["minimize", "--config", &cfg, "--threads", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = record(&out);
    assert_eq!(r.verdict.unwrap().to_string(), "NOT_SIGNIFICANT");
}
