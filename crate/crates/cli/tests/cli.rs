use std::path::Path;
use std::process::{Command, Output};

use frame_hebb::record::{records_from_csv, records_to_csv, ExperimentRecord, RECORD_SCHEMA};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frame-hebb"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn default_equivalence_passes() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["equivalence"], d.path());
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let text = std::fs::read_to_string(d.path().join("equivalence.csv")).unwrap();
    assert!(text.starts_with(RECORD_SCHEMA));
    let names: Vec<String> = records_from_csv(&text).unwrap().into_iter().map(|r| r.check_name).collect();
    assert_eq!(
        names,
        ["closed-form-identity", "fixed-point-sharing", "stein-identity", "oja-empirical-rate", "eghr-empirical-rate"]
    );
}

#[test]
fn default_frame_check_passes() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["frame-check"], d.path());
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let text = std::fs::read_to_string(d.path().join("frame-check.csv")).unwrap();
    let records = records_from_csv(&text).unwrap();
    assert_eq!(records.len(), 11);
    assert!(records.iter().all(|r| r.passed && r.inputs_digest.len() == 64));
}

#[test]
fn nu_above_nx_is_a_config_error() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["equivalence", "--nx", "4", "--nu", "5"], d.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("nu (5) must not exceed nx (4)"), "{}", stderr(&o));
}

#[test]
fn near_degenerate_covariance_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(
        d.path(),
        "nx = 2\nnu = 1\n[sigma]\nkind = \"diagonal\"\neigenvalues = [1.0, 1e-10]\n",
    );
    let o = run(&["frame-check", "--config", &cfg], d.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("degenerate"), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let bad_key = write_config(d.path(), "nx = 3\ncolour = \"blue\"\n");
    assert_eq!(code(&run(&["equivalence", "--config", &bad_key], d.path())), 2);
    assert_eq!(code(&run(&["equivalence", "--checks", "no-such-check"], d.path())), 2);
    assert_eq!(code(&run(&["equivalence", "--checks", "frame-bounds"], d.path())), 2);
    assert_eq!(code(&run(&["equivalence", "--config", "/nonexistent/run.toml"], d.path())), 2);
    assert_eq!(code(&run(&["train", "--rule", "hebb"], d.path())), 2);
}

#[test]
fn check_filter_yields_one_row() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["frame-check", "--checks", "coefficient-identity"], d.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let records = records_from_csv(&std::fs::read_to_string(d.path().join("frame-check.csv")).unwrap()).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].check_name, "coefficient-identity");
    assert!(records[0].value <= 1e-12);
}

#[test]
fn flags_override_the_file() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), "seed = 1\nchecks = [\"closed-form-identity\"]\n");
    run(&["equivalence", "--config", &cfg], d.path());
    let a = std::fs::read_to_string(d.path().join("equivalence.csv")).unwrap();
    run(&["equivalence", "--config", &cfg, "--seed", "2"], d.path());
    let b = std::fs::read_to_string(d.path().join("equivalence.csv")).unwrap();
    let (ra, rb) = (records_from_csv(&a).unwrap(), records_from_csv(&b).unwrap());
    assert_ne!(ra[0].seed, rb[0].seed);
    assert_ne!(ra[0].inputs_digest, rb[0].inputs_digest);
}

#[test]
fn reruns_are_byte_identical_and_timings_are_opt_in() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["equivalence", "--samples", "20000", "--checks", "stein-identity,closed-form-identity"];
    run(&args, a.path());
    run(&args, b.path());
    let x = std::fs::read(a.path().join("equivalence.csv")).unwrap();
    assert_eq!(x, std::fs::read(b.path().join("equivalence.csv")).unwrap());
    assert!(!String::from_utf8(x).unwrap().contains("wall_time_ms"));

    let mut timed = args.to_vec();
    timed.push("--timings");
    run(&timed, a.path());
    let text = std::fs::read_to_string(a.path().join("equivalence.csv")).unwrap();
    let records = records_from_csv(&text).unwrap();
    assert!(records.iter().all(|r| r.wall_time_ms.is_some()));
}

const SPECTRUM_CONFIG: &str = "nx = 5\nnu = 2\n[sigma]\nkind = \"diagonal\"\neigenvalues = [5.0, 4.0, 3.0, 2.0, 1.0]\n";

#[test]
fn closed_form_oja_training_converges() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), SPECTRUM_CONFIG);
    let o = run(&["train", "--config", &cfg, "--rule", "oja", "--eta", "0.02", "--steps", "5000"], d.path());
    assert_eq!(code(&o), 0, "{}{}", stdout(&o), stderr(&o));
    let records = records_from_csv(&std::fs::read_to_string(d.path().join("train.csv")).unwrap()).unwrap();
    assert_eq!(records[0].check_name, "train-convergence");
    assert!(records[0].value <= 1e-6);

    let traj = std::fs::read_to_string(d.path().join("train-trajectory.csv")).unwrap();
    let mut lines = traj.lines().skip(1);
    assert_eq!(lines.next(), Some("step,subspace_error,orthonormality_residual,update_norm"));
    let last = lines.last().unwrap();
    assert!(last.starts_with("5000,"), "{last}");
}

#[test]
fn large_step_diverges_with_exit_3() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), SPECTRUM_CONFIG);
    let o = run(&["train", "--config", &cfg, "--eta", "10"], d.path());
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("diverged at step"), "{}", stderr(&o));
}

#[test]
fn fixed_point_start_stays_flat() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), &format!("{SPECTRUM_CONFIG}[trainer]\ninit = \"principal\"\nrule = \"eghr\"\n"));
    let o = run(&["train", "--config", &cfg, "--steps", "200"], d.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let traj = std::fs::read_to_string(d.path().join("train-trajectory.csv")).unwrap();
    for line in traj.lines().skip(2) {
        let err: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(err <= 1e-12, "{line}");
    }
}

fn record(name: &str, passed: bool) -> ExperimentRecord {
    ExperimentRecord {
        check_name: name.into(),
        group: "frame-machinery".into(),
        inputs_digest: frame_hebb::record::digest(name),
        value: 0.0,
        reference: 0.0,
        abs_error: 0.0,
        rel_error: 0.0,
        tolerance: 1e-12,
        passed,
        seed: 1,
        wall_time_ms: None,
    }
}

fn report(dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frame-hebb")).arg("report").arg(dir).output().unwrap()
}

#[test]
fn report_on_empty_directory_exits_2() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&report(d.path())), 2);
    assert_eq!(code(&report(&d.path().join("missing"))), 2);
}

#[test]
fn report_names_a_corrupt_file() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("a.csv"), records_to_csv(&[record("frame-bounds", true)], false)).unwrap();
    std::fs::write(d.path().join("broken.csv"), format!("{RECORD_SCHEMA}\ncheck_name,oops\n")).unwrap();
    let o = report(d.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("broken.csv"), "{}", stderr(&o));
}

#[test]
fn report_aggregates_pass_and_fail() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("a.csv"), records_to_csv(&[record("frame-bounds", true)], false)).unwrap();
    let o = report(d.path());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("PASS: 1 of 1"));

    std::fs::write(d.path().join("b.csv"), records_to_csv(&[record("restricted-inverse", false)], true)).unwrap();
    let o = report(d.path());
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).lines().last().unwrap().starts_with("FAIL"), "{}", stdout(&o));
}

#[test]
fn report_reads_a_full_run() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), SPECTRUM_CONFIG);
    assert_eq!(code(&run(&["train", "--config", &cfg, "--steps", "3000"], d.path())), 0);
    assert_eq!(code(&run(&["frame-check", "--checks", "frame-bounds,kernel-annihilation"], d.path())), 0);
    let o = report(d.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("[training]") && s.contains("[frame-machinery]") && s.contains("PASS: 3 of 3"), "{s}");
}
