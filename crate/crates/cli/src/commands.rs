use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use frame_hebb_core::checks::{CheckOutcome, ErrorKind};
use frame_hebb_core::gaussian::derive_seed;
use frame_hebb_core::learning::{train, WeightMatrix};
use frame_hebb_core::random;

use crate::checks::{self, CheckName, EQUIVALENCE_CHECKS, FRAME_CHECKS, GROUP_TRAINING};
use crate::config::{InitSpec, RunConfig};
use crate::error::{exit, CliError};
use crate::record::{self, ExperimentRecord, RECORD_SCHEMA, TRAJECTORY_SCHEMA};

pub const EQUIVALENCE_FILE: &str = "equivalence.csv";
pub const FRAME_FILE: &str = "frame-check.csv";
pub const TRAIN_FILE: &str = "train.csv";
pub const TRAJECTORY_FILE: &str = "train-trajectory.csv";
pub const TRAIN_CHECK: &str = "train-convergence";

#[derive(Debug, Clone, Copy, Default)]
pub struct OutputOptions {
    /// Adds the `wall_time_ms` column.
    pub timings: bool,
}

fn status(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn print_record(out: &mut dyn Write, r: &ExperimentRecord) {
    let _ = writeln!(
        out,
        "{} {:<26} value={:<12.4e} abs={:<10.3e} rel={:<10.3e} tol={:.1e}",
        status(r.passed),
        r.check_name,
        r.value,
        r.abs_error,
        r.rel_error,
        r.tolerance
    );
}

fn run_checks(
    cfg: &RunConfig,
    available: &[CheckName],
    file: &str,
    opts: OutputOptions,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    cfg.validate()?;
    let selected = checks::select(cfg, available)?;
    let cov = cfg.covariance()?;
    let inputs = cfg.canonical();
    let mut records = Vec::with_capacity(selected.len());
    for check in selected {
        let seed = check.seed(cfg.seed);
        let start = Instant::now();
        let outcome = checks::run(check, cfg, &cov, seed)?;
        let mut r = ExperimentRecord::from_outcome(check.as_str(), check.group(), &inputs, seed, &outcome);
        if opts.timings {
            r.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
        }
        print_record(out, &r);
        records.push(r);
    }
    let path = cfg.output_dir.join(file);
    record::write_file(&path, &record::records_to_csv(&records, opts.timings))?;
    let failed = records.iter().filter(|r| !r.passed).count();
    let _ = writeln!(out, "{} of {} checks passed; wrote {}", records.len() - failed, records.len(), path.display());
    Ok(if failed == 0 { exit::OK } else { exit::CHECK_FAILED })
}

pub fn cmd_equivalence(cfg: &RunConfig, opts: OutputOptions, out: &mut dyn Write) -> Result<i32, CliError> {
    run_checks(cfg, &EQUIVALENCE_CHECKS, EQUIVALENCE_FILE, opts, out)
}

pub fn cmd_frame_check(cfg: &RunConfig, opts: OutputOptions, out: &mut dyn Write) -> Result<i32, CliError> {
    run_checks(cfg, &FRAME_CHECKS, FRAME_FILE, opts, out)
}

/// Trains one rule and writes the trajectory plus a final-state record.
/// Passing means the final subspace error is at most the threshold.
pub fn cmd_train(cfg: &RunConfig, opts: OutputOptions, out: &mut dyn Write) -> Result<i32, CliError> {
    cfg.validate()?;
    let cov = cfg.covariance()?;
    let tc = cfg.trainer_config()?;
    if !cov.has_gap_at(cfg.nu) {
        let _ = writeln!(
            out,
            "warning: no eigengap after component {}; the principal subspace is not unique",
            cfg.nu
        );
    }
    let w0 = match cfg.trainer.init {
        InitSpec::Random => {
            let mut r = random::rng(derive_seed(cfg.seed, 0x696e_6974));
            WeightMatrix::new(random::uniform_matrix(&mut r, cfg.nu, cfg.nx, 1.0))?
        }
        InitSpec::Principal => WeightMatrix::new(cov.principal_rows(cfg.nu))?,
    };

    let start = Instant::now();
    let traj = match train(cfg.rule(), cfg.mode(), &w0, &cov, &tc) {
        Ok(t) => t,
        Err(frame_hebb_core::Error::Diverged { step, norm }) => {
            let _ = writeln!(out, "diverged at step {step} (weight norm {norm:.3e}); lower the learning rate");
            return Err(CliError::Diverged { step });
        }
        Err(e) => return Err(e.into()),
    };
    let elapsed = start.elapsed().as_secs_f64() * 1e3;

    let last = traj.last().expect("trajectory records the initial state");
    let err = last.subspace_error.unwrap_or(f64::NAN);
    let outcome = CheckOutcome::worst_error(err, ErrorKind::Absolute, cfg.trainer.threshold);
    let seed = derive_seed(cfg.seed, 0x7472_6169);
    let mut r = ExperimentRecord::from_outcome(TRAIN_CHECK, GROUP_TRAINING, &cfg.canonical_with_trainer(), seed, &outcome);
    if opts.timings {
        r.wall_time_ms = Some(elapsed);
    }
    let _ = writeln!(
        out,
        "{:?}/{:?}: {} steps, subspace error {:.3e}, orthonormality residual {:.3e}",
        cfg.trainer.rule, cfg.trainer.mode, last.step, err, last.orthonormality_residual
    );
    print_record(out, &r);

    record::write_file(&cfg.output_dir.join(TRAJECTORY_FILE), &record::trajectory_to_csv(&traj))?;
    record::write_file(&cfg.output_dir.join(TRAIN_FILE), &record::records_to_csv(&[r.clone()], opts.timings))?;
    Ok(if r.passed { exit::OK } else { exit::CHECK_FAILED })
}

/// Reads every record file in `dir`, prints a table grouped by check group
/// and an overall verdict.
pub fn cmd_report(dir: &Path, out: &mut dyn Write) -> Result<i32, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    paths.sort();

    let mut groups: BTreeMap<String, Vec<ExperimentRecord>> = BTreeMap::new();
    let mut files = 0;
    for path in &paths {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let first = text.lines().next().unwrap_or("");
        if first == TRAJECTORY_SCHEMA {
            continue;
        }
        if first != RECORD_SCHEMA {
            return Err(CliError::Input {
                path: path.clone(),
                message: "not a frame-hebb record file".into(),
            });
        }
        let records = record::records_from_csv(&text).map_err(|message| CliError::Input {
            path: path.clone(),
            message,
        })?;
        files += 1;
        for r in records {
            groups.entry(r.group.clone()).or_default().push(r);
        }
    }
    if groups.is_empty() {
        return Err(CliError::Input {
            path: dir.to_path_buf(),
            message: format!("no record files ({files} read)"),
        });
    }

    let mut all_passed = true;
    for (group, records) in &groups {
        let _ = writeln!(out, "[{group}]");
        for r in records {
            print_record(out, r);
            all_passed &= r.passed;
        }
    }
    let total: usize = groups.values().map(Vec::len).sum();
    let failed: usize = groups.values().flatten().filter(|r| !r.passed).count();
    let _ = writeln!(out, "{}: {} of {total} checks passed", status(all_passed), total - failed);
    Ok(if all_passed { exit::OK } else { exit::CHECK_FAILED })
}
