//! Result rows and their CSV form.
//!
//! A record file starts with a schema comment followed by a header:
//!
//! ```text
//! # frame-hebb records v1
//! check_name,group,inputs_digest,value,reference,abs_error,rel_error,tolerance,passed,seed
//! ```
//!
//! A trailing `wall_time_ms` column is present only when timings were
//! requested, so default output is byte-for-byte reproducible. Floats are
//! written with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use frame_hebb_core::checks::CheckOutcome;
use frame_hebb_core::learning::Trajectory;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const RECORD_SCHEMA: &str = "# frame-hebb records v1";
pub const TRAJECTORY_SCHEMA: &str = "# frame-hebb trajectory v1";

const COLUMNS: [&str; 10] = [
    "check_name",
    "group",
    "inputs_digest",
    "value",
    "reference",
    "abs_error",
    "rel_error",
    "tolerance",
    "passed",
    "seed",
];
const TIMING_COLUMN: &str = "wall_time_ms";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub check_name: String,
    pub group: String,
    pub inputs_digest: String,
    pub value: f64,
    pub reference: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub seed: u64,
    pub wall_time_ms: Option<f64>,
}

impl ExperimentRecord {
    pub fn from_outcome(check_name: &str, group: &str, inputs: &str, seed: u64, o: &CheckOutcome) -> Self {
        Self {
            check_name: check_name.to_string(),
            group: group.to_string(),
            inputs_digest: digest(&format!("check={check_name};{inputs}")),
            value: o.value,
            reference: o.reference,
            abs_error: o.abs_error,
            rel_error: o.rel_error,
            tolerance: o.tolerance,
            passed: o.passed,
            seed,
            wall_time_ms: None,
        }
    }
}

/// Hex SHA-256 of a canonical input description.
pub fn digest(canonical: &str) -> String {
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// `x` with 17 significant digits; non-finite values as `NaN`, `inf`, `-inf`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn records_to_csv(records: &[ExperimentRecord], timings: bool) -> String {
    let mut out = String::new();
    out.push_str(RECORD_SCHEMA);
    out.push('\n');
    out.push_str(&COLUMNS.join(","));
    if timings {
        out.push(',');
        out.push_str(TIMING_COLUMN);
    }
    out.push('\n');
    for r in records {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.check_name,
            r.group,
            r.inputs_digest,
            format_float(r.value),
            format_float(r.reference),
            format_float(r.abs_error),
            format_float(r.rel_error),
            format_float(r.tolerance),
            r.passed,
            r.seed
        );
        if timings {
            let _ = write!(out, ",{}", r.wall_time_ms.map(format_float).unwrap_or_default());
        }
        out.push('\n');
    }
    out
}

/// Parses a record file. Every malformed line is an error naming the line.
pub fn records_from_csv(text: &str) -> Result<Vec<ExperimentRecord>, String> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l == RECORD_SCHEMA => {}
        _ => return Err(format!("missing schema line '{RECORD_SCHEMA}'")),
    }
    let header: Vec<&str> = match lines.next() {
        Some((_, l)) => l.split(',').collect(),
        None => return Err("missing header".into()),
    };
    let timings = if header == COLUMNS {
        false
    } else if header.len() == COLUMNS.len() + 1 && header[..COLUMNS.len()] == COLUMNS && header[COLUMNS.len()] == TIMING_COLUMN {
        true
    } else {
        return Err(format!("unexpected header '{}'", header.join(",")));
    };

    let mut out = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != header.len() {
            return Err(format!("line {lineno}: expected {} fields, found {}", header.len(), f.len()));
        }
        let num = |k: usize| f[k].parse::<f64>().map_err(|_| format!("line {lineno}: bad number '{}' in {}", f[k], header[k]));
        out.push(ExperimentRecord {
            check_name: f[0].to_string(),
            group: f[1].to_string(),
            inputs_digest: f[2].to_string(),
            value: num(3)?,
            reference: num(4)?,
            abs_error: num(5)?,
            rel_error: num(6)?,
            tolerance: num(7)?,
            passed: f[8].parse().map_err(|_| format!("line {lineno}: bad boolean '{}'", f[8]))?,
            seed: f[9].parse().map_err(|_| format!("line {lineno}: bad seed '{}'", f[9]))?,
            wall_time_ms: if timings && !f[10].is_empty() { Some(num(10)?) } else { None },
        });
    }
    Ok(out)
}

pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let mut out = String::new();
    out.push_str(TRAJECTORY_SCHEMA);
    out.push('\n');
    out.push_str("step,subspace_error,orthonormality_residual,update_norm\n");
    for p in &traj.points {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            p.step,
            p.subspace_error.map(format_float).unwrap_or_else(|| "NaN".into()),
            format_float(p.orthonormality_residual),
            format_float(p.update_norm)
        );
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_record() -> ExperimentRecord {
        ExperimentRecord {
            check_name: "frame-bounds".into(),
            group: "frame-machinery".into(),
            inputs_digest: digest("x"),
            value: 0.1,
            reference: -0.5,
            abs_error: 1e-300,
            rel_error: f64::NAN,
            tolerance: 1e-10,
            passed: true,
            seed: u64::MAX,
            wall_time_ms: None,
        }
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-0.5), "-5.0000000000000000e-1");
        assert_eq!(format_float(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_round_trip() {
        let r = sample_record();
        for timings in [false, true] {
            let mut r = r.clone();
            if timings {
                r.wall_time_ms = Some(12.5);
            }
            let text = records_to_csv(std::slice::from_ref(&r), timings);
            let back = records_from_csv(&text).unwrap();
            assert_eq!(back.len(), 1);
            assert_eq!(back[0].value.to_bits(), r.value.to_bits());
            assert!(back[0].rel_error.is_nan());
            assert_eq!(back[0].seed, r.seed);
            assert_eq!(back[0].wall_time_ms, r.wall_time_ms);
        }
    }

    #[test]
    fn corrupt_files_are_rejected() {
        assert!(records_from_csv("").is_err());
        assert!(records_from_csv("check_name\n").is_err());
        let good = records_to_csv(&[sample_record()], false);
        let truncated = good.replace(",true,", ",true");
        assert!(records_from_csv(&truncated).unwrap_err().contains("line 3"));
        assert!(records_from_csv(&good.replace("true", "yes")).is_err());
    }

    #[test]
    fn digest_is_hex_sha256() {
        assert_eq!(digest("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
