//! Bound sweep and gradient audit drivers.

use std::path::{Path, PathBuf};

use spiopt_core::{gradcheck_suite, theorem_suite, GradCheckRow, Result, TheoremSuiteRow};

use crate::output::{fmt_f64, write_csv};

pub const THEOREM_STEPS: usize = 100;

pub fn run_theorem(samples: usize, seed: u64) -> Result<Vec<TheoremSuiteRow>> {
    theorem_suite(samples, seed, THEOREM_STEPS)
}

pub fn theorem_rows(rows: &[TheoremSuiteRow]) -> (Vec<String>, Vec<Vec<String>>) {
    let header = ["mu", "L", "r", "alpha", "z", "bound_holds", "worst_margin"]
        .map(String::from)
        .to_vec();
    let body = rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.mu),
                fmt_f64(r.lipschitz),
                fmt_f64(r.r),
                fmt_f64(r.alpha),
                fmt_f64(r.z),
                r.bound_holds.to_string(),
                fmt_f64(r.worst_margin),
            ]
        })
        .collect();
    (header, body)
}

pub fn write_theorem(rows: &[TheoremSuiteRow], root: &Path) -> Result<PathBuf> {
    let (h, body) = theorem_rows(rows);
    let path = root.join("theorem").join("summary.csv");
    write_csv(&path, &h, &body)?;
    Ok(path)
}

pub fn run_gradcheck(seed: u64) -> Vec<GradCheckRow> {
    gradcheck_suite(seed)
}

pub fn format_gradcheck(rows: &[GradCheckRow]) -> String {
    let mut out = format!(
        "{:<8}{:>7}{:>16}{:>16}  result",
        "target", "cases", "max_rel_err", "max_abs_err"
    );
    for r in rows {
        out.push_str(&format!(
            "\n{:<8}{:>7}{:>16.3e}{:>16.3e}  {}",
            r.target,
            r.cases,
            r.max_rel_error,
            r.max_abs_error,
            if r.passed { "PASS" } else { "FAIL" }
        ));
    }
    out
}
