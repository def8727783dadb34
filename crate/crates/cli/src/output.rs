use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use spiopt_core::{Error, Result};

/// Overrides the output root when set.
pub const OUT_ENV: &str = "SPIOPT_OUT";
pub const DEFAULT_OUT: &str = "spiopt-out";

/// Explicit flag, then `SPIOPT_OUT`, then `./spiopt-out`.
pub fn output_root(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    match env::var_os(OUT_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(DEFAULT_OUT),
    }
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Empty for absent values.
pub fn fmt_opt(x: Option<usize>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::Io(format!("{}: {e}", parent.display())))?;
    }
    let io_err = |e: csv::Error| Error::Io(format!("{}: {e}", path.display()));
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(io_err)?;
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        w.write_record(row).map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
