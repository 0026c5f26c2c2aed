//! Configuration, command execution and file output for the `cavity-qe`
//! binary.
//!
//! Data files contain no timestamps or environment details, so a fixed
//! configuration always produces byte-identical output. Provenance goes to
//! a `<out>.meta.json` sidecar next to the data file.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::{Path, PathBuf};

pub use commands::{
    efficiency_report, optimize_report, run, spectrum_report, sweep_report, trajectory_table,
    Command, CommandOutput, EfficiencyReport, OptimizeReport, SpectrumReport, SweepReport,
    SweepRow, TrajectoryTable, TRAJECTORY_COLUMNS,
};
pub use config::{Format, RunConfig, KEYS};
pub use output::{sig9, Csv};

use crate::error::{Error, Result};

/// Sidecar path for a data file: `<out>.meta.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the body to `out` (plus the sidecar), or to stdout when `out` is `None`.
pub fn emit(output: &CommandOutput, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            write_file(path, output.body.as_bytes())?;
            let meta = serde_json::to_string_pretty(&output.meta)? + "\n";
            write_file(&sidecar_path(path), meta.as_bytes())
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(output.body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}
