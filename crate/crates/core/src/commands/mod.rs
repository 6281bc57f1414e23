//! Operations behind the command-line subcommands. Each one reads and writes
//! files next to a caller-chosen output prefix.

mod eval;
mod fit;
mod simulate;
mod sweep;

pub use eval::{cmd_eval, cmd_score, EvalReport};
pub use fit::{cmd_fit, load_network, FitOutputs, FitRequest};
pub use simulate::{cmd_simulate, SimulateKind, SimulateOutputs, SimulationMetadata};
pub use sweep::{cmd_sweep, run_sweep, MeanSe, SweepKind, SweepRecord, SweepReport, SweepRequest, SweepSummary};

use std::ffi::OsString;
use std::path::{Path, PathBuf};

/// `prefix` with `suffix` appended to its final component.
pub fn output_path(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s: OsString = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub const EDGES_SUFFIX: &str = ".edges.tsv";
pub const ROW_LABELS_SUFFIX: &str = ".rows.labels.tsv";
pub const COL_LABELS_SUFFIX: &str = ".cols.labels.tsv";
pub const NODE_LABELS_SUFFIX: &str = ".labels.tsv";
pub const CATEGORIES_SUFFIX: &str = ".categories.tsv";
pub const METADATA_SUFFIX: &str = ".meta.txt";
pub const SOFT_SUFFIX: &str = ".soft.txt";
pub const PARAMS_SUFFIX: &str = ".params.txt";
pub const SUMMARY_SUFFIX: &str = ".fit.txt";
pub const SWEEP_RECORDS_SUFFIX: &str = ".records.tsv";
pub const SWEEP_SUMMARY_SUFFIX: &str = ".summary.tsv";
