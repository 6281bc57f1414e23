use std::fmt;
use std::path::Path;

use crate::commands::load_network;
use crate::error::Result;
use crate::io::read_labels;
use crate::metrics::{ari, misclustering_rate, score_labels, soft_confusion, ConfusionMatrix};
use crate::vem::FitMode;

/// Agreement between two label files over the same nodes.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub nodes: usize,
    pub ari: f64,
    /// Rows index the first file's clusters, columns the second's.
    pub confusion: ConfusionMatrix,
    /// Misclustering of the second labeling, taking the first as truth.
    pub misclustering_rate: f64,
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nodes\t{}", self.nodes)?;
        writeln!(f, "ari\t{}", self.ari)?;
        writeln!(f, "misclustering_rate\t{}", self.misclustering_rate)?;
        writeln!(f, "confusion")?;
        for row in self.confusion.matrix.rows() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
            writeln!(f, "{}", cells.join("\t"))?;
        }
        Ok(())
    }
}

/// Compares two label files. The node sets must match; the error lists ids
/// present in only one file.
pub fn cmd_eval(labels_a: &Path, labels_b: &Path) -> Result<EvalReport> {
    let a = read_labels(labels_a)?;
    let b = read_labels(labels_b)?;
    let (za, zb) = a.align_with(&b)?;
    let (qa, qb) = (za.to_soft(), zb.to_soft());
    Ok(EvalReport {
        nodes: za.len(),
        ari: ari(&za, &zb)?,
        confusion: soft_confusion(&qa, &qb)?,
        misclustering_rate: misclustering_rate(&za, &qb)?,
    })
}

/// Bound of externally supplied labels on an edge list, as in
/// [`score_labels`]. Label files are matched to the network by id.
pub fn cmd_score(
    edge_list: &Path,
    row_labels: &Path,
    col_labels: &Path,
    k: usize,
    l: usize,
    mode: FitMode,
    binary: bool,
) -> Result<f64> {
    let network = load_network(edge_list, mode, binary)?;
    let z = read_labels(row_labels)?.align(&network.row_ids)?;
    let w = read_labels(col_labels)?.align(&network.col_ids)?;
    score_labels(&network.adjacency, &z, &w, k, l)
}
