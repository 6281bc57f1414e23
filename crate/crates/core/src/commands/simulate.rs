use std::path::{Path, PathBuf};

use crate::commands::{
    output_path, CATEGORIES_SUFFIX, COL_LABELS_SUFFIX, EDGES_SUFFIX, METADATA_SUFFIX,
    NODE_LABELS_SUFFIX, ROW_LABELS_SUFFIX,
};
use crate::error::{Result, TnpmError};
use crate::io::{write_edge_list, write_labels, write_undirected_edge_list, EdgeList, LabelFile, Record};
use crate::netgen::{gen_bipartite_tnpm, gen_undirected_pabm};

const METADATA_KIND: &str = "simulation";

#[derive(Debug, Clone, PartialEq)]
pub enum SimulateKind {
    Bipartite {
        rows: usize,
        cols: usize,
        k: usize,
        l: usize,
        density: f64,
    },
    Undirected {
        nodes: usize,
        homophily: f64,
    },
}

/// Everything needed to regenerate a simulated network.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationMetadata {
    pub kind: SimulateKind,
    pub seed: u64,
}

impl SimulationMetadata {
    pub fn to_record(&self) -> Record {
        let mut r = Record::new(METADATA_KIND);
        r.text("generator_version", env!("CARGO_PKG_VERSION"));
        match self.kind {
            SimulateKind::Bipartite { rows, cols, k, l, density } => {
                r.text("network", "bipartite")
                    .text("rows", rows)
                    .text("cols", cols)
                    .text("k", k)
                    .text("l", l)
                    .number("density", density);
            }
            SimulateKind::Undirected { nodes, homophily } => {
                r.text("network", "undirected")
                    .text("nodes", nodes)
                    .number("homophily", homophily);
            }
        }
        r.text("seed", self.seed);
        r
    }

    pub fn from_record(r: &Record) -> Result<Self> {
        if r.kind != METADATA_KIND {
            return Err(TnpmError::InvalidInput(format!(
                "expected a {METADATA_KIND} record, got '{}'",
                r.kind
            )));
        }
        let int = |key: &str| -> Result<u64> {
            let s = r.get_text(key)?;
            s.parse()
                .map_err(|_| TnpmError::InvalidInput(format!("field '{key}' is not an integer: '{s}'")))
        };
        let kind = match r.get_text("network")? {
            "bipartite" => SimulateKind::Bipartite {
                rows: int("rows")? as usize,
                cols: int("cols")? as usize,
                k: int("k")? as usize,
                l: int("l")? as usize,
                density: r.get_f64("density")?,
            },
            "undirected" => SimulateKind::Undirected {
                nodes: int("nodes")? as usize,
                homophily: r.get_f64("homophily")?,
            },
            other => {
                return Err(TnpmError::InvalidInput(format!("unknown network kind '{other}'")))
            }
        };
        Ok(Self {
            kind,
            seed: int("seed")?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SimulateOutputs {
    pub edges: PathBuf,
    /// Row labels, or node labels for undirected networks.
    pub row_labels: PathBuf,
    /// Column labels for bipartite networks; popularity categories for
    /// undirected ones.
    pub col_labels: PathBuf,
    pub metadata: PathBuf,
}

fn ids(prefix: &str, count: usize) -> Vec<String> {
    (0..count).map(|i| format!("{prefix}{i}")).collect()
}

/// Generates a planted network and writes the edge list, the true labels and
/// a metadata record. Row ids are `r0, r1, ...`, column ids `c0, ...`, and
/// undirected node ids `v0, ...`.
pub fn cmd_simulate(kind: &SimulateKind, seed: u64, out_prefix: &Path) -> Result<SimulateOutputs> {
    let edges = output_path(out_prefix, EDGES_SUFFIX);
    let metadata = output_path(out_prefix, METADATA_SUFFIX);
    let (row_labels, col_labels) = match *kind {
        SimulateKind::Bipartite { rows, cols, k, l, density } => {
            let g = gen_bipartite_tnpm(rows, cols, k, l, density, seed)?;
            let list = EdgeList {
                adjacency: g.adjacency,
                row_ids: ids("r", rows),
                col_ids: ids("c", cols),
            };
            write_edge_list(&edges, &list)?;
            let row_path = output_path(out_prefix, ROW_LABELS_SUFFIX);
            let col_path = output_path(out_prefix, COL_LABELS_SUFFIX);
            write_labels(&row_path, &LabelFile::new(list.row_ids, &g.z_true)?)?;
            write_labels(&col_path, &LabelFile::new(list.col_ids, &g.w_true)?)?;
            (row_path, col_path)
        }
        SimulateKind::Undirected { nodes, homophily } => {
            let g = gen_undirected_pabm(nodes, homophily, seed)?;
            let node_ids = ids("v", nodes);
            write_undirected_edge_list(&edges, &g.adjacency, &node_ids)?;
            let label_path = output_path(out_prefix, NODE_LABELS_SUFFIX);
            let category_path = output_path(out_prefix, CATEGORIES_SUFFIX);
            write_labels(&label_path, &LabelFile::new(node_ids.clone(), &g.labels)?)?;
            write_labels(&category_path, &LabelFile::new(node_ids, &g.categories)?)?;
            (label_path, category_path)
        }
    };
    SimulationMetadata {
        kind: kind.clone(),
        seed,
    }
    .to_record()
    .write(&metadata)?;
    Ok(SimulateOutputs {
        edges,
        row_labels,
        col_labels,
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{read_edge_list, read_labels, read_undirected_edge_list};

    #[test]
    fn bipartite_outputs_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let kind = SimulateKind::Bipartite { rows: 30, cols: 20, k: 3, l: 2, density: 0.3 };
        let out = cmd_simulate(&kind, 9, &dir.path().join("sim")).unwrap();
        let meta = SimulationMetadata::from_record(&Record::read(&out.metadata).unwrap()).unwrap();
        assert_eq!(meta, SimulationMetadata { kind, seed: 9 });

        let g = gen_bipartite_tnpm(30, 20, 3, 2, 0.3, 9).unwrap();
        let read = read_edge_list(&out.edges, false).unwrap();
        assert_eq!(read.adjacency, g.adjacency);
        let z = read_labels(&out.row_labels).unwrap().align(&read.row_ids).unwrap();
        assert_eq!(z.as_slice(), g.z_true.as_slice());
    }

    #[test]
    fn undirected_stores_each_edge_once() {
        let dir = tempfile::tempdir().unwrap();
        let kind = SimulateKind::Undirected { nodes: 40, homophily: 2.0 };
        let out = cmd_simulate(&kind, 1, &dir.path().join("u")).unwrap();
        let g = gen_undirected_pabm(40, 2.0, 1).unwrap();
        let text = std::fs::read_to_string(&out.edges).unwrap();
        let lines = text.lines().filter(|l| !l.starts_with('#')).count();
        assert_eq!(lines, g.adjacency.nnz() / 2);
        assert_eq!(read_undirected_edge_list(&out.edges, false).unwrap().adjacency, g.adjacency);
    }

    #[test]
    fn same_seed_same_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let kind = SimulateKind::Bipartite { rows: 25, cols: 15, k: 2, l: 2, density: 1.0 };
        let a = cmd_simulate(&kind, 4, &dir.path().join("a")).unwrap();
        let b = cmd_simulate(&kind, 4, &dir.path().join("b")).unwrap();
        for (x, y) in [(a.edges, b.edges), (a.row_labels, b.row_labels), (a.metadata, b.metadata)] {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        }
    }

    #[test]
    fn unwritable_prefix_is_an_error() {
        let kind = SimulateKind::Undirected { nodes: 4, homophily: 1.0 };
        let err = cmd_simulate(&kind, 0, Path::new("/nonexistent-dir/x")).unwrap_err();
        assert!(matches!(err, TnpmError::Io { .. }));
    }
}
