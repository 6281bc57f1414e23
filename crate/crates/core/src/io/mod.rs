//! Text formats: edge lists, label files, and key/value records for
//! fitted models, run summaries and simulation metadata.

mod edgelist;
mod labels;
mod record;

pub use edgelist::{
    parse_edge_list, parse_undirected_edge_list, read_edge_list, read_undirected_edge_list,
    write_edge_list, write_undirected_edge_list, EdgeList,
};
pub(crate) use edgelist::write_with;
pub use labels::{parse_labels, read_labels, write_labels, LabelFile};
pub(crate) use record::fmt_f64;
pub use record::{Record, Value};

/// Version written into, and required from, every structured file.
pub const FORMAT_VERSION: u32 = 1;
