use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Result, TnpmError};
use crate::io::FORMAT_VERSION;
use crate::model::BipartiteAdjacency;

const ROW_PRAGMA: &str = "#@row\t";
const COL_PRAGMA: &str = "#@col\t";
const NODE_PRAGMA: &str = "#@node\t";
const HEADER_NAMES: &[&str] = &[
    "row", "row_id", "col", "col_id", "column", "source", "target", "user", "item", "node",
    "from", "to", "src", "dst",
];

/// Adjacency matrix together with the original node ids.
///
/// For undirected networks `row_ids` and `col_ids` are the same list.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    pub adjacency: BipartiteAdjacency,
    pub row_ids: Vec<String>,
    pub col_ids: Vec<String>,
}

#[derive(Default)]
struct IdMap {
    index: HashMap<String, usize>,
    ids: Vec<String>,
}

impl IdMap {
    fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.index.insert(id.to_owned(), i);
        self.ids.push(id.to_owned());
        i
    }
}

struct Line<'a> {
    source: &'a str,
    target: &'a str,
    count: u32,
}

enum Event<'a> {
    Declare(&'static str, &'a str),
    Edge(Line<'a>),
}

/// Reads a bipartite edge list (`row<TAB>col[<TAB>count]`).
///
/// Ids map to indices in order of first appearance; `#@row` and `#@col`
/// lines declare ids ahead of the edges, which keeps isolated nodes. A first
/// line whose count field is not an integer, or whose two fields are common
/// column names, is taken as a header. Fields after the third are ignored.
/// Duplicate pairs sum. With `binary`, every positive count becomes 1.
pub fn read_edge_list(path: &Path, binary: bool) -> Result<EdgeList> {
    let file = File::open(path).map_err(|e| TnpmError::io(path, e))?;
    parse_edge_list(BufReader::new(file), path, binary)
}

pub fn parse_edge_list<R: BufRead>(reader: R, path: &Path, binary: bool) -> Result<EdgeList> {
    let (mut rows, mut cols) = (IdMap::default(), IdMap::default());
    let mut triplets = Vec::new();
    scan(reader, path, |event| {
        match event {
            Event::Declare(ROW_PRAGMA, id) => {
                rows.intern(id);
            }
            Event::Declare(COL_PRAGMA, id) => {
                cols.intern(id);
            }
            Event::Declare(pragma, _) => {
                return Err(format!("'{}' declarations belong in undirected edge lists", pragma.trim()))
            }
            Event::Edge(line) => {
                triplets.push((rows.intern(line.source), cols.intern(line.target), line.count))
            }
        }
        Ok(())
    })?;
    let adjacency = BipartiteAdjacency::from_triplets(rows.ids.len(), cols.ids.len(), triplets)?;
    Ok(EdgeList {
        adjacency: if binary { adjacency.binarized() } else { adjacency },
        row_ids: rows.ids,
        col_ids: cols.ids,
    })
}

/// Reads an undirected edge list, one line per edge in either orientation.
///
/// Ids share one index space; `#@node` lines declare ids. Self-loops are
/// rejected. Repeated lines in the same orientation sum. A pair may also be
/// listed in both orientations, as in a full symmetric listing, but then the
/// two totals must agree; otherwise the input is asymmetric and rejected.
pub fn read_undirected_edge_list(path: &Path, binary: bool) -> Result<EdgeList> {
    let file = File::open(path).map_err(|e| TnpmError::io(path, e))?;
    parse_undirected_edge_list(BufReader::new(file), path, binary)
}

pub fn parse_undirected_edge_list<R: BufRead>(
    reader: R,
    path: &Path,
    binary: bool,
) -> Result<EdgeList> {
    let mut nodes = IdMap::default();
    let mut pairs: HashMap<(usize, usize), u32> = HashMap::new();
    scan(reader, path, |event| {
        match event {
            Event::Declare(NODE_PRAGMA, id) => {
                nodes.intern(id);
            }
            Event::Declare(pragma, _) => {
                return Err(format!("'{}' declarations belong in bipartite edge lists", pragma.trim()))
            }
            Event::Edge(line) => {
                let (i, j) = (nodes.intern(line.source), nodes.intern(line.target));
                if i == j {
                    return Err(format!("self-loop on node '{}'", line.source));
                }
                let slot = pairs.entry((i, j)).or_default();
                *slot = slot
                    .checked_add(line.count)
                    .ok_or_else(|| "edge count overflows u32".to_string())?;
            }
        }
        Ok(())
    })?;
    let n = nodes.ids.len();
    let mut triplets = Vec::with_capacity(2 * pairs.len());
    for (&(i, j), &c) in &pairs {
        match pairs.get(&(j, i)) {
            Some(&back) if back != c => {
                return Err(TnpmError::InvalidInput(format!(
                    "asymmetric input: '{}'-'{}' has count {c} but '{}'-'{}' has {back}",
                    nodes.ids[i], nodes.ids[j], nodes.ids[j], nodes.ids[i]
                )));
            }
            Some(_) if i > j => {}
            _ => triplets.extend([(i, j, c), (j, i, c)]),
        }
    }
    let adjacency = BipartiteAdjacency::from_triplets(n, n, triplets)?;
    Ok(EdgeList {
        adjacency: if binary { adjacency.binarized() } else { adjacency },
        row_ids: nodes.ids.clone(),
        col_ids: nodes.ids,
    })
}

fn scan<R, F>(reader: R, path: &Path, mut handle: F) -> Result<()>
where
    R: BufRead,
    F: FnMut(Event<'_>) -> std::result::Result<(), String>,
{
    let parse_err = |line: usize, message: String| TnpmError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut seen_data = false;
    for (index, text) in reader.lines().enumerate() {
        let number = index + 1;
        let text = text.map_err(|e| TnpmError::io(path, e))?;
        let text = text.trim_end_matches('\r');
        if text.trim().is_empty() {
            continue;
        }
        if let Some(pragma) = [ROW_PRAGMA, COL_PRAGMA, NODE_PRAGMA]
            .into_iter()
            .find(|p| text.starts_with(p))
        {
            let id = &text[pragma.len()..];
            if id.is_empty() || id.contains('\t') {
                return Err(parse_err(number, format!("malformed declaration '{text}'")));
            }
            handle(Event::Declare(pragma, id)).map_err(|m| parse_err(number, m))?;
            continue;
        }
        if text.starts_with('#') {
            continue;
        }

        let fields: Vec<&str> = text.split('\t').collect();
        let first_data = !seen_data;
        seen_data = true;
        if fields.len() < 2 {
            return Err(parse_err(number, format!("expected at least two tab-separated fields, got '{text}'")));
        }
        let count = fields.get(2).map(|raw| raw.trim().parse::<i64>());
        if first_data && looks_like_header(&fields, &count) {
            continue;
        }
        let count = match count {
            None => 1,
            Some(Ok(c)) if c >= 1 && c <= i64::from(u32::MAX) => c as u32,
            Some(Ok(c)) => return Err(parse_err(number, format!("count must be a positive integer, got {c}"))),
            Some(Err(_)) => {
                return Err(parse_err(number, format!("count '{}' is not an integer", fields[2])))
            }
        };
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(parse_err(number, "empty node id".into()));
        }
        handle(Event::Edge(Line {
            source: fields[0],
            target: fields[1],
            count,
        }))
        .map_err(|m| parse_err(number, m))?;
    }
    Ok(())
}

fn looks_like_header(fields: &[&str], count: &Option<std::result::Result<i64, std::num::ParseIntError>>) -> bool {
    match count {
        Some(Err(_)) => true,
        Some(Ok(_)) => false,
        None => fields[..2]
            .iter()
            .all(|f| HEADER_NAMES.contains(&f.trim().to_ascii_lowercase().as_str())),
    }
}

/// Writes a bipartite edge list with id declarations, so reading it back
/// reproduces the matrix and id order exactly.
pub fn write_edge_list(path: &Path, edges: &EdgeList) -> Result<()> {
    let a = &edges.adjacency;
    if edges.row_ids.len() != a.rows() || edges.col_ids.len() != a.cols() {
        return Err(TnpmError::Dimension("id lists do not match the matrix".into()));
    }
    write_with(path, |out| {
        writeln!(out, "# tnpm bipartite edge list")?;
        writeln!(out, "# format_version\t{FORMAT_VERSION}")?;
        for id in &edges.row_ids {
            writeln!(out, "{ROW_PRAGMA}{id}")?;
        }
        for id in &edges.col_ids {
            writeln!(out, "{COL_PRAGMA}{id}")?;
        }
        for e in a.entries() {
            writeln!(out, "{}\t{}\t{}", edges.row_ids[e.row], edges.col_ids[e.col], e.count)?;
        }
        Ok(())
    })
}

/// Writes a symmetric matrix as an undirected edge list, each edge once with
/// the smaller index first.
pub fn write_undirected_edge_list(path: &Path, adjacency: &BipartiteAdjacency, ids: &[String]) -> Result<()> {
    if !adjacency.is_square() || !adjacency.is_symmetric() || !adjacency.has_zero_diagonal() {
        return Err(TnpmError::InvalidInput(
            "undirected edge lists need a symmetric matrix with zero diagonal".into(),
        ));
    }
    if ids.len() != adjacency.rows() {
        return Err(TnpmError::Dimension("id list does not match the matrix".into()));
    }
    write_with(path, |out| {
        writeln!(out, "# tnpm undirected edge list")?;
        writeln!(out, "# format_version\t{FORMAT_VERSION}")?;
        for id in ids {
            writeln!(out, "{NODE_PRAGMA}{id}")?;
        }
        for e in adjacency.entries().iter().filter(|e| e.row < e.col) {
            writeln!(out, "{}\t{}\t{}", ids[e.row], ids[e.col], e.count)?;
        }
        Ok(())
    })
}

pub(crate) fn write_with<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let file = File::create(path).map_err(|e| TnpmError::io(path, e))?;
    let mut out = BufWriter::new(file);
    body(&mut out)
        .and_then(|()| out.flush())
        .map_err(|e| TnpmError::io(path, e))
}
