use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Result, TnpmError};
use crate::io::edgelist::write_with;
use crate::io::FORMAT_VERSION;
use crate::model::HardLabels;

/// Contents of a label file, in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelFile {
    pub ids: Vec<String>,
    pub clusters: Vec<usize>,
}

impl LabelFile {
    pub fn new(ids: Vec<String>, labels: &HardLabels) -> Result<Self> {
        if ids.len() != labels.len() {
            return Err(TnpmError::Dimension(format!(
                "{} ids for {} labels",
                ids.len(),
                labels.len()
            )));
        }
        Ok(Self {
            ids,
            clusters: labels.as_slice().to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Labels in the order of `ids`, with the cluster count taken from the
    /// largest index. Fails listing any id that has no label.
    pub fn align(&self, ids: &[String]) -> Result<HardLabels> {
        let by_id: HashMap<&str, usize> = self
            .ids
            .iter()
            .map(String::as_str)
            .zip(self.clusters.iter().copied())
            .collect();
        let missing: Vec<&str> = ids
            .iter()
            .map(String::as_str)
            .filter(|id| !by_id.contains_key(id))
            .collect();
        if !missing.is_empty() {
            return Err(TnpmError::InvalidInput(format!(
                "no label for {} node(s): {}",
                missing.len(),
                preview(&missing)
            )));
        }
        Ok(HardLabels::from_labels(
            ids.iter().map(|id| by_id[id.as_str()]).collect(),
        ))
    }

    /// Both files aligned on a shared node set, in this file's order. Fails
    /// listing the ids present in only one of them.
    pub fn align_with(&self, other: &LabelFile) -> Result<(HardLabels, HardLabels)> {
        let mine: HashSet<&str> = self.ids.iter().map(String::as_str).collect();
        let theirs: HashSet<&str> = other.ids.iter().map(String::as_str).collect();
        let only_mine: Vec<&str> = self.ids.iter().map(String::as_str).filter(|id| !theirs.contains(id)).collect();
        let only_theirs: Vec<&str> = other.ids.iter().map(String::as_str).filter(|id| !mine.contains(id)).collect();
        if !only_mine.is_empty() || !only_theirs.is_empty() {
            let mut parts = Vec::new();
            if !only_mine.is_empty() {
                parts.push(format!("missing from second file: {}", preview(&only_mine)));
            }
            if !only_theirs.is_empty() {
                parts.push(format!("missing from first file: {}", preview(&only_theirs)));
            }
            return Err(TnpmError::InvalidInput(format!(
                "label files cover different nodes; {}",
                parts.join("; ")
            )));
        }
        Ok((
            HardLabels::from_labels(self.clusters.clone()),
            other.align(&self.ids)?,
        ))
    }
}

fn preview(ids: &[&str]) -> String {
    const SHOWN: usize = 20;
    let mut s = ids.iter().take(SHOWN).copied().collect::<Vec<_>>().join(", ");
    if ids.len() > SHOWN {
        s.push_str(&format!(", ... ({} more)", ids.len() - SHOWN));
    }
    s
}

/// Reads `id<TAB>cluster` lines. `#` lines are comments; a first line whose
/// cluster field is not an integer is a header. Each id may appear once.
pub fn read_labels(path: &Path) -> Result<LabelFile> {
    let file = File::open(path).map_err(|e| TnpmError::io(path, e))?;
    parse_labels(BufReader::new(file), path)
}

pub fn parse_labels<R: BufRead>(reader: R, path: &Path) -> Result<LabelFile> {
    let parse_err = |line: usize, message: String| TnpmError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut out = LabelFile {
        ids: Vec::new(),
        clusters: Vec::new(),
    };
    let mut seen = HashSet::new();
    let mut first = true;
    for (index, text) in reader.lines().enumerate() {
        let number = index + 1;
        let text = text.map_err(|e| TnpmError::io(path, e))?;
        let text = text.trim_end_matches('\r');
        if text.trim().is_empty() || text.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != 2 {
            return Err(parse_err(number, format!("expected 'id<TAB>cluster', got '{text}'")));
        }
        let cluster = fields[1].trim().parse::<usize>();
        if std::mem::take(&mut first) && cluster.is_err() {
            continue;
        }
        let cluster = cluster.map_err(|_| {
            parse_err(number, format!("cluster '{}' is not a non-negative integer", fields[1]))
        })?;
        if !seen.insert(fields[0].to_owned()) {
            return Err(parse_err(number, format!("duplicate id '{}'", fields[0])));
        }
        out.ids.push(fields[0].to_owned());
        out.clusters.push(cluster);
    }
    Ok(out)
}

pub fn write_labels(path: &Path, labels: &LabelFile) -> Result<()> {
    write_with(path, |out| {
        writeln!(out, "# tnpm labels, format_version {FORMAT_VERSION}")?;
        for (id, c) in labels.ids.iter().zip(&labels.clusters) {
            writeln!(out, "{id}\t{c}")?;
        }
        Ok(())
    })
}
