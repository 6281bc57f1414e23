use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Result, TnpmError};
use crate::io::edgelist::write_with;
use crate::io::FORMAT_VERSION;

/// One value in a [`Record`].
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Text(String),
    Vector(Vec<f64>),
    Matrix(Array2<f64>),
}

/// Ordered key/value document in a line-oriented text format.
///
/// ```text
/// format_version<TAB>1
/// kind<TAB>fit_summary
/// scalar<TAB>elbo<TAB>-1234.5
/// vector<TAB>pi<TAB>2<TAB>0.25<TAB>0.75
/// matrix<TAB>theta<TAB>2<TAB>3
/// <three tab-separated numbers, twice>
/// ```
///
/// Numbers are written in their shortest round-trip form.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub kind: String,
    pub entries: Vec<(String, Value)>,
}

pub(crate) fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl Record {
    pub fn new(kind: &str) -> Self {
        Self {
            kind: kind.to_owned(),
            entries: Vec::new(),
        }
    }

    pub fn text(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.push(key, Value::Text(value.to_string()))
    }

    pub fn number(&mut self, key: &str, value: f64) -> &mut Self {
        self.push(key, Value::Text(fmt_f64(value)))
    }

    pub fn vector(&mut self, key: &str, values: impl IntoIterator<Item = f64>) -> &mut Self {
        self.push(key, Value::Vector(values.into_iter().collect()))
    }

    pub fn matrix(&mut self, key: &str, values: &Array2<f64>) -> &mut Self {
        self.push(key, Value::Matrix(values.clone()))
    }

    fn push(&mut self, key: &str, value: Value) -> &mut Self {
        assert!(
            !key.is_empty() && !key.contains(['\t', '\n']),
            "record keys are non-empty and free of tabs and newlines"
        );
        self.entries.push((key.to_owned(), value));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn get_text(&self, key: &str) -> Result<&str> {
        match self.get(key) {
            Some(Value::Text(s)) => Ok(s),
            _ => Err(missing(key, "scalar")),
        }
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        let s = self.get_text(key)?;
        s.parse()
            .map_err(|_| TnpmError::InvalidInput(format!("field '{key}' is not a number: '{s}'")))
    }

    pub fn get_vector(&self, key: &str) -> Result<&[f64]> {
        match self.get(key) {
            Some(Value::Vector(v)) => Ok(v),
            _ => Err(missing(key, "vector")),
        }
    }

    pub fn get_matrix(&self, key: &str) -> Result<&Array2<f64>> {
        match self.get(key) {
            Some(Value::Matrix(m)) => Ok(m),
            _ => Err(missing(key, "matrix")),
        }
    }

    pub fn render(&self) -> String {
        let mut out = format!("format_version\t{FORMAT_VERSION}\nkind\t{}\n", self.kind);
        for (key, value) in &self.entries {
            match value {
                Value::Text(s) => {
                    out.push_str(&format!("scalar\t{key}\t{}\n", s.replace(['\t', '\n'], " ")))
                }
                Value::Vector(v) => {
                    out.push_str(&format!("vector\t{key}\t{}", v.len()));
                    for x in v {
                        out.push('\t');
                        out.push_str(&fmt_f64(*x));
                    }
                    out.push('\n');
                }
                Value::Matrix(m) => {
                    out.push_str(&format!("matrix\t{key}\t{}\t{}\n", m.nrows(), m.ncols()));
                    for row in m.rows() {
                        let cells: Vec<String> = row.iter().map(|x| fmt_f64(*x)).collect();
                        out.push_str(&cells.join("\t"));
                        out.push('\n');
                    }
                }
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = self.render();
        write_with(path, |out| out.write_all(text.as_bytes()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| TnpmError::io(path, e))?;
        Self::parse(BufReader::new(file), path)
    }

    pub fn parse<R: BufRead>(reader: R, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| TnpmError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = reader
            .lines()
            .enumerate()
            .map(|(i, l)| l.map(|t| (i + 1, t.trim_end_matches('\r').to_owned())))
            .filter(|r| r.as_ref().map_or(true, |(_, t)| !t.starts_with('#') && !t.is_empty()));
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some(Ok(l)) => Ok(l),
                Some(Err(e)) => Err(TnpmError::io(path, e)),
                None => Err(err(0, format!("unexpected end of file, expected {what}"))),
            }
        };

        let (n, version) = next("format_version")?;
        match version.split_once('\t') {
            Some(("format_version", v)) if v == FORMAT_VERSION.to_string() => {}
            Some(("format_version", v)) => {
                return Err(err(n, format!("unsupported format_version {v}, expected {FORMAT_VERSION}")))
            }
            _ => return Err(err(n, "missing format_version line".into())),
        }
        let (n, kind) = next("kind")?;
        let kind = match kind.split_once('\t') {
            Some(("kind", k)) => k.to_owned(),
            _ => return Err(err(n, "missing kind line".into())),
        };

        let number = |line: usize, s: &str| -> Result<f64> {
            s.parse().map_err(|_| err(line, format!("'{s}' is not a number")))
        };
        let count = |line: usize, s: &str| -> Result<usize> {
            s.parse().map_err(|_| err(line, format!("'{s}' is not a count")))
        };
        let mut record = Record::new(&kind);
        loop {
            let (n, line) = match next("") {
                Ok(l) => l,
                Err(TnpmError::Parse { line: 0, .. }) => break,
                Err(e) => return Err(e),
            };
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                ["scalar", key, value] => {
                    record.text(key, value);
                }
                ["vector", key, len, values @ ..] => {
                    let len = count(n, len)?;
                    if values.len() != len {
                        return Err(err(n, format!("vector '{key}' declares {len} values, has {}", values.len())));
                    }
                    let v = values.iter().map(|s| number(n, s)).collect::<Result<Vec<_>>>()?;
                    record.vector(key, v);
                }
                ["matrix", key, rows, cols] => {
                    let (rows, cols) = (count(n, rows)?, count(n, cols)?);
                    let key = key.to_string();
                    let mut data = Vec::with_capacity(rows * cols);
                    for _ in 0..rows {
                        let (rn, row) = next(&format!("row of matrix '{key}'"))?;
                        let cells: Vec<&str> = if cols == 0 { Vec::new() } else { row.split('\t').collect() };
                        if cells.len() != cols {
                            return Err(err(rn, format!("matrix '{key}' row has {} values, expected {cols}", cells.len())));
                        }
                        for c in cells {
                            data.push(number(rn, c)?);
                        }
                    }
                    let m = Array2::from_shape_vec((rows, cols), data).expect("sized above");
                    record.matrix(&key, &m);
                }
                _ => return Err(err(n, format!("unrecognized line '{line}'"))),
            }
        }
        Ok(record)
    }
}

fn missing(key: &str, what: &str) -> TnpmError {
    TnpmError::InvalidInput(format!("record has no {what} field '{key}'"))
}
