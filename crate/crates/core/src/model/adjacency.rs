use ndarray::Array2;

use crate::error::{Result, TnpmError};

/// One stored nonzero of an adjacency matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub row: usize,
    pub col: usize,
    pub count: u32,
}

/// Sparse `m x n` matrix of non-negative integer edge counts.
///
/// Entries are kept as a coordinate list sorted by `(row, col)` with no
/// duplicates and no stored zeros. Row and column sums are cached.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteAdjacency {
    rows: usize,
    cols: usize,
    entries: Vec<Entry>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
}

impl BipartiteAdjacency {
    /// Builds a matrix from `(row, col, count)` triplets. Duplicate
    /// coordinates are summed and zero counts dropped.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, u32)>,
    {
        let mut entries = Vec::new();
        for (row, col, count) in triplets {
            if row >= rows || col >= cols {
                return Err(TnpmError::InvalidInput(format!(
                    "entry ({row}, {col}) outside a {rows} x {cols} matrix"
                )));
            }
            if count > 0 {
                entries.push(Entry { row, col, count });
            }
        }
        entries.sort_unstable_by_key(|e| (e.row, e.col));

        let mut merged: Vec<Entry> = Vec::with_capacity(entries.len());
        for e in entries {
            match merged.last_mut() {
                Some(last) if last.row == e.row && last.col == e.col => {
                    last.count = last.count.checked_add(e.count).ok_or_else(|| {
                        TnpmError::InvalidInput(format!("count overflow at ({}, {})", e.row, e.col))
                    })?;
                }
                _ => merged.push(e),
            }
        }

        let mut row_sums = vec![0u64; rows];
        let mut col_sums = vec![0u64; cols];
        for e in &merged {
            row_sums[e.row] += u64::from(e.count);
            col_sums[e.col] += u64::from(e.count);
        }
        Ok(Self {
            rows,
            cols,
            entries: merged,
            row_sums,
            col_sums,
        })
    }

    /// Builds a sparse matrix from a dense array of counts.
    pub fn from_dense(dense: &Array2<u32>) -> Self {
        let (rows, cols) = dense.dim();
        let triplets = dense
            .indexed_iter()
            .filter(|(_, &c)| c > 0)
            .map(|((i, j), &c)| (i, j, c));
        Self::from_triplets(rows, cols, triplets).expect("dense indices are in range")
    }

    pub fn empty(rows: usize, cols: usize) -> Self {
        Self::from_triplets(rows, cols, std::iter::empty()).expect("no entries")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn total(&self) -> u64 {
        self.row_sums.iter().sum()
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.entries
            .binary_search_by_key(&(row, col), |e| (e.row, e.col))
            .map(|idx| self.entries[idx].count)
            .unwrap_or(0)
    }

    pub fn transpose(&self) -> Self {
        let triplets = self.entries.iter().map(|e| (e.col, e.row, e.count));
        Self::from_triplets(self.cols, self.rows, triplets).expect("transpose stays in range")
    }

    /// Every positive count replaced by 1.
    pub fn binarized(&self) -> Self {
        let triplets = self.entries.iter().map(|e| (e.row, e.col, 1));
        Self::from_triplets(self.rows, self.cols, triplets).expect("same shape")
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && self
                .entries
                .iter()
                .all(|e| self.get(e.col, e.row) == e.count)
    }

    pub fn has_zero_diagonal(&self) -> bool {
        self.entries.iter().all(|e| e.row != e.col)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.rows, self.cols));
        for e in &self.entries {
            out[[e.row, e.col]] = f64::from(e.count);
        }
        out
    }

    /// `A * x` for a dense `n x r` matrix `x`.
    pub fn mul_dense(&self, x: &Array2<f64>) -> Array2<f64> {
        assert_eq!(x.nrows(), self.cols, "inner dimension");
        let mut out = Array2::zeros((self.rows, x.ncols()));
        for e in &self.entries {
            let a = f64::from(e.count);
            let src = x.row(e.col);
            let mut dst = out.row_mut(e.row);
            dst.scaled_add(a, &src);
        }
        out
    }

    /// `A^T * x` for a dense `m x r` matrix `x`.
    pub fn tmul_dense(&self, x: &Array2<f64>) -> Array2<f64> {
        assert_eq!(x.nrows(), self.rows, "inner dimension");
        let mut out = Array2::zeros((self.cols, x.ncols()));
        for e in &self.entries {
            let a = f64::from(e.count);
            let src = x.row(e.row);
            let mut dst = out.row_mut(e.col);
            dst.scaled_add(a, &src);
        }
        out
    }

    /// `sum_ij log(A_ij!)`, the label-independent constant of the Poisson
    /// likelihood.
    pub fn log_factorial_sum(&self) -> f64 {
        let mut cache = LogFactorialCache::default();
        self.entries.iter().map(|e| cache.get(e.count)).sum()
    }
}

/// `log(c!)` memoized per distinct count.
#[derive(Debug, Default)]
pub(crate) struct LogFactorialCache {
    values: Vec<f64>,
}

impl LogFactorialCache {
    pub(crate) fn get(&mut self, count: u32) -> f64 {
        let c = count as usize;
        if c < 2 {
            return 0.0;
        }
        if c < 1024 {
            if self.values.len() <= c {
                let start = self.values.len();
                self.values.resize(c + 1, f64::NAN);
                for k in start..=c {
                    self.values[k] = statrs::function::gamma::ln_gamma(k as f64 + 1.0);
                }
            }
            self.values[c]
        } else {
            statrs::function::gamma::ln_gamma(c as f64 + 1.0)
        }
    }
}
