use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::error::{Result, TnpmError};

/// Tolerance on row sums accepted by [`SoftAssignment::new`].
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Row-stochastic matrix of membership probabilities, `nodes x clusters`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftAssignment {
    probs: Array2<f64>,
}

impl SoftAssignment {
    pub fn new(probs: Array2<f64>) -> Result<Self> {
        if probs.ncols() == 0 {
            return Err(TnpmError::InvalidInput(
                "assignment needs at least one cluster".into(),
            ));
        }
        for (i, row) in probs.outer_iter().enumerate() {
            if let Some(bad) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(TnpmError::InvalidInput(format!(
                    "row {i} has probability {bad} outside [0, 1]"
                )));
            }
            let sum = row.sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(TnpmError::InvalidInput(format!(
                    "row {i} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(Self { probs })
    }

    /// Caller guarantees every row is a probability vector.
    pub(crate) fn from_normalized(probs: Array2<f64>) -> Self {
        debug_assert!(probs
            .outer_iter()
            .all(|r| (r.sum() - 1.0).abs() <= 1e-9));
        Self { probs }
    }

    pub fn uniform(nodes: usize, clusters: usize) -> Self {
        Self {
            probs: Array2::from_elem((nodes, clusters), 1.0 / clusters as f64),
        }
    }

    /// The degenerate 0-1 matrix of a hard labeling.
    pub fn from_hard(labels: &HardLabels) -> Self {
        let mut probs = Array2::zeros((labels.len(), labels.clusters()));
        for (i, &k) in labels.as_slice().iter().enumerate() {
            probs[[i, k]] = 1.0;
        }
        Self { probs }
    }

    pub fn nodes(&self) -> usize {
        self.probs.nrows()
    }

    pub fn clusters(&self) -> usize {
        self.probs.ncols()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.probs
    }

    pub fn into_matrix(self) -> Array2<f64> {
        self.probs
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.probs.row(i)
    }

    pub fn column_means(&self) -> Array1<f64> {
        self.probs
            .mean_axis(Axis(0))
            .unwrap_or_else(|| Array1::zeros(self.clusters()))
    }

    /// True if every row puts all of its mass on one cluster.
    pub fn is_degenerate(&self) -> bool {
        self.probs
            .outer_iter()
            .all(|r| r.iter().all(|&p| p == 0.0 || p == 1.0))
    }

    /// Per-row argmax, ties going to the smallest cluster index.
    pub fn hard_labels(&self) -> HardLabels {
        let labels = self
            .probs
            .outer_iter()
            .map(|row| {
                let mut best = 0;
                for (k, &p) in row.iter().enumerate().skip(1) {
                    if p > row[best] {
                        best = k;
                    }
                }
                best
            })
            .collect();
        HardLabels {
            labels,
            clusters: self.clusters(),
        }
    }
}

/// Cluster index per node, each in `[0, clusters)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HardLabels {
    labels: Vec<usize>,
    clusters: usize,
}

impl HardLabels {
    pub fn new(labels: Vec<usize>, clusters: usize) -> Result<Self> {
        if clusters == 0 {
            return Err(TnpmError::InvalidInput("cluster count must be positive".into()));
        }
        if let Some((i, &k)) = labels.iter().enumerate().find(|(_, &k)| k >= clusters) {
            return Err(TnpmError::InvalidInput(format!(
                "label {k} of node {i} is outside [0, {clusters})"
            )));
        }
        Ok(Self { labels, clusters })
    }

    /// Uses one more than the largest label as the cluster count.
    pub fn from_labels(labels: Vec<usize>) -> Self {
        let clusters = labels.iter().max().map_or(1, |&k| k + 1);
        Self { labels, clusters }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn clusters(&self) -> usize {
        self.clusters
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.labels
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.labels
    }

    pub fn get(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.clusters];
        for &k in &self.labels {
            sizes[k] += 1;
        }
        sizes
    }

    pub fn to_soft(&self) -> SoftAssignment {
        SoftAssignment::from_hard(self)
    }

    /// Relabels cluster `k` as `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.clusters {
            return Err(TnpmError::Dimension(format!(
                "permutation of length {} for {} clusters",
                perm.len(),
                self.clusters
            )));
        }
        Self::new(self.labels.iter().map(|&k| perm[k]).collect(), self.clusters)
    }
}
