use ndarray::Array2;

use crate::error::{Result, TnpmError};
use crate::model::{HardLabels, SoftAssignment};

/// Largest cluster count for which misclustering uses full enumeration.
pub const EXHAUSTIVE_MAX_CLUSTERS: usize = 8;

/// Soft confusion matrix `R[k, k'] = (1/m) sum_i qa[i, k] qb[i, k']`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    pub matrix: Array2<f64>,
    /// The `1/m` factor that was applied.
    pub normalization: f64,
}

fn unnormalized(qa: &SoftAssignment, qb: &SoftAssignment) -> Result<Array2<f64>> {
    if qa.nodes() != qb.nodes() {
        return Err(TnpmError::Dimension(format!(
            "assignments over {} and {} nodes",
            qa.nodes(),
            qb.nodes()
        )));
    }
    Ok(qa.matrix().t().dot(qb.matrix()))
}

pub fn soft_confusion(qa: &SoftAssignment, qb: &SoftAssignment) -> Result<ConfusionMatrix> {
    let raw = unnormalized(qa, qb)?;
    let normalization = 1.0 / qa.nodes().max(1) as f64;
    Ok(ConfusionMatrix {
        matrix: raw * normalization,
        normalization,
    })
}

/// Misclustering rate of `q` against true labels, minimized over relabelings.
///
/// Uses full enumeration of permutations up to eight clusters and an optimal
/// assignment beyond that. Rectangular confusion matrices are padded with
/// zeros to square.
pub fn misclustering_rate(truth: &HardLabels, q: &SoftAssignment) -> Result<f64> {
    let raw = padded(truth, q)?;
    let best = if raw.nrows() <= EXHAUSTIVE_MAX_CLUSTERS {
        best_trace_exhaustive(&raw)
    } else {
        best_trace_assignment(&raw)
    };
    Ok(rate(best, truth.len()))
}

/// [`misclustering_rate`] by enumerating every permutation.
pub fn misclustering_rate_exhaustive(truth: &HardLabels, q: &SoftAssignment) -> Result<f64> {
    let raw = padded(truth, q)?;
    if raw.nrows() > 10 {
        return Err(TnpmError::InvalidInput(format!(
            "{} clusters is too many to enumerate",
            raw.nrows()
        )));
    }
    Ok(rate(best_trace_exhaustive(&raw), truth.len()))
}

/// [`misclustering_rate`] by solving the assignment problem.
pub fn misclustering_rate_assignment(truth: &HardLabels, q: &SoftAssignment) -> Result<f64> {
    let raw = padded(truth, q)?;
    Ok(rate(best_trace_assignment(&raw), truth.len()))
}

fn rate(best_trace: f64, nodes: usize) -> f64 {
    if nodes == 0 {
        return 0.0;
    }
    (1.0 - best_trace / nodes as f64).clamp(0.0, 1.0)
}

/// Unnormalized confusion against the truth, zero-padded to square.
fn padded(truth: &HardLabels, q: &SoftAssignment) -> Result<Array2<f64>> {
    if truth.len() != q.nodes() {
        return Err(TnpmError::Dimension(format!(
            "{} true labels for {} assigned nodes",
            truth.len(),
            q.nodes()
        )));
    }
    let mut raw = Array2::zeros((truth.clusters(), q.clusters()));
    for (i, &k) in truth.as_slice().iter().enumerate() {
        let mut row = raw.row_mut(k);
        row += &q.row(i);
    }
    let size = raw.nrows().max(raw.ncols());
    let mut square = Array2::zeros((size, size));
    square
        .slice_mut(ndarray::s![..raw.nrows(), ..raw.ncols()])
        .assign(&raw);
    Ok(square)
}

/// `max_s sum_k' R[s(k'), k']` over all permutations (Heap's algorithm).
fn best_trace_exhaustive(r: &Array2<f64>) -> f64 {
    let n = r.nrows();
    let mut perm: Vec<usize> = (0..n).collect();
    let trace = |p: &[usize]| -> f64 { p.iter().enumerate().map(|(c, &row)| r[[row, c]]).sum() };
    let mut best = trace(&perm);
    let mut counters = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            best = best.max(trace(&perm));
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    best
}

/// `max_s sum_k' R[s(k'), k']` via the Hungarian algorithm on `-R`.
fn best_trace_assignment(r: &Array2<f64>) -> f64 {
    let assignment = hungarian_min(&r.mapv(|v| -v));
    assignment
        .iter()
        .enumerate()
        .map(|(row, &col)| r[[row, col]])
        .sum()
}

/// Minimum-cost perfect matching on a square cost matrix; returns the column
/// assigned to each row. Shortest augmenting paths with potentials, `O(n^3)`.
pub(crate) fn hungarian_min(cost: &Array2<f64>) -> Vec<usize> {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols(), "square cost matrix");
    // 1-based arrays; index 0 is the virtual source
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        matched_row[0] = row;
        let mut col0 = 0;
        let mut min_to = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r0 = matched_row[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0;
            for c in 1..=n {
                if used[c] {
                    continue;
                }
                let reduced = cost[[r0 - 1, c - 1]] - u[r0] - v[c];
                if reduced < min_to[c] {
                    min_to[c] = reduced;
                    way[c] = col0;
                }
                if min_to[c] < delta {
                    delta = min_to[c];
                    col1 = c;
                }
            }
            for c in 0..=n {
                if used[c] {
                    u[matched_row[c]] += delta;
                    v[c] -= delta;
                } else {
                    min_to[c] -= delta;
                }
            }
            col0 = col1;
            if matched_row[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            matched_row[col0] = matched_row[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for c in 1..=n {
        assignment[matched_row[c] - 1] = c - 1;
    }
    assignment
}
