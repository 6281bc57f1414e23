use ndarray::{Array1, Array2};

use crate::error::{Result, TnpmError};
use crate::model::{clamp_floor, BipartiteAdjacency, HardLabels, SoftAssignment, PARAM_FLOOR};

/// Popularity parameters from the alternating estimating-equation updates.
#[derive(Debug, Clone)]
pub struct PopularityFit {
    pub theta: Array2<f64>,
    pub lambda: Array2<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

/// Closed-form popularity parameters under hard assignments.
#[derive(Debug, Clone)]
pub struct ClosedFormFit {
    pub theta: Array2<f64>,
    pub lambda: Array2<f64>,
    /// Row clusters with no members; their `lambda` columns sit at the floor.
    pub empty_row_clusters: Vec<usize>,
    /// Column clusters with no members; their `theta` columns sit at the floor.
    pub empty_col_clusters: Vec<usize>,
}

/// Mixing proportions as column means of the assignments.
pub fn m_step_mixing(qz: &SoftAssignment, qw: &SoftAssignment) -> (Array1<f64>, Array1<f64>) {
    (qz.column_means(), qw.column_means())
}

/// Numerators of the estimating equations, fixed for a given `(q^z, q^w)`:
/// `sum_j A_ij q^w_jl` (m x L) and `sum_i A_ij q^z_ik` (n x K).
fn weighted_degrees(
    a: &BipartiteAdjacency,
    qz: &SoftAssignment,
    qw: &SoftAssignment,
) -> (Array2<f64>, Array2<f64>) {
    let mut toward_cols = Array2::zeros((a.rows(), qw.clusters()));
    let mut toward_rows = Array2::zeros((a.cols(), qz.clusters()));
    for e in a.entries() {
        let c = f64::from(e.count);
        toward_cols
            .row_mut(e.row)
            .scaled_add(c, &qw.matrix().row(e.col));
        toward_rows
            .row_mut(e.col)
            .scaled_add(c, &qz.matrix().row(e.row));
    }
    (toward_cols, toward_rows)
}

/// `out[a, b] = sum_r q[r, a] p[r, b]` for row-major `q` (rows x `qa`) and
/// `p` (rows x `pb`).
fn cross_product(q: &[f64], p: &[f64], qa: usize, pb: usize, out: &mut [f64]) {
    out.fill(0.0);
    for (qr, pr) in q.chunks_exact(qa).zip(p.chunks_exact(pb)) {
        for (a, &qv) in qr.iter().enumerate() {
            if qv == 0.0 {
                continue;
            }
            for (o, &pv) in out[a * pb..(a + 1) * pb].iter_mut().zip(pr) {
                *o += qv * pv;
            }
        }
    }
}

/// In-place `out[r, c] = num[r, c] / sum_i q[r, i] agg[c, i]`, floored at
/// `PARAM_FLOOR`; a vanishing denominator means the objective does not
/// depend on that entry. Returns the largest absolute change.
fn divide_update(
    num: &[f64],
    q: &[f64],
    agg: &[f64],
    inner: usize,
    width: usize,
    out: &mut [f64],
) -> f64 {
    let mut change = 0.0f64;
    for ((or, nr), qr) in out
        .chunks_exact_mut(width)
        .zip(num.chunks_exact(width))
        .zip(q.chunks_exact(inner))
    {
        for (c, (o, &nv)) in or.iter_mut().zip(nr).enumerate() {
            let den: f64 = qr.iter().zip(&agg[c * inner..(c + 1) * inner]).map(|(x, y)| x * y).sum();
            let v = if den > 0.0 { nv / den } else { 0.0 };
            let v = if v.is_finite() && v >= PARAM_FLOOR { v } else { PARAM_FLOOR };
            change = change.max((v - *o).abs());
            *o = v;
        }
    }
    change
}

/// Alternates the two estimating equations for `theta` and `lambda` with the
/// assignments held fixed.
///
/// Each sweep forms `T = q^w' lambda` (L x K) and `S = q^z' theta` (K x L) so
/// the denominators cost `O((m + n) K L)`; the numerators are computed once.
/// Stops when the largest absolute parameter change drops below `inner_tol`.
pub fn m_step_popularity_iterative(
    a: &BipartiteAdjacency,
    qz: &SoftAssignment,
    qw: &SoftAssignment,
    theta_init: &Array2<f64>,
    lambda_init: &Array2<f64>,
    inner_tol: f64,
    max_sweeps: usize,
) -> Result<PopularityFit> {
    let (m, n, k, l) = (a.rows(), a.cols(), qz.clusters(), qw.clusters());
    if qz.nodes() != m || qw.nodes() != n {
        return Err(TnpmError::Dimension(
            "assignments do not match the network".into(),
        ));
    }
    if theta_init.dim() != (m, l) || lambda_init.dim() != (n, k) {
        return Err(TnpmError::Dimension(format!(
            "initial theta {:?} / lambda {:?}, expected ({m}, {l}) / ({n}, {k})",
            theta_init.dim(),
            lambda_init.dim()
        )));
    }
    if theta_init.iter().chain(lambda_init).any(|v| !(*v > 0.0)) {
        return Err(TnpmError::Domain(
            "initial popularity parameters must be positive".into(),
        ));
    }
    if !(inner_tol > 0.0) || max_sweeps == 0 {
        return Err(TnpmError::InvalidInput(
            "inner tolerance must be positive and the sweep cap at least 1".into(),
        ));
    }
    Ok(iterate_popularity(a, qz, qw, theta_init.clone(), lambda_init.clone(), inner_tol, max_sweeps))
}

pub(crate) fn iterate_popularity(
    a: &BipartiteAdjacency,
    qz: &SoftAssignment,
    qw: &SoftAssignment,
    theta: Array2<f64>,
    lambda: Array2<f64>,
    inner_tol: f64,
    max_sweeps: usize,
) -> PopularityFit {
    let (k, l) = (qz.clusters(), qw.clusters());
    let (theta_num, lambda_num) = weighted_degrees(a, qz, qw);
    let (zq, wq) = (qz.matrix().as_standard_layout(), qw.matrix().as_standard_layout());
    let (zq, wq) = (zq.as_slice().expect("standard layout"), wq.as_slice().expect("standard layout"));
    let (theta_num, lambda_num) = (
        theta_num.as_slice().expect("standard layout"),
        lambda_num.as_slice().expect("standard layout"),
    );
    let mut theta = theta.as_standard_layout().into_owned();
    let mut lambda = lambda.as_standard_layout().into_owned();
    let mut col_agg = vec![0.0; l * k];
    let mut row_agg = vec![0.0; k * l];

    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < max_sweeps {
        sweeps += 1;
        let th = theta.as_slice_mut().expect("standard layout");
        let la = lambda.as_slice_mut().expect("standard layout");
        cross_product(wq, la, l, k, &mut col_agg);
        let mut change = divide_update(theta_num, zq, &col_agg, k, l, th);
        cross_product(zq, th, k, l, &mut row_agg);
        change = change.max(divide_update(lambda_num, wq, &row_agg, l, k, la));
        if change < inner_tol {
            converged = true;
            break;
        }
    }
    PopularityFit {
        theta,
        lambda,
        sweeps,
        converged,
    }
}

/// Closed-form maximizer of the bound in `(theta, lambda)` for hard labels:
///
/// `theta[i,l] = sum_{j in C_l} A_ij / sqrt(B[z_i, l])` and
/// `lambda[j,k] = sum_{i in R_k} A_ij / sqrt(B[k, w_j])`,
/// where `B[k,l]` is the edge total of block `(R_k, C_l)`. Entries of blocks
/// with no edges are set to `PARAM_FLOOR`.
pub fn m_step_popularity_closed(
    a: &BipartiteAdjacency,
    z: &HardLabels,
    w: &HardLabels,
) -> Result<ClosedFormFit> {
    let (m, n, k_count, l_count) = (a.rows(), a.cols(), z.clusters(), w.clusters());
    if z.len() != m || w.len() != n {
        return Err(TnpmError::Dimension(format!(
            "labels of length ({}, {}) for a {m} x {n} network",
            z.len(),
            w.len()
        )));
    }

    let mut row_to_block = Array2::<f64>::zeros((m, l_count));
    let mut col_to_block = Array2::<f64>::zeros((n, k_count));
    let mut block = Array2::<f64>::zeros((k_count, l_count));
    for e in a.entries() {
        let c = f64::from(e.count);
        let (k, l) = (z.get(e.row), w.get(e.col));
        row_to_block[[e.row, l]] += c;
        col_to_block[[e.col, k]] += c;
        block[[k, l]] += c;
    }
    let scale = block.mapv(f64::sqrt);

    let mut theta = Array2::zeros((m, l_count));
    for i in 0..m {
        let k = z.get(i);
        for l in 0..l_count {
            let s = scale[[k, l]];
            theta[[i, l]] = if s > 0.0 { row_to_block[[i, l]] / s } else { 0.0 };
        }
    }
    let mut lambda = Array2::zeros((n, k_count));
    for j in 0..n {
        let l = w.get(j);
        for k in 0..k_count {
            let s = scale[[k, l]];
            lambda[[j, k]] = if s > 0.0 { col_to_block[[j, k]] / s } else { 0.0 };
        }
    }
    clamp_floor(&mut theta);
    clamp_floor(&mut lambda);

    let empty = |sizes: Vec<usize>| -> Vec<usize> {
        sizes
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 0)
            .map(|(c, _)| c)
            .collect()
    };
    let empty_row_clusters = empty(z.cluster_sizes());
    let empty_col_clusters = empty(w.cluster_sizes());
    if !empty_row_clusters.is_empty() || !empty_col_clusters.is_empty() {
        log::debug!(
            "closed-form M-step with empty clusters: rows {empty_row_clusters:?}, cols {empty_col_clusters:?}"
        );
    }
    Ok(ClosedFormFit {
        theta,
        lambda,
        empty_row_clusters,
        empty_col_clusters,
    })
}

/// Fitted means `theta[i, l] * lambda[j, k]` averaged over the assignments,
/// which are invariant to the per-block scale of `(theta, lambda)`.
pub fn implied_means(
    qz: &SoftAssignment,
    qw: &SoftAssignment,
    theta: &Array2<f64>,
    lambda: &Array2<f64>,
) -> Array2<f64> {
    let (m, n) = (qz.nodes(), qw.nodes());
    let mut out = Array2::zeros((m, n));
    for i in 0..m {
        for j in 0..n {
            let mut v = 0.0;
            for (k, &pz) in qz.row(i).iter().enumerate() {
                if pz == 0.0 {
                    continue;
                }
                for (l, &pw) in qw.row(j).iter().enumerate() {
                    v += pz * pw * theta[[i, l]] * lambda[[j, k]];
                }
            }
            out[[i, j]] = v;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::testutil::{random_dense, random_labels, random_soft};
    use crate::vem::elbo;
    use ndarray::{array, Zip};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        Zip::from(a)
            .and(b)
            .fold(0.0f64, |acc, &x, &y| acc.max((x - y).abs()))
    }

    #[test]
    fn mixing_is_column_mean() {
        let z = HardLabels::new(vec![0, 0, 1, 1], 2).unwrap();
        let (pi, _) = m_step_mixing(&z.to_soft(), &z.to_soft());
        assert_eq!(pi, array![0.5, 0.5]);
        let q = SoftAssignment::new(array![[0.2, 0.8], [0.6, 0.4]]).unwrap();
        let (pi, rho) = m_step_mixing(&q, &SoftAssignment::uniform(3, 4));
        assert!((pi[0] - 0.4).abs() < 1e-15 && (pi[1] - 0.6).abs() < 1e-15);
        assert!(rho.iter().all(|&r| (r - 0.25).abs() < 1e-15));
    }

    #[test]
    fn closed_form_hand_case() {
        let a = BipartiteAdjacency::from_dense(&array![[4u32, 1], [1, 9]]);
        let z = HardLabels::new(vec![0, 1], 2).unwrap();
        let fit = m_step_popularity_closed(&a, &z, &z).unwrap();
        let expected = array![[2.0, 1.0], [1.0, 3.0]];
        assert_eq!(fit.theta, expected);
        assert_eq!(fit.lambda, expected);
        let means = implied_means(&z.to_soft(), &z.to_soft(), &fit.theta, &fit.lambda);
        assert_eq!(means, a.to_dense());
    }

    #[test]
    fn closed_form_all_zero() {
        let a = BipartiteAdjacency::empty(3, 4);
        let z = HardLabels::new(vec![0, 1, 1], 2).unwrap();
        let w = HardLabels::new(vec![0, 1, 2, 0], 3).unwrap();
        let fit = m_step_popularity_closed(&a, &z, &w).unwrap();
        assert!(fit.theta.iter().chain(&fit.lambda).all(|&v| v == PARAM_FLOOR));
    }

    #[test]
    fn closed_form_flags_empty_clusters() {
        let a = BipartiteAdjacency::from_dense(&array![[1u32, 2], [3, 0]]);
        let z = HardLabels::new(vec![0, 0], 2).unwrap();
        let w = HardLabels::new(vec![0, 2], 3).unwrap();
        let fit = m_step_popularity_closed(&a, &z, &w).unwrap();
        assert_eq!(fit.empty_row_clusters, vec![1]);
        assert_eq!(fit.empty_col_clusters, vec![1]);
        assert!(fit.theta.column(1).iter().all(|&v| v == PARAM_FLOOR));
    }

    #[test]
    fn converged_point_is_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let dense = random_dense(&mut rng, 8, 9, 4);
        let a = BipartiteAdjacency::from_dense(&dense);
        let qz = random_soft(&mut rng, 8, 2);
        let qw = random_soft(&mut rng, 9, 3);
        let first = m_step_popularity_iterative(
            &a, &qz, &qw, &Array2::ones((8, 3)), &Array2::ones((9, 2)), 1e-13, 10_000,
        )
        .unwrap();
        assert!(first.converged);
        let again =
            m_step_popularity_iterative(&a, &qz, &qw, &first.theta, &first.lambda, 1e-13, 10_000)
                .unwrap();
        assert!(max_abs_diff(&first.theta, &again.theta) < 1e-12);
        assert!(max_abs_diff(&first.lambda, &again.lambda) < 1e-12);
    }

    #[test]
    fn iterative_matches_closed_form_under_hard_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..20 {
            let dense = random_dense(&mut rng, 10, 12, 5);
            let a = BipartiteAdjacency::from_dense(&dense);
            let z = random_labels(&mut rng, 10, 3);
            let w = random_labels(&mut rng, 12, 4);
            let (qz, qw) = (z.to_soft(), w.to_soft());
            let closed = m_step_popularity_closed(&a, &z, &w).unwrap();
            let iter = m_step_popularity_iterative(
                &a,
                &qz,
                &qw,
                &Array2::from_shape_fn((10, 4), |_| rng.random_range(0.5..2.0)),
                &Array2::from_shape_fn((12, 3), |_| rng.random_range(0.5..2.0)),
                1e-12,
                1000,
            )
            .unwrap();
            let closed_means = implied_means(&qz, &qw, &closed.theta, &closed.lambda);
            let iter_means = implied_means(&qz, &qw, &iter.theta, &iter.lambda);
            assert!(max_abs_diff(&closed_means, &iter_means) < 1e-8);
        }
    }

    #[test]
    fn iterative_never_lowers_the_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let (m, n, k, l) = (rng.random_range(2..8), rng.random_range(2..8), 2, 3);
            let a = BipartiteAdjacency::from_dense(&random_dense(&mut rng, m, n, 4));
            let qz = random_soft(&mut rng, m, k);
            let qw = random_soft(&mut rng, n, l);
            let theta0 = Array2::from_shape_fn((m, l), |_| rng.random_range(0.1..3.0));
            let lambda0 = Array2::from_shape_fn((n, k), |_| rng.random_range(0.1..3.0));
            let fit = m_step_popularity_iterative(&a, &qz, &qw, &theta0, &lambda0, 1e-10, 100)
                .unwrap();
            let (pi, rho) = m_step_mixing(&qz, &qw);
            let before = ModelParams::new(pi.clone(), rho.clone(), theta0, lambda0).unwrap();
            let after = ModelParams::new(pi, rho, fit.theta, fit.lambda).unwrap();
            let j0 = elbo(&a, &qz, &qw, &before).unwrap();
            let j1 = elbo(&a, &qz, &qw, &after).unwrap();
            assert!(j1 >= j0 - 1e-9 * j0.abs().max(1.0), "{j1} < {j0}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let a = BipartiteAdjacency::empty(2, 2);
        let q = SoftAssignment::uniform(2, 1);
        let ok = Array2::ones((2, 1));
        assert!(m_step_popularity_iterative(&a, &q, &q, &Array2::zeros((2, 1)), &ok, 1e-8, 5).is_err());
        assert!(m_step_popularity_iterative(&a, &q, &q, &ok, &ok, 0.0, 5).is_err());
        assert!(m_step_popularity_iterative(&a, &q, &q, &Array2::ones((2, 2)), &ok, 1e-8, 5).is_err());
    }
}
