use ndarray::{Array1, Array2, Axis};

use crate::error::Result;
use crate::model::{log_mixing, BipartiteAdjacency, ModelParams, SoftAssignment};
use crate::vem::elbo::check_dims;

/// Normalizes each row of `scores` with a max-shifted softmax, in place.
pub(crate) fn softmax_rows(mut scores: Array2<f64>) -> SoftAssignment {
    for mut row in scores.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |acc, &v| acc.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let total = row.sum();
        row /= total;
    }
    SoftAssignment::from_normalized(scores)
}

/// Updates the row assignment given the column assignment and parameters.
///
/// `g(i, k) = -sum_l theta[i,l] T[l,k] + sum_j A_ij log lambda[j,k] + log pi_k`
/// with `T = q^w' lambda`. The term `sum_j A_ij sum_l q^w_jl log theta_il`
/// does not depend on `k` and cancels in the softmax, so it is not formed.
pub fn e_step_rows(
    a: &BipartiteAdjacency,
    params: &ModelParams,
    qw: &SoftAssignment,
) -> Result<SoftAssignment> {
    check_dims(a, None, Some(qw), params)?;
    Ok(e_step_rows_unchecked(a, params, qw))
}

pub(crate) fn e_step_rows_unchecked(
    a: &BipartiteAdjacency,
    params: &ModelParams,
    qw: &SoftAssignment,
) -> SoftAssignment {
    let col_agg = qw.matrix().t().dot(&params.lambda); // L x K
    let mut scores = -params.theta.dot(&col_agg); // m x K
    add_row_terms(&mut scores, &log_mixing(&params.pi));

    let log_lambda = params.lambda.mapv(f64::ln);
    for e in a.entries() {
        let mut row = scores.row_mut(e.row);
        row.scaled_add(f64::from(e.count), &log_lambda.row(e.col));
    }
    softmax_rows(scores)
}

/// Updates the column assignment given the row assignment and parameters.
pub fn e_step_cols(
    a: &BipartiteAdjacency,
    params: &ModelParams,
    qz: &SoftAssignment,
) -> Result<SoftAssignment> {
    check_dims(a, Some(qz), None, params)?;
    Ok(e_step_cols_unchecked(a, params, qz))
}

pub(crate) fn e_step_cols_unchecked(
    a: &BipartiteAdjacency,
    params: &ModelParams,
    qz: &SoftAssignment,
) -> SoftAssignment {
    let row_agg = qz.matrix().t().dot(&params.theta); // K x L
    let mut scores = -params.lambda.dot(&row_agg); // n x L
    add_row_terms(&mut scores, &log_mixing(&params.rho));

    let log_theta = params.theta.mapv(f64::ln);
    for e in a.entries() {
        let mut row = scores.row_mut(e.col);
        row.scaled_add(f64::from(e.count), &log_theta.row(e.row));
    }
    softmax_rows(scores)
}

fn add_row_terms(scores: &mut Array2<f64>, per_cluster: &Array1<f64>) {
    scores
        .axis_iter_mut(Axis(0))
        .for_each(|mut row| row += per_cluster);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_params, random_soft};
    use crate::vem::elbo;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_cluster_gives_ones() {
        let a = BipartiteAdjacency::from_dense(&array![[1u32, 0, 2], [0, 0, 3]]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_params(&mut rng, 2, 3, 1, 2);
        let qw = random_soft(&mut rng, 3, 2);
        let qz = e_step_rows(&a, &p, &qw).unwrap();
        assert!(qz.matrix().iter().all(|&v| v == 1.0));
        let p = random_params(&mut rng, 2, 3, 2, 1);
        let qw = e_step_cols(&a, &p, &random_soft(&mut rng, 2, 2)).unwrap();
        assert!(qw.matrix().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn symmetric_parameters_give_uniform() {
        let a = BipartiteAdjacency::empty(4, 5);
        let p = ModelParams::new(
            Array1::from_elem(3, 1.0 / 3.0),
            Array1::from_elem(2, 0.5),
            Array2::from_shape_fn((4, 2), |(_, l)| 0.5 + l as f64),
            Array2::from_elem((5, 3), 0.7),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let qz = e_step_rows(&a, &p, &random_soft(&mut rng, 5, 2)).unwrap();
        for v in qz.matrix() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    // g = (-1, 2 - e) for the two row clusters; softmax gives 1 / (1 + e^(e-3)).
    const SCALAR_CASE_Q2: f64 = 0.569_967_406_151_575_5;

    #[test]
    fn scalar_hand_case() {
        let e = std::f64::consts::E;
        let a = BipartiteAdjacency::from_dense(&array![[2u32]]);
        let p = ModelParams::new(array![0.5, 0.5], array![1.0], array![[1.0]], array![[1.0, e]])
            .unwrap();
        let qz = e_step_rows(&a, &p, &SoftAssignment::uniform(1, 1)).unwrap();
        assert!((qz.matrix()[[0, 1]] - SCALAR_CASE_Q2).abs() < 1e-12);

        // transposed: a single column choosing between two column clusters
        let pt = ModelParams::new(array![1.0], array![0.5, 0.5], array![[1.0, e]], array![[1.0]])
            .unwrap();
        let qw = e_step_cols(&a, &pt, &SoftAssignment::uniform(1, 1)).unwrap();
        assert!((qw.matrix()[[0, 0]] - (1.0 - SCALAR_CASE_Q2)).abs() < 1e-12);
        assert!((qw.matrix()[[0, 1]] - SCALAR_CASE_Q2).abs() < 1e-12);
    }

    #[test]
    fn column_update_is_row_update_of_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (m, n, k, l) = (6, 7, 2, 3);
            let dense = Array2::from_shape_fn((m, n), |_| rng.random_range(0..4u32));
            let a = BipartiteAdjacency::from_dense(&dense);
            let p = random_params(&mut rng, m, n, k, l);
            let qz = random_soft(&mut rng, m, k);
            let swapped = ModelParams::new(
                p.rho.clone(),
                p.pi.clone(),
                p.lambda.clone(),
                p.theta.clone(),
            )
            .unwrap();
            let direct = e_step_cols(&a, &p, &qz).unwrap();
            let via_t = e_step_rows(&a.transpose(), &swapped, &qz).unwrap();
            for (x, y) in direct.matrix().iter().zip(via_t.matrix()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn large_scores_do_not_overflow() {
        let a = BipartiteAdjacency::from_dense(&array![[5000u32, 0], [0, 7000]]);
        let p = ModelParams::new(
            array![0.5, 0.5],
            array![0.5, 0.5],
            array![[70.0, 1.0], [1.0, 80.0]],
            array![[70.0, 1.0], [1.0, 90.0]],
        )
        .unwrap();
        let qz = e_step_rows(&a, &p, &SoftAssignment::uniform(2, 2)).unwrap();
        assert!(qz.matrix().iter().all(|v| v.is_finite()));
    }

    /// No random row-stochastic perturbation of the update beats it.
    #[test]
    fn update_is_coordinate_maximizer() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let (m, n, k, l) = (5, 6, 3, 2);
            let dense = Array2::from_shape_fn((m, n), |_| rng.random_range(0..4u32));
            let a = BipartiteAdjacency::from_dense(&dense);
            let p = random_params(&mut rng, m, n, k, l);
            let qw = random_soft(&mut rng, n, l);
            let best = e_step_rows(&a, &p, &qw).unwrap();
            let top = elbo(&a, &best, &qw, &p).unwrap();
            for _ in 0..50 {
                let other = random_soft(&mut rng, m, k);
                assert!(elbo(&a, &other, &qw, &p).unwrap() <= top + 1e-9);
            }
            let qz = random_soft(&mut rng, m, k);
            let best = e_step_cols(&a, &p, &qz).unwrap();
            let top = elbo(&a, &qz, &best, &p).unwrap();
            for _ in 0..50 {
                let other = random_soft(&mut rng, n, l);
                assert!(elbo(&a, &qz, &other, &p).unwrap() <= top + 1e-9);
            }
        }
    }
}
