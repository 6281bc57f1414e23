use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::model::{HardLabels, ModelParams, SoftAssignment};

pub(crate) fn random_dense(rng: &mut ChaCha8Rng, m: usize, n: usize, max: u32) -> Array2<u32> {
    Array2::from_shape_fn((m, n), |_| rng.random_range(0..=max))
}

pub(crate) fn random_soft(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> SoftAssignment {
    let mut q = Array2::from_shape_fn((rows, cols), |_| rng.random_range(0.0..1.0));
    for mut row in q.rows_mut() {
        let s = row.sum();
        row /= s;
    }
    SoftAssignment::new(q).unwrap()
}

pub(crate) fn random_labels(rng: &mut ChaCha8Rng, len: usize, k: usize) -> HardLabels {
    HardLabels::new((0..len).map(|_| rng.random_range(0..k)).collect(), k).unwrap()
}

pub(crate) fn random_params(rng: &mut ChaCha8Rng, m: usize, n: usize, k: usize, l: usize) -> ModelParams {
    let mut pi = Array1::from_shape_fn(k, |_| rng.random_range(0.1..1.0));
    pi /= pi.sum();
    let mut rho = Array1::from_shape_fn(l, |_| rng.random_range(0.1..1.0));
    rho /= rho.sum();
    ModelParams::new(
        pi,
        rho,
        Array2::from_shape_fn((m, l), |_| rng.random_range(0.1..2.0)),
        Array2::from_shape_fn((n, k), |_| rng.random_range(0.1..2.0)),
    )
    .unwrap()
}
