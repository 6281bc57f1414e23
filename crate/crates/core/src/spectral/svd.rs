use nalgebra::DMatrix;
use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, TnpmError};
use crate::model::BipartiteAdjacency;

const OVERSAMPLING: usize = 10;
const POWER_ITERATIONS: usize = 4;

/// Leading singular triplets `A ~ U diag(s) V'`.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// `m x r`, orthonormal columns.
    pub u: Array2<f64>,
    /// Length `r`, non-increasing.
    pub singular_values: Array1<f64>,
    /// `n x r`, orthonormal columns.
    pub v: Array2<f64>,
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn reconstruct(&self) -> Array2<f64> {
        let scaled = &self.u * &self.singular_values;
        scaled.dot(&self.v.t())
    }
}

fn to_nalgebra(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

fn to_ndarray(a: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((a.nrows(), a.ncols()), |(i, j)| a[(i, j)])
}

/// Orthonormal basis for the column span of `y` (thin Householder QR).
fn orthonormalize(y: &Array2<f64>) -> Array2<f64> {
    to_ndarray(&to_nalgebra(y).qr().q())
}

/// Top-`r` singular triplets by randomized subspace iteration.
///
/// A Gaussian test matrix with `r + 10` columns (capped at `min(m, n)`) is
/// pushed through four power iterations, re-orthonormalized at each half
/// step; the small projected matrix is then decomposed densely. When the
/// sketch width reaches `min(m, n)` the result is exact up to rounding.
pub fn truncated_svd(a: &BipartiteAdjacency, r: usize, seed: u64) -> Result<SvdFactors> {
    let (m, n) = (a.rows(), a.cols());
    let max_rank = m.min(n);
    if r == 0 || r > max_rank {
        return Err(TnpmError::InvalidInput(format!(
            "rank {r} outside [1, {max_rank}] for a {m} x {n} matrix"
        )));
    }
    let width = (r + OVERSAMPLING).min(max_rank);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = Array2::from_shape_simple_fn((n, width), || StandardNormal.sample(&mut rng));
    let mut q = orthonormalize(&a.mul_dense(&omega));
    for _ in 0..POWER_ITERATIONS {
        let z = orthonormalize(&a.tmul_dense(&q));
        q = orthonormalize(&a.mul_dense(&z));
    }

    // B = Q' A, formed as (A' Q)'
    let b = to_nalgebra(&a.tmul_dense(&q)).transpose();
    let svd = b.svd(true, true);
    let (small_u, v_t) = (
        svd.u.expect("requested left vectors"),
        svd.v_t.expect("requested right vectors"),
    );

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    order.truncate(r);

    let singular_values = Array1::from_iter(order.iter().map(|&c| svd.singular_values[c]));
    let picked_u = Array2::from_shape_fn((small_u.nrows(), r), |(i, c)| small_u[(i, order[c])]);
    let u = q.dot(&picked_u);
    let v = Array2::from_shape_fn((n, r), |(j, c)| v_t[(order[c], j)]);
    Ok(SvdFactors {
        u,
        singular_values,
        v,
    })
}
