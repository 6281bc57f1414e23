//! Initial labelings: k-means on leading singular vectors, and uniform draws.

mod kmeans;
mod svd;

pub use kmeans::{kmeans, KMeansFit};
pub use svd::{truncated_svd, SvdFactors};

use ndarray::s;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, TnpmError};
use crate::model::{BipartiteAdjacency, HardLabels};

/// Row and column labels from k-means on the first `k` left and first `l`
/// right singular vectors of one rank-`max(k, l)` decomposition.
pub fn svd_init(
    a: &BipartiteAdjacency,
    k: usize,
    l: usize,
    seed: u64,
) -> Result<(HardLabels, HardLabels)> {
    let rank = k.max(l);
    if k == 0 || l == 0 || rank > a.rows().min(a.cols()) {
        return Err(TnpmError::InvalidInput(format!(
            "spectral start needs 1 <= k, l <= {}, got ({k}, {l})",
            a.rows().min(a.cols())
        )));
    }
    let factors = truncated_svd(a, rank, seed)?;
    let rows = kmeans(&factors.u.slice(s![.., ..k]).to_owned(), k, seed)?;
    let cols = kmeans(&factors.v.slice(s![.., ..l]).to_owned(), l, seed.wrapping_add(1))?;
    Ok((rows.labels, cols.labels))
}

/// `count` i.i.d. uniform labels in `[0, k)`.
pub fn random_init(count: usize, k: usize, seed: u64) -> Result<HardLabels> {
    if k == 0 {
        return Err(TnpmError::InvalidInput("k must be at least 1".into()));
    }
    Ok(random_labels(&mut ChaCha8Rng::seed_from_u64(seed), count, k))
}

pub(crate) fn random_labels(rng: &mut ChaCha8Rng, count: usize, k: usize) -> HardLabels {
    let labels = (0..count).map(|_| rng.random_range(0..k)).collect();
    HardLabels::new(labels, k).expect("k is positive")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ari;
    use ndarray::Array2;

    fn planted_blocks() -> Array2<u32> {
        // 2 x 2 blocks with distinct means, varied within blocks
        Array2::from_shape_fn((20, 20), |(i, j)| {
            let base = match (i < 8, j < 12) {
                (true, true) => 9,
                (true, false) => 1,
                (false, true) => 2,
                (false, false) => 6,
            };
            base + ((i * 7 + j * 3) % 3) as u32
        })
    }

    #[test]
    fn recovers_planted_blocks() {
        let a = BipartiteAdjacency::from_dense(&planted_blocks());
        let (z, w) = svd_init(&a, 2, 2, 5).unwrap();
        let zt = HardLabels::new((0..20).map(|i| usize::from(i >= 8)).collect(), 2).unwrap();
        let wt = HardLabels::new((0..20).map(|j| usize::from(j >= 12)).collect(), 2).unwrap();
        assert_eq!(ari(&zt, &z).unwrap(), 1.0);
        assert_eq!(ari(&wt, &w).unwrap(), 1.0);
    }

    #[test]
    fn single_cluster_all_zero() {
        let a = BipartiteAdjacency::from_dense(&planted_blocks());
        let (z, w) = svd_init(&a, 1, 1, 0).unwrap();
        assert!(z.as_slice().iter().chain(w.as_slice()).all(|&v| v == 0));
    }

    #[test]
    fn row_permutation_permutes_labels() {
        let dense = planted_blocks();
        let perm: Vec<usize> = (0..20).map(|i| (i * 7) % 20).collect();
        let permuted = Array2::from_shape_fn((20, 20), |(i, j)| dense[[perm[i], j]]);
        let (z, _) = svd_init(&BipartiteAdjacency::from_dense(&dense), 2, 2, 3).unwrap();
        let (zp, _) = svd_init(&BipartiteAdjacency::from_dense(&permuted), 2, 2, 3).unwrap();
        let carried =
            HardLabels::new(perm.iter().map(|&p| z.get(p)).collect(), 2).unwrap();
        assert_eq!(ari(&carried, &zp).unwrap(), 1.0);
    }

    #[test]
    fn deterministic_under_seed() {
        let a = BipartiteAdjacency::from_dense(&planted_blocks());
        assert_eq!(svd_init(&a, 2, 3, 11).unwrap(), svd_init(&a, 2, 3, 11).unwrap());
        assert!(svd_init(&a, 21, 1, 0).is_err());
    }

    #[test]
    fn random_labels_uniform() {
        assert!(random_init(50, 1, 3).unwrap().as_slice().iter().all(|&v| v == 0));
        assert_eq!(random_init(100, 4, 9).unwrap(), random_init(100, 4, 9).unwrap());
        let k = 5;
        let draws = 100_000;
        let sizes = random_init(draws, k, 17).unwrap().cluster_sizes();
        let p = 1.0 / k as f64;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for s in sizes {
            assert!((s as f64 - draws as f64 * p).abs() < 3.0 * sd, "{s}");
        }
        assert!(random_init(3, 0, 0).is_err());
    }
}
