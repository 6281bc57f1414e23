use crate::error::{Result, TnpmError};
use crate::model::{BipartiteAdjacency, HardLabels, ModelParams};
use crate::vem::{elbo, m_step_mixing, m_step_popularity_closed};

/// Bound of an external labeling: closed-form parameters for the hard labels
/// `(z, w)` over `k` row and `l` column communities, evaluated at the
/// degenerate assignments.
pub fn score_labels(
    a: &BipartiteAdjacency,
    z: &HardLabels,
    w: &HardLabels,
    k: usize,
    l: usize,
) -> Result<f64> {
    if z.clusters() > k || w.clusters() > l {
        return Err(TnpmError::InvalidInput(format!(
            "labels use {} row and {} column communities, more than ({k}, {l})",
            z.clusters(),
            w.clusters()
        )));
    }
    let z = HardLabels::new(z.as_slice().to_vec(), k)?;
    let w = HardLabels::new(w.as_slice().to_vec(), l)?;
    let closed = m_step_popularity_closed(a, &z, &w)?;
    let (qz, qw) = (z.to_soft(), w.to_soft());
    let (pi, rho) = m_step_mixing(&qz, &qw);
    let params = ModelParams {
        pi,
        rho,
        theta: closed.theta,
        lambda: closed.lambda,
    };
    elbo(a, &qz, &qw, &params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgen::gen_bipartite_tnpm;
    use crate::spectral::random_init;

    #[test]
    fn invariant_to_relabeling() {
        let g = gen_bipartite_tnpm(30, 40, 3, 2, 2.0, 4).unwrap();
        let base = score_labels(&g.adjacency, &g.z_true, &g.w_true, 3, 2).unwrap();
        let z = g.z_true.permuted(&[2, 0, 1]).unwrap();
        let w = g.w_true.permuted(&[1, 0]).unwrap();
        let moved = score_labels(&g.adjacency, &z, &w, 3, 2).unwrap();
        assert!((base - moved).abs() <= 1e-10 * base.abs());
    }

    #[test]
    fn planted_labels_beat_random_ones() {
        for seed in 0..100 {
            let g = gen_bipartite_tnpm(30, 40, 3, 4, 1.0, seed).unwrap();
            let truth = score_labels(&g.adjacency, &g.z_true, &g.w_true, 3, 4).unwrap();
            let z = random_init(30, 3, seed + 1000).unwrap();
            let w = random_init(40, 4, seed + 2000).unwrap();
            let random = score_labels(&g.adjacency, &z, &w, 3, 4).unwrap();
            assert!(truth >= random, "seed {seed}: {truth} < {random}");
        }
    }

    #[test]
    fn too_many_clusters_rejected() {
        let g = gen_bipartite_tnpm(10, 10, 2, 2, 1.0, 0).unwrap();
        assert!(score_labels(&g.adjacency, &g.z_true, &g.w_true, 1, 2).is_err());
    }
}
