use ndarray::{Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, TnpmError};
use crate::model::HardLabels;

const RESTARTS: u64 = 10;
const MAX_ITERS: usize = 100;

#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub labels: HardLabels,
    /// Within-cluster sum of squared distances.
    pub inertia: f64,
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm with k-means++ seeding, best of 10 restarts by inertia.
pub fn kmeans(points: &Array2<f64>, k: usize, seed: u64) -> Result<KMeansFit> {
    let rows = points.nrows();
    if k == 0 || k > rows {
        return Err(TnpmError::InvalidInput(format!(
            "cannot form {k} clusters from {rows} points"
        )));
    }
    let mut best: Option<KMeansFit> = None;
    for restart in 0..RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(RESTARTS).wrapping_add(restart));
        let fit = lloyd(points, k, &mut rng);
        if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn plus_plus_seeds(points: &Array2<f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let rows = points.nrows();
    let mut centers = Array2::zeros((k, points.ncols()));
    let mut chosen = vec![false; rows];
    let first = rng.random_range(0..rows);
    chosen[first] = true;
    centers.row_mut(0).assign(&points.row(first));
    let mut nearest: Vec<f64> = points
        .outer_iter()
        .map(|p| sq_dist(p, points.row(first)))
        .collect();

    for c in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random_range(0.0..total);
            let mut pick = rows - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if d > 0.0 && target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        } else {
            // all remaining points coincide with a center
            let free: Vec<usize> = (0..rows).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[pick] = true;
        centers.row_mut(c).assign(&points.row(pick));
        for (i, p) in points.outer_iter().enumerate() {
            nearest[i] = nearest[i].min(sq_dist(p, points.row(pick)));
        }
    }
    centers
}

fn assign(points: &Array2<f64>, centers: &Array2<f64>, labels: &mut [usize], dists: &mut [f64]) {
    for (i, p) in points.outer_iter().enumerate() {
        let mut best = (0, f64::INFINITY);
        for (c, center) in centers.outer_iter().enumerate() {
            let d = sq_dist(p, center);
            if d < best.1 {
                best = (c, d);
            }
        }
        labels[i] = best.0;
        dists[i] = best.1;
    }
}

fn lloyd(points: &Array2<f64>, k: usize, rng: &mut ChaCha8Rng) -> KMeansFit {
    let (rows, dim) = points.dim();
    let mut centers = plus_plus_seeds(points, k, rng);
    let mut labels = vec![usize::MAX; rows];
    let mut dists = vec![0.0; rows];

    for _ in 0..MAX_ITERS {
        let previous = labels.clone();
        assign(points, &centers, &mut labels, &mut dists);
        fill_empty_clusters(k, &mut labels, &mut dists, &mut centers, points);
        if labels == previous {
            break;
        }
        let mut sums = Array2::<f64>::zeros((k, dim));
        let mut sizes = vec![0usize; k];
        for (i, &c) in labels.iter().enumerate() {
            sums.row_mut(c).scaled_add(1.0, &points.row(i));
            sizes[c] += 1;
        }
        for (c, &size) in sizes.iter().enumerate() {
            let mut row = centers.row_mut(c);
            row.assign(&sums.row(c));
            row /= size as f64;
        }
    }
    assign(points, &centers, &mut labels, &mut dists);
    fill_empty_clusters(k, &mut labels, &mut dists, &mut centers, points);
    KMeansFit {
        inertia: dists.iter().sum(),
        labels: HardLabels::new(labels, k).expect("labels below k"),
    }
}

/// Moves the point farthest from its center into each empty cluster, taking
/// only from clusters with more than one member.
fn fill_empty_clusters(
    k: usize,
    labels: &mut [usize],
    dists: &mut [f64],
    centers: &mut Array2<f64>,
    points: &Array2<f64>,
) {
    let mut sizes = vec![0usize; k];
    for &c in labels.iter() {
        sizes[c] += 1;
    }
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let donor = (0..labels.len())
            .filter(|&i| sizes[labels[i]] > 1)
            .max_by(|&x, &y| dists[x].total_cmp(&dists[y]).then(y.cmp(&x)))
            .expect("k <= points leaves a cluster with two members");
        sizes[labels[donor]] -= 1;
        sizes[empty] += 1;
        labels[donor] = empty;
        dists[donor] = 0.0;
        centers.row_mut(empty).assign(&points.row(donor));
    }
}
