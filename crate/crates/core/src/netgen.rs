//! Planted-partition generators for bipartite Poisson networks and
//! undirected popularity-adjusted block networks.
//!
//! Every row of the adjacency matrix draws from its own ChaCha stream, so
//! the output depends only on the seed.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Result, TnpmError};
use crate::model::{BipartiteAdjacency, HardLabels};
use crate::spectral::random_labels;

/// Category-1 popularity toward the node's own community, and toward the other.
const CATEGORY_ONE: (f64, f64) = (0.8, 0.2);
const CATEGORY_TWO: (f64, f64) = (0.2, 0.8);

#[derive(Debug, Clone)]
pub struct PlantedBipartite {
    pub adjacency: BipartiteAdjacency,
    pub z_true: HardLabels,
    pub w_true: HardLabels,
    /// `m x L`.
    pub theta_true: Array2<f64>,
    /// `n x K`.
    pub lambda_true: Array2<f64>,
    pub r: f64,
}

impl PlantedBipartite {
    /// `r theta[i, w_j] lambda[j, z_i]`.
    pub fn mean(&self, i: usize, j: usize) -> f64 {
        self.r * self.theta_true[[i, self.w_true.get(j)]] * self.lambda_true[[j, self.z_true.get(i)]]
    }
}

#[derive(Debug, Clone)]
pub struct PlantedUndirected {
    /// Symmetric 0/1 matrix with an empty diagonal.
    pub adjacency: BipartiteAdjacency,
    pub labels: HardLabels,
    /// Popularity category per node: 0 for `(alpha, beta) = (0.8, 0.2)`,
    /// 1 for `(0.2, 0.8)`.
    pub categories: HardLabels,
    pub h: f64,
    /// `n x 2`, popularity of each node toward each community.
    pub popularity: Array2<f64>,
}

impl PlantedUndirected {
    /// Edge probability `lambda[i, c_j] lambda[j, c_i]` for `i != j`.
    pub fn edge_probability(&self, i: usize, j: usize) -> f64 {
        self.popularity[[i, self.labels.get(j)]] * self.popularity[[j, self.labels.get(i)]]
    }
}

fn row_stream(seed: u64, row: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row as u64 + 1);
    rng
}

/// Poisson draw, by sequential inversion for small means.
fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u32 {
    if mean <= 0.0 {
        return 0;
    }
    if mean >= 10.0 {
        let d = Poisson::new(mean).expect("positive finite mean");
        return d.sample(rng) as u32;
    }
    let u: f64 = rng.random();
    let mut p = (-mean).exp();
    let mut cdf = p;
    let mut x = 0u32;
    while u > cdf {
        x += 1;
        p *= mean / f64::from(x);
        let next = cdf + p;
        if next == cdf {
            break;
        }
        cdf = next;
    }
    x
}

/// Bipartite network with uniform categorical labels, Uniform(0, 1)
/// popularities and `A_ij ~ Poisson(r theta[i, w_j] lambda[j, z_i])`.
pub fn gen_bipartite_tnpm(
    m: usize,
    n: usize,
    k: usize,
    l: usize,
    r: f64,
    seed: u64,
) -> Result<PlantedBipartite> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(TnpmError::InvalidInput(format!(
            "density factor must be positive, got {r}"
        )));
    }
    if k == 0 || l == 0 {
        return Err(TnpmError::InvalidInput(
            "community counts must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z_true = random_labels(&mut rng, m, k);
    let w_true = random_labels(&mut rng, n, l);
    let theta_true = Array2::from_shape_simple_fn((m, l), || rng.random::<f64>());
    let lambda_true = Array2::from_shape_simple_fn((n, k), || rng.random::<f64>());

    let mut triplets = Vec::new();
    for i in 0..m {
        let mut rng = row_stream(seed, i);
        let zi = z_true.get(i);
        for j in 0..n {
            let mean = r * theta_true[[i, w_true.get(j)]] * lambda_true[[j, zi]];
            let count = poisson(&mut rng, mean);
            if count > 0 {
                triplets.push((i, j, count));
            }
        }
    }
    Ok(PlantedBipartite {
        adjacency: BipartiteAdjacency::from_triplets(m, n, triplets)?,
        z_true,
        w_true,
        theta_true,
        lambda_true,
        r,
    })
}

/// Undirected network of two equal communities with homophily factor `h`.
///
/// Community 0 is the first `n/2` nodes. Within each community the first
/// half of the nodes take category one, the rest category two. Popularity is
/// `alpha sqrt(h / (1 + h))` toward the own community and
/// `beta sqrt(1 / (1 + h))` toward the other; the upper triangle is drawn as
/// Bernoulli and mirrored.
pub fn gen_undirected_pabm(n: usize, h: f64, seed: u64) -> Result<PlantedUndirected> {
    if !n.is_multiple_of(2) || n == 0 {
        return Err(TnpmError::InvalidInput(format!(
            "node count must be even and positive, got {n}"
        )));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(TnpmError::InvalidInput(format!(
            "homophily factor must be positive, got {h}"
        )));
    }
    let half = n / 2;
    let labels = HardLabels::new((0..n).map(|i| usize::from(i >= half)).collect(), 2)?;
    let categories = HardLabels::new(
        (0..n).map(|i| usize::from(i % half >= half / 2)).collect(),
        2,
    )?;
    let own = (h / (1.0 + h)).sqrt();
    let other = (1.0 / (1.0 + h)).sqrt();
    let popularity = Array2::from_shape_fn((n, 2), |(i, c)| {
        let (alpha, beta) = if categories.get(i) == 0 { CATEGORY_ONE } else { CATEGORY_TWO };
        if c == labels.get(i) {
            alpha * own
        } else {
            beta * other
        }
    });

    let mut triplets = Vec::new();
    for i in 0..n {
        let mut rng = row_stream(seed, i);
        for j in i + 1..n {
            let p = popularity[[i, labels.get(j)]] * popularity[[j, labels.get(i)]];
            if rng.random::<f64>() < p {
                triplets.push((i, j, 1));
                triplets.push((j, i, 1));
            }
        }
    }
    Ok(PlantedUndirected {
        adjacency: BipartiteAdjacency::from_triplets(n, n, triplets)?,
        labels,
        categories,
        h,
        popularity,
    })
}
