//! Data model of the two-way node popularity model: the adjacency matrix,
//! soft and hard community assignments, parameters, and the elementary
//! Poisson likelihood terms.

mod adjacency;
mod assignment;
mod params;

pub use adjacency::{BipartiteAdjacency, Entry};
pub(crate) use adjacency::LogFactorialCache;
pub use assignment::{HardLabels, SoftAssignment, ROW_SUM_TOLERANCE};
pub(crate) use params::{clamp_floor, log_mixing};
pub use params::{ModelParams, MIXING_FLOOR, PARAM_FLOOR};

use ndarray::Array2;
use statrs::function::gamma::ln_gamma;

use crate::error::{Result, TnpmError};

/// `log P(X = count)` for `X ~ Poisson(mean)`.
pub fn poisson_log_pmf(count: u64, mean: f64) -> Result<f64> {
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(TnpmError::Domain(format!(
            "Poisson mean must be positive and finite, got {mean}"
        )));
    }
    let c = count as f64;
    Ok(c * mean.ln() - mean - ln_gamma(c + 1.0))
}

/// Poisson divergence `a log(a/b) - (a - b)`.
pub fn kl_poisson(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(TnpmError::Domain(format!(
            "Poisson divergence needs positive arguments, got ({a}, {b})"
        )));
    }
    // log1p form keeps precision when a and b are close
    let ratio = (a - b) / b;
    Ok((a * ratio.ln_1p() - (a - b)).max(0.0))
}

/// `log P(z, w, A; pi, rho, theta, lambda)`, including the `log(A_ij!)` terms.
///
/// The dense part `sum_ij theta[i, w_j] lambda[j, z_i]` is accumulated
/// through per-block sums of `lambda`, so the cost is `O(mL + nK + nnz)`.
/// Returns negative infinity if a positive count meets a zero rate.
pub fn joint_log_likelihood(
    a: &BipartiteAdjacency,
    z: &HardLabels,
    w: &HardLabels,
    params: &ModelParams,
) -> Result<f64> {
    let (m, n) = (a.rows(), a.cols());
    if z.len() != m || w.len() != n {
        return Err(TnpmError::Dimension(format!(
            "labels of length ({}, {}) for a {m} x {n} network",
            z.len(),
            w.len()
        )));
    }
    params.check_shape(m, n)?;
    let (k_count, l_count) = (params.k(), params.l());
    if z.clusters() > k_count || w.clusters() > l_count {
        return Err(TnpmError::Dimension(
            "labels reference more clusters than the parameters hold".into(),
        ));
    }

    let mut total = 0.0;
    for &k in z.as_slice() {
        total += params.pi[k].ln();
    }
    for &l in w.as_slice() {
        total += params.rho[l].ln();
    }

    // block_lambda[l, k] = sum over columns j with w_j = l of lambda[j, k]
    let mut block_lambda = Array2::<f64>::zeros((l_count, k_count));
    for j in 0..n {
        let l = w.get(j);
        for k in 0..k_count {
            block_lambda[[l, k]] += params.lambda[[j, k]];
        }
    }
    for i in 0..m {
        let k = z.get(i);
        for l in 0..l_count {
            total -= params.theta[[i, l]] * block_lambda[[l, k]];
        }
    }

    let mut log_fact = LogFactorialCache::default();
    let mut zero_rate_hits = 0usize;
    for e in a.entries() {
        let rate = params.rate(e.row, e.col, z.get(e.row), w.get(e.col));
        if rate <= 0.0 {
            zero_rate_hits += 1;
            continue;
        }
        total += f64::from(e.count) * rate.ln() - log_fact.get(e.count);
    }
    if zero_rate_hits > 0 {
        log::warn!("{zero_rate_hits} positive counts have zero rate; likelihood is -inf");
        return Ok(f64::NEG_INFINITY);
    }
    Ok(total)
}
