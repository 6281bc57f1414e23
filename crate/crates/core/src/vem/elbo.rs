use ndarray::Array2;

use crate::error::{Result, TnpmError};
use crate::model::{log_mixing, BipartiteAdjacency, ModelParams, SoftAssignment};

/// Shape agreement between a network, both assignments and the parameters.
pub(crate) fn check_dims(
    a: &BipartiteAdjacency,
    qz: Option<&SoftAssignment>,
    qw: Option<&SoftAssignment>,
    params: &ModelParams,
) -> Result<()> {
    params.check_shape(a.rows(), a.cols())?;
    if let Some(qz) = qz {
        if qz.nodes() != a.rows() || qz.clusters() != params.k() {
            return Err(TnpmError::Dimension(format!(
                "row assignment is {} x {}, expected {} x {}",
                qz.nodes(),
                qz.clusters(),
                a.rows(),
                params.k()
            )));
        }
    }
    if let Some(qw) = qw {
        if qw.nodes() != a.cols() || qw.clusters() != params.l() {
            return Err(TnpmError::Dimension(format!(
                "column assignment is {} x {}, expected {} x {}",
                qw.nodes(),
                qw.clusters(),
                a.cols(),
                params.l()
            )));
        }
    }
    Ok(())
}

fn entropy(q: &SoftAssignment) -> f64 {
    q.matrix()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

/// Evidence lower bound `J(q^z, q^w, Phi)` for factorized assignments.
///
/// The constant `-sum log(A_ij!)` is left out. The dense expected-rate term
/// is computed through the `K x L` aggregates `q^z' theta` and `q^w' lambda`.
pub fn elbo(
    a: &BipartiteAdjacency,
    qz: &SoftAssignment,
    qw: &SoftAssignment,
    params: &ModelParams,
) -> Result<f64> {
    check_dims(a, Some(qz), Some(qw), params)?;
    params.check_floor()?;
    Ok(elbo_unchecked(a, qz, qw, params))
}

pub(crate) fn elbo_unchecked(
    a: &BipartiteAdjacency,
    qz: &SoftAssignment,
    qw: &SoftAssignment,
    params: &ModelParams,
) -> f64 {
    let (zq, wq) = (qz.matrix(), qw.matrix());
    let row_agg: Array2<f64> = zq.t().dot(&params.theta); // K x L
    let col_agg: Array2<f64> = wq.t().dot(&params.lambda); // L x K
    let expected_edges: f64 = row_agg
        .indexed_iter()
        .map(|((k, l), &s)| s * col_agg[[l, k]])
        .sum();

    let log_theta = params.theta.mapv(f64::ln);
    let log_lambda = params.lambda.mapv(f64::ln);
    let mut observed = 0.0;
    for e in a.entries() {
        let (i, j) = (e.row, e.col);
        let toward_cols: f64 = wq.row(j).dot(&log_theta.row(i));
        let toward_rows: f64 = zq.row(i).dot(&log_lambda.row(j));
        observed += f64::from(e.count) * (toward_cols + toward_rows);
    }

    let prior = zq.dot(&log_mixing(&params.pi)).sum() + wq.dot(&log_mixing(&params.rho)).sum();

    -expected_edges + observed + prior + entropy(qz) + entropy(qw)
}
