use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Result, TnpmError};
use crate::metrics::ari;
use crate::model::{BipartiteAdjacency, HardLabels, ModelParams, SoftAssignment};
use crate::spectral::{random_labels, svd_init};
use crate::vem::elbo::elbo_unchecked;
use crate::vem::estep::{e_step_cols_unchecked, e_step_rows_unchecked};
use crate::vem::mstep::{iterate_popularity, m_step_mixing, m_step_popularity_closed};

/// Network type, which selects the E-step ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitMode {
    /// Rows then columns, the column update reading the fresh row assignment.
    #[default]
    Bipartite,
    /// Square symmetric input; both updates read the previous iteration.
    Undirected,
}

impl fmt::Display for FitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitMode::Bipartite => "bipartite",
            FitMode::Undirected => "undirected",
        })
    }
}

impl FromStr for FitMode {
    type Err = TnpmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bipartite" => Ok(FitMode::Bipartite),
            "undirected" => Ok(FitMode::Undirected),
            other => Err(TnpmError::InvalidInput(format!(
                "unknown mode '{other}', expected bipartite or undirected"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Random restarts in addition to the spectral one.
    pub n_random_restarts: usize,
    pub max_outer_iters: usize,
    /// Relative change in the bound that ends the outer loop.
    pub outer_tol: f64,
    pub max_inner_m_iters: usize,
    /// Largest absolute parameter change that ends the inner M-step loop.
    pub inner_tol: f64,
    pub seed: u64,
    pub mode: FitMode,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            n_random_restarts: 10,
            max_outer_iters: 200,
            outer_tol: 1e-8,
            max_inner_m_iters: 100,
            inner_tol: 1e-10,
            seed: 0,
            mode: FitMode::Bipartite,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.outer_tol > 0.0) || !(self.inner_tol > 0.0) {
            return Err(TnpmError::InvalidInput("tolerances must be positive".into()));
        }
        if self.max_outer_iters == 0 || self.max_inner_m_iters == 0 {
            return Err(TnpmError::InvalidInput(
                "iteration caps must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Final state of one restart.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartSummary {
    pub index: usize,
    pub elbo: f64,
    pub outer_iterations: usize,
    pub converged: bool,
    pub elbo_trace: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub qz: SoftAssignment,
    pub qw: SoftAssignment,
    pub params: ModelParams,
    pub elbo: f64,
    /// Restart that produced this result; 0 is the spectral start.
    pub restart_index: usize,
    pub outer_iterations: usize,
    /// Bound after initialization, then after every outer iteration.
    pub elbo_trace: Vec<f64>,
    pub converged: bool,
    pub mode: FitMode,
    pub restarts: Vec<RestartSummary>,
}

impl FitResult {
    pub fn row_labels(&self) -> HardLabels {
        self.qz.hard_labels()
    }

    pub fn col_labels(&self) -> HardLabels {
        self.qw.hard_labels()
    }

    /// Agreement between row and column labels; meaningful when both index
    /// the same node set.
    pub fn mutual_ari(&self) -> Result<f64> {
        ari(&self.row_labels(), &self.col_labels())
    }

    /// False if any restart stopped on its iteration cap.
    pub fn all_restarts_converged(&self) -> bool {
        self.restarts.iter().all(|r| r.converged)
    }
}

/// Per-row argmax of a soft assignment.
pub fn hard_labels(q: &SoftAssignment) -> HardLabels {
    q.hard_labels()
}

struct Restart {
    qz: SoftAssignment,
    qw: SoftAssignment,
    params: ModelParams,
    trace: Vec<f64>,
    converged: bool,
}

/// Fits the model to a bipartite network with `k` row and `l` column
/// communities.
///
/// Runs one restart from the spectral labels and `n_random_restarts` from
/// uniform random labels, and keeps the restart with the largest final bound.
/// With `FitMode::Undirected` this defers to [`fit_undirected`], which needs
/// `k == l`.
pub fn fit(a: &BipartiteAdjacency, k: usize, l: usize, config: &FitConfig) -> Result<FitResult> {
    if config.mode == FitMode::Undirected {
        if k != l {
            return Err(TnpmError::InvalidInput(format!(
                "undirected fits use one community count, got {k} and {l}"
            )));
        }
        return fit_undirected(a, k, config);
    }
    config.validate()?;
    check_counts(a, k, l)?;

    let (z0, w0) = svd_init(a, k, l, config.seed)?;
    run_restarts(a, config, |s| {
        if s == 0 {
            (z0.clone(), w0.clone())
        } else {
            let mut rng = restart_rng(config.seed, s);
            let z = random_labels(&mut rng, a.rows(), k);
            let w = random_labels(&mut rng, a.cols(), l);
            (z, w)
        }
    })
}

/// Fits the model to an undirected network given as a symmetric, zero-diagonal
/// square matrix.
///
/// Row and column assignments start from identical labels in every restart,
/// and each E-step computes both new assignments from the previous ones.
pub fn fit_undirected(a: &BipartiteAdjacency, k: usize, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    if !a.is_square() {
        return Err(TnpmError::InvalidInput(format!(
            "undirected fit needs a square matrix, got {} x {}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_symmetric() {
        return Err(TnpmError::InvalidInput("undirected fit needs a symmetric matrix".into()));
    }
    if !a.has_zero_diagonal() {
        return Err(TnpmError::InvalidInput(
            "undirected fit needs a zero diagonal".into(),
        ));
    }
    check_counts(a, k, k)?;
    let config = FitConfig {
        mode: FitMode::Undirected,
        ..config.clone()
    };

    let (z0, _) = svd_init(a, k, k, config.seed)?;
    run_restarts(a, &config, |s| {
        let z = if s == 0 {
            z0.clone()
        } else {
            random_labels(&mut restart_rng(config.seed, s), a.rows(), k)
        };
        (z.clone(), z)
    })
}

/// Runs a single restart from the given hard labels, with no spectral or
/// random starts. In undirected mode `z` and `w` should be identical.
pub fn fit_from_labels(
    a: &BipartiteAdjacency,
    z: &HardLabels,
    w: &HardLabels,
    config: &FitConfig,
) -> Result<FitResult> {
    config.validate()?;
    if z.len() != a.rows() || w.len() != a.cols() {
        return Err(TnpmError::Dimension(format!(
            "labels of length ({}, {}) for a {} x {} network",
            z.len(),
            w.len(),
            a.rows(),
            a.cols()
        )));
    }
    check_counts(a, z.clusters(), w.clusters())?;
    let config = FitConfig {
        n_random_restarts: 0,
        ..config.clone()
    };
    run_restarts(a, &config, |_| (z.clone(), w.clone()))
}

fn check_counts(a: &BipartiteAdjacency, k: usize, l: usize) -> Result<()> {
    if k == 0 || l == 0 {
        return Err(TnpmError::InvalidInput(
            "community counts must be at least 1".into(),
        ));
    }
    if k > a.rows() || l > a.cols() {
        return Err(TnpmError::InvalidInput(format!(
            "cannot form {k} row and {l} column communities in a {} x {} network",
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart as u64))
}

fn run_restarts<F>(a: &BipartiteAdjacency, config: &FitConfig, init: F) -> Result<FitResult>
where
    F: Fn(usize) -> (HardLabels, HardLabels) + Sync,
{
    let runs: Vec<Restart> = (0..=config.n_random_restarts)
        .into_par_iter()
        .map(|s| {
            let (z, w) = init(s);
            run_one(a, &z, &w, config)
        })
        .collect::<Result<_>>()?;

    let restarts: Vec<RestartSummary> = runs
        .iter()
        .enumerate()
        .map(|(index, r)| RestartSummary {
            index,
            elbo: *r.trace.last().expect("trace starts with the initial bound"),
            outer_iterations: r.trace.len() - 1,
            converged: r.converged,
            elbo_trace: r.trace.clone(),
        })
        .collect();

    // first maximum wins ties; NaN never wins
    let mut best = 0;
    for r in &restarts[1..] {
        if r.elbo > restarts[best].elbo || restarts[best].elbo.is_nan() {
            best = r.index;
        }
    }
    if !restarts.iter().any(|r| r.converged) {
        log::warn!("no restart converged within {} outer iterations", config.max_outer_iters);
    }

    let chosen = runs.into_iter().nth(best).expect("best index is in range");
    let summary = &restarts[best];
    Ok(FitResult {
        elbo: summary.elbo,
        restart_index: best,
        outer_iterations: summary.outer_iterations,
        converged: summary.converged,
        qz: chosen.qz,
        qw: chosen.qw,
        params: chosen.params,
        elbo_trace: chosen.trace,
        mode: config.mode,
        restarts,
    })
}

/// One restart of the variational EM loop from hard labels `(z, w)`.
fn run_one(
    a: &BipartiteAdjacency,
    z: &HardLabels,
    w: &HardLabels,
    config: &FitConfig,
) -> Result<Restart> {
    let closed = m_step_popularity_closed(a, z, w)?;
    let mut qz = z.to_soft();
    let mut qw = w.to_soft();
    let (pi, rho) = m_step_mixing(&qz, &qw);
    let mut params = ModelParams {
        pi,
        rho,
        theta: closed.theta,
        lambda: closed.lambda,
    };
    let mut trace = vec![elbo_unchecked(a, &qz, &qw, &params)];
    let mut converged = false;

    for _ in 0..config.max_outer_iters {
        match config.mode {
            FitMode::Bipartite => {
                qz = e_step_rows_unchecked(a, &params, &qw);
                qw = e_step_cols_unchecked(a, &params, &qz);
            }
            FitMode::Undirected => {
                let next_qz = e_step_rows_unchecked(a, &params, &qw);
                qw = e_step_cols_unchecked(a, &params, &qz);
                qz = next_qz;
            }
        }

        let (pi, rho) = m_step_mixing(&qz, &qw);
        let theta: Array2<f64> = std::mem::take(&mut params.theta);
        let lambda: Array2<f64> = std::mem::take(&mut params.lambda);
        let pop = iterate_popularity(
            a,
            &qz,
            &qw,
            theta,
            lambda,
            config.inner_tol,
            config.max_inner_m_iters,
        );
        params = ModelParams {
            pi,
            rho,
            theta: pop.theta,
            lambda: pop.lambda,
        };

        let previous = *trace.last().expect("non-empty trace");
        let current = elbo_unchecked(a, &qz, &qw, &params);
        trace.push(current);
        if (current - previous).abs() <= config.outer_tol * previous.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    Ok(Restart {
        qz,
        qw,
        params,
        trace,
        converged,
    })
}
