use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::commands::{
    output_path, COL_LABELS_SUFFIX, PARAMS_SUFFIX, ROW_LABELS_SUFFIX, SOFT_SUFFIX, SUMMARY_SUFFIX,
};
use crate::error::Result;
use crate::io::{read_edge_list, read_undirected_edge_list, write_labels, EdgeList, LabelFile, Record};
use crate::vem::{fit, FitConfig, FitMode, FitResult};

#[derive(Debug, Clone)]
pub struct FitRequest {
    pub input: PathBuf,
    pub k: usize,
    pub l: usize,
    pub config: FitConfig,
    /// Replace every positive count by 1 after reading.
    pub binary: bool,
    pub out_prefix: PathBuf,
}

#[derive(Debug, Clone)]
pub struct FitOutputs {
    pub network: EdgeList,
    pub result: FitResult,
    pub runtime: Duration,
    pub row_labels: PathBuf,
    pub col_labels: PathBuf,
    pub soft: PathBuf,
    pub params: PathBuf,
    pub summary: PathBuf,
}

/// Reads an edge list with the loader matching `mode`.
pub fn load_network(path: &Path, mode: FitMode, binary: bool) -> Result<EdgeList> {
    match mode {
        FitMode::Bipartite => read_edge_list(path, binary),
        FitMode::Undirected => read_undirected_edge_list(path, binary),
    }
}

/// Fits the model to an edge list and writes hard labels, soft assignments,
/// parameters and a run summary.
pub fn cmd_fit(request: &FitRequest) -> Result<FitOutputs> {
    let network = load_network(&request.input, request.config.mode, request.binary)?;
    let started = Instant::now();
    let result = fit(&network.adjacency, request.k, request.l, &request.config)?;
    let runtime = started.elapsed();

    let prefix = &request.out_prefix;
    let row_labels = output_path(prefix, ROW_LABELS_SUFFIX);
    let col_labels = output_path(prefix, COL_LABELS_SUFFIX);
    write_labels(&row_labels, &LabelFile::new(network.row_ids.clone(), &result.row_labels())?)?;
    write_labels(&col_labels, &LabelFile::new(network.col_ids.clone(), &result.col_labels())?)?;

    let soft = output_path(prefix, SOFT_SUFFIX);
    let mut r = Record::new("soft_assignment");
    r.matrix("qz", result.qz.matrix()).matrix("qw", result.qw.matrix());
    r.write(&soft)?;

    let params = output_path(prefix, PARAMS_SUFFIX);
    let p = &result.params;
    let mut r = Record::new("parameters");
    r.vector("pi", p.pi.iter().copied())
        .vector("rho", p.rho.iter().copied())
        .matrix("theta", &p.theta)
        .matrix("lambda", &p.lambda);
    r.write(&params)?;

    let summary = output_path(prefix, SUMMARY_SUFFIX);
    summary_record(request, &network, &result, runtime).write(&summary)?;

    Ok(FitOutputs {
        network,
        result,
        runtime,
        row_labels,
        col_labels,
        soft,
        params,
        summary,
    })
}

fn summary_record(request: &FitRequest, network: &EdgeList, result: &FitResult, runtime: Duration) -> Record {
    let c = &request.config;
    let a = &network.adjacency;
    let mut r = Record::new("fit_summary");
    r.text("input", request.input.display())
        .text("mode", result.mode)
        .text("binary", request.binary)
        .text("rows", a.rows())
        .text("cols", a.cols())
        .text("nonzeros", a.nnz())
        .text("k", request.k)
        .text("l", request.l)
        .text("seed", c.seed)
        .text("n_random_restarts", c.n_random_restarts)
        .number("outer_tol", c.outer_tol)
        .text("max_outer_iters", c.max_outer_iters)
        .number("inner_tol", c.inner_tol)
        .text("max_inner_m_iters", c.max_inner_m_iters)
        .number("elbo", result.elbo)
        .number("log_likelihood_constant", -a.log_factorial_sum())
        .text("restart_index", result.restart_index)
        .text("outer_iterations", result.outer_iterations)
        .text("converged", result.converged)
        .text("all_restarts_converged", result.all_restarts_converged());
    if let Ok(m) = result.mutual_ari() {
        if result.mode == FitMode::Undirected {
            r.number("mutual_ari", m);
        }
    }
    r.vector("elbo_trace", result.elbo_trace.iter().copied())
        .vector("restart_elbos", result.restarts.iter().map(|s| s.elbo))
        .number("runtime_seconds", runtime.as_secs_f64());
    r
}
