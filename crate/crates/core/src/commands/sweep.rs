use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::commands::{output_path, SWEEP_RECORDS_SUFFIX, SWEEP_SUMMARY_SUFFIX};
use crate::error::{Result, TnpmError};
use crate::io::{fmt_f64, write_with, FORMAT_VERSION};
use crate::metrics::ari;
use crate::model::{BipartiteAdjacency, HardLabels};
use crate::netgen::{gen_bipartite_tnpm, gen_undirected_pabm};
use crate::spectral::svd_init;
use crate::vem::{fit, fit_undirected, FitConfig, FitMode};

/// Simulation design swept over one parameter: the density factor for
/// bipartite networks, the homophily factor for undirected ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepKind {
    Bipartite { rows: usize, cols: usize, k: usize, l: usize },
    Undirected { nodes: usize },
}

impl SweepKind {
    fn parameter_name(&self) -> &'static str {
        match self {
            SweepKind::Bipartite { .. } => "density",
            SweepKind::Undirected { .. } => "homophily",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRequest {
    pub kind: SweepKind,
    pub grid: Vec<f64>,
    pub replicates: usize,
    /// Replicate `r` uses seed `seed + r` for both generation and fitting.
    pub seed: u64,
    /// Fit settings; the seed and mode fields are overridden per replicate.
    pub config: FitConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub param: f64,
    pub replicate: usize,
    pub seed: u64,
    pub vem_row_ari: f64,
    pub vem_col_ari: f64,
    pub svd_row_ari: f64,
    pub svd_col_ari: f64,
    /// Agreement of the fitted row and column labels; undirected sweeps only.
    pub vem_mutual_ari: Option<f64>,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(replicates)`; 0 for one replicate.
    pub se: f64,
}

impl MeanSe {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let se = if values.len() < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        };
        Self { mean, se }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub param: f64,
    pub replicates: usize,
    pub vem_row: MeanSe,
    pub vem_col: MeanSe,
    pub svd_row: MeanSe,
    pub svd_col: MeanSe,
    /// True when there is a single replicate and the standard errors are
    /// reported as 0 rather than estimated.
    pub se_undefined: bool,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub kind: SweepKind,
    pub records: Vec<SweepRecord>,
    pub summary: Vec<SweepSummary>,
}

impl SweepReport {
    pub fn summary_for(&self, param: f64) -> Option<&SweepSummary> {
        self.summary.iter().find(|s| s.param == param)
    }
}

struct Planted {
    adjacency: BipartiteAdjacency,
    rows: HardLabels,
    cols: HardLabels,
}

/// For each grid value and replicate: simulates a network, fits it by
/// variational EM and by spectral initialization alone, and records the ARI
/// of both against the planted labels. Replicates run in parallel.
pub fn run_sweep(request: &SweepRequest) -> Result<SweepReport> {
    if request.grid.is_empty() {
        return Err(TnpmError::InvalidInput("sweep grid is empty".into()));
    }
    if request.replicates == 0 {
        return Err(TnpmError::InvalidInput("replicates must be at least 1".into()));
    }
    request.config.validate()?;
    let tasks: Vec<(f64, usize)> = request
        .grid
        .iter()
        .flat_map(|&p| (0..request.replicates).map(move |r| (p, r)))
        .collect();
    let records = tasks
        .into_par_iter()
        .map(|(param, replicate)| run_replicate(request, param, replicate))
        .collect::<Result<Vec<_>>>()?;

    let summary = request
        .grid
        .iter()
        .map(|&param| {
            let rows: Vec<&SweepRecord> = records.iter().filter(|r| r.param == param).collect();
            let stat = |f: fn(&SweepRecord) -> f64| MeanSe::of(&rows.iter().map(|r| f(r)).collect::<Vec<_>>());
            SweepSummary {
                param,
                replicates: rows.len(),
                vem_row: stat(|r| r.vem_row_ari),
                vem_col: stat(|r| r.vem_col_ari),
                svd_row: stat(|r| r.svd_row_ari),
                svd_col: stat(|r| r.svd_col_ari),
                se_undefined: rows.len() < 2,
            }
        })
        .collect();
    Ok(SweepReport {
        kind: request.kind,
        records,
        summary,
    })
}

fn run_replicate(request: &SweepRequest, param: f64, replicate: usize) -> Result<SweepRecord> {
    let seed = request.seed.wrapping_add(replicate as u64);
    let started = Instant::now();
    let (planted, k, l, mode) = match request.kind {
        SweepKind::Bipartite { rows, cols, k, l } => {
            let g = gen_bipartite_tnpm(rows, cols, k, l, param, seed)?;
            let p = Planted {
                adjacency: g.adjacency,
                rows: g.z_true,
                cols: g.w_true,
            };
            (p, k, l, FitMode::Bipartite)
        }
        SweepKind::Undirected { nodes } => {
            let g = gen_undirected_pabm(nodes, param, seed)?;
            let p = Planted {
                adjacency: g.adjacency,
                rows: g.labels.clone(),
                cols: g.labels,
            };
            (p, 2, 2, FitMode::Undirected)
        }
    };
    let config = FitConfig {
        seed,
        mode,
        ..request.config.clone()
    };
    let result = match mode {
        FitMode::Bipartite => fit(&planted.adjacency, k, l, &config)?,
        FitMode::Undirected => fit_undirected(&planted.adjacency, k, &config)?,
    };
    let (z0, w0) = svd_init(&planted.adjacency, k, l, seed)?;
    Ok(SweepRecord {
        param,
        replicate,
        seed,
        vem_row_ari: ari(&planted.rows, &result.row_labels())?,
        vem_col_ari: ari(&planted.cols, &result.col_labels())?,
        svd_row_ari: ari(&planted.rows, &z0)?,
        svd_col_ari: ari(&planted.cols, &w0)?,
        vem_mutual_ari: match mode {
            FitMode::Bipartite => None,
            FitMode::Undirected => Some(result.mutual_ari()?),
        },
        runtime_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Runs the sweep and writes `<prefix>.records.tsv` (one line per
/// replicate) and `<prefix>.summary.tsv` (mean and standard error per grid
/// value).
pub fn cmd_sweep(request: &SweepRequest, out_prefix: &Path) -> Result<(SweepReport, PathBuf, PathBuf)> {
    let report = run_sweep(request)?;
    let name = request.kind.parameter_name();
    let records_path = output_path(out_prefix, SWEEP_RECORDS_SUFFIX);
    write_with(&records_path, |out| {
        writeln!(out, "# format_version\t{FORMAT_VERSION}")?;
        writeln!(out, "{name}\treplicate\tseed\tvem_row_ari\tvem_col_ari\tsvd_row_ari\tsvd_col_ari\tvem_mutual_ari\truntime_seconds")?;
        for r in &report.records {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                fmt_f64(r.param),
                r.replicate,
                r.seed,
                fmt_f64(r.vem_row_ari),
                fmt_f64(r.vem_col_ari),
                fmt_f64(r.svd_row_ari),
                fmt_f64(r.svd_col_ari),
                r.vem_mutual_ari.map_or_else(|| "NA".to_string(), fmt_f64),
                fmt_f64(r.runtime_seconds)
            )?;
        }
        Ok(())
    })?;
    let summary_path = output_path(out_prefix, SWEEP_SUMMARY_SUFFIX);
    write_with(&summary_path, |out| {
        writeln!(out, "# format_version\t{FORMAT_VERSION}")?;
        writeln!(
            out,
            "{name}\treplicates\tvem_row_mean\tvem_row_se\tvem_col_mean\tvem_col_se\tsvd_row_mean\tsvd_row_se\tsvd_col_mean\tsvd_col_se\tse_flag"
        )?;
        for s in &report.summary {
            let cells: Vec<String> = [s.vem_row, s.vem_col, s.svd_row, s.svd_col]
                .iter()
                .flat_map(|m| [fmt_f64(m.mean), fmt_f64(m.se)])
                .collect();
            let flag = if s.se_undefined { "single_replicate" } else { "ok" };
            writeln!(out, "{}\t{}\t{}\t{flag}", fmt_f64(s.param), s.replicates, cells.join("\t"))?;
        }
        Ok(())
    })?;
    Ok((report, records_path, summary_path))
}
