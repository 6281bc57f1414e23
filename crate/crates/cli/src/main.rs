use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tnpm::commands::{
    cmd_eval, cmd_fit, cmd_score, cmd_simulate, cmd_sweep, FitRequest, SimulateKind, SweepKind, SweepRequest,
};
use tnpm::{FitConfig, FitMode, TnpmError};

#[derive(Parser)]
#[command(name = "tnpm", version, about = "Two-way node popularity model: simulate, fit and evaluate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted network with its true labels.
    Simulate(SimulateArgs),
    /// Fit the model to an edge list.
    Fit(FitArgs),
    /// Bound attained by given labels on an edge list.
    Score(ScoreArgs),
    /// Compare two label files.
    Eval(EvalArgs),
    /// Simulate and fit over a parameter grid with replicates.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Bipartite,
    Undirected,
}

impl From<Mode> for FitMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Bipartite => FitMode::Bipartite,
            Mode::Undirected => FitMode::Undirected,
        }
    }
}

#[derive(Args)]
struct SizeArgs {
    /// Row nodes (bipartite).
    #[arg(long, default_value_t = 800)]
    m: usize,
    /// Column nodes (bipartite).
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Nodes (undirected); must be even.
    #[arg(long, default_value_t = 400)]
    nodes: usize,
}

#[derive(Args)]
struct FitFlags {
    /// Random restarts in addition to the spectral one.
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 1e-8)]
    outer_tol: f64,
    /// Cap on outer EM iterations per restart.
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
}

impl FitFlags {
    fn config(&self, seed: u64, mode: Mode) -> FitConfig {
        FitConfig {
            n_random_restarts: self.restarts,
            outer_tol: self.outer_tol,
            max_outer_iters: self.max_iters,
            seed,
            mode: mode.into(),
            ..FitConfig::default()
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "bipartite")]
    mode: Mode,
    #[command(flatten)]
    size: SizeArgs,
    /// Row communities (bipartite).
    #[arg(long, default_value_t = 3)]
    rows: usize,
    /// Column communities (bipartite).
    #[arg(long, default_value_t = 4)]
    cols: usize,
    /// Density factor (bipartite).
    #[arg(long, default_value_t = 0.3)]
    density: f64,
    /// Homophily factor (undirected).
    #[arg(long, default_value_t = 2.0)]
    homophily: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output_prefix: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    /// Row communities.
    #[arg(long)]
    rows: usize,
    /// Column communities; defaults to --rows.
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long, value_enum, default_value = "bipartite")]
    mode: Mode,
    /// Replace every positive count by 1.
    #[arg(long)]
    binary: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    fit: FitFlags,
    #[arg(long)]
    output_prefix: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    row_labels: PathBuf,
    /// Defaults to --row-labels.
    #[arg(long)]
    col_labels: Option<PathBuf>,
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long, value_enum, default_value = "bipartite")]
    mode: Mode,
    #[arg(long)]
    binary: bool,
}

#[derive(Args)]
struct EvalArgs {
    labels_a: PathBuf,
    labels_b: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value = "bipartite")]
    mode: Mode,
    /// Comma-separated density (bipartite) or homophily (undirected) values.
    #[arg(long, value_delimiter = ',', required = true)]
    grid: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    replicates: usize,
    /// Replicate r uses seed + r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    size: SizeArgs,
    #[arg(long, default_value_t = 3)]
    rows: usize,
    #[arg(long, default_value_t = 4)]
    cols: usize,
    #[command(flatten)]
    fit: FitFlags,
    #[arg(long)]
    output_prefix: PathBuf,
}

enum Failure {
    Usage(String),
    Data(TnpmError),
}

impl From<TnpmError> for Failure {
    fn from(e: TnpmError) -> Self {
        Failure::Data(e)
    }
}

fn community_counts(mode: Mode, rows: usize, cols: Option<usize>) -> Result<(usize, usize), Failure> {
    match (mode, cols) {
        (Mode::Undirected, Some(c)) if c != rows => Err(Failure::Usage(format!(
            "undirected mode uses one community count; got --rows {rows} and --cols {c}"
        ))),
        (_, c) => Ok((rows, c.unwrap_or(rows))),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate(a) => {
            let kind = match a.mode {
                Mode::Bipartite => SimulateKind::Bipartite {
                    rows: a.size.m,
                    cols: a.size.n,
                    k: a.rows,
                    l: a.cols,
                    density: a.density,
                },
                Mode::Undirected => SimulateKind::Undirected {
                    nodes: a.size.nodes,
                    homophily: a.homophily,
                },
            };
            let out = cmd_simulate(&kind, a.seed, &a.output_prefix)?;
            for p in [out.edges, out.row_labels, out.col_labels, out.metadata] {
                println!("wrote\t{}", p.display());
            }
        }
        Command::Fit(a) => {
            let (k, l) = community_counts(a.mode, a.rows, a.cols)?;
            let request = FitRequest {
                input: a.input,
                k,
                l,
                config: a.fit.config(a.seed, a.mode),
                binary: a.binary,
                out_prefix: a.output_prefix,
            };
            let out = cmd_fit(&request)?;
            let r = &out.result;
            println!("elbo\t{}", r.elbo);
            println!("log_likelihood_constant\t{}", -out.network.adjacency.log_factorial_sum());
            println!("restart\t{}", r.restart_index);
            println!("outer_iterations\t{}", r.outer_iterations);
            println!("converged\t{}", r.converged);
            println!("runtime_seconds\t{:.3}", out.runtime.as_secs_f64());
            for p in [out.row_labels, out.col_labels, out.soft, out.params, out.summary] {
                println!("wrote\t{}", p.display());
            }
        }
        Command::Score(a) => {
            let (k, l) = community_counts(a.mode, a.rows, a.cols)?;
            let col_labels = a.col_labels.unwrap_or_else(|| a.row_labels.clone());
            let value = cmd_score(&a.input, &a.row_labels, &col_labels, k, l, a.mode.into(), a.binary)?;
            println!("{value}");
        }
        Command::Eval(a) => {
            print!("{}", cmd_eval(&a.labels_a, &a.labels_b)?);
        }
        Command::Sweep(a) => {
            if a.replicates == 0 {
                return Err(Failure::Usage("--replicates must be at least 1".into()));
            }
            let kind = match a.mode {
                Mode::Bipartite => SweepKind::Bipartite {
                    rows: a.size.m,
                    cols: a.size.n,
                    k: a.rows,
                    l: a.cols,
                },
                Mode::Undirected => SweepKind::Undirected { nodes: a.size.nodes },
            };
            let request = SweepRequest {
                kind,
                grid: a.grid,
                replicates: a.replicates,
                seed: a.seed,
                config: a.fit.config(a.seed, a.mode),
            };
            let (report, records, summary) = cmd_sweep(&request, &a.output_prefix)?;
            println!("param\tvem_row\tvem_col\tsvd_row\tsvd_col");
            for s in &report.summary {
                println!(
                    "{}\t{:.4} ({:.4})\t{:.4} ({:.4})\t{:.4} ({:.4})\t{:.4} ({:.4})",
                    s.param,
                    s.vem_row.mean,
                    s.vem_row.se,
                    s.vem_col.mean,
                    s.vem_col.se,
                    s.svd_row.mean,
                    s.svd_row.se,
                    s.svd_col.mean,
                    s.svd_col.se
                );
            }
            println!("wrote\t{}", records.display());
            println!("wrote\t{}", summary.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
