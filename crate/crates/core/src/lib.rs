//! Community detection in bipartite and undirected networks under the
//! two-way node popularity model, fitted by variational EM.
//!
//! * [`model`]: adjacency storage, assignments, parameters and likelihoods.
//! * [`vem`]: the bound, E-step, M-step and the multi-restart fit.
//! * [`spectral`]: truncated SVD, k-means and the initial labelings.
//! * [`netgen`]: planted-partition network generators.
//! * [`metrics`]: ARI, confusion matrices, misclustering rates, label scoring
//!   and the chi-square independence test.
//! * [`io`] and [`commands`]: file formats and the command-line operations.

pub mod commands;
pub mod error;
pub mod io;
pub mod metrics;
pub mod model;
pub mod netgen;
pub mod spectral;
pub mod vem;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Result, TnpmError};
pub use model::{BipartiteAdjacency, HardLabels, ModelParams, SoftAssignment, PARAM_FLOOR};
pub use vem::{fit, fit_undirected, FitConfig, FitMode, FitResult};
