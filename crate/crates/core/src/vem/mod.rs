//! Variational EM for the two-way node popularity model.
//!
//! The bound is maximized by coordinate ascent: closed-form softmax updates
//! of the row and column assignments, closed-form mixing proportions, and an
//! alternating fixed-point loop for the popularity parameters.

mod elbo;
mod estep;
mod fit;
mod mstep;

pub use elbo::elbo;
pub use estep::{e_step_cols, e_step_rows};
pub use fit::{fit, fit_from_labels, fit_undirected, hard_labels, FitConfig, FitMode, FitResult, RestartSummary};
pub use mstep::{
    implied_means, m_step_mixing, m_step_popularity_closed, m_step_popularity_iterative,
    ClosedFormFit, PopularityFit,
};
