//! Clustering agreement, label scoring and contingency-table tests.

mod ari;
mod chisq;
mod confusion;
mod score;

pub use ari::ari;
pub use chisq::{chi_square_independence, ChiSquare};
pub use confusion::{
    misclustering_rate, misclustering_rate_assignment, misclustering_rate_exhaustive,
    soft_confusion, ConfusionMatrix, EXHAUSTIVE_MAX_CLUSTERS,
};
pub use score::score_labels;
