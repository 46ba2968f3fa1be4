//! Popularity scoring for repository event streams.
//!
//! Fork and star events are binned on a community-wide grid of fixed-width
//! intervals. Each interval gets a weight per indicator equal to its share
//! of all community activity, and a repository's weighted total popularity
//! score (WTPS) sums `weight * count` over intervals and indicators.
//!
//! Around the score the crate provides dataset ingestion ([`ingest`]),
//! ranking and growth classification ([`scoring`]), correlation and
//! regression ([`stats`]) and the repository–follower graph experiments
//! ([`graph`]).

pub mod graph;
pub mod ingest;
pub mod model;
pub mod report;
pub mod scoring;
pub mod stats;
pub mod synth;

pub use graph::{build_graph, clustering_coefficient, deletion_experiment, CoefficientKind, FollowerGraph};
pub use model::{
    bin_events, build_grid, BinnedCounts, Corpus, EventKind, PopularityEvent, RepoRecord, TimeGrid, Timestamp,
};
pub use scoring::{compute_weights, rank, wtps_interval, wtps_overall, Indicator, ScoreCard, WeightTable};
pub use stats::{ols_line, pearson, summarize};
