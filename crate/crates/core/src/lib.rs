//! Detection of intrusions in the outputs of a static transfer function.
//!
//! Outputs `y = h(x) + ε` are sorted by their inputs, and the ratio of
//! positive to total concomitant variation is tracked as the sample grows.
//! Without intrusions the ratio converges to a property of `h`; with iid
//! additive intrusions it drifts to one half while the total variation
//! grows like `√n`. A rule of thumb turns both trends into a decision.

pub mod detector;
pub mod error;
pub mod fmt;
pub mod harness;
pub mod io;
pub mod stats;
pub mod stochastic;
pub mod transfer;

pub use detector::{detect, Decision, RuleCase, TrendParams, Verdict};
pub use error::{Error, Result};
pub use harness::{preset, run_replications, run_scenario, Scenario, TransferSpec};
pub use stats::{
    compute_b0, compute_stats, concomitant_sort, prefix_trajectory, sample_stats, ConcomitantSeries, IncrementalStats,
    PairedSample, StatTriple, Trajectory, TrajectoryPoint,
};
pub use stochastic::{InputModel, IntrusionModel, IntrusionSampler, Seed};
pub use transfer::{endpoint_equal, endpoint_values_equal, limit_i, TransferFunction};
