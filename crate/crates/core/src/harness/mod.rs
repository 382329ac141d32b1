//! Experiment orchestration behind the command line tool.

mod growth;
mod montecarlo;
pub mod verify;

pub use growth::{growth_experiment, GrowthRecord, GrowthReport, MAX_GROWTH_N};
pub use montecarlo::{
    run_monte_carlo, sample_partitions, stream_rng, tv_distance, EmpiricalPartitionDist,
    SamplerKind, MAX_TABULATED_N,
};

/// Seed used whenever none is given.
pub const DEFAULT_SEED: u64 = 42;
