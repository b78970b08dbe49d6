//! Seeded Monte-Carlo sweeps over the transmit-power grid.
//!
//! Every realization is an independent work unit; results are collected in
//! index order, so outputs depend only on the configuration and never on the
//! worker count. Seeds are derived with a splitmix64 chain:
//!
//! - channels: `mix(master_seed, CHANNEL, realization)`, shared by all grid points
//! - solver random starts: `mix(master_seed, SOLVER, pt_index, realization)`
//! - oracle samples: `mix(master_seed, ORACLE, pt_index, realization)`

mod config;
mod emit;
mod sweep;
pub mod svg;

pub use config::{db_to_linear, derive_seed, OutputPaths, SeedTag, SweepConfig};
pub use emit::{emit, read_json, to_csv_string, to_json_string, write_snapshot_csv, EmitFormat};
pub use sweep::{run_sweep, snapshot_users, Aggregate, Method, Snapshot, SnapshotRow, SweepRecord, SweepResult};

use std::path::PathBuf;

use thiserror::Error;

use crate::channel::ChannelError;
use crate::solver::SolverError;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("csv encoding failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}
