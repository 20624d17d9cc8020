//! Synthetic workloads, benchmarking and arena statistics.

pub mod bench;
pub mod gen;
pub mod random;
pub mod stats;
pub mod workload;

use thiserror::Error;

pub use bench::{bench, bench_engines, engine_setup, write_csv, BenchRecord, EngineKind, EngineSetup, QueryEngine};
pub use gen::{generate, generate_document, GenSpec, Template};
pub use stats::{stats, ArenaStats, FunctionStats};
pub use workload::{gen_workload, Query};

use crate::baselines::DyckError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("infeasible generator spec: {0}")]
    InfeasibleSpec(String),
    #[error("workload of {m} queries exceeds the {n} vertices of the arena")]
    WorkloadTooLarge { m: usize, n: usize },
    #[error("engine {engine} answered {got} on query #{index} {query:?}, {reference} answered {expected}")]
    EngineDisagreement { engine: String, reference: String, index: usize, query: Query, expected: bool, got: bool },
    #[error("unknown engine {0:?}")]
    UnknownEngine(String),
    #[error(transparent)]
    Oracle(#[from] DyckError),
    #[error(transparent)]
    Engine(#[from] crate::engine::EngineError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
