//! On-demand IFDS data-flow analysis.
//!
//! Preprocessing combines function summaries, a treewidth-based same-context index
//! and treedepth-based reachability over the exploded call graph; queries then ask
//! whether a fact at one program point can flow to a fact at another along an
//! interprocedurally valid path.

pub mod arena;
pub mod baselines;
pub mod bits;
pub mod calldepth;
pub mod decomp;
pub mod engine;
pub mod harness;
pub mod samectx;
pub mod summaries;
