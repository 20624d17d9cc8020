//! Reference solvers used as oracles and benchmark competitors.

pub mod dyck;
pub mod tabulation;

pub use dyck::{dyck_reach, exact_stack_bound, DyckError, DyckMode, DyckOracle, DyckSets};
pub use tabulation::{exhaustive_tabulate, DemandSolver};
