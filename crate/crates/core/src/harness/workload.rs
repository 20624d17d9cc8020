use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::arena::{Arena, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Query {
    pub u1: VertexId,
    pub d1: usize,
    pub u2: VertexId,
    pub d2: usize,
}

/// `m` tuples drawn uniformly and independently, with `m` at most the vertex count.
pub fn gen_workload(a: &Arena, m: usize, seed: u64) -> Result<Vec<Query>, HarnessError> {
    let n = a.num_vertices();
    if m > n {
        return Err(HarnessError::WorkloadTooLarge { m, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dstar = a.dstar();
    Ok((0..m).map(|_| Query { u1: rng.gen_range(0..n), d1: rng.gen_range(0..dstar), u2: rng.gen_range(0..n), d2: rng.gen_range(0..dstar) }).collect())
}
