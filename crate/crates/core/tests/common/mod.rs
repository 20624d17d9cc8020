#![allow(dead_code)]

use ifds_core::arena::{Arena, ExplodedSupergraph};
use ifds_core::baselines::{DemandSolver, DyckError, DyckOracle};
use ifds_core::engine::preprocess;
use ifds_core::summaries::{compute_summaries, view, ViewTag};

/// Disagreement counts from one exhaustive sweep over an arena.
#[derive(Default, Debug, Clone, Copy)]
pub struct SweepStats {
    pub tuples: u64,
    pub ivp_mismatches: u64,
    pub scvp_mismatches: u64,
    pub chi_checked: u64,
    pub chi_mismatches: u64,
    pub true_ivp: u64,
    pub true_scvp: u64,
}

impl SweepStats {
    pub fn add(&mut self, o: SweepStats) {
        self.tuples += o.tuples;
        self.ivp_mismatches += o.ivp_mismatches;
        self.scvp_mismatches += o.scvp_mismatches;
        self.chi_checked += o.chi_checked;
        self.chi_mismatches += o.chi_mismatches;
        self.true_ivp += o.true_ivp;
        self.true_scvp += o.true_scvp;
    }
}

/// Compares every solver on every `(u₁,d₁,u₂,d₂)`. Fails only if the oracle
/// cannot certify its answers within its budget.
pub fn sweep(a: &Arena) -> Result<SweepStats, DyckError> {
    let ex = ExplodedSupergraph::build(a);
    let oracle = DyckOracle::new(a, &ex).with_budget(200_000);
    let dstar = a.dstar();
    let n = ex.vertex_count();
    let mut sets = Vec::with_capacity(n);
    for x in 0..n {
        sets.push(oracle.reachable_sets(x)?);
    }
    let sg = compute_summaries(a, &ex);
    let idx = preprocess(a);
    let ivp = view(&sg, ViewTag::Ivp);
    let scvp = view(&sg, ViewTag::Scvp);
    let mut demand = DemandSolver::new(a, &ex);
    let mut st = SweepStats::default();
    for x in 0..n {
        let (u1, d1) = (x / dstar, x % dstar);
        let by_ivp = ivp.reachable_from(x);
        let by_scvp = scvp.reachable_from(x);
        for y in 0..n {
            let (u2, d2) = (y / dstar, y % dstar);
            let truth = sets[x].ivp.contains(y);
            let same = sets[x].scvp.contains(y);
            st.tuples += 1;
            st.true_ivp += truth as u64;
            st.true_scvp += same as u64;
            if idx.query(u1, d1, u2, d2).unwrap() != truth || by_ivp.contains(y) != truth || demand.query(u1, d1, u2, d2) != truth {
                st.ivp_mismatches += 1;
            }
            if idx.same_context_query(u1, d1, u2, d2).unwrap() != same || by_scvp.contains(y) != same {
                st.scvp_mismatches += 1;
            }
        }
    }
    for (f, func) in a.functions().iter().enumerate() {
        let chi = sg.chi(f);
        for d1 in 0..dstar {
            for d2 in 0..dstar {
                st.chi_checked += 1;
                let truth = sets[ex.id(func.start, d1)].scvp.contains(ex.id(func.exit, d2));
                if chi.contains(&(d1, d2)) != truth {
                    st.chi_mismatches += 1;
                }
            }
        }
    }
    Ok(st)
}
