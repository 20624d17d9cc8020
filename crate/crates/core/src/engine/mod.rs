//! Preprocessing pipeline and the general (interprocedurally valid) query.

mod persist;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arena::{Arena, CallGraph, ExplodedSupergraph, FuncId, VertexId};
use crate::calldepth::{
    call_graph_reachable, entry_tables, expand_pot, step2_call_reach, step3_exploded_call_graph, step4_up_down, CallReachLists, EntryTables, ExpandedPot,
    ExplodedCallGraph, UpDownTables,
};
use crate::decomp::{compute_pot, Pot, UGraph};
use crate::samectx::{preprocess_same_context, SameCtxIndex};
use crate::summaries::compute_summaries;

pub use persist::{load_index, load_index_for, save_index, FORMAT_VERSION, MAGIC};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("unknown exploded vertex ({vertex}, {fact})")]
    UnknownVertex { vertex: usize, fact: usize },
    #[error("index was built for a different arena")]
    IndexMismatch,
    #[error("index format version {found}, expected {expected}")]
    VersionMismatch { found: u16, expected: u16 },
    #[error("index fingerprint does not match the arena")]
    FingerprintMismatch,
    #[error("corrupt index: {0}")]
    CorruptIndex(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Everything needed to answer queries without revisiting the arena's graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryIndex {
    fingerprint: [u8; 32],
    arena: Arena,
    samectx: SameCtxIndex,
    reach: CallReachLists,
    cg: ExplodedCallGraph,
    pot: Pot,
    tpot: ExpandedPot,
    updown: UpDownTables,
    entry: EntryTables,
}

/// Function-level POT of the (undirected) call graph.
pub fn call_graph_pot(arena: &Arena) -> Pot {
    let cg = CallGraph::build(arena);
    compute_pot(&UGraph::from_edges(cg.function_count(), cg.undirected_pairs()))
}

pub fn preprocess(arena: &Arena) -> QueryIndex {
    let ex = ExplodedSupergraph::build(arena);
    let sg = compute_summaries(arena, &ex);
    let samectx = preprocess_same_context(&sg);
    let reach = step2_call_reach(&sg);
    let entry = entry_tables(&sg, &reach);
    let cg = step3_exploded_call_graph(arena, &samectx);
    let pot = call_graph_pot(arena);
    let tpot = expand_pot(&pot, arena.dstar());
    let updown = step4_up_down(&cg, &tpot);
    QueryIndex { fingerprint: arena.fingerprint(), arena: arena.clone(), samectx, reach, cg, pot, tpot, updown, entry }
}

/// Segments of a valid path found by [`QueryIndex::query_with_witness`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Witness {
    /// The whole path is same-context.
    SameContext,
    /// `(u₁,d₁) ⇝ call` same-context, enter the callee at `entry`, follow `hops`
    /// through `C̄`, then `(s_j, final_fact) ⇝ (u₂,d₂)` same-context.
    Interprocedural { call: (VertexId, usize), entry: (FuncId, usize), hops: Vec<((FuncId, usize), (FuncId, usize))>, final_fact: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryResult {
    pub verdict: bool,
    pub witness: Option<Witness>,
}

impl QueryIndex {
    pub fn arena(&self) -> &Arena {
        &self.arena
    }

    pub fn fingerprint(&self) -> [u8; 32] {
        self.fingerprint
    }

    pub fn samectx(&self) -> &SameCtxIndex {
        &self.samectx
    }

    pub fn call_reach(&self) -> &CallReachLists {
        &self.reach
    }

    pub fn exploded_call_graph(&self) -> &ExplodedCallGraph {
        &self.cg
    }

    pub fn pot(&self) -> &Pot {
        &self.pot
    }

    pub fn expanded_pot(&self) -> &ExpandedPot {
        &self.tpot
    }

    pub fn entry_tables(&self) -> &EntryTables {
        &self.entry
    }

    pub fn up_down(&self) -> &UpDownTables {
        &self.updown
    }

    fn check(&self, v: usize, d: usize) -> Result<(), EngineError> {
        if v >= self.arena.num_vertices() || d >= self.arena.dstar() {
            return Err(EngineError::UnknownVertex { vertex: v, fact: d });
        }
        Ok(())
    }

    pub fn same_context_query(&self, u1: VertexId, d1: usize, u2: VertexId, d2: usize) -> Result<bool, EngineError> {
        self.check(u1, d1)?;
        self.check(u2, d2)?;
        Ok(self.samectx.scq(u1, d1, u2, d2))
    }

    pub fn query(&self, u1: VertexId, d1: usize, u2: VertexId, d2: usize) -> Result<bool, EngineError> {
        self.check(u1, d1)?;
        self.check(u2, d2)?;
        Ok(self.decide(u1, d1, u2, d2).is_some())
    }

    pub fn query_with_witness(&self, u1: VertexId, d1: usize, u2: VertexId, d2: usize) -> Result<QueryResult, EngineError> {
        self.check(u1, d1)?;
        self.check(u2, d2)?;
        Ok(match self.decide(u1, d1, u2, d2) {
            None => QueryResult { verdict: false, witness: None },
            Some(None) => QueryResult { verdict: true, witness: Some(Witness::SameContext) },
            Some(Some((from, to))) => {
                let dstar = self.arena.dstar();
                let call = self.call_into(u1, d1, from);
                let hops = self.cg_path(from, to).into_iter().map(|(a, b)| ((a / dstar, a % dstar), (b / dstar, b % dstar))).collect();
                let witness = Witness::Interprocedural { call, entry: (from / dstar, from % dstar), hops, final_fact: to % dstar };
                QueryResult { verdict: true, witness: Some(witness) }
            }
        })
    }

    /// `None` if unreachable; `Some(None)` if same-context; otherwise the `C̄`
    /// endpoints of the interprocedural part.
    #[inline]
    fn decide(&self, u1: VertexId, d1: usize, u2: VertexId, d2: usize) -> Option<Option<(usize, usize)>> {
        if self.samectx.scq(u1, d1, u2, d2) {
            return Some(None);
        }
        let dstar = self.arena.dstar();
        let entries = self.entry.entries(u1 * dstar + d1);
        if entries.is_empty() {
            return None;
        }
        let base = self.samectx.owner(u2) * dstar;
        let target = u2 * dstar + d2;
        for &x in entries {
            for d5 in self.entry.start_facts(target) {
                if call_graph_reachable(&self.updown, &self.tpot, x as usize, base + d5) {
                    return Some(Some((x as usize, base + d5)));
                }
            }
        }
        None
    }

    /// A call `(c,d₃)` in the `I` list of `(u₁,d₁)` whose callee entry is `x`.
    fn call_into(&self, u1: VertexId, d1: usize, x: usize) -> (VertexId, usize) {
        let dstar = self.arena.dstar();
        self.reach
            .get(u1, d1)
            .find(|&(c, d3)| {
                let site = &self.arena.call_sites()[self.arena.call_site_at(c).expect("listed vertices are calls")];
                site.callee == x / dstar && site.call_rel.contains(d3, x % dstar)
            })
            .expect("entries derive from the I list")
    }

    fn cg_path(&self, from: usize, to: usize) -> Vec<(usize, usize)> {
        let mut prev = vec![usize::MAX; self.cg.len()];
        prev[from] = from;
        let mut queue = std::collections::VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            if x == to {
                break;
            }
            for &y in self.cg.successors(x) {
                if prev[y as usize] == usize::MAX {
                    prev[y as usize] = x;
                    queue.push_back(y as usize);
                }
            }
        }
        let mut path = Vec::new();
        let mut x = to;
        while x != from {
            path.push((prev[x], x));
            x = prev[x];
        }
        path.reverse();
        path
    }

    /// Re-checks every segment of a witness against the stored tables.
    pub fn verify_witness(&self, u1: VertexId, d1: usize, u2: VertexId, d2: usize, w: &Witness) -> bool {
        match w {
            Witness::SameContext => self.samectx.scq(u1, d1, u2, d2),
            Witness::Interprocedural { call, entry, hops, final_fact } => {
                let dstar = self.arena.dstar();
                let Some(cs) = self.arena.call_site_at(call.0) else { return false };
                let site = &self.arena.call_sites()[cs];
                let mut at = *entry;
                let chained = hops.iter().all(|&(a, b)| {
                    let ok = a == at && self.cg.has_edge(a.0 * dstar + a.1, b.0 * dstar + b.1);
                    at = b;
                    ok
                });
                let j = self.arena.fg(u2);
                self.reach.contains(u1, d1, call.0, call.1)
                    && site.callee == entry.0
                    && site.call_rel.contains(call.1, entry.1)
                    && chained
                    && at == (j, *final_fact)
                    && self.samectx.scq(self.arena.function(j).start, *final_fact, u2, d2)
            }
        }
    }

    /// Non-zero facts holding at `u2` given `facts` (plus the zero fact) at `u1`.
    pub fn mivp(&self, u1: VertexId, facts: &[usize], u2: VertexId) -> Result<BTreeSet<usize>, EngineError> {
        let sources: BTreeSet<usize> = std::iter::once(0).chain(facts.iter().copied()).collect();
        for &d in &sources {
            self.check(u1, d)?;
        }
        self.check(u2, 0)?;
        Ok((1..self.arena.dstar()).filter(|&d2| sources.iter().any(|&d1| self.decide(u1, d1, u2, d2).is_some())).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::load_arena;

    const ARENA_A: &str = include_str!("../../fixtures/arena_a.json");

    #[test]
    fn arena_a_queries() {
        let a = load_arena(ARENA_A).unwrap();
        let idx = preprocess(&a);
        let v = |n: &str| a.vertex_named(n).unwrap();
        assert!(idx.query(v("s_m"), 0, v("e_g"), 1).unwrap());
        assert!(!idx.query(v("s_m"), 1, v("e_m"), 1).unwrap());
        assert!(!idx.same_context_query(v("s_m"), 0, v("e_g"), 1).unwrap());
        for x in 0..6 {
            for d in 0..2 {
                assert!(idx.query(x, d, x, d).unwrap());
            }
        }
        assert_eq!(idx.mivp(v("s_m"), &[], v("e_m")).unwrap(), BTreeSet::from([1]));
        assert_eq!(idx.mivp(v("e_m"), &[], v("e_m")).unwrap(), BTreeSet::new());
        assert!(matches!(idx.query(6, 0, 0, 0), Err(EngineError::UnknownVertex { vertex: 6, fact: 0 })));
        assert!(matches!(idx.query(0, 2, 0, 0), Err(EngineError::UnknownVertex { vertex: 0, fact: 2 })));
    }

    #[test]
    fn witnesses_re_verify() {
        let a = load_arena(ARENA_A).unwrap();
        let idx = preprocess(&a);
        let v = |n: &str| a.vertex_named(n).unwrap();
        let r = idx.query_with_witness(v("s_m"), 0, v("e_g"), 1).unwrap();
        let w = r.witness.unwrap();
        assert_eq!(w, Witness::Interprocedural { call: (v("c1"), 0), entry: (1, 0), hops: vec![], final_fact: 0 });
        assert!(idx.verify_witness(v("s_m"), 0, v("e_g"), 1, &w));
        assert!(!idx.verify_witness(v("s_m"), 1, v("e_g"), 1, &w));
        let r = idx.query_with_witness(v("s_m"), 1, v("e_m"), 1).unwrap();
        assert_eq!(r, QueryResult { verdict: false, witness: None });
    }

    #[test]
    fn preprocessing_is_deterministic() {
        let a = load_arena(ARENA_A).unwrap();
        let mut x = Vec::new();
        let mut y = Vec::new();
        save_index(&preprocess(&a), &mut x).unwrap();
        save_index(&preprocess(&a), &mut y).unwrap();
        assert_eq!(x, y);
    }
}
