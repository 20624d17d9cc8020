//! Explicit-state search over `(exploded vertex, call stack)` configurations.
//! Summary edges are never consulted.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::arena::{Arena, EdgeClass, ExplodedSupergraph};
use crate::bits::BitSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DyckMode {
    /// Unmatched calls may remain open.
    Ivp,
    /// Every call is matched by its return.
    Scvp,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DyckError {
    #[error("search exceeded {0} configurations")]
    BoundExceeded(usize),
}

/// Stack height that suffices for exact answers: `|F|·|D*|` pending calls, each
/// nesting at most one same-context descent per `(entry fact, exit fact)` pair of
/// each call site.
pub fn exact_stack_bound(arena: &Arena) -> usize {
    let d = arena.dstar();
    arena.functions().len() * d + arena.call_sites().len() * d * d
}

/// Reachable sets from one source, in both modes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyckSets {
    pub ivp: BitSet,
    pub scvp: BitSet,
}

pub struct DyckOracle<'a> {
    arena: &'a Arena,
    ex: &'a ExplodedSupergraph,
    stack_bound: usize,
    budget: usize,
}

const NO_FRAME: u32 = u32::MAX;

impl<'a> DyckOracle<'a> {
    pub fn new(arena: &'a Arena, ex: &'a ExplodedSupergraph) -> Self {
        DyckOracle { arena, ex, stack_bound: exact_stack_bound(arena), budget: 2_000_000 }
    }

    pub fn with_stack_bound(mut self, bound: usize) -> Self {
        self.stack_bound = bound;
        self
    }

    /// Maximum number of configurations explored before giving up.
    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn stack_bound(&self) -> usize {
        self.stack_bound
    }

    fn exact(&self) -> bool {
        self.stack_bound >= exact_stack_bound(self.arena)
    }

    /// Breadth-first search from `src`; `stop` ends it early once satisfied.
    fn search(&self, src: usize, mut stop: impl FnMut(usize, bool) -> bool) -> Result<(DyckSets, bool), DyckError> {
        let n = self.ex.vertex_count();
        let mut sets = DyckSets { ivp: BitSet::new(n), scvp: BitSet::new(n) };
        // Stack trie: node 0 is the empty stack; node k > 0 is (parent, call site, height).
        let mut trie: Vec<(u32, u32, u32)> = vec![(0, NO_FRAME, 0)];
        let mut intern: HashMap<(u32, u32), u32> = HashMap::new();
        let mut seen: std::collections::HashSet<(u32, u32)> = std::collections::HashSet::new();
        let mut queue = VecDeque::new();
        let mut pruned = false;
        seen.insert((src as u32, 0));
        queue.push_back((src as u32, 0u32));
        while let Some((x, st)) = queue.pop_front() {
            let x = x as usize;
            sets.ivp.insert(x);
            if st == 0 {
                sets.scvp.insert(x);
            }
            if stop(x, st == 0) {
                return Ok((sets, pruned));
            }
            for (y, class) in self.ex.successors(x) {
                let next = match class {
                    EdgeClass::Intra | EdgeClass::CallReturn => Some(st),
                    EdgeClass::CallStart => {
                        let (c, _) = self.ex.split(x);
                        let cs = self.arena.call_site_at(c).expect("call-start edges leave call vertices") as u32;
                        let height = trie[st as usize].2 + 1;
                        if height as usize > self.stack_bound {
                            pruned = true;
                            None
                        } else {
                            let len = trie.len() as u32;
                            let id = *intern.entry((st, cs)).or_insert(len);
                            if id == len {
                                trie.push((st, cs, height));
                            }
                            Some(id)
                        }
                    }
                    EdgeClass::ExitReturn => {
                        let (parent, cs, _) = trie[st as usize];
                        let (r, _) = self.ex.split(y);
                        (cs != NO_FRAME && self.arena.call_sites()[cs as usize].retsite == r).then_some(parent)
                    }
                };
                if let Some(next) = next {
                    if seen.insert((y as u32, next)) {
                        if seen.len() > self.budget {
                            return Err(DyckError::BoundExceeded(self.budget));
                        }
                        queue.push_back((y as u32, next));
                    }
                }
            }
        }
        Ok((sets, pruned))
    }

    /// Everything reachable from `src` in either mode.
    pub fn reachable_sets(&self, src: usize) -> Result<DyckSets, DyckError> {
        let (sets, pruned) = self.search(src, |_, _| false)?;
        if pruned && !self.exact() {
            return Err(DyckError::BoundExceeded(self.stack_bound));
        }
        Ok(sets)
    }

    pub fn reach(&self, src: usize, dst: usize, mode: DyckMode) -> Result<bool, DyckError> {
        let mut found = false;
        let (_, pruned) = self.search(src, |x, empty| {
            found = x == dst && (empty || mode == DyckMode::Ivp);
            found
        })?;
        if !found && pruned && !self.exact() {
            return Err(DyckError::BoundExceeded(self.stack_bound));
        }
        Ok(found)
    }
}

/// One-shot oracle query.
pub fn dyck_reach(arena: &Arena, ex: &ExplodedSupergraph, src: usize, dst: usize, mode: DyckMode, stack_bound: usize) -> Result<bool, DyckError> {
    DyckOracle::new(arena, ex).with_stack_bound(stack_bound).reach(src, dst, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::load_arena;

    const ARENA_A: &str = include_str!("../../fixtures/arena_a.json");

    #[test]
    fn arena_a_modes() {
        let a = load_arena(ARENA_A).unwrap();
        let ex = ExplodedSupergraph::build(&a);
        let v = |n: &str| a.vertex_named(n).unwrap();
        let h = exact_stack_bound(&a);
        let q = |u1, d1, u2, d2, m| dyck_reach(&a, &ex, ex.id(v(u1), d1), ex.id(v(u2), d2), m, h).unwrap();
        assert!(q("s_m", 0, "e_g", 1, DyckMode::Ivp));
        assert!(!q("s_m", 0, "e_g", 1, DyckMode::Scvp));
        assert!(q("s_m", 0, "e_m", 1, DyckMode::Scvp));
        assert!(!q("s_m", 1, "e_m", 1, DyckMode::Ivp));
        assert!(q("r1", 1, "r1", 1, DyckMode::Scvp));
        assert!(!q("e_g", 1, "e_m", 1, DyckMode::Ivp));
    }

    #[test]
    fn edge_free_graph() {
        let text = r#"{"facts":["x"],"functions":[{"name":"f","vertices":[{"id":"s","kind":"start"},{"id":"e","kind":"exit"}],"edges":[]}]}"#;
        let a = load_arena(text).unwrap();
        let ex = ExplodedSupergraph::build(&a);
        for m in [DyckMode::Ivp, DyckMode::Scvp] {
            assert!(dyck_reach(&a, &ex, 0, 0, m, 0).unwrap());
            assert!(!dyck_reach(&a, &ex, 0, 3, m, 0).unwrap());
        }
    }

    fn recursive() -> Arena {
        // f calls itself before reaching its exit; the fact is generated only deep inside.
        let text = r#"{"facts":["x"],"functions":[{"name":"f","vertices":[
            {"id":"s","kind":"start"},{"id":"c","kind":"call","callee":"f","retsite":"r"},{"id":"r","kind":"retsite"},{"id":"e","kind":"exit"}],
            "edges":[{"from":"s","to":"c","rel":[[0,0],[1,1]]},{"from":"c","to":"r","rel":[[0,0]]},{"from":"r","to":"e","rel":[[0,0],[1,1]]},{"from":"s","to":"e","rel":[[0,0],[0,1]]}],
            "calls":[{"call":"c","call_rel":[[0,0],[1,1]],"ret_rel":[[0,0],[1,1]]}]}]}"#;
        load_arena(text).unwrap()
    }

    #[test]
    fn recursion_within_the_exact_bound() {
        let a = recursive();
        let ex = ExplodedSupergraph::build(&a);
        let o = DyckOracle::new(&a, &ex);
        let (s, e) = (a.vertex_named("s").unwrap(), a.vertex_named("e").unwrap());
        assert!(o.reach(ex.id(s, 0), ex.id(e, 1), DyckMode::Scvp).unwrap());
        assert!(!o.reach(ex.id(s, 1), ex.id(e, 0), DyckMode::Ivp).unwrap());
        let r = a.vertex_named("r").unwrap();
        let sets = o.reachable_sets(ex.id(s, 0)).unwrap();
        assert!(sets.scvp.contains(ex.id(r, 1)) && sets.scvp.contains(ex.id(e, 1)));
        assert!(!sets.ivp.contains(ex.id(s, 1)));
        let sets = o.reachable_sets(ex.id(s, 1)).unwrap();
        assert_eq!(sets.ivp.iter().collect::<Vec<_>>(), vec![ex.id(s, 1), ex.id(a.vertex_named("c").unwrap(), 1)]);
    }

    #[test]
    fn too_small_a_bound_is_reported() {
        let a = recursive();
        let ex = ExplodedSupergraph::build(&a);
        let (s, r) = (a.vertex_named("s").unwrap(), a.vertex_named("r").unwrap());
        // (r, x) needs one frame.
        let o = DyckOracle::new(&a, &ex).with_stack_bound(0);
        assert_eq!(o.reach(ex.id(s, 0), ex.id(r, 1), DyckMode::Ivp), Err(DyckError::BoundExceeded(0)));
        assert!(DyckOracle::new(&a, &ex).with_stack_bound(1).reach(ex.id(s, 0), ex.id(r, 1), DyckMode::Ivp).unwrap());
        let o = DyckOracle::new(&a, &ex).with_budget(3);
        assert_eq!(o.reachable_sets(ex.id(s, 0)), Err(DyckError::BoundExceeded(3)));
    }
}
