//! Function summaries by worklist propagation of partial summaries, and the
//! reachability views built on top of them.

mod view;

use std::collections::VecDeque;

use crate::arena::{Arena, EdgeClass, ExplodedSupergraph, FuncId, VertexId, VertexKind};
use crate::bits::BitSet;

pub use view::{reach_view, view, LocalGraph, ReachView, SearchScratch, ViewTag};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WorklistOrder {
    #[default]
    Fifo,
    Lifo,
}

/// `Ĝ`: the exploded supergraph plus summary edges, kept per call site.
#[derive(Clone, Debug)]
pub struct SummaryGraph<'a> {
    arena: &'a Arena,
    ex: &'a ExplodedSupergraph,
    /// Per call site, bit `d3·|D*| + d4` marks the edge `(c,d3) → (r,d4)`.
    summaries: Vec<BitSet>,
    /// `L_i`: bit `(d1·|V_i| + local(u))·|D*| + d2` marks `(d1, u, d2)`.
    partial: Vec<BitSet>,
    processed: Vec<BitSet>,
}

struct Worklist {
    items: VecDeque<(FuncId, usize, VertexId, usize)>,
    order: WorklistOrder,
}

impl Worklist {
    fn push(&mut self, item: (FuncId, usize, VertexId, usize)) {
        self.items.push_back(item);
    }

    fn pop(&mut self) -> Option<(FuncId, usize, VertexId, usize)> {
        match self.order {
            WorklistOrder::Fifo => self.items.pop_front(),
            WorklistOrder::Lifo => self.items.pop_back(),
        }
    }
}

pub fn compute_summaries<'a>(arena: &'a Arena, ex: &'a ExplodedSupergraph) -> SummaryGraph<'a> {
    compute_summaries_with(arena, ex, WorklistOrder::Fifo)
}

pub fn compute_summaries_with<'a>(arena: &'a Arena, ex: &'a ExplodedSupergraph, order: WorklistOrder) -> SummaryGraph<'a> {
    let dstar = arena.dstar();
    let mut sg = SummaryGraph {
        arena,
        ex,
        summaries: vec![BitSet::new(dstar * dstar); arena.call_sites().len()],
        partial: arena.functions().iter().map(|f| BitSet::new(dstar * f.len * dstar)).collect(),
        processed: arena.functions().iter().map(|f| BitSet::new(dstar * f.len * dstar)).collect(),
    };
    let mut work = Worklist { items: VecDeque::new(), order };
    for (f, func) in arena.functions().iter().enumerate() {
        for d in 0..dstar {
            let k = sg.key(f, d, func.start, d);
            sg.partial[f].insert(k);
            work.push((f, d, func.start, d));
        }
    }
    while let Some((f, d1, u2, d2)) = work.pop() {
        let func = arena.function(f);
        if u2 == func.exit {
            sg.close_exit(f, d1, d2, &mut work);
            continue;
        }
        let x = ex.id(u2, d2);
        let mut next: Vec<(VertexId, usize)> =
            ex.successors(x).filter(|(_, c)| matches!(c, EdgeClass::Intra | EdgeClass::CallReturn)).map(|(y, _)| ex.split(y)).collect();
        if let VertexKind::Call { retsite, .. } = arena.vertex(u2).kind {
            let cs = arena.call_site_at(u2).expect("call vertex has a site");
            next.extend(sg.summary_targets(cs, d2).map(|d4| (retsite, d4)));
        }
        for (u3, d3) in next {
            sg.discover(f, d1, u3, d3, &mut work);
        }
    }
    sg
}

impl<'a> SummaryGraph<'a> {
    #[inline]
    fn key(&self, f: FuncId, d1: usize, u: VertexId, d2: usize) -> usize {
        let func = self.arena.function(f);
        let dstar = self.arena.dstar();
        (d1 * func.len + (u - func.first)) * dstar + d2
    }

    fn discover(&mut self, f: FuncId, d1: usize, u: VertexId, d2: usize, work: &mut Worklist) {
        let k = self.key(f, d1, u, d2);
        if self.processed[f].insert(k) {
            self.partial[f].insert(k);
            work.push((f, d1, u, d2));
        }
    }

    /// A new pair `(d1,d2)` of `χ(f)`: derive summary edges at every call site of `f`
    /// and push partial summaries across the fresh edges.
    fn close_exit(&mut self, f: FuncId, d1: usize, d2: usize, work: &mut Worklist) {
        let arena = self.arena;
        let dstar = arena.dstar();
        for &cs in arena.callers_of(f) {
            let site = &arena.call_sites()[cs];
            for d3 in site.call_rel.preimage(d1) {
                for d4 in site.ret_rel.image(d2) {
                    if !self.summaries[cs].insert(d3 * dstar + d4) {
                        continue;
                    }
                    let j = site.caller;
                    for d5 in 0..dstar {
                        if self.partial[j].contains(self.key(j, d5, site.call, d3)) {
                            self.discover(j, d5, site.retsite, d4, work);
                        }
                    }
                }
            }
        }
    }

    pub fn arena(&self) -> &'a Arena {
        self.arena
    }

    pub fn exploded(&self) -> &'a ExplodedSupergraph {
        self.ex
    }

    /// Return-site facts `d4` with a summary edge `(c,d3) → (r,d4)` at call site `cs`.
    pub fn summary_targets(&self, cs: usize, d3: usize) -> impl Iterator<Item = usize> + '_ {
        let dstar = self.arena.dstar();
        (0..dstar).filter(move |&d4| self.summaries[cs].contains(d3 * dstar + d4))
    }

    pub fn has_summary(&self, cs: usize, d3: usize, d4: usize) -> bool {
        self.summaries[cs].contains(d3 * self.arena.dstar() + d4)
    }

    /// All summary edges as `((c,d3),(r,d4))`, sorted.
    pub fn summary_edges(&self) -> Vec<((VertexId, usize), (VertexId, usize))> {
        let dstar = self.arena.dstar();
        let mut out = Vec::new();
        for (cs, bits) in self.summaries.iter().enumerate() {
            let site = &self.arena.call_sites()[cs];
            out.extend(bits.iter().map(|k| ((site.call, k / dstar), (site.retsite, k % dstar))));
        }
        out.sort_unstable();
        out
    }

    pub fn summary_edge_count(&self) -> usize {
        self.summaries.iter().map(BitSet::count).sum()
    }

    /// `(d1, u, d2) ∈ L_f`.
    pub fn partial_contains(&self, f: FuncId, d1: usize, u: VertexId, d2: usize) -> bool {
        self.partial[f].contains(self.key(f, d1, u, d2))
    }

    /// `χ(f)` as sorted pairs.
    pub fn chi(&self, f: FuncId) -> Vec<(usize, usize)> {
        let dstar = self.arena.dstar();
        let exit = self.arena.function(f).exit;
        let mut out = Vec::new();
        for d1 in 0..dstar {
            for d2 in 0..dstar {
                if self.partial_contains(f, d1, exit, d2) {
                    out.push((d1, d2));
                }
            }
        }
        out
    }
}
