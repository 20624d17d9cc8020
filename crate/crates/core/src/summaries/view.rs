use crate::arena::{EdgeClass, FuncId, VertexKind};
use crate::bits::BitSet;

use super::SummaryGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViewTag {
    /// Intraprocedural, call-return-site and summary edges.
    Scvp,
    /// Additionally call-start edges.
    Ivp,
}

/// Edge filter over `Ĝ`. Exit-return-site edges are never part of a view.
#[derive(Clone, Copy)]
pub struct ReachView<'g> {
    sg: &'g SummaryGraph<'g>,
    tag: ViewTag,
}

pub fn view<'g>(sg: &'g SummaryGraph<'g>, tag: ViewTag) -> ReachView<'g> {
    ReachView { sg, tag }
}

/// Plain graph search in the view.
pub fn reach_view(v: &ReachView, src: usize, dst: usize) -> bool {
    v.reach(src, dst)
}

/// Reusable visited marks for repeated searches over one graph.
#[derive(Clone, Debug, Default)]
pub struct SearchScratch {
    mark: Vec<u32>,
    stamp: u32,
    stack: Vec<usize>,
}

impl SearchScratch {
    fn begin(&mut self, n: usize) -> u32 {
        if self.mark.len() != n || self.stamp == u32::MAX {
            self.mark = vec![0; n];
            self.stamp = 0;
        }
        self.stamp += 1;
        self.stack.clear();
        self.stamp
    }
}

impl<'g> ReachView<'g> {
    pub fn tag(&self) -> ViewTag {
        self.tag
    }

    #[inline]
    pub fn for_each_successor(&self, x: usize, mut f: impl FnMut(usize)) {
        let ex = self.sg.exploded();
        for (y, class) in ex.successors(x) {
            match class {
                EdgeClass::Intra | EdgeClass::CallReturn => f(y),
                EdgeClass::CallStart if self.tag == ViewTag::Ivp => f(y),
                _ => {}
            }
        }
        let (u, d) = ex.split(x);
        let arena = self.sg.arena();
        if let VertexKind::Call { retsite, .. } = arena.vertex(u).kind {
            let cs = arena.call_site_at(u).expect("call vertex has a site");
            for d4 in self.sg.summary_targets(cs, d) {
                f(ex.id(retsite, d4));
            }
        }
    }

    pub fn successors(&self, x: usize) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_successor(x, |y| out.push(y));
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn reach(&self, src: usize, dst: usize) -> bool {
        self.reach_with(&mut SearchScratch::default(), src, dst)
    }

    pub fn reach_with(&self, scratch: &mut SearchScratch, src: usize, dst: usize) -> bool {
        let stamp = scratch.begin(self.sg.exploded().vertex_count());
        scratch.mark[src] = stamp;
        scratch.stack.push(src);
        while let Some(x) = scratch.stack.pop() {
            if x == dst {
                return true;
            }
            let SearchScratch { mark, stack, .. } = scratch;
            self.for_each_successor(x, |y| {
                if mark[y] != stamp {
                    mark[y] = stamp;
                    stack.push(y);
                }
            });
        }
        false
    }

    pub fn reachable_from(&self, src: usize) -> BitSet {
        let mut seen = BitSet::new(self.sg.exploded().vertex_count());
        let mut stack = vec![src];
        seen.insert(src);
        while let Some(x) = stack.pop() {
            self.for_each_successor(x, |y| {
                if seen.insert(y) {
                    stack.push(y);
                }
            });
        }
        seen
    }

    /// `Ĝ_{f,SCVP}` in function-local exploded numbering `(v − first)·|D*| + d`.
    pub fn function_graph(&self, f: FuncId) -> LocalGraph {
        let func = self.sg.arena().function(f);
        let dstar = self.sg.arena().dstar();
        let base = func.first * dstar;
        let size = func.len * dstar;
        let scvp = ReachView { sg: self.sg, tag: ViewTag::Scvp };
        let mut offsets = Vec::with_capacity(size + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for x in 0..size {
            let start = targets.len();
            scvp.for_each_successor(base + x, |y| targets.push((y - base) as u32));
            targets[start..].sort_unstable();
            let mut w = start;
            for r in start..targets.len() {
                if r == start || targets[r] != targets[w - 1] {
                    targets[w] = targets[r];
                    w += 1;
                }
            }
            targets.truncate(w);
            offsets.push(targets.len() as u32);
        }
        LocalGraph { base, offsets, targets }
    }
}

/// Adjacency of one function's same-context view, local exploded numbering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalGraph {
    /// Global exploded id of local vertex 0.
    pub base: usize,
    offsets: Vec<u32>,
    targets: Vec<u32>,
}

impl LocalGraph {
    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn successors(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.targets[self.offsets[x] as usize..self.offsets[x + 1] as usize].iter().map(|&t| t as usize)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |x| self.successors(x).map(move |y| (x, y)))
    }

    pub fn reversed(&self) -> LocalGraph {
        let n = self.len();
        let mut count = vec![0u32; n + 1];
        for (_, y) in self.edges() {
            count[y + 1] += 1;
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let mut fill = count.clone();
        let mut targets = vec![0u32; self.targets.len()];
        for (x, y) in self.edges() {
            targets[fill[y] as usize] = x as u32;
            fill[y] += 1;
        }
        LocalGraph { base: self.base, offsets: count, targets }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{load_arena, ExplodedSupergraph};
    use crate::summaries::compute_summaries;

    #[test]
    fn arena_a_views() {
        let a = load_arena(include_str!("../../fixtures/arena_a.json")).unwrap();
        let ex = ExplodedSupergraph::build(&a);
        let sg = compute_summaries(&a, &ex);
        let v = |name: &str, d: usize| ex.id(a.vertex_named(name).unwrap(), d);
        let (scvp, ivp) = (view(&sg, ViewTag::Scvp), view(&sg, ViewTag::Ivp));
        assert!(!scvp.successors(v("c1", 0)).contains(&v("s_g", 0)));
        assert!(ivp.successors(v("c1", 0)).contains(&v("s_g", 0)));
        for w in [scvp, ivp] {
            assert!(w.successors(v("c1", 0)).contains(&v("r1", 1)));
            assert!(w.reach(v("e_m", 1), v("e_m", 1)));
        }
        assert!(reach_view(&ivp, v("s_m", 0), v("e_g", 1)));
        assert!(!reach_view(&scvp, v("s_m", 0), v("e_g", 1)));
        assert!(reach_view(&scvp, v("s_m", 0), v("e_m", 1)));
        assert!(!reach_view(&ivp, v("s_m", 1), v("e_m", 1)));
        let fg = scvp.function_graph(0);
        assert_eq!(fg.len(), 8);
        assert_eq!(fg.reversed().reversed(), fg);
    }
}
