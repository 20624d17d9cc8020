//! Treedepth side of the index: intraprocedural call-reach lists, the exploded
//! call graph `C̄`, the expanded POT over `F × D*`, and subtree-restricted
//! up/down reachability tables.

use serde::{Deserialize, Serialize};

use crate::arena::{Arena, FuncId, VertexId};
use crate::bits::{get_bit, set_bit, words_for};
use crate::decomp::Pot;
use crate::samectx::SameCtxIndex;
use crate::summaries::{view, SummaryGraph, ViewTag};

/// `I_{u,d}`: call-vertex facts reachable from `(u,d)` inside its function.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallReachLists {
    dstar: usize,
    offsets: Vec<u32>,
    /// One bit per exploded vertex with a non-empty list.
    nonempty: Vec<u64>,
    /// Global exploded ids of `(c, d')`, sorted per list.
    items: Vec<u32>,
}

impl CallReachLists {
    #[inline]
    pub fn raw(&self, x: usize) -> &[u32] {
        if !get_bit(&self.nonempty, x) {
            return &[];
        }
        &self.items[self.offsets[x] as usize..self.offsets[x + 1] as usize]
    }

    pub fn get(&self, u: VertexId, d: usize) -> impl Iterator<Item = (VertexId, usize)> + '_ {
        let dstar = self.dstar;
        self.raw(u * dstar + d).iter().map(move |&y| (y as usize / dstar, y as usize % dstar))
    }

    pub fn contains(&self, u: VertexId, d: usize, c: VertexId, dc: usize) -> bool {
        self.raw(u * self.dstar + d).binary_search(&((c * self.dstar + dc) as u32)).is_ok()
    }

    pub fn total_len(&self) -> usize {
        self.items.len()
    }
}

pub fn step2_call_reach(sg: &SummaryGraph) -> CallReachLists {
    let arena = sg.arena();
    let dstar = arena.dstar();
    let v = view(sg, ViewTag::Scvp);
    let mut offsets = vec![0u32; arena.num_vertices() * dstar + 1];
    let mut nonempty = vec![0u64; words_for(arena.num_vertices() * dstar)];
    let mut items = Vec::new();
    let mut order: Vec<FuncId> = (0..arena.functions().len()).collect();
    order.sort_by_key(|&f| arena.function(f).first);
    let mut mark: Vec<u32> = Vec::new();
    let mut stack = Vec::new();
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for f in order {
        let func = arena.function(f);
        let rev = v.function_graph(f).reversed();
        mark.clear();
        mark.resize(rev.len(), u32::MAX);
        pairs.clear();
        for (stamp, target) in func
            .call_sites
            .iter()
            .flat_map(|&cs| {
                let c = arena.call_sites()[cs].call;
                (0..dstar).map(move |d| (c - func.first) * dstar + d)
            })
            .enumerate()
        {
            let stamp = stamp as u32;
            let global = (rev.base + target) as u32;
            mark[target] = stamp;
            stack.push(target);
            while let Some(x) = stack.pop() {
                pairs.push((x as u32, global));
                for y in rev.successors(x) {
                    if mark[y] != stamp {
                        mark[y] = stamp;
                        stack.push(y);
                    }
                }
            }
        }
        pairs.sort_unstable();
        let mut k = 0;
        for x in 0..rev.len() {
            let start = items.len();
            while k < pairs.len() && pairs[k].0 as usize == x {
                items.push(pairs[k].1);
                k += 1;
            }
            offsets[rev.base + x] = start as u32;
            offsets[rev.base + x + 1] = items.len() as u32;
            if items.len() > start {
                set_bit(&mut nonempty, rev.base + x);
            }
        }
    }
    CallReachLists { dstar, offsets, nonempty, items }
}

/// Query-time shortcuts derived from the `I` lists and the same-context view.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryTables {
    dstar: usize,
    offsets: Vec<u32>,
    nonempty: Vec<u64>,
    /// `C̄` nodes `(g,d₄)` enterable from each exploded vertex, sorted.
    items: Vec<u32>,
    /// Bit `x·|D*| + d` is set iff `(s_f,d)` reaches exploded vertex `x` same-context.
    from_start: Vec<u64>,
}

impl EntryTables {
    #[inline]
    pub fn entries(&self, x: usize) -> &[u32] {
        if !get_bit(&self.nonempty, x) {
            return &[];
        }
        &self.items[self.offsets[x] as usize..self.offsets[x + 1] as usize]
    }

    /// Facts `d` with `(s_f,d)` reaching `x` inside its own function.
    #[inline]
    pub fn start_facts(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        let base = x * self.dstar;
        (0..self.dstar).filter(move |&d| get_bit(&self.from_start, base + d))
    }
}

pub fn entry_tables(sg: &SummaryGraph, reach: &CallReachLists) -> EntryTables {
    let arena = sg.arena();
    let dstar = arena.dstar();
    let n = arena.num_vertices() * dstar;
    let mut offsets = vec![0u32; n + 1];
    let mut nonempty = vec![0u64; words_for(n)];
    let mut items = Vec::new();
    for x in 0..n {
        let start = items.len();
        for &cd in reach.raw(x) {
            let (c, d3) = (cd as usize / dstar, cd as usize % dstar);
            let site = &arena.call_sites()[arena.call_site_at(c).expect("listed vertices are calls")];
            items.extend(site.call_rel.image(d3).map(|d4| (site.callee * dstar + d4) as u32));
        }
        items[start..].sort_unstable();
        let mut w = start;
        for k in start..items.len() {
            if w == start || items[w - 1] != items[k] {
                items[w] = items[k];
                w += 1;
            }
        }
        items.truncate(w);
        offsets[x] = start as u32;
        offsets[x + 1] = items.len() as u32;
        if w > start {
            set_bit(&mut nonempty, x);
        }
    }
    let v = view(sg, ViewTag::Scvp);
    let mut from_start = vec![0u64; words_for(n * dstar)];
    let mut seen: Vec<u32> = Vec::new();
    let mut stack = Vec::new();
    for (f, func) in arena.functions().iter().enumerate() {
        let local = v.function_graph(f);
        seen.clear();
        seen.resize(local.len(), u32::MAX);
        for d in 0..dstar {
            let root = (func.start - func.first) * dstar + d;
            seen[root] = d as u32;
            stack.push(root);
            while let Some(y) = stack.pop() {
                set_bit(&mut from_start, (local.base + y) * dstar + d);
                for z in local.successors(y) {
                    if seen[z] != d as u32 {
                        seen[z] = d as u32;
                        stack.push(z);
                    }
                }
            }
        }
    }
    EntryTables { dstar, offsets, nonempty, items, from_start }
}

/// `C̄` over nodes `f·|D*| + d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplodedCallGraph {
    dstar: usize,
    fwd_off: Vec<usize>,
    fwd: Vec<u32>,
    rev_off: Vec<usize>,
    rev: Vec<u32>,
}

fn csr(n: usize, edges: &[(u32, u32)]) -> (Vec<usize>, Vec<u32>) {
    let mut off = vec![0usize; n + 1];
    for &(a, _) in edges {
        off[a as usize + 1] += 1;
    }
    for i in 0..n {
        off[i + 1] += off[i];
    }
    let mut fill = off.clone();
    let mut out = vec![0u32; edges.len()];
    for &(a, b) in edges {
        out[fill[a as usize]] = b;
        fill[a as usize] += 1;
    }
    for i in 0..n {
        out[off[i]..off[i + 1]].sort_unstable();
    }
    (off, out)
}

impl ExplodedCallGraph {
    pub fn from_edges(functions: usize, dstar: usize, mut edges: Vec<(u32, u32)>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        let n = functions * dstar;
        let (fwd_off, fwd) = csr(n, &edges);
        let flipped: Vec<(u32, u32)> = edges.iter().map(|&(a, b)| (b, a)).collect();
        let (rev_off, rev) = csr(n, &flipped);
        ExplodedCallGraph { dstar, fwd_off, fwd, rev_off, rev }
    }

    pub fn node(&self, f: FuncId, d: usize) -> usize {
        f * self.dstar + d
    }

    pub fn split(&self, x: usize) -> (FuncId, usize) {
        (x / self.dstar, x % self.dstar)
    }

    pub fn len(&self) -> usize {
        self.fwd_off.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn successors(&self, x: usize) -> &[u32] {
        &self.fwd[self.fwd_off[x]..self.fwd_off[x + 1]]
    }

    pub fn predecessors(&self, x: usize) -> &[u32] {
        &self.rev[self.rev_off[x]..self.rev_off[x + 1]]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.successors(a).binary_search(&(b as u32)).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.fwd.len()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.len()).flat_map(|a| self.successors(a).iter().map(move |&b| (a, b as usize))).collect()
    }
}

pub fn step3_exploded_call_graph(arena: &Arena, samectx: &SameCtxIndex) -> ExplodedCallGraph {
    let dstar = arena.dstar();
    let mut edges = Vec::new();
    for (f, func) in arena.functions().iter().enumerate() {
        for d1 in 0..dstar {
            for &cs in &func.call_sites {
                let site = &arena.call_sites()[cs];
                for d3 in 0..dstar {
                    if samectx.scq(func.start, d1, site.call, d3) {
                        for d2 in site.call_rel.image(d3) {
                            edges.push(((f * dstar + d1) as u32, (site.callee * dstar + d2) as u32));
                        }
                    }
                }
            }
        }
    }
    ExplodedCallGraph::from_edges(arena.functions().len(), dstar, edges)
}

/// POT over `F × D*`: each function becomes the chain `(f,0) → … → (f,|D*|−1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandedPot {
    parent: Vec<Option<u32>>,
    pre: Vec<u32>,
    size: Vec<u32>,
    depth: Vec<u32>,
    anc_off: Vec<usize>,
    /// Ancestors of each node, the node itself first.
    anc: Vec<u32>,
}

pub fn expand_pot(p: &Pot, dstar: usize) -> ExpandedPot {
    let n = p.len() * dstar;
    let parent: Vec<Option<u32>> = (0..n)
        .map(|x| {
            let (f, d) = (x / dstar, x % dstar);
            if d > 0 {
                Some((x - 1) as u32)
            } else {
                p.parent(f).map(|g| (g * dstar + dstar - 1) as u32)
            }
        })
        .collect();
    let mut children = vec![Vec::new(); n];
    for (x, q) in parent.iter().enumerate() {
        if let Some(q) = q {
            children[*q as usize].push(x as u32);
        }
    }
    let mut pre = vec![0u32; n];
    let mut size = vec![1u32; n];
    let mut depth = vec![1u32; n];
    let mut order = Vec::with_capacity(n);
    let mut stack: Vec<u32> = (0..n).filter(|&x| parent[x].is_none()).rev().map(|x| x as u32).collect();
    while let Some(x) = stack.pop() {
        pre[x as usize] = order.len() as u32;
        order.push(x);
        for &c in children[x as usize].iter().rev() {
            depth[c as usize] = depth[x as usize] + 1;
            stack.push(c);
        }
    }
    for &x in order.iter().rev() {
        if let Some(q) = parent[x as usize] {
            size[q as usize] += size[x as usize];
        }
    }
    let mut anc_off = Vec::with_capacity(n + 1);
    let mut anc = Vec::new();
    anc_off.push(0);
    for x in 0..n {
        let mut y = Some(x as u32);
        while let Some(z) = y {
            anc.push(z);
            y = parent[z as usize];
        }
        anc_off.push(anc.len());
    }
    ExpandedPot { parent, pre, size, depth, anc_off, anc }
}

impl ExpandedPot {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, x: usize) -> Option<usize> {
        self.parent[x].map(|q| q as usize)
    }

    pub fn depth(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0) as usize
    }

    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        let (pa, pb) = (self.pre[a], self.pre[b]);
        pa <= pb && pb < pa + self.size[a]
    }

    pub fn ancestors(&self, x: usize) -> &[u32] {
        &self.anc[self.anc_off[x]..self.anc_off[x + 1]]
    }

    pub fn subtree_size(&self, x: usize) -> usize {
        self.size[x] as usize
    }

    /// Position of `v` within the subtree of `w`, if it lies there.
    #[inline]
    pub fn rank(&self, w: usize, v: usize) -> Option<usize> {
        let r = self.pre[v].wrapping_sub(self.pre[w]);
        (r < self.size[w]).then_some(r as usize)
    }

    pub fn to_pot(&self) -> Pot {
        Pot::from_parents(self.parents()).expect("expanded POT is a forest")
    }

    pub fn parents(&self) -> Vec<Option<usize>> {
        self.parent.iter().map(|q| q.map(|q| q as usize)).collect()
    }
}

/// `down[w][v]` / `up[w][v]` for `v` in the subtree of `w`, indexed by rank.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpDownTables {
    off: Vec<usize>,
    up: Vec<u64>,
    down: Vec<u64>,
    chain_off: Vec<usize>,
    /// Ancestors `w` of each node `x` with `up[w][x]`, root first.
    chain: Vec<ChainEntry>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct ChainEntry {
    pre: u32,
    size: u32,
    /// Bit offset of the node's rows.
    bit: u64,
}

impl UpDownTables {
    pub fn down(&self, t: &ExpandedPot, w: usize, v: usize) -> bool {
        t.rank(w, v).is_some_and(|r| get_bit(&self.down[self.off[w]..], r))
    }

    pub fn up(&self, t: &ExpandedPot, w: usize, v: usize) -> bool {
        t.rank(w, v).is_some_and(|r| get_bit(&self.up[self.off[w]..], r))
    }
}

pub fn step4_up_down(cg: &ExplodedCallGraph, t: &ExpandedPot) -> UpDownTables {
    let n = t.len();
    let mut off = Vec::with_capacity(n + 1);
    off.push(0);
    for w in 0..n {
        off.push(off[w] + words_for(t.subtree_size(w)));
    }
    let total = off[n];
    let mut up = vec![0u64; total];
    let mut down = vec![0u64; total];
    let mut stack = Vec::new();
    for w in 0..n {
        for (table, forward) in [(&mut down, true), (&mut up, false)] {
            let row = &mut table[off[w]..off[w + 1]];
            set_bit(row, 0);
            stack.push(w);
            while let Some(x) = stack.pop() {
                let next = if forward { cg.successors(x) } else { cg.predecessors(x) };
                for &y in next {
                    if let Some(r) = t.rank(w, y as usize) {
                        if !get_bit(row, r) {
                            set_bit(row, r);
                            stack.push(y as usize);
                        }
                    }
                }
            }
        }
    }
    let mut chain_off = Vec::with_capacity(n + 1);
    let mut chain = Vec::with_capacity(t.anc.len());
    chain_off.push(0);
    for x in 0..n {
        for &w in t.ancestors(x).iter().rev() {
            let w = w as usize;
            if get_bit(&up[off[w]..], (t.pre[x] - t.pre[w]) as usize) {
                chain.push(ChainEntry { pre: t.pre[w], size: t.size[w], bit: off[w] as u64 * 64 });
            }
        }
        chain_off.push(chain.len());
    }
    UpDownTables { off, up, down, chain_off, chain }
}

/// `u ⇝ v` in `C̄`: some common POT ancestor `w` has `up[w][u]` and `down[w][v]`.
/// Common ancestors form a root-side prefix of `u`'s chain.
#[inline]
pub fn call_graph_reachable(tbl: &UpDownTables, t: &ExpandedPot, u: usize, v: usize) -> bool {
    let pv = t.pre[v];
    for a in &tbl.chain[tbl.chain_off[u]..tbl.chain_off[u + 1]] {
        let rv = pv.wrapping_sub(a.pre);
        if rv >= a.size {
            return false;
        }
        if get_bit(&tbl.down, (a.bit + rv as u64) as usize) {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::{load_arena, ExplodedSupergraph};
    use crate::decomp::{compute_pot, verify_pot, UGraph};
    use crate::samectx::preprocess_same_context;
    use crate::summaries::compute_summaries;
    use proptest::prelude::*;

    const ARENA_A: &str = include_str!("../fixtures/arena_a.json");

    #[test]
    fn entry_tables_match_their_definitions() {
        for seed in 0..40 {
            let a = crate::harness::random::random_arena(&crate::harness::random::RandomArenaSpec::small(), seed);
            let ex = ExplodedSupergraph::build(&a);
            let sg = compute_summaries(&a, &ex);
            let sc = preprocess_same_context(&sg);
            let reach = step2_call_reach(&sg);
            let et = entry_tables(&sg, &reach);
            let dstar = a.dstar();
            for u in 0..a.num_vertices() {
                let start = a.function(a.fg(u)).start;
                for d in 0..dstar {
                    let x = u * dstar + d;
                    let want: Vec<usize> = (0..dstar).filter(|&d5| sc.scq(start, d5, u, d)).collect();
                    assert_eq!(et.start_facts(x).collect::<Vec<_>>(), want);
                    let mut entries = std::collections::BTreeSet::new();
                    for (c, d3) in reach.get(u, d) {
                        let site = &a.call_sites()[a.call_site_at(c).unwrap()];
                        entries.extend(site.call_rel.image(d3).map(|d4| (site.callee * dstar + d4) as u32));
                    }
                    assert_eq!(et.entries(x), entries.into_iter().collect::<Vec<_>>().as_slice());
                }
            }
        }
    }

    fn bfs(cg: &ExplodedCallGraph, u: usize, keep: impl Fn(usize) -> bool) -> Vec<bool> {
        let mut seen = vec![false; cg.len()];
        let mut stack = vec![u];
        seen[u] = true;
        while let Some(x) = stack.pop() {
            for &y in cg.successors(x) {
                let y = y as usize;
                if !seen[y] && keep(y) {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    }

    #[test]
    fn arena_a_lists_and_call_graph() {
        let a = load_arena(ARENA_A).unwrap();
        let ex = ExplodedSupergraph::build(&a);
        let sg = compute_summaries(&a, &ex);
        let v = |n: &str| a.vertex_named(n).unwrap();
        let lists = step2_call_reach(&sg);
        assert_eq!(lists.get(v("s_m"), 0).collect::<Vec<_>>(), vec![(v("c1"), 0)]);
        assert_eq!(lists.get(v("s_m"), 1).collect::<Vec<_>>(), vec![(v("c1"), 1)]);
        assert_eq!(lists.get(v("e_m"), 0).count() + lists.get(v("e_m"), 1).count(), 0);
        assert!(lists.contains(v("c1"), 1, v("c1"), 1));
        assert_eq!(lists.get(v("s_g"), 0).count(), 0);

        let sc = preprocess_same_context(&sg);
        let cg = step3_exploded_call_graph(&a, &sc);
        assert_eq!(cg.edges(), vec![(cg.node(0, 0), cg.node(1, 0)), (cg.node(0, 1), cg.node(1, 1))]);

        let pot = Pot::from_parents(vec![None, Some(0)]).unwrap();
        let t = expand_pot(&pot, 2);
        assert_eq!(t.depth(), 4);
        assert_eq!(t.parents(), vec![None, Some(0), Some(1), Some(2)]);
        let tbl = step4_up_down(&cg, &t);
        assert!(tbl.down(&t, 0, 2));
        assert!(!tbl.down(&t, 0, 3));
        assert!(call_graph_reachable(&tbl, &t, 0, 2));
        assert!(!call_graph_reachable(&tbl, &t, 2, 0));
        for x in 0..4 {
            assert!(tbl.up(&t, x, x) && tbl.down(&t, x, x));
            assert!(call_graph_reachable(&tbl, &t, x, x));
        }
    }

    #[test]
    fn no_calls_give_empty_structures() {
        let text = r#"{"facts":["x"],"functions":[{"name":"f","vertices":[{"id":"s","kind":"start"},{"id":"e","kind":"exit"}],
            "edges":[{"from":"s","to":"e","rel":[[0,0],[1,1]]}]}]}"#;
        let a = load_arena(text).unwrap();
        let ex = ExplodedSupergraph::build(&a);
        let sg = compute_summaries(&a, &ex);
        assert_eq!(step2_call_reach(&sg).total_len(), 0);
        let cg = step3_exploded_call_graph(&a, &preprocess_same_context(&sg));
        assert_eq!(cg.edge_count(), 0);
    }

    #[test]
    fn expansion_depths() {
        let p = Pot::from_parents(vec![None, Some(0), Some(1)]).unwrap();
        assert_eq!(expand_pot(&p, 1).parents(), p.parents().to_vec());
        assert_eq!(expand_pot(&p, 2).depth(), 6);
    }

    /// `b` calls `a`, `a` calls `c`; with POT `a → b → c` the only route from
    /// `b` to `c` climbs above `b`.
    #[test]
    fn detour_above_the_subtree() {
        let call = |from: &str, callee: &str, k: usize| {
            format!(
                r#"{{"name":"{from}","vertices":[{{"id":"s{k}","kind":"start"}},{{"id":"c{k}","kind":"call","callee":"{callee}","retsite":"r{k}"}},{{"id":"r{k}","kind":"retsite"}},{{"id":"e{k}","kind":"exit"}}],
                "edges":[{{"from":"s{k}","to":"c{k}","rel":[[0,0]]}},{{"from":"c{k}","to":"r{k}","rel":[[0,0]]}},{{"from":"r{k}","to":"e{k}","rel":[[0,0]]}}],
                "calls":[{{"call":"c{k}","call_rel":[[0,0]],"ret_rel":[[0,0]]}}]}}"#
            )
        };
        let text = format!(
            r#"{{"facts":[],"functions":[{},{},{{"name":"c","vertices":[{{"id":"s","kind":"start"}},{{"id":"e","kind":"exit"}}],"edges":[{{"from":"s","to":"e","rel":[[0,0]]}}]}}]}}"#,
            call("a", "c", 0),
            call("b", "a", 1)
        );
        let a = load_arena(&text).unwrap();
        let ex = ExplodedSupergraph::build(&a);
        let sg = compute_summaries(&a, &ex);
        let cg = step3_exploded_call_graph(&a, &preprocess_same_context(&sg));
        assert_eq!(cg.edges(), vec![(0, 2), (1, 0)]);
        let t = expand_pot(&Pot::from_parents(vec![None, Some(0), Some(1)]).unwrap(), 1);
        let tbl = step4_up_down(&cg, &t);
        assert!(!tbl.down(&t, 1, 2));
        assert!(tbl.up(&t, 0, 1) && tbl.down(&t, 0, 2));
        assert!(call_graph_reachable(&tbl, &t, 1, 2));
        assert!(!call_graph_reachable(&tbl, &t, 2, 1));
    }

    fn arb_call_graph() -> impl Strategy<Value = (usize, usize, Vec<(u32, u32)>)> {
        (1usize..=8, 1usize..=5).prop_flat_map(|(k, dstar)| {
            let n = (k * dstar) as u32;
            (Just(k), Just(dstar), proptest::collection::vec((0..n, 0..n), 0..3 * n as usize))
        })
    }

    proptest! {
        #[test]
        fn tables_match_restricted_search((k, dstar, edges) in arb_call_graph()) {
            let cg = ExplodedCallGraph::from_edges(k, dstar, edges);
            let ug = UGraph::from_edges(k, cg.edges().iter().map(|&(a, b)| (a / dstar, b / dstar)).filter(|(a, b)| a != b));
            let t = expand_pot(&compute_pot(&ug), dstar);
            let eg = UGraph::from_edges(cg.len(), cg.edges().into_iter().filter(|(a, b)| a != b));
            prop_assert!(verify_pot(&eg, &t.to_pot()).is_ok());
            let tbl = step4_up_down(&cg, &t);
            for u in 0..cg.len() {
                let full = bfs(&cg, u, |_| true);
                let inside = bfs(&cg, u, |y| t.is_ancestor(u, y));
                for v in 0..cg.len() {
                    prop_assert_eq!(call_graph_reachable(&tbl, &t, u, v), full[v]);
                    if t.is_ancestor(u, v) {
                        prop_assert_eq!(tbl.down(&t, u, v), inside[v]);
                    }
                }
            }
        }

        #[test]
        fn paths_cross_a_common_ancestor((k, dstar, edges) in arb_call_graph()) {
            let cg = ExplodedCallGraph::from_edges(k, dstar, edges);
            let ug = UGraph::from_edges(k, cg.edges().iter().map(|&(a, b)| (a / dstar, b / dstar)).filter(|(a, b)| a != b));
            let t = expand_pot(&compute_pot(&ug), dstar);
            for u in 0..cg.len() {
                let full = bfs(&cg, u, |_| true);
                for v in (0..cg.len()).filter(|&v| full[v]) {
                    let common: Vec<usize> = t.ancestors(u).iter().map(|&w| w as usize).filter(|&w| t.is_ancestor(w, v)).collect();
                    prop_assert!(!common.is_empty());
                    // some common ancestor lies on a u⇝v path
                    let hit = common.iter().any(|&w| full[w] && bfs(&cg, w, |_| true)[v]);
                    prop_assert!(hit);
                }
            }
        }
    }
}
