//! Same-context reachability index over balanced tree decompositions of each CFG.
//!
//! Phase one closes reachability among vertices sharing a bag; phase two records,
//! for every vertex, reachability to and from all vertices whose designated bag is
//! an ancestor of its own. Queries meet in the middle at the LCA of the two bags.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arena::{Arena, FuncId, VertexId};
use crate::bits::{get_bit, intersects_prefix, or_bits, or_into, read_bits, set_bit, words_for};
use crate::decomp::{balance, decompose_cfg, verify_decomposition, BalancedDecomposition, DecompViolation, LcaIndex, UGraph};
use crate::summaries::{view, SummaryGraph, ViewTag};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SameCtxError {
    #[error("decomposition does not fit the CFG: {0}")]
    DecompositionMismatch(DecompViolation),
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
}

pub fn cfg_graph(arena: &Arena, f: FuncId) -> UGraph {
    UGraph::from_edges(arena.function(f).len, arena.local_cfg_edges(f))
}

/// Phase-one table: a `D*×D*` relation for every co-bagged vertex pair.
#[derive(Clone, Debug)]
pub struct SameBagTable {
    func: FuncId,
    first: VertexId,
    dstar: usize,
    rw: usize,
    bal: BalancedDecomposition,
    nbrs: Vec<Vec<u32>>,
    base: Vec<usize>,
    rel: Vec<u64>,
}

impl SameBagTable {
    fn block(&self, u: usize, v: usize) -> Option<usize> {
        self.nbrs[u].binary_search(&(v as u32)).ok().map(|k| (self.base[u] + k) * self.dstar * self.rw)
    }

    /// Recorded reachability between two co-bagged local vertices.
    pub fn same_bag_reach(&self, u1: usize, d1: usize, u2: usize, d2: usize) -> Option<bool> {
        self.block(u1, u2).map(|off| get_bit(&self.rel[off + d1 * self.rw..], d2))
    }

    pub fn decomposition(&self) -> &BalancedDecomposition {
        &self.bal
    }

    fn slot_count(&self, b: usize) -> usize {
        self.bal.td.bag(b).len() * self.dstar
    }

    /// Bag-local matrix over slots `(i, d)` = `i·|D*| + d`; rows of `words_for(slots)` words.
    fn load(&self, b: usize) -> (Vec<u64>, usize) {
        let bag = self.bal.td.bag(b);
        let s = self.slot_count(b);
        let w = words_for(s);
        let mut m = vec![0u64; s * w];
        for (i, &u) in bag.iter().enumerate() {
            for (j, &v) in bag.iter().enumerate() {
                let off = self.block(u, v).expect("co-bagged");
                for d1 in 0..self.dstar {
                    let row = &mut m[(i * self.dstar + d1) * w..][..w];
                    for (c, &word) in self.rel[off + d1 * self.rw..][..self.rw].iter().enumerate() {
                        or_bits(row, j * self.dstar + 64 * c, (self.dstar - 64 * c).min(64), word);
                    }
                }
            }
        }
        (m, w)
    }

    fn store(&mut self, b: usize, m: &[u64], w: usize) {
        let bag = self.bal.td.bag(b).to_vec();
        for (i, &u) in bag.iter().enumerate() {
            for (j, &v) in bag.iter().enumerate() {
                let off = self.block(u, v).expect("co-bagged");
                for d1 in 0..self.dstar {
                    let row = &m[(i * self.dstar + d1) * w..][..w];
                    for c in 0..self.rw {
                        self.rel[off + d1 * self.rw + c] |= read_bits(row, j * self.dstar + 64 * c, (self.dstar - 64 * c).min(64));
                    }
                }
            }
        }
    }

    fn update_bag(&mut self, b: usize) {
        let (mut m, w) = self.load(b);
        close(&mut m, self.slot_count(b), w);
        self.store(b, &m, w);
    }
}

/// Transitive closure of a square bit matrix, in place.
fn close(m: &mut [u64], s: usize, w: usize) {
    let mut pivot = vec![0u64; w];
    for k in 0..s {
        pivot.copy_from_slice(&m[k * w..][..w]);
        for i in 0..s {
            if get_bit(&m[i * w..][..w], k) {
                or_into(&mut m[i * w..][..w], &pivot);
            }
        }
    }
}

/// Phase one: leaf-to-root then root-to-leaf local closures.
pub fn preprocess_same_bag(sg: &SummaryGraph, f: FuncId, bal: BalancedDecomposition) -> Result<SameBagTable, SameCtxError> {
    let arena = sg.arena();
    verify_decomposition(&cfg_graph(arena, f), &bal.td).map_err(SameCtxError::DecompositionMismatch)?;
    let func = arena.function(f);
    let dstar = arena.dstar();
    let rw = words_for(dstar);
    let n = func.len;
    let mut nbrs: Vec<Vec<u32>> = vec![Vec::new(); n];
    for bag in bal.td.bags() {
        for &u in bag {
            nbrs[u].extend(bag.iter().map(|&v| v as u32));
        }
    }
    let mut base = Vec::with_capacity(n);
    let mut total = 0;
    for list in &mut nbrs {
        list.sort_unstable();
        list.dedup();
        base.push(total);
        total += list.len();
    }
    let mut table = SameBagTable { func: f, first: func.first, dstar, rw, bal, nbrs, base, rel: vec![0; total * dstar * rw] };
    for u in 0..n {
        let off = table.block(u, u).expect("self pair");
        for d in 0..dstar {
            set_bit(&mut table.rel[off + d * rw..], d);
        }
    }
    let local = view(sg, ViewTag::Scvp).function_graph(f);
    for (x, y) in local.edges() {
        let (u, d1, v, d2) = (x / dstar, x % dstar, y / dstar, y % dstar);
        let off = table.block(u, v).expect("view edges lie on CFG edges, which some bag covers");
        set_bit(&mut table.rel[off + d1 * rw..], d2);
    }
    let pre = table.bal.td.preorder();
    for &b in pre.iter().rev() {
        table.update_bag(b);
    }
    for &b in pre.iter().skip(1) {
        table.update_bag(b);
    }
    Ok(table)
}

/// Reachability rows of the vertices of one bag during phase two.
struct BagRows {
    verts: Vec<usize>,
    w: usize,
    fwd: Vec<u64>,
    bwd: Vec<u64>,
}

/// Finished per-function index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionIndex {
    func: FuncId,
    first: VertexId,
    dstar: usize,
    bal: BalancedDecomposition,
    lca: LcaIndex,
    top: Vec<u32>,
    col: Vec<u32>,
    prefix_end: Vec<u32>,
    row_off: Vec<u64>,
    row_words: Vec<u32>,
    fwd: Vec<u64>,
    bwd: Vec<u64>,
}

/// Phase two: ancestor-bag rows, computed top-down.
pub fn preprocess_ancestor(table: SameBagTable) -> FunctionIndex {
    let td = &table.bal.td;
    let n = table.nbrs.len();
    let dstar = table.dstar;
    let pre = td.preorder();
    let mut top = vec![u32::MAX; n];
    let mut owned: Vec<Vec<usize>> = vec![Vec::new(); td.len()];
    for &b in &pre {
        for &v in td.bag(b) {
            if top[v] == u32::MAX {
                top[v] = b as u32;
                owned[b].push(v);
            }
        }
    }
    let mut prefix_end = vec![0u32; td.len()];
    let mut col = vec![0u32; n];
    for &b in &pre {
        let start = td.parent(b).map_or(0, |p| prefix_end[p]);
        for (rank, &v) in owned[b].iter().enumerate() {
            col[v] = start + rank as u32;
        }
        prefix_end[b] = start + owned[b].len() as u32;
    }
    let mut row_off = vec![0u64; n];
    let mut row_words = vec![0u32; n];
    let mut total = 0u64;
    for v in 0..n {
        row_words[v] = words_for(prefix_end[top[v] as usize] as usize * dstar) as u32;
        row_off[v] = total;
        total += row_words[v] as u64 * dstar as u64;
    }
    let mut index = FunctionIndex {
        func: table.func,
        first: table.first,
        dstar,
        lca: LcaIndex::new(td.parents()),
        top,
        col,
        prefix_end,
        row_off,
        row_words,
        fwd: vec![0; total as usize],
        bwd: vec![0; total as usize],
        bal: table.bal.clone(),
    };
    let children = td.children();
    let mut stack: Vec<(usize, Option<std::rc::Rc<BagRows>>)> = vec![(td.root(), None)];
    while let Some((b, parent_rows)) = stack.pop() {
        let rows = std::rc::Rc::new(bag_rows(&table, &index, b, parent_rows.as_deref()));
        for &v in &owned[b] {
            let i = rows.verts.iter().position(|&x| x == v).unwrap();
            let off = index.row_off[v] as usize;
            let rwv = index.row_words[v] as usize;
            for d in 0..dstar {
                let src = (i * dstar + d) * rows.w;
                index.fwd[off + d * rwv..][..rwv].copy_from_slice(&rows.fwd[src..][..rwv]);
                index.bwd[off + d * rwv..][..rwv].copy_from_slice(&rows.bwd[src..][..rwv]);
            }
        }
        for &c in children[b].iter().rev() {
            stack.push((c, Some(rows.clone())));
        }
    }
    index
}

fn bag_rows(table: &SameBagTable, index: &FunctionIndex, b: usize, parent: Option<&BagRows>) -> BagRows {
    let dstar = table.dstar;
    let verts = table.bal.td.bag(b).to_vec();
    let (m, mw) = table.load(b);
    let at = |i: usize, d: usize, j: usize, e: usize| get_bit(&m[(i * dstar + d) * mw..][..mw], j * dstar + e);
    let w = words_for(index.prefix_end[b] as usize * dstar);
    let slots = verts.len() * dstar;
    let mut fwd = vec![0u64; slots * w];
    let mut bwd = vec![0u64; slots * w];
    // (index in this bag, index in parent) for the separator.
    let sep: Vec<(usize, usize)> = match parent {
        Some(p) => verts.iter().enumerate().filter_map(|(i, v)| p.verts.iter().position(|x| x == v).map(|k| (i, k))).collect(),
        None => Vec::new(),
    };
    let own: Vec<usize> = (0..verts.len()).filter(|&j| index.top[verts[j]] as usize == b).collect();
    for i in 0..verts.len() {
        for d in 0..dstar {
            let r = (i * dstar + d) * w;
            let (rf, rb) = (&mut fwd[r..r + w], &mut bwd[r..r + w]);
            if let Some(p) = parent {
                if let Some(&(_, k)) = sep.iter().find(|&&(j, _)| j == i) {
                    let src = (k * dstar + d) * p.w;
                    rf[..p.w].copy_from_slice(&p.fwd[src..src + p.w]);
                    rb[..p.w].copy_from_slice(&p.bwd[src..src + p.w]);
                } else {
                    for &(j, k) in &sep {
                        for e in 0..dstar {
                            let src = (k * dstar + e) * p.w;
                            if at(i, d, j, e) {
                                or_into(rf, &p.fwd[src..src + p.w]);
                            }
                            if at(j, e, i, d) {
                                or_into(rb, &p.bwd[src..src + p.w]);
                            }
                        }
                    }
                }
            }
            for &j in &own {
                let c = index.col[verts[j]] as usize * dstar;
                for e in 0..dstar {
                    if at(i, d, j, e) {
                        set_bit(rf, c + e);
                    }
                    if at(j, e, i, d) {
                        set_bit(rb, c + e);
                    }
                }
            }
        }
    }
    BagRows { verts, w, fwd, bwd }
}

impl FunctionIndex {
    pub fn func(&self) -> FuncId {
        self.func
    }

    pub fn decomposition(&self) -> &BalancedDecomposition {
        &self.bal
    }

    /// Designated (shallowest) bag of a local vertex.
    pub fn designated_bag(&self, u: usize) -> usize {
        self.top[u] as usize
    }

    fn fwd_row(&self, u: usize, d: usize) -> &[u64] {
        let w = self.row_words[u] as usize;
        &self.fwd[self.row_off[u] as usize + d * w..][..w]
    }

    fn bwd_row(&self, u: usize, d: usize) -> &[u64] {
        let w = self.row_words[u] as usize;
        &self.bwd[self.row_off[u] as usize + d * w..][..w]
    }

    /// Stored reachability `(u1,d1) ⇝ (u3,d3)` between local vertices whose designated
    /// bags are ancestor-related; `None` otherwise.
    pub fn recorded(&self, u1: usize, d1: usize, u3: usize, d3: usize) -> Option<bool> {
        let (t1, t3) = (self.top[u1] as usize, self.top[u3] as usize);
        if self.lca.is_ancestor(t3, t1) {
            Some(get_bit(self.fwd_row(u1, d1), self.col[u3] as usize * self.dstar + d3))
        } else if self.lca.is_ancestor(t1, t3) {
            Some(get_bit(self.bwd_row(u3, d3), self.col[u1] as usize * self.dstar + d1))
        } else {
            None
        }
    }

    /// Same-context query on local vertices.
    pub fn query_local(&self, u1: usize, d1: usize, u2: usize, d2: usize) -> bool {
        let l = self.lca.lca(self.top[u1] as usize, self.top[u2] as usize).expect("one tree per function");
        let bits = self.prefix_end[l] as usize * self.dstar;
        intersects_prefix(self.fwd_row(u1, d1), self.bwd_row(u2, d2), bits)
    }

    /// The query evaluated literally through the vertices of `lca(b1, b2)` for chosen
    /// bags `b1 ∋ u1` and `b2 ∋ u2`.
    pub fn query_via_bags(&self, u1: usize, d1: usize, u2: usize, d2: usize, b1: usize, b2: usize) -> bool {
        let l = self.lca.lca(b1, b2).expect("one tree per function");
        self.bal
            .td
            .bag(l)
            .iter()
            .any(|&u3| (0..self.dstar).any(|d3| self.recorded(u1, d1, u3, d3) == Some(true) && self.recorded(u3, d3, u2, d2) == Some(true)))
    }

    /// Number of stored row words (both directions).
    pub fn stored_words(&self) -> usize {
        self.fwd.len() + self.bwd.len()
    }
}

/// Same-context index for every function of an arena.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SameCtxIndex {
    functions: Vec<FunctionIndex>,
    owner: Vec<u32>,
    dstar: usize,
}

pub fn preprocess_same_context(sg: &SummaryGraph) -> SameCtxIndex {
    let arena = sg.arena();
    let functions = (0..arena.functions().len())
        .map(|f| {
            let bal = balance(&decompose_cfg(&cfg_graph(arena, f)));
            preprocess_ancestor(preprocess_same_bag(sg, f, bal).expect("own decomposition is valid"))
        })
        .collect();
    SameCtxIndex { functions, owner: arena.vertices().iter().map(|v| v.func as u32).collect(), dstar: arena.dstar() }
}

impl SameCtxIndex {
    pub fn function(&self, f: FuncId) -> &FunctionIndex {
        &self.functions[f]
    }

    pub fn functions(&self) -> &[FunctionIndex] {
        &self.functions
    }

    /// Function owning vertex `v`.
    #[inline]
    pub fn owner(&self, v: VertexId) -> FuncId {
        self.owner[v] as FuncId
    }

    /// Unchecked variant for callers that validated the inputs.
    #[inline]
    pub fn scq(&self, u1: VertexId, d1: usize, u2: VertexId, d2: usize) -> bool {
        let f = self.owner[u1];
        if f != self.owner[u2] {
            return false;
        }
        let fi = &self.functions[f as usize];
        fi.query_local(u1 - fi.first, d1, u2 - fi.first, d2)
    }

    pub fn same_context_query(&self, u1: VertexId, d1: usize, u2: VertexId, d2: usize) -> Result<bool, SameCtxError> {
        for (u, d) in [(u1, d1), (u2, d2)] {
            if u >= self.owner.len() || d >= self.dstar {
                return Err(SameCtxError::UnknownVertex(u));
            }
        }
        Ok(self.scq(u1, d1, u2, d2))
    }
}
