use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::UGraph;

/// Rooted tree of bags. Bags are sorted vertex lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDecomposition {
    bags: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    root: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DecompViolation {
    #[error("bag structure is not a rooted tree")]
    NotATree,
    #[error("bag mentions vertex {0} outside the graph")]
    UnknownVertex(usize),
    #[error("vertex {0} is in no bag")]
    VertexMissing(usize),
    #[error("edge ({0},{1}) is covered by no bag")]
    EdgeUncovered(usize, usize),
    #[error("bags containing vertex {0} are not connected")]
    Disconnected(usize),
}

impl TreeDecomposition {
    /// Builds from bags and parent links; the parent structure must be a single rooted tree.
    pub fn new(mut bags: Vec<Vec<usize>>, parent: Vec<Option<usize>>) -> Result<Self, DecompViolation> {
        if bags.is_empty() || bags.len() != parent.len() {
            return Err(DecompViolation::NotATree);
        }
        for b in &mut bags {
            b.sort_unstable();
            b.dedup();
        }
        let mut roots = (0..parent.len()).filter(|&b| parent[b].is_none());
        let root = roots.next().ok_or(DecompViolation::NotATree)?;
        if roots.next().is_some() || parent.iter().flatten().any(|&p| p >= bags.len()) {
            return Err(DecompViolation::NotATree);
        }
        let t = TreeDecomposition { bags, parent, root };
        // Every node must reach the root.
        let mut state = vec![0u8; t.len()];
        state[root] = 2;
        for b in 0..t.len() {
            let mut chain = Vec::new();
            let mut x = b;
            while state[x] == 0 {
                state[x] = 1;
                chain.push(x);
                x = t.parent[x].expect("non-root has parent");
            }
            if state[x] == 1 {
                return Err(DecompViolation::NotATree);
            }
            chain.into_iter().for_each(|c| state[c] = 2);
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    pub fn bags(&self) -> &[Vec<usize>] {
        &self.bags
    }

    pub fn bag(&self, b: usize) -> &[usize] {
        &self.bags[b]
    }

    pub fn parent(&self, b: usize) -> Option<usize> {
        self.parent[b]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.len()];
        for (b, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                ch[*p].push(b);
            }
        }
        ch
    }

    /// Largest bag size minus one (0 for an all-empty decomposition).
    pub fn width(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(0).saturating_sub(1)
    }

    /// Bags in pre-order from the root.
    pub fn preorder(&self) -> Vec<usize> {
        let ch = self.children();
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![self.root];
        while let Some(b) = stack.pop() {
            out.push(b);
            stack.extend(ch[b].iter().rev());
        }
        out
    }

    /// Number of bags on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        let mut depth = vec![0usize; self.len()];
        let mut best = 0;
        for b in self.preorder() {
            depth[b] = self.parent[b].map_or(1, |p| depth[p] + 1);
            best = best.max(depth[b]);
        }
        best
    }

    /// For each vertex `< n`, the bags containing it.
    pub fn bags_of(&self, n: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); n];
        for (b, bag) in self.bags.iter().enumerate() {
            for &v in bag {
                if v < n {
                    out[v].push(b);
                }
            }
        }
        out
    }
}

/// Checks vertex coverage, edge coverage and connectivity, in that order.
pub fn verify_decomposition(g: &UGraph, t: &TreeDecomposition) -> Result<(), DecompViolation> {
    let n = g.n();
    if let Some(&v) = t.bags.iter().flatten().find(|&&v| v >= n) {
        return Err(DecompViolation::UnknownVertex(v));
    }
    let bags_of = t.bags_of(n);
    if let Some(v) = (0..n).find(|&v| bags_of[v].is_empty()) {
        return Err(DecompViolation::VertexMissing(v));
    }
    for (u, v) in g.edges() {
        if !bags_of[u].iter().any(|&b| t.bags[b].binary_search(&v).is_ok()) {
            return Err(DecompViolation::EdgeUncovered(u, v));
        }
    }
    for v in 0..n {
        let tops = bags_of[v].iter().filter(|&&b| t.parent[b].is_none_or(|p| t.bags[p].binary_search(&v).is_err())).count();
        if tops != 1 {
            return Err(DecompViolation::Disconnected(v));
        }
    }
    Ok(())
}

/// Above this degree the fill count is replaced by its upper bound `deg·(deg−1)/2`
/// and the vertex's neighbourhood is not rescanned after eliminations.
const HUB_DEGREE: usize = 48;

/// Min-fill elimination with ties broken by lowest vertex id.
/// Returns the order and, per vertex, its neighbours at elimination time.
pub(crate) fn min_fill_elimination(g: &UGraph) -> (Vec<usize>, Vec<Vec<usize>>) {
    let n = g.n();
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).iter().copied().collect()).collect();
    let fill_of = |adj: &[BTreeSet<usize>], v: usize| {
        let deg = adj[v].len();
        if deg > HUB_DEGREE {
            return deg * (deg - 1) / 2;
        }
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        let mut missing = 0;
        for (i, &a) in nb.iter().enumerate() {
            missing += nb[i + 1..].iter().filter(|&&b| !adj[a].contains(&b)).count();
        }
        missing
    };
    let mut fill: Vec<usize> = (0..n).map(|v| fill_of(&adj, v)).collect();
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|v| (fill[v], v)).collect();
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut later = vec![Vec::new(); n];
    while let Some((_, v)) = queue.pop_first() {
        done[v] = true;
        order.push(v);
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        for (i, &a) in nb.iter().enumerate() {
            adj[a].remove(&v);
            for &b in &nb[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        let mut dirty: BTreeSet<usize> = nb.iter().copied().collect();
        for &a in nb.iter().filter(|&&a| adj[a].len() <= HUB_DEGREE) {
            dirty.extend(adj[a].iter().copied());
        }
        for w in dirty {
            if done[w] {
                continue;
            }
            let f = fill_of(&adj, w);
            if f != fill[w] {
                queue.remove(&(fill[w], w));
                fill[w] = f;
                queue.insert((f, w));
            }
        }
        later[v] = nb;
    }
    (order, later)
}

/// Heuristic tree decomposition via min-fill elimination.
///
/// Bags whose vertex set is contained in a neighbouring bag are contracted and the
/// trees of different components are hung below a single root.
pub fn decompose_cfg(g: &UGraph) -> TreeDecomposition {
    let n = g.n();
    if n == 0 {
        return TreeDecomposition { bags: vec![Vec::new()], parent: vec![None], root: 0 };
    }
    let (order, later) = min_fill_elimination(g);
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut bags: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            let mut b = later[v].clone();
            b.push(v);
            b.sort_unstable();
            b
        })
        .collect();
    let mut parent: Vec<Option<usize>> = (0..n).map(|v| later[v].iter().copied().min_by_key(|&u| pos[u])).collect();
    let mut children = vec![Vec::new(); n];
    for v in 0..n {
        if let Some(p) = parent[v] {
            children[p].push(v);
        }
    }
    let mut alive = vec![true; n];
    let subset = |a: &[usize], b: &[usize]| {
        let mut j = 0;
        a.iter().all(|x| {
            while j < b.len() && b[j] < *x {
                j += 1;
            }
            j < b.len() && b[j] == *x
        })
    };
    for &start in &order {
        let b = start;
        if !alive[b] {
            continue;
        }
        while let Some(p) = parent[b] {
            if subset(&bags[b], &bags[p]) {
                // absorb b into p
                children[p].retain(|&c| c != b);
                for c in std::mem::take(&mut children[b]) {
                    parent[c] = Some(p);
                    children[p].push(c);
                }
                alive[b] = false;
                break;
            } else if subset(&bags[p], &bags[b]) {
                // b replaces p
                let pp = parent[p];
                for c in std::mem::take(&mut children[p]) {
                    if c != b {
                        parent[c] = Some(b);
                        children[b].push(c);
                    }
                }
                parent[b] = pp;
                if let Some(pp) = pp {
                    for c in children[pp].iter_mut() {
                        if *c == p {
                            *c = b;
                        }
                    }
                }
                alive[p] = false;
                bags[p].clear();
            } else {
                break;
            }
        }
    }
    let roots: Vec<usize> = (0..n).filter(|&v| alive[v] && parent[v].is_none()).collect();
    for &r in &roots[1..] {
        parent[r] = Some(roots[0]);
        children[roots[0]].push(r);
    }
    // Renumber surviving bags in pre-order.
    let mut index = vec![usize::MAX; n];
    let mut pre = Vec::new();
    let mut stack = vec![roots[0]];
    while let Some(b) = stack.pop() {
        index[b] = pre.len();
        pre.push(b);
        let mut ch = children[b].clone();
        ch.sort_unstable_by_key(|&c| std::cmp::Reverse(pos[c]));
        stack.extend(ch);
    }
    let out_bags = pre.iter().map(|&b| std::mem::take(&mut bags[b])).collect();
    let out_parent = pre.iter().map(|&b| parent[b].map(|p| index[p])).collect();
    TreeDecomposition { bags: out_bags, parent: out_parent, root: 0 }
}
