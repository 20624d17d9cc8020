use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::treedec::min_fill_elimination;
use super::{decompose_cfg, UGraph};

/// Partial order tree: a rooted forest on the graph's vertices in which every edge
/// joins an ancestor and a descendant. Depth counts vertices (a root has depth 1).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pot {
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PotViolation {
    #[error("parent links do not form a forest (at vertex {0})")]
    NotAForest(usize),
    #[error("POT covers {pot} vertices, graph has {graph}")]
    SizeMismatch { pot: usize, graph: usize },
    #[error("edge ({0},{1}) joins incomparable vertices")]
    Incomparable(usize, usize),
}

impl Pot {
    pub fn from_parents(parent: Vec<Option<usize>>) -> Result<Pot, PotViolation> {
        let n = parent.len();
        let mut depth = vec![0usize; n];
        for v in 0..n {
            let mut chain = Vec::new();
            let mut x = v;
            while depth[x] == 0 {
                if chain.len() > n {
                    return Err(PotViolation::NotAForest(v));
                }
                chain.push(x);
                match parent[x] {
                    Some(p) if p < n => x = p,
                    Some(_) => return Err(PotViolation::NotAForest(x)),
                    None => break,
                }
            }
            let mut d = depth[x];
            for &y in chain.iter().rev() {
                d += 1;
                depth[y] = d;
            }
        }
        Ok(Pot { parent, depth })
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn depth_of(&self, v: usize) -> usize {
        self.depth[v]
    }

    /// Overall depth: the most vertices on any root-to-leaf path.
    pub fn depth(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// `a == b` or `a` is a proper ancestor of `b`.
    pub fn is_ancestor(&self, a: usize, mut b: usize) -> bool {
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].expect("deeper vertex has a parent");
        }
        a == b
    }
}

pub fn verify_pot(g: &UGraph, p: &Pot) -> Result<(), PotViolation> {
    if p.len() != g.n() {
        return Err(PotViolation::SizeMismatch { pot: p.len(), graph: g.n() });
    }
    for (u, v) in g.edges() {
        if !p.is_ancestor(u, v) && !p.is_ancestor(v, u) {
            return Err(PotViolation::Incomparable(u, v));
        }
    }
    Ok(())
}

/// Heuristic POT: the shallowest of nested dissection over a min-fill decomposition,
/// greedy max-degree rooting, and the min-fill elimination tree.
pub fn compute_pot(g: &UGraph) -> Pot {
    let candidates = [nested_dissection(g), greedy_max_degree(g), elimination_tree(g)];
    let best = candidates.into_iter().min_by_key(Pot::depth).expect("three candidates");
    debug_assert_eq!(verify_pot(g, &best), Ok(()));
    best
}

fn all_components(g: &UGraph) -> Vec<Vec<usize>> {
    let all: Vec<usize> = (0..g.n()).collect();
    g.components_within(&all, &vec![true; g.n()])
}

/// Repeatedly removes a centroid bag of the decomposition (restricted to the current
/// component) and chains its vertices.
pub(crate) fn nested_dissection(g: &UGraph) -> Pot {
    let n = g.n();
    let td = decompose_cfg(g);
    let bags_of = td.bags_of(n);
    let tdepth = {
        let mut d = vec![0usize; td.len()];
        for b in td.preorder() {
            d[b] = td.parent(b).map_or(0, |p| d[p] + 1);
        }
        d
    };
    let top: Vec<usize> = (0..n).map(|v| *bags_of[v].iter().min_by_key(|&&b| (tdepth[b], b)).unwrap()).collect();
    let children = td.children();
    let mut parent = vec![None; n];
    let mut keep = vec![true; n];
    let mut in_set = vec![false; td.len()];
    let mut weight = vec![0usize; td.len()];
    let mut sub = vec![0usize; td.len()];
    let mut tasks: Vec<(Vec<usize>, Option<usize>)> = all_components(g).into_iter().map(|c| (c, None)).collect();
    while let Some((comp, attach)) = tasks.pop() {
        // Bags meeting the component form a subtree of the decomposition.
        let mut bags: Vec<usize> = comp.iter().flat_map(|&v| bags_of[v].iter().copied()).collect();
        bags.sort_unstable();
        bags.dedup();
        for &b in &bags {
            in_set[b] = true;
            weight[b] = 0;
        }
        for &v in &comp {
            weight[top[v]] += 1;
        }
        let subroot = *bags.iter().min_by_key(|&&b| (tdepth[b], b)).unwrap();
        let mut order = vec![subroot];
        let mut i = 0;
        while i < order.len() {
            let b = order[i];
            i += 1;
            order.extend(children[b].iter().filter(|&&c| in_set[c]));
        }
        for &b in order.iter().rev() {
            sub[b] = weight[b] + children[b].iter().filter(|&&c| in_set[c]).map(|&c| sub[c]).sum::<usize>();
        }
        let total = comp.len();
        let mut c = subroot;
        while let Some(&h) = children[c].iter().find(|&&h| in_set[h] && 2 * sub[h] > total) {
            c = h;
        }
        for &b in &bags {
            in_set[b] = false;
        }
        let mut sep: Vec<usize> = td.bag(c).iter().copied().filter(|&v| keep[v] && comp.binary_search(&v).is_ok()).collect();
        sep.sort_unstable();
        let mut last = attach;
        for &v in &sep {
            parent[v] = last;
            last = Some(v);
            keep[v] = false;
        }
        for piece in g.components_within(&comp, &keep) {
            tasks.push((piece, last));
        }
    }
    Pot::from_parents(parent).expect("chains form a forest")
}

/// Roots each component at a vertex of maximum degree and recurses on the rest.
pub(crate) fn greedy_max_degree(g: &UGraph) -> Pot {
    let n = g.n();
    let mut parent = vec![None; n];
    let mut keep = vec![true; n];
    let mut tasks: Vec<(Vec<usize>, Option<usize>)> = all_components(g).into_iter().map(|c| (c, None)).collect();
    while let Some((comp, attach)) = tasks.pop() {
        let deg = |v: usize| g.neighbors(v).iter().filter(|&&w| keep[w]).count();
        let root = *comp.iter().max_by_key(|&&v| (deg(v), std::cmp::Reverse(v))).unwrap();
        parent[root] = attach;
        keep[root] = false;
        for piece in g.components_within(&comp, &keep) {
            tasks.push((piece, Some(root)));
        }
    }
    Pot::from_parents(parent).expect("rooted components form a forest")
}

/// Elimination tree of the min-fill order.
pub(crate) fn elimination_tree(g: &UGraph) -> Pot {
    let (order, later) = min_fill_elimination(g);
    let mut pos = vec![0; g.n()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let parent = (0..g.n()).map(|v| later[v].iter().copied().min_by_key(|&u| pos[u])).collect();
    Pot::from_parents(parent).expect("elimination tree is a forest")
}

/// Exact treedepth by memoised search over vertex subsets; `None` above 16 vertices.
pub fn exact_treedepth(g: &UGraph) -> Option<usize> {
    let n = g.n();
    if n > 16 {
        return None;
    }
    let nb: Vec<u32> = (0..n).map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w)).collect();
    fn components(nb: &[u32], set: u32) -> Vec<u32> {
        let mut rest = set;
        let mut out = Vec::new();
        while rest != 0 {
            let mut comp = rest & rest.wrapping_neg();
            loop {
                let grow = comp | comp_neighbors(nb, comp) & set;
                if grow == comp {
                    break;
                }
                comp = grow;
            }
            out.push(comp);
            rest &= !comp;
        }
        out
    }
    fn comp_neighbors(nb: &[u32], set: u32) -> u32 {
        (0..nb.len()).filter(|&v| set >> v & 1 == 1).fold(0, |m, v| m | nb[v])
    }
    fn td(nb: &[u32], set: u32, memo: &mut HashMap<u32, usize>) -> usize {
        if set == 0 {
            return 0;
        }
        if let Some(&d) = memo.get(&set) {
            return d;
        }
        let comps = components(nb, set);
        let d = if comps.len() > 1 {
            comps.into_iter().map(|c| td(nb, c, memo)).max().unwrap()
        } else {
            (0..nb.len()).filter(|&v| set >> v & 1 == 1).map(|v| 1 + td(nb, set & !(1 << v), memo)).min().unwrap()
        };
        memo.insert(set, d);
        d
    }
    Some(td(&nb, (1u32 << n) - 1, &mut HashMap::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::testgraphs::*;
    use proptest::prelude::*;

    #[test]
    fn complete_graphs_are_paths() {
        for n in 2..=8 {
            let p = compute_pot(&complete(n));
            assert_eq!(p.depth(), n);
            assert_eq!(exact_treedepth(&complete(n)), Some(n));
        }
    }

    #[test]
    fn edgeless_and_star() {
        let p = compute_pot(&UGraph::from_edges(5, []));
        assert_eq!(p.depth(), 1);
        let s = star(9);
        let p = compute_pot(&s);
        assert_eq!(verify_pot(&s, &p), Ok(()));
        assert_eq!(p.depth(), 2);
        assert_eq!(p.parent(0), None);
    }

    #[test]
    fn verifier_finds_incomparable_edges() {
        let g = complete(3);
        let p = Pot::from_parents(vec![None, Some(0), Some(0)]).unwrap();
        assert_eq!(verify_pot(&g, &p), Err(PotViolation::Incomparable(1, 2)));
        let g = UGraph::from_edges(3, [(1, 2)]);
        assert_eq!(verify_pot(&g, &p), Err(PotViolation::Incomparable(1, 2)));
        assert_eq!(Pot::from_parents(vec![Some(1), Some(0)]), Err(PotViolation::NotAForest(0)));
    }

    #[test]
    fn depth_two_trees_fail_on_triangles() {
        let g = complete(3);
        for root in 0..3 {
            let parent = (0..3).map(|v| (v != root).then_some(root)).collect();
            assert!(verify_pot(&g, &Pot::from_parents(parent).unwrap()).is_err());
        }
    }

    fn dissection_bound(g: &UGraph) -> usize {
        let w = decompose_cfg(g).width();
        (w + 1) * crate::decomp::balance::ceil_log2(g.n() + 1)
    }

    /// Every path between two vertices meets a common ancestor.
    fn path_property(g: &UGraph, p: &Pot, u: usize, v: usize) -> bool {
        let anc = |mut x: usize| {
            let mut set = vec![x];
            while let Some(q) = p.parent(x) {
                set.push(q);
                x = q;
            }
            set
        };
        let (au, av) = (anc(u), anc(v));
        let common: Vec<usize> = au.iter().copied().filter(|x| av.contains(x)).collect();
        // u reaches v while avoiding every common ancestor?
        let mut seen = vec![false; g.n()];
        let mut stack = vec![u];
        if common.contains(&u) {
            return true;
        }
        seen[u] = true;
        while let Some(x) = stack.pop() {
            if x == v {
                return false;
            }
            for &y in g.neighbors(x) {
                if !seen[y] && !common.contains(&y) {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        true
    }

    proptest! {
        #[test]
        fn heuristic_pots_are_valid_and_bounded(g in arb_graph(40, 70)) {
            for p in [nested_dissection(&g), greedy_max_degree(&g), elimination_tree(&g), compute_pot(&g)] {
                prop_assert_eq!(verify_pot(&g, &p), Ok(()));
            }
            prop_assert!(nested_dissection(&g).depth() <= dissection_bound(&g));
            prop_assert!(compute_pot(&g).depth() <= dissection_bound(&g));
        }

        #[test]
        fn heuristic_never_beats_exact(g in arb_graph(10, 20)) {
            let exact = exact_treedepth(&g).unwrap();
            prop_assert!(compute_pot(&g).depth() >= exact);
        }

        #[test]
        fn paths_meet_common_ancestors(g in arb_graph(30, 50)) {
            let p = compute_pot(&g);
            for u in 0..g.n() {
                for v in 0..g.n() {
                    prop_assert!(path_property(&g, &p, u, v));
                }
            }
        }
    }
}
