//! Tree decompositions of CFGs, balancing, partial order trees of call graphs and
//! an LCA index.

mod balance;
mod lca;
mod pot;
mod treedec;

pub use balance::{balance, BalancedDecomposition};
pub use lca::{LcaError, LcaIndex};
pub use pot::{compute_pot, exact_treedepth, verify_pot, Pot, PotViolation};
pub use treedec::{decompose_cfg, verify_decomposition, DecompViolation, TreeDecomposition};

/// Simple undirected graph with sorted, deduplicated adjacency and no self-loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UGraph {
    adj: Vec<Vec<usize>>,
}

impl UGraph {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            if u != v {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
            a.dedup();
        }
        UGraph { adj }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Each edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, a)| a.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Connected components of the subgraph induced by `keep`, each sorted.
    pub fn components_within(&self, vertices: &[usize], keep: &[bool]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n()];
        let mut out = Vec::new();
        for &s in vertices {
            if !keep[s] || seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                i += 1;
                for &w in &self.adj[u] {
                    if keep[w] && !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

#[cfg(test)]
pub(crate) mod testgraphs {
    use super::UGraph;
    use proptest::prelude::*;

    pub fn path(n: usize) -> UGraph {
        UGraph::from_edges(n, (1..n).map(|i| (i - 1, i)))
    }

    pub fn cycle(n: usize) -> UGraph {
        UGraph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn complete(n: usize) -> UGraph {
        UGraph::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    pub fn star(n: usize) -> UGraph {
        UGraph::from_edges(n, (1..n).map(|i| (0, i)))
    }

    pub fn arb_graph(max_n: usize, max_m: usize) -> impl Strategy<Value = UGraph> {
        (1..=max_n).prop_flat_map(move |n| prop::collection::vec((0..n, 0..n), 0..=max_m).prop_map(move |es| UGraph::from_edges(n, es)))
    }
}
