use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LcaError {
    #[error("vertices {0} and {1} lie in different trees")]
    DifferentTrees(usize, usize),
}

/// Constant-time lowest common ancestors on a rooted forest (Euler tour + sparse table).
///
/// Trees of a forest occupy disjoint stretches of one tour, which plays the role of
/// a virtual root joining them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LcaIndex {
    euler: Vec<u32>,
    first: Vec<u32>,
    depth: Vec<u32>,
    tree: Vec<u32>,
    exit: Vec<u32>,
    table: Vec<Vec<u32>>,
}

impl LcaIndex {
    pub fn new(parent: &[Option<usize>]) -> Self {
        let n = parent.len();
        let mut children = vec![Vec::new(); n];
        let mut roots = Vec::new();
        for (v, p) in parent.iter().enumerate() {
            match p {
                Some(p) => children[*p].push(v),
                None => roots.push(v),
            }
        }
        let mut euler = Vec::with_capacity(2 * n);
        let mut first = vec![0u32; n];
        let mut exit = vec![0u32; n];
        let mut depth = vec![0u32; n];
        let mut tree = vec![0u32; n];
        for (t, &r) in roots.iter().enumerate() {
            let mut stack: Vec<(usize, usize)> = vec![(r, 0)];
            tree[r] = t as u32;
            first[r] = euler.len() as u32;
            euler.push(r as u32);
            while let Some(&mut (v, ref mut next)) = stack.last_mut() {
                if let Some(&c) = children[v].get(*next) {
                    *next += 1;
                    depth[c] = depth[v] + 1;
                    tree[c] = t as u32;
                    first[c] = euler.len() as u32;
                    euler.push(c as u32);
                    stack.push((c, 0));
                } else {
                    exit[v] = euler.len() as u32;
                    stack.pop();
                    if let Some(&(p, _)) = stack.last() {
                        euler.push(p as u32);
                    }
                }
            }
        }
        assert_eq!(first.len(), n);
        let mut table = vec![euler.clone()];
        let mut span = 1;
        while 2 * span <= euler.len() {
            let prev = table.last().unwrap();
            let next: Vec<u32> = (0..=euler.len() - 2 * span)
                .map(|i| {
                    let (a, b) = (prev[i], prev[i + span]);
                    if depth[a as usize] <= depth[b as usize] {
                        a
                    } else {
                        b
                    }
                })
                .collect();
            table.push(next);
            span *= 2;
        }
        LcaIndex { euler, first, depth, tree, exit, table }
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v] as usize
    }

    pub fn same_tree(&self, u: usize, v: usize) -> bool {
        self.tree[u] == self.tree[v]
    }

    pub fn lca(&self, u: usize, v: usize) -> Result<usize, LcaError> {
        if !self.same_tree(u, v) {
            return Err(LcaError::DifferentTrees(u, v));
        }
        let (mut l, mut r) = (self.first[u] as usize, self.first[v] as usize);
        if l > r {
            std::mem::swap(&mut l, &mut r);
        }
        let k = (usize::BITS - 1 - (r - l + 1).leading_zeros()) as usize;
        let (a, b) = (self.table[k][l], self.table[k][r + 1 - (1 << k)]);
        Ok(if self.depth[a as usize] <= self.depth[b as usize] { a } else { b } as usize)
    }

    /// True when `a` is `b` or an ancestor of `b`.
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        self.same_tree(a, b) && self.first[a] <= self.first[b] && self.first[b] < self.exit[a]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_lca(parent: &[Option<usize>], u: usize, v: usize) -> Option<usize> {
        let chain = |mut x: usize| {
            let mut c = vec![x];
            while let Some(p) = parent[x] {
                c.push(p);
                x = p;
            }
            c
        };
        let cu = chain(u);
        chain(v).into_iter().find(|x| cu.contains(x))
    }

    fn arb_forest() -> impl Strategy<Value = Vec<Option<usize>>> {
        (1usize..64).prop_flat_map(|n| {
            prop::collection::vec(any::<prop::sample::Index>(), n).prop_map(move |picks| {
                // vertex i picks a parent among 0..i, or none
                picks
                    .into_iter()
                    .enumerate()
                    .map(|(i, ix)| {
                        let k = ix.index(i + 1);
                        (k < i && k % 7 != 6).then_some(k)
                    })
                    .collect()
            })
        })
    }

    #[test]
    fn trivial_cases() {
        let parent = vec![None, Some(0), Some(0), Some(1)];
        let idx = LcaIndex::new(&parent);
        assert_eq!(idx.lca(3, 3), Ok(3));
        assert_eq!(idx.lca(0, 3), Ok(0));
        assert_eq!(idx.lca(3, 2), Ok(0));
        let idx = LcaIndex::new(&[None, None]);
        assert_eq!(idx.lca(0, 1), Err(LcaError::DifferentTrees(0, 1)));
    }

    proptest! {
        #[test]
        fn matches_naive_ancestor_intersection(parent in arb_forest()) {
            let idx = LcaIndex::new(&parent);
            let n = parent.len();
            for u in 0..n {
                for v in 0..n {
                    let expected = naive_lca(&parent, u, v);
                    prop_assert_eq!(idx.lca(u, v).ok(), expected);
                    let anc = {
                        let mut x = Some(v);
                        let mut found = false;
                        while let Some(y) = x {
                            found |= y == u;
                            x = parent[y];
                        }
                        found
                    };
                    prop_assert_eq!(idx.is_ancestor(u, v), anc);
                }
            }
        }
    }
}
