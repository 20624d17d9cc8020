use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::TreeDecomposition;

/// Binary tree decomposition of logarithmic height.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalancedDecomposition {
    pub td: TreeDecomposition,
    pub height: usize,
    pub input_width: usize,
    pub input_bags: usize,
}

impl BalancedDecomposition {
    /// `4·⌈log₂(bags+1)⌉ + 4` for the number of input bags.
    pub fn height_bound(&self) -> usize {
        4 * ceil_log2(self.input_bags + 1) + 4
    }

    /// `3·(w+1) − 1` for the input width.
    pub fn width_bound(&self) -> usize {
        3 * (self.input_width + 1) - 1
    }
}

pub(crate) fn ceil_log2(x: usize) -> usize {
    if x <= 1 {
        0
    } else {
        (usize::BITS - (x - 1).leading_zeros()) as usize
    }
}

struct Builder<'a> {
    t: &'a TreeDecomposition,
    adj: Vec<Vec<usize>>,
    mark: Vec<u32>,
    stamp: u32,
    par: Vec<usize>,
    size: Vec<usize>,
    owner: Vec<usize>,
    bags: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    height: Vec<usize>,
}

impl Builder<'_> {
    fn fresh_stamp(&mut self, nodes: &[usize]) -> u32 {
        self.stamp += 1;
        for &x in nodes {
            self.mark[x] = self.stamp;
        }
        self.stamp
    }

    /// Node of `comp` whose removal leaves pieces of at most half the size.
    fn centroid(&mut self, comp: &[usize]) -> usize {
        let s = self.fresh_stamp(comp);
        for &x in comp {
            self.par[x] = usize::MAX;
            self.size[x] = 0;
        }
        let (par, size) = (&mut self.par, &mut self.size);
        let root = comp[0];
        let mut order = vec![root];
        let mut i = 0;
        while i < order.len() {
            let x = order[i];
            i += 1;
            for &y in &self.adj[x] {
                if self.mark[y] == s && y != par[x] {
                    par[y] = x;
                    order.push(y);
                }
            }
        }
        for &x in order.iter().rev() {
            size[x] += 1;
            if par[x] != usize::MAX {
                size[par[x]] += size[x];
            }
        }
        let total = comp.len();
        let mut x = root;
        loop {
            let heavy = self.adj[x].iter().copied().find(|&y| self.mark[y] == s && par[y] == x && size[y] * 2 > total);
            match heavy {
                Some(y) => x = y,
                None => return x,
            }
        }
    }

    /// Weighted median of the `a1`–`a2` path, weights being the hanging subtrees.
    fn path_median(&mut self, comp: &[usize], a1: usize, a2: usize) -> usize {
        let s = self.fresh_stamp(comp);
        for &x in comp {
            self.par[x] = usize::MAX;
            self.owner[x] = usize::MAX;
        }
        let (par, owner) = (&mut self.par, &mut self.owner);
        let mut queue = vec![a1];
        par[a1] = a1;
        let mut i = 0;
        while i < queue.len() {
            let x = queue[i];
            i += 1;
            for &y in &self.adj[x] {
                if self.mark[y] == s && par[y] == usize::MAX {
                    par[y] = x;
                    queue.push(y);
                }
            }
        }
        let mut path = vec![a2];
        while *path.last().unwrap() != a1 {
            path.push(par[*path.last().unwrap()]);
        }
        path.reverse();
        let mut weight = vec![0usize; path.len()];
        let mut queue: Vec<usize> = Vec::new();
        for (k, &p) in path.iter().enumerate() {
            owner[p] = k;
            queue.push(p);
        }
        let mut i = 0;
        while i < queue.len() {
            let x = queue[i];
            i += 1;
            weight[owner[x]] += 1;
            for &y in &self.adj[x] {
                if self.mark[y] == s && owner[y] == usize::MAX {
                    owner[y] = owner[x];
                    queue.push(y);
                }
            }
        }
        let mut acc = 0;
        for (k, &w) in weight.iter().enumerate() {
            acc += w;
            if 2 * acc >= comp.len() {
                return path[k];
            }
        }
        *path.last().unwrap()
    }

    fn push_node(&mut self, bag: Vec<usize>, children: &[usize]) -> usize {
        let id = self.bags.len();
        let h = 1 + children.iter().map(|&c| self.height[c]).max().unwrap_or(0);
        for &c in children {
            self.parent[c] = Some(id);
        }
        self.bags.push(bag);
        self.parent.push(None);
        self.height.push(h);
        id
    }

    /// Builds the balanced subtree for `comp`, whose boundary edges are `(inside, outside)`.
    fn build(&mut self, comp: Vec<usize>, boundary: Vec<(usize, usize)>) -> usize {
        let c = match boundary.as_slice() {
            _ if comp.len() == 1 => comp[0],
            [(a1, _), (a2, _)] => self.path_median(&comp, *a1, *a2),
            _ => self.centroid(&comp),
        };
        let mut bag = self.t.bag(c).to_vec();
        for &(a, o) in &boundary {
            bag.extend(self.t.bag(a).iter().filter(|v| self.t.bag(o).binary_search(v).is_ok()));
        }
        bag.sort_unstable();
        bag.dedup();

        // Split the component at c.
        let s = self.fresh_stamp(&comp);
        self.mark[c] = 0;
        let mut pieces: Vec<(Vec<usize>, Vec<(usize, usize)>)> = Vec::new();
        for &y in &self.adj[c].clone() {
            if self.mark[y] != s {
                continue;
            }
            let mut piece = vec![y];
            self.mark[y] = 0;
            let mut i = 0;
            while i < piece.len() {
                let x = piece[i];
                i += 1;
                for &z in &self.adj[x] {
                    if self.mark[z] == s {
                        self.mark[z] = 0;
                        piece.push(z);
                    }
                }
            }
            pieces.push((piece, vec![(y, c)]));
        }
        for &(a, o) in &boundary {
            if let Some(p) = pieces.iter_mut().find(|(piece, _)| piece.contains(&a)) {
                p.1.push((a, o));
            }
        }
        let subtrees: Vec<usize> = pieces.into_iter().map(|(piece, bd)| self.build(piece, bd)).collect();
        self.combine(bag, subtrees)
    }

    /// Attaches subtrees below a node with `bag`, merging them pairwise by height
    /// under copy nodes until at most two remain.
    fn combine(&mut self, bag: Vec<usize>, subtrees: Vec<usize>) -> usize {
        let mut heap: BinaryHeap<Reverse<(usize, usize)>> = subtrees.iter().map(|&s| Reverse((self.height[s], s))).collect();
        while heap.len() > 2 {
            let Reverse((_, a)) = heap.pop().unwrap();
            let Reverse((_, b)) = heap.pop().unwrap();
            let copy: Vec<usize> = bag.iter().copied().filter(|v| self.bags[a].binary_search(v).is_ok() || self.bags[b].binary_search(v).is_ok()).collect();
            let x = self.push_node(copy, &[a, b]);
            heap.push(Reverse((self.height[x], x)));
        }
        let mut rest: Vec<usize> = heap.into_iter().map(|Reverse((_, s))| s).collect();
        rest.sort_unstable();
        self.push_node(bag, &rest)
    }
}

/// Rebalances a tree decomposition into a binary one of height `O(log |bags|)` and
/// width at most `3(w+1) − 1`.
pub fn balance(t: &TreeDecomposition) -> BalancedDecomposition {
    let n = t.len();
    let mut adj = vec![Vec::new(); n];
    for b in 0..n {
        if let Some(p) = t.parent(b) {
            adj[b].push(p);
            adj[p].push(b);
        }
    }
    let mut builder = Builder {
        t,
        adj,
        mark: vec![0; n],
        stamp: 0,
        par: vec![0; n],
        size: vec![0; n],
        owner: vec![0; n],
        bags: Vec::new(),
        parent: Vec::new(),
        height: Vec::new(),
    };
    let root = builder.build((0..n).collect(), Vec::new());
    // Renumber in pre-order so the root is bag 0.
    let mut children = vec![Vec::new(); builder.bags.len()];
    for (x, p) in builder.parent.iter().enumerate() {
        if let Some(p) = p {
            children[*p].push(x);
        }
    }
    let mut index = vec![0; builder.bags.len()];
    let mut pre = Vec::new();
    let mut stack = vec![root];
    while let Some(x) = stack.pop() {
        index[x] = pre.len();
        pre.push(x);
        stack.extend(children[x].iter().rev());
    }
    let bags = pre.iter().map(|&x| std::mem::take(&mut builder.bags[x])).collect();
    let parent = pre.iter().map(|&x| builder.parent[x].map(|p| index[p])).collect();
    let td = TreeDecomposition::new(bags, parent).expect("balanced output is a tree");
    let height = td.height();
    BalancedDecomposition { td, height, input_width: t.width(), input_bags: n }
}
