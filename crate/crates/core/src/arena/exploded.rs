use serde::{Deserialize, Serialize};

use super::{Arena, EdgeKind, VertexKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeClass {
    Intra,
    CallReturn,
    CallStart,
    ExitReturn,
}

/// `Ḡ`: one vertex per (supergraph vertex, fact), id `v·|D*| + d`, edges in CSR form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplodedSupergraph {
    dstar: usize,
    offsets: Vec<u32>,
    targets: Vec<u32>,
    classes: Vec<EdgeClass>,
}

impl ExplodedSupergraph {
    pub fn build(arena: &Arena) -> Self {
        let dstar = arena.dstar();
        let n = arena.num_vertices();
        let mut offsets = Vec::with_capacity(n * dstar + 1);
        let mut targets = Vec::new();
        let mut classes = Vec::new();
        offsets.push(0);
        let mut outgoing = Vec::new();
        for u in 0..n {
            outgoing.clear();
            let lo = arena.edges().partition_point(|e| e.from < u);
            for e in arena.edges()[lo..].iter().take_while(|e| e.from == u) {
                let class = match e.kind {
                    EdgeKind::Intra => EdgeClass::Intra,
                    EdgeKind::CallReturn => EdgeClass::CallReturn,
                };
                outgoing.push((e.to, &e.rel, class));
            }
            match arena.vertex(u).kind {
                VertexKind::Call { .. } => {
                    let site = &arena.call_sites()[arena.call_site_at(u).expect("validated call vertex")];
                    outgoing.push((arena.function(site.callee).start, &site.call_rel, EdgeClass::CallStart));
                }
                VertexKind::Exit => {
                    for &i in arena.callers_of(arena.fg(u)) {
                        let site = &arena.call_sites()[i];
                        outgoing.push((site.retsite, &site.ret_rel, EdgeClass::ExitReturn));
                    }
                }
                _ => {}
            }
            for d in 0..dstar {
                for &(to, rel, class) in &outgoing {
                    for d2 in rel.image(d) {
                        targets.push((to * dstar + d2) as u32);
                        classes.push(class);
                    }
                }
                offsets.push(targets.len() as u32);
            }
        }
        ExplodedSupergraph { dstar, offsets, targets, classes }
    }

    pub fn dstar(&self) -> usize {
        self.dstar
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    pub fn id(&self, v: usize, d: usize) -> usize {
        v * self.dstar + d
    }

    #[inline]
    pub fn split(&self, x: usize) -> (usize, usize) {
        (x / self.dstar, x % self.dstar)
    }

    /// Successors of exploded vertex `x` with their edge class.
    #[inline]
    pub fn successors(&self, x: usize) -> impl Iterator<Item = (usize, EdgeClass)> + '_ {
        let (lo, hi) = (self.offsets[x] as usize, self.offsets[x + 1] as usize);
        self.targets[lo..hi].iter().zip(&self.classes[lo..hi]).map(|(&t, &c)| (t as usize, c))
    }
}
