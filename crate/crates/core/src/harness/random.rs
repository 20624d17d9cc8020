//! Small unstructured random arenas for exhaustive cross-checking. Unlike the
//! benchmark generator these may recurse and have arbitrary CFG shapes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arena::{Arena, ArenaDocument, CallDoc, EdgeDoc, FunctionDoc, KindDoc, LoadOptions, VertexDoc};

#[derive(Clone, Debug, PartialEq)]
pub struct RandomArenaSpec {
    pub max_functions: usize,
    /// Upper bound on vertices per function (at least 2).
    pub max_vertices: usize,
    pub max_facts: usize,
    /// Probability of each non-zero pair in a relation.
    pub pair_density: f64,
    /// Extra intraprocedural edges per eligible source vertex.
    pub max_out_degree: usize,
}

impl RandomArenaSpec {
    pub fn small() -> Self {
        RandomArenaSpec { max_functions: 4, max_vertices: 8, max_facts: 2, pair_density: 0.3, max_out_degree: 2 }
    }

    /// The corpus shape used by the oracle-equivalence criteria.
    pub fn acceptance() -> Self {
        RandomArenaSpec { max_functions: 6, max_vertices: 12, max_facts: 3, pair_density: 0.25, max_out_degree: 2 }
    }
}

fn relation(rng: &mut ChaCha8Rng, dstar: usize, density: f64) -> Vec<[usize; 2]> {
    let mut rel = vec![[0, 0]];
    for s in 0..dstar {
        for d in 0..dstar {
            if (s, d) == (0, 0) {
                continue;
            }
            let p = if s == d { 0.5 + density / 2.0 } else { density };
            if rng.gen_bool(p.min(1.0)) {
                rel.push([s, d]);
            }
        }
    }
    rel
}

pub fn random_document(spec: &RandomArenaSpec, seed: u64) -> ArenaDocument {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(1..=spec.max_functions.max(1));
    let nfacts = rng.gen_range(0..=spec.max_facts);
    let dstar = nfacts + 1;
    let mut functions = Vec::with_capacity(k);
    for f in 0..k {
        let nv = rng.gen_range(2..=spec.max_vertices.max(2));
        let ncalls = rng.gen_range(0..=(nv - 2) / 2);
        let nplain = nv - 2 - 2 * ncalls;
        let name = |tag: &str, i: usize| format!("f{f}_{tag}{i}");
        let mut vertices = vec![VertexDoc { id: format!("f{f}_s"), kind: KindDoc::Start, callee: None, retsite: None }];
        let mut sources = vec![format!("f{f}_s")];
        let mut targets = vec![format!("f{f}_s"), format!("f{f}_e")];
        let mut edges = Vec::new();
        let mut calls = Vec::new();
        for i in 0..nplain {
            vertices.push(VertexDoc { id: name("p", i), kind: KindDoc::Plain, callee: None, retsite: None });
            sources.push(name("p", i));
            targets.push(name("p", i));
        }
        for i in 0..ncalls {
            let callee = format!("f{}", rng.gen_range(0..k));
            vertices.push(VertexDoc { id: name("c", i), kind: KindDoc::Call, callee: Some(callee), retsite: Some(name("r", i)) });
            vertices.push(VertexDoc { id: name("r", i), kind: KindDoc::Retsite, callee: None, retsite: None });
            sources.push(name("r", i));
            targets.push(name("c", i));
            edges.push(EdgeDoc { from: name("c", i), to: name("r", i), rel: relation(&mut rng, dstar, spec.pair_density) });
            calls.push(CallDoc {
                call: name("c", i),
                call_rel: relation(&mut rng, dstar, spec.pair_density),
                ret_rel: relation(&mut rng, dstar, spec.pair_density),
            });
        }
        vertices.push(VertexDoc { id: format!("f{f}_e"), kind: KindDoc::Exit, callee: None, retsite: None });
        for from in &sources {
            let out = rng.gen_range(1..=spec.max_out_degree.max(1));
            let mut chosen: Vec<&String> = Vec::new();
            for _ in 0..out {
                let to = &targets[rng.gen_range(0..targets.len())];
                if !chosen.contains(&to) {
                    chosen.push(to);
                    edges.push(EdgeDoc { from: from.clone(), to: to.clone(), rel: relation(&mut rng, dstar, spec.pair_density) });
                }
            }
        }
        functions.push(FunctionDoc { name: format!("f{f}"), vertices, edges, calls });
    }
    ArenaDocument { facts: (0..nfacts).map(|i| format!("x{i}")).collect(), bandwidth: dstar.max(1), functions }
}

pub fn random_arena(spec: &RandomArenaSpec, seed: u64) -> Arena {
    Arena::from_document(&random_document(spec, seed), LoadOptions::default()).expect("random documents are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_valid() {
        for seed in 0..200 {
            let a = random_document(&RandomArenaSpec::acceptance(), seed);
            assert_eq!(a, random_document(&RandomArenaSpec::acceptance(), seed));
            let arena = Arena::from_document(&a, LoadOptions::default()).unwrap();
            assert!(arena.functions().len() <= 6);
            assert!(arena.functions().iter().all(|f| f.len <= 12));
            assert!(arena.domain().len() <= 3);
        }
    }
}
