//! Structured-program arena generator with width and call-depth caps.
//!
//! CFGs nest sequences, branches and loops. Functions hang off a hidden rooted
//! tree of bounded depth and only call their strict ancestors in it, so that
//! tree is itself a POT of the call graph.

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::arena::{Arena, ArenaDocument, CallDoc, EdgeDoc, FunctionDoc, KindDoc, LoadOptions, VertexDoc};
use crate::decomp::{compute_pot, decompose_cfg, UGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Template {
    /// Gen/kill of definitions.
    Reach,
    /// Possibly-uninitialized variables, all uninitialized on entry to the first function.
    Uninit,
    /// Null/copy/new assignments.
    Nullness,
}

impl FromStr for Template {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "reach" => Ok(Template::Reach),
            "uninit" => Ok(Template::Uninit),
            "nullness" => Ok(Template::Nullness),
            _ => Err(format!("unknown template {s:?} (reach, uninit, nullness)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub functions: usize,
    /// Vertices per function, start and exit included.
    pub lines_min: usize,
    pub lines_max: usize,
    /// CFG treewidth cap; 1 allows straight-line code only.
    pub width: usize,
    /// Call-graph POT depth cap.
    pub depth: usize,
    pub facts: usize,
    /// Calls per function, at most.
    pub calls: usize,
    pub template: Template,
    pub seed: u64,
    pub bandwidth: usize,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec { functions: 8, lines_min: 8, lines_max: 24, width: 3, depth: 6, facts: 2, calls: 2, template: Template::Reach, seed: 0, bandwidth: 4 }
    }
}

const FUNCTION_RETRIES: usize = 50;
const CALL_TREE_RETRIES: usize = 3;

enum Stmt {
    Plain,
    Call(usize),
    If(Vec<Stmt>, Vec<Stmt>),
    While(Vec<Stmt>),
}

fn check(spec: &GenSpec) -> Result<(), HarnessError> {
    let bad = |why: &str| Err(HarnessError::InfeasibleSpec(why.to_string()));
    if spec.functions == 0 {
        return bad("at least one function is required");
    }
    if spec.depth == 0 {
        return bad("call-graph depth cap must be at least 1");
    }
    if spec.width == 0 {
        return bad("width cap must be at least 1 (start and exit are adjacent)");
    }
    if spec.lines_min < 2 || spec.lines_min > spec.lines_max {
        return bad("need 2 <= lines_min <= lines_max");
    }
    if spec.bandwidth == 0 {
        return bad("bandwidth must be positive");
    }
    Ok(())
}

struct Builder<'a> {
    rng: ChaCha8Rng,
    spec: &'a GenSpec,
}

impl Builder<'_> {
    /// A block of exactly `budget` vertices containing every call in `calls`.
    fn block(&mut self, mut budget: usize, calls: &mut Vec<usize>) -> Vec<Stmt> {
        let mut out = Vec::new();
        while budget > 0 {
            let free = budget - 2 * calls.len();
            let structured = self.spec.width >= 2;
            let roll: f64 = self.rng.gen();
            if !calls.is_empty() && (free == 0 || roll < 0.2) {
                out.push(Stmt::Call(calls.pop().unwrap()));
                budget -= 2;
            } else if structured && free >= 2 && roll < 0.4 {
                let mut b = self.take_calls(calls);
                let ka = self.rng.gen_range(0..=b.len());
                let mut a = b.split_off(b.len() - ka);
                let extra = self.rng.gen_range(0..=(free - 2).min(8));
                let ea = self.rng.gen_range(0..=extra);
                let body = 2 * (a.len() + b.len()) + extra;
                let then = self.block(2 * a.len() + ea, &mut a);
                let els = self.block(2 * b.len() + extra - ea, &mut b);
                out.push(Stmt::If(then, els));
                budget -= body + 2;
            } else if structured && free >= 1 && roll < 0.55 {
                let mut inner = self.take_calls(calls);
                let body = 2 * inner.len() + self.rng.gen_range(0..=(free - 1).min(8));
                out.push(Stmt::While(self.block(body, &mut inner)));
                budget -= body + 1;
            } else if free > 0 {
                out.push(Stmt::Plain);
                budget -= 1;
            }
        }
        out
    }

    fn take_calls(&mut self, calls: &mut Vec<usize>) -> Vec<usize> {
        let k = self.rng.gen_range(0..=calls.len());
        calls.split_off(calls.len() - k)
    }

    fn relation(&mut self, template: Template, dstar: usize) -> Vec<[usize; 2]> {
        let nf = dstar - 1;
        let mut rel = vec![[0, 0]];
        if nf == 0 {
            return rel;
        }
        let target = self.rng.gen_range(1..=nf);
        let (kill, extra): (bool, Option<[usize; 2]>) = match template {
            Template::Reach => {
                let r: f64 = self.rng.gen();
                (r < 0.3, (r < 0.6).then_some([0, target]))
            }
            Template::Uninit => {
                let r: f64 = self.rng.gen();
                let src = self.rng.gen_range(1..=nf);
                (r < 0.5, (r < 0.5 && src != target).then_some([src, target]))
            }
            Template::Nullness => {
                let r: f64 = self.rng.gen();
                let src = self.rng.gen_range(1..=nf);
                if r < 0.2 {
                    (true, Some([0, target]))
                } else if r < 0.4 {
                    (true, None)
                } else if r < 0.6 {
                    (true, (src != target).then_some([src, target]))
                } else {
                    (false, None)
                }
            }
        };
        for d in 1..=nf {
            if !(kill && d == target) {
                rel.push([d, d]);
            }
        }
        rel.extend(extra);
        rel.sort_unstable();
        rel.dedup();
        rel
    }

    /// Parameter binding: a partial permutation, plus at most `bandwidth − 1` generated facts.
    fn binding(&mut self, dstar: usize, keep: f64, gen: f64) -> Vec<[usize; 2]> {
        let mut perm: Vec<usize> = (1..dstar).collect();
        perm.shuffle(&mut self.rng);
        let mut rel = vec![[0, 0]];
        for d in 1..dstar {
            if self.rng.gen_bool(keep) {
                rel.push([d, perm[d - 1]]);
            }
        }
        let mut gens = 0;
        for d in 1..dstar {
            if gens + 1 < self.spec.bandwidth && self.rng.gen_bool(gen) {
                rel.push([0, d]);
                gens += 1;
            }
        }
        // each non-zero target has at most one permutation source plus the zero fact
        if self.spec.bandwidth < 2 {
            rel.retain(|p| p[0] != 0 || p[1] == 0);
        }
        rel.sort_unstable();
        rel
    }
}

struct Emitter {
    f: usize,
    vertices: Vec<VertexDoc>,
    /// (from, to, is statement edge)
    edges: Vec<(usize, usize, bool)>,
    calls: Vec<usize>,
}

impl Emitter {
    fn vertex(&mut self, kind: KindDoc) -> usize {
        let i = self.vertices.len();
        self.vertices.push(VertexDoc { id: format!("f{}_v{i}", self.f), kind, callee: None, retsite: None });
        i
    }

    /// Emits `block` after `from`; returns the vertex control leaves it by.
    fn block(&mut self, block: &[Stmt], mut from: usize, stmt_edge: bool) -> (usize, bool) {
        let mut flag = stmt_edge;
        for s in block {
            let (next, f) = self.stmt(s, from, flag);
            from = next;
            flag = f;
        }
        (from, flag)
    }

    fn stmt(&mut self, s: &Stmt, from: usize, flag: bool) -> (usize, bool) {
        match s {
            Stmt::Plain => {
                let v = self.vertex(KindDoc::Plain);
                self.edges.push((from, v, flag));
                (v, true)
            }
            Stmt::Call(g) => {
                let c = self.vertex(KindDoc::Call);
                let r = self.vertex(KindDoc::Retsite);
                self.vertices[c].callee = Some(format!("fn{g}"));
                self.vertices[c].retsite = Some(self.vertices[r].id.clone());
                self.edges.push((from, c, flag));
                self.edges.push((c, r, false));
                self.calls.push(c);
                (r, false)
            }
            Stmt::If(then, els) => {
                let cond = self.vertex(KindDoc::Plain);
                self.edges.push((from, cond, flag));
                let (a, fa) = self.block(then, cond, false);
                let (b, fb) = self.block(els, cond, false);
                let join = self.vertex(KindDoc::Plain);
                self.edges.push((a, join, fa));
                if b != cond || a != cond {
                    self.edges.push((b, join, fb));
                }
                (join, false)
            }
            Stmt::While(body) => {
                let head = self.vertex(KindDoc::Plain);
                self.edges.push((from, head, flag));
                let (last, fl) = self.block(body, head, false);
                if last != head {
                    self.edges.push((last, head, fl));
                }
                (head, false)
            }
        }
    }
}

fn hidden_tree(rng: &mut ChaCha8Rng, k: usize, cap: usize) -> Vec<Option<usize>> {
    let mut parent = vec![None; k];
    let mut depth = vec![1usize; k];
    for i in 1..k {
        if cap < 2 {
            continue;
        }
        // the deeper of two eligible candidates, which favours long call chains
        let mut pick = || loop {
            let j = rng.gen_range(0..i);
            if depth[j] < cap {
                break j;
            }
        };
        let (a, b) = (pick(), pick());
        let j = if depth[b] > depth[a] { b } else { a };
        parent[i] = Some(j);
        depth[i] = depth[j] + 1;
    }
    parent
}

fn function_doc(b: &mut Builder, f: usize, lines: usize, callees: &[usize], dstar: usize) -> Result<FunctionDoc, HarnessError> {
    let spec = b.spec;
    for _ in 0..FUNCTION_RETRIES {
        let mut calls = callees.to_vec();
        let body = b.block(lines - 2, &mut calls);
        let mut em = Emitter { f, vertices: Vec::new(), edges: Vec::new(), calls: Vec::new() };
        let s = em.vertex(KindDoc::Start);
        let (last, flag) = em.block(&body, s, false);
        let e = em.vertex(KindDoc::Exit);
        em.edges.push((last, e, flag));
        let g = UGraph::from_edges(em.vertices.len(), em.edges.iter().map(|&(x, y, _)| (x, y)));
        if decompose_cfg(&g).width() > spec.width {
            continue;
        }
        let entry_gen = f == 0 && spec.template == Template::Uninit;
        let mut edges = Vec::with_capacity(em.edges.len());
        for &(x, y, stmt) in &em.edges {
            let rel = if matches!(em.vertices[x].kind, KindDoc::Call) {
                let mut r = vec![[0, 0]];
                r.extend((1..dstar).filter(|_| b.rng.gen_bool(0.5)).map(|d| [d, d]));
                r
            } else if x == s && entry_gen {
                std::iter::once([0, 0]).chain((1..dstar).map(|d| [0, d])).collect()
            } else if stmt {
                b.relation(spec.template, dstar)
            } else {
                (0..dstar).map(|d| [d, d]).collect()
            };
            edges.push(EdgeDoc { from: em.vertices[x].id.clone(), to: em.vertices[y].id.clone(), rel });
        }
        let calls = em
            .calls
            .iter()
            .map(|&c| CallDoc { call: em.vertices[c].id.clone(), call_rel: b.binding(dstar, 0.7, 0.15), ret_rel: b.binding(dstar, 0.7, 0.1) })
            .collect();
        return Ok(FunctionDoc { name: format!("fn{f}"), vertices: em.vertices, edges, calls });
    }
    Err(HarnessError::InfeasibleSpec(format!("no CFG of width <= {} found for fn{f}", spec.width)))
}

pub fn generate_document(spec: &GenSpec) -> Result<ArenaDocument, HarnessError> {
    check(spec)?;
    let mut b = Builder { rng: ChaCha8Rng::seed_from_u64(spec.seed), spec };
    let dstar = spec.facts + 1;
    let prefix = match spec.template {
        Template::Reach => "d",
        Template::Uninit => "x",
        Template::Nullness => "p",
    };
    let facts: Vec<String> = (1..=spec.facts).map(|i| format!("{prefix}{i}")).collect();
    for cap in (1..=spec.depth).rev() {
        for _ in 0..CALL_TREE_RETRIES {
            let parent = hidden_tree(&mut b.rng, spec.functions, cap);
            let mut plan = Vec::with_capacity(spec.functions);
            for f in 0..spec.functions {
                let mut ancestors = Vec::new();
                let mut p = parent[f];
                while let Some(q) = p {
                    ancestors.push(q);
                    p = parent[q];
                }
                let lines = b.rng.gen_range(spec.lines_min..=spec.lines_max);
                let n = if ancestors.is_empty() { 0 } else { b.rng.gen_range(0..=spec.calls.min((lines - 2) / 2)) };
                // callee distance up the tree is geometric
                let callees: Vec<usize> = (0..n)
                    .map(|_| {
                        let mut k = 0;
                        while k + 1 < ancestors.len() && b.rng.gen_bool(0.5) {
                            k += 1;
                        }
                        ancestors[k]
                    })
                    .collect();
                plan.push((lines, callees));
            }
            let pairs = plan.iter().enumerate().flat_map(|(f, (_, cs))| cs.iter().map(move |&g| (f, g)));
            if compute_pot(&UGraph::from_edges(spec.functions, pairs)).depth() > spec.depth {
                continue;
            }
            let functions =
                plan.iter().enumerate().map(|(f, (lines, callees))| function_doc(&mut b, f, *lines, callees, dstar)).collect::<Result<Vec<_>, _>>()?;
            return Ok(ArenaDocument { facts: facts.clone(), bandwidth: spec.bandwidth, functions });
        }
    }
    Err(HarnessError::InfeasibleSpec(format!("no call graph with POT depth <= {} found", spec.depth)))
}

pub fn generate(spec: &GenSpec) -> Result<Arena, HarnessError> {
    let doc = generate_document(spec)?;
    Ok(Arena::from_document(&doc, LoadOptions::default()).expect("generated arenas are valid"))
}
