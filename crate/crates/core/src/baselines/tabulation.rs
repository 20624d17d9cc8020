//! Worklist tabulation in the style of the classical exhaustive and demand-driven
//! IFDS solvers. Contexts are keyed by their entry exploded vertex; a query source
//! acts as the entry of its own context.

use std::collections::HashMap;

use crate::arena::{Arena, EdgeClass, ExplodedSupergraph, VertexId};
use crate::bits::BitSet;

struct Context {
    base: usize,
    exit: usize,
    reach: BitSet,
    callers: Vec<(u32, u32)>,
    entered: Vec<u32>,
}

struct Solver<'a> {
    arena: &'a Arena,
    ex: &'a ExplodedSupergraph,
    contexts: Vec<Context>,
    by_entry: HashMap<usize, u32>,
    worklist: Vec<(u32, u32)>,
    explored: u64,
}

impl<'a> Solver<'a> {
    fn new(arena: &'a Arena, ex: &'a ExplodedSupergraph) -> Self {
        Solver { arena, ex, contexts: Vec::new(), by_entry: HashMap::new(), worklist: Vec::new(), explored: 0 }
    }

    fn context(&mut self, entry: usize) -> u32 {
        if let Some(&c) = self.by_entry.get(&entry) {
            return c;
        }
        let dstar = self.ex.dstar();
        let func = self.arena.function(self.arena.fg(entry / dstar));
        let id = self.contexts.len() as u32;
        self.contexts.push(Context {
            base: func.first * dstar,
            exit: func.exit,
            reach: BitSet::new(func.len * dstar),
            callers: Vec::new(),
            entered: Vec::new(),
        });
        self.by_entry.insert(entry, id);
        self.add(id, entry);
        id
    }

    fn add(&mut self, ctx: u32, x: usize) {
        let c = &mut self.contexts[ctx as usize];
        if c.reach.insert(x - c.base) {
            self.worklist.push((ctx, (x - c.base) as u32));
        }
    }

    fn returns(&mut self, caller: u32, cs: u32, exit_fact: usize) {
        let site = &self.arena.call_sites()[cs as usize];
        let (retsite, dstar) = (site.retsite, self.ex.dstar());
        let targets: Vec<usize> = site.ret_rel.image(exit_fact).map(|d4| retsite * dstar + d4).collect();
        for y in targets {
            self.add(caller, y);
        }
    }

    fn run(&mut self) {
        let dstar = self.ex.dstar();
        while let Some((ctx, local)) = self.worklist.pop() {
            self.explored += 1;
            let c = &self.contexts[ctx as usize];
            let x = c.base + local as usize;
            let (u, d) = (x / dstar, x % dstar);
            if u == c.exit {
                for (caller, cs) in c.callers.clone() {
                    self.returns(caller, cs, d);
                }
            }
            for (y, class) in self.ex.successors(x) {
                match class {
                    EdgeClass::Intra | EdgeClass::CallReturn => self.add(ctx, y),
                    EdgeClass::CallStart => {
                        let cs = self.arena.call_site_at(u).expect("call vertex") as u32;
                        let callee = self.context(y);
                        let e = &mut self.contexts[callee as usize];
                        if e.callers.contains(&(ctx, cs)) {
                            continue;
                        }
                        e.callers.push((ctx, cs));
                        let exit_base = e.exit * dstar - e.base;
                        let facts: Vec<usize> = (0..dstar).filter(|&de| e.reach.contains(exit_base + de)).collect();
                        for de in facts {
                            self.returns(ctx, cs, de);
                        }
                        let entered = &mut self.contexts[ctx as usize].entered;
                        if !entered.contains(&callee) {
                            entered.push(callee);
                        }
                    }
                    EdgeClass::ExitReturn => {}
                }
            }
        }
    }

    /// Union of the contexts transitively entered from `root`, in global ids.
    fn closure(&self, root: u32) -> BitSet {
        let mut out = BitSet::new(self.ex.vertex_count());
        let mut seen = vec![false; self.contexts.len()];
        let mut stack = vec![root];
        seen[root as usize] = true;
        while let Some(c) = stack.pop() {
            let ctx = &self.contexts[c as usize];
            for x in ctx.reach.iter() {
                out.insert(ctx.base + x);
            }
            for &e in &ctx.entered {
                if !seen[e as usize] {
                    seen[e as usize] = true;
                    stack.push(e);
                }
            }
        }
        out
    }
}

/// Exploded vertices reachable along valid paths from any vertex in `start`.
pub fn exhaustive_tabulate(arena: &Arena, ex: &ExplodedSupergraph, start: &[usize]) -> BitSet {
    let mut s = Solver::new(arena, ex);
    let roots: Vec<u32> = start.iter().map(|&x| s.context(x)).collect();
    s.run();
    let mut out = BitSet::new(ex.vertex_count());
    for r in roots {
        out.union_with(&s.closure(r));
    }
    out
}

/// Query-driven tabulation with state kept across queries.
pub struct DemandSolver<'a> {
    solver: Solver<'a>,
    answers: HashMap<(usize, usize), bool>,
    closures: HashMap<usize, BitSet>,
}

impl<'a> DemandSolver<'a> {
    pub fn new(arena: &'a Arena, ex: &'a ExplodedSupergraph) -> Self {
        DemandSolver { solver: Solver::new(arena, ex), answers: HashMap::new(), closures: HashMap::new() }
    }

    pub fn query(&mut self, u1: VertexId, d1: usize, u2: VertexId, d2: usize) -> bool {
        let ex = self.solver.ex;
        let (src, dst) = (ex.id(u1, d1), ex.id(u2, d2));
        if let Some(&a) = self.answers.get(&(src, dst)) {
            return a;
        }
        if !self.closures.contains_key(&src) {
            let root = self.solver.context(src);
            self.solver.run();
            let reach = self.solver.closure(root);
            self.closures.insert(src, reach);
        }
        let a = self.closures[&src].contains(dst);
        self.answers.insert((src, dst), a);
        a
    }

    /// Total worklist items processed so far.
    pub fn explored(&self) -> u64 {
        self.solver.explored
    }
}
