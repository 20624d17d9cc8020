//! IFDS arena model: fact domain, per-function CFGs with flow relations, call sites,
//! the JSON document format and its validation.

mod callgraph;
mod exploded;
mod relation;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use callgraph::{CallEdge, CallGraph};
pub use exploded::{EdgeClass, ExplodedSupergraph};
pub use relation::{apply_relation, compose_relations, FlowRelation, RelationError};

pub type FuncId = usize;
pub type VertexId = usize;

pub const DEFAULT_BANDWIDTH: usize = 4;

fn default_bandwidth() -> usize {
    DEFAULT_BANDWIDTH
}

// ---------------------------------------------------------------------------
// Document format
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArenaDocument {
    pub facts: Vec<String>,
    #[serde(default = "default_bandwidth")]
    pub bandwidth: usize,
    pub functions: Vec<FunctionDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionDoc {
    pub name: String,
    pub vertices: Vec<VertexDoc>,
    #[serde(default)]
    pub edges: Vec<EdgeDoc>,
    #[serde(default)]
    pub calls: Vec<CallDoc>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindDoc {
    Start,
    Exit,
    Call,
    Retsite,
    Plain,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexDoc {
    pub id: String,
    pub kind: KindDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub callee: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retsite: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub from: String,
    pub to: String,
    pub rel: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallDoc {
    pub call: String,
    pub call_rel: Vec<[usize; 2]>,
    pub ret_rel: Vec<[usize; 2]>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// Insert a missing `(0,0)` pair instead of rejecting the relation.
    pub fix_zero: bool,
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Debug, Error)]
pub enum ArenaError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("validation error at {location}: {problem}")]
    Validation { location: String, problem: Problem },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Problem {
    #[error("empty fact name")]
    EmptyFactName,
    #[error("duplicate fact name `{0}`")]
    DuplicateFact(String),
    #[error("bandwidth limit must be positive")]
    ZeroBandwidth,
    #[error("duplicate function name")]
    DuplicateFunction,
    #[error("function has no vertices")]
    EmptyFunction,
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("more than one start vertex")]
    DuplicateStart,
    #[error("more than one exit vertex")]
    DuplicateExit,
    #[error("no start vertex")]
    MissingStart,
    #[error("no exit vertex")]
    MissingExit,
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("call vertex without callee")]
    MissingCallee,
    #[error("callee `{0}` names no function")]
    DanglingCallee(String),
    #[error("call vertex without ret-site partner")]
    MissingRetSite,
    #[error("`{0}` is not a ret-site vertex of the same function")]
    BadRetSite(String),
    #[error("ret-site claimed by more than one call")]
    SharedRetSite,
    #[error("ret-site has no call partner")]
    UnmatchedRetSite,
    #[error("`callee`/`retsite` given on a non-call vertex")]
    UnexpectedCallField,
    #[error("edge crosses into function of `{0}`")]
    CrossFunctionEdge(String),
    #[error("call vertex may only flow to its ret-site")]
    CallOutEdge,
    #[error("ret-site may only be entered from its call vertex")]
    RetSiteInEdge,
    #[error("exit vertex has an outgoing edge")]
    ExitOutEdge,
    #[error("duplicate edge")]
    DuplicateEdge,
    #[error("call-return-site edge missing")]
    MissingCallReturnEdge,
    #[error("`{0}` is not a call vertex")]
    NotACall(String),
    #[error("call vertex has no entry in `calls`")]
    MissingCallEntry,
    #[error("call vertex listed twice in `calls`")]
    DuplicateCallEntry,
    #[error("{0}")]
    Relation(RelationError),
    #[error("bandwidth {degree} exceeds limit {limit}")]
    BandwidthExceeded { degree: usize, limit: usize },
}

fn invalid(location: impl Into<String>, problem: Problem) -> ArenaError {
    ArenaError::Validation { location: location.into(), problem }
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

/// Ordered fact names; index 0 is the implicit zero fact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactDomain {
    facts: Vec<String>,
}

impl FactDomain {
    pub fn new(facts: Vec<String>) -> Result<Self, Problem> {
        let mut seen = std::collections::HashSet::new();
        for f in &facts {
            if f.is_empty() {
                return Err(Problem::EmptyFactName);
            }
            if !seen.insert(f.as_str()) {
                return Err(Problem::DuplicateFact(f.clone()));
            }
        }
        Ok(FactDomain { facts })
    }

    /// |D|, excluding the zero fact.
    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// |D*| = |D| + 1.
    pub fn dstar(&self) -> usize {
        self.facts.len() + 1
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        match index {
            0 => Some("0"),
            i => self.facts.get(i - 1).map(String::as_str),
        }
    }

    /// Resolves a fact name, falling back to a numeric index.
    pub fn resolve(&self, token: &str) -> Option<usize> {
        if let Some(i) = self.facts.iter().position(|f| f == token) {
            return Some(i + 1);
        }
        token.parse::<usize>().ok().filter(|&i| i < self.dstar())
    }

    pub fn names(&self) -> &[String] {
        &self.facts
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexKind {
    Start,
    Exit,
    Call { callee: FuncId, retsite: VertexId },
    RetSite { call: VertexId },
    Plain,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub name: String,
    pub func: FuncId,
    pub kind: VertexKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeKind {
    Intra,
    CallReturn,
}

/// Intraprocedural supergraph edge (includes call-return-site edges).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: VertexId,
    pub to: VertexId,
    pub kind: EdgeKind,
    pub rel: FlowRelation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallSite {
    pub call: VertexId,
    pub retsite: VertexId,
    pub caller: FuncId,
    pub callee: FuncId,
    pub call_rel: FlowRelation,
    pub ret_rel: FlowRelation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Function {
    pub name: String,
    /// Vertices of this function are `first..first + len`.
    pub first: VertexId,
    pub len: usize,
    pub start: VertexId,
    pub exit: VertexId,
    /// Range into [`Arena::edges`].
    pub edge_range: (usize, usize),
    pub call_sites: Vec<usize>,
}

impl Function {
    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        self.first..self.first + self.len
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v >= self.first && v < self.first + self.len
    }
}

/// A validated arena. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arena {
    domain: FactDomain,
    bandwidth: usize,
    functions: Vec<Function>,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    call_sites: Vec<CallSite>,
    site_at: Vec<Option<usize>>,
    callers: Vec<Vec<usize>>,
    by_name: Vec<VertexId>,
    fingerprint: [u8; 32],
}

pub fn load_arena(text: &str) -> Result<Arena, ArenaError> {
    load_arena_with(text, LoadOptions::default())
}

pub fn load_arena_with(text: &str, options: LoadOptions) -> Result<Arena, ArenaError> {
    let doc: ArenaDocument = serde_json::from_str(text)?;
    Arena::from_document(&doc, options)
}

fn make_rel(dstar: usize, raw: &[[usize; 2]], fix_zero: bool, at: impl Fn() -> String) -> Result<FlowRelation, ArenaError> {
    let zero = fix_zero.then_some((0, 0));
    FlowRelation::new(dstar, raw.iter().map(|p| (p[0], p[1])).chain(zero)).map_err(|e| invalid(at(), Problem::Relation(e)))
}

impl Arena {
    pub fn from_document(doc: &ArenaDocument, options: LoadOptions) -> Result<Arena, ArenaError> {
        let domain = FactDomain::new(doc.facts.clone()).map_err(|p| invalid("facts", p))?;
        let dstar = domain.dstar();
        if doc.bandwidth == 0 {
            return Err(invalid("bandwidth", Problem::ZeroBandwidth));
        }

        let mut func_ids: HashMap<&str, FuncId> = HashMap::new();
        for (f, fd) in doc.functions.iter().enumerate() {
            if func_ids.insert(fd.name.as_str(), f).is_some() {
                return Err(invalid(format!("function `{}`", fd.name), Problem::DuplicateFunction));
            }
        }

        // Pass 1: vertex numbering.
        let mut ids: HashMap<&str, VertexId> = HashMap::new();
        let mut vertices = Vec::new();
        let mut functions = Vec::new();
        for (f, fd) in doc.functions.iter().enumerate() {
            let at = || format!("function `{}`", fd.name);
            if fd.vertices.is_empty() {
                return Err(invalid(at(), Problem::EmptyFunction));
            }
            let first = vertices.len();
            let (mut start, mut exit) = (None, None);
            for vd in &fd.vertices {
                let v = vertices.len();
                if ids.insert(vd.id.as_str(), v).is_some() {
                    return Err(invalid(at(), Problem::DuplicateVertex(vd.id.clone())));
                }
                match vd.kind {
                    KindDoc::Start if start.replace(v).is_some() => return Err(invalid(at(), Problem::DuplicateStart)),
                    KindDoc::Exit if exit.replace(v).is_some() => return Err(invalid(at(), Problem::DuplicateExit)),
                    _ => {}
                }
                vertices.push(Vertex { name: vd.id.clone(), func: f, kind: VertexKind::Plain });
            }
            functions.push(Function {
                name: fd.name.clone(),
                first,
                len: fd.vertices.len(),
                start: start.ok_or_else(|| invalid(at(), Problem::MissingStart))?,
                exit: exit.ok_or_else(|| invalid(at(), Problem::MissingExit))?,
                edge_range: (0, 0),
                call_sites: Vec::new(),
            });
        }

        // Pass 2: kinds and call/ret-site pairing.
        for (f, fd) in doc.functions.iter().enumerate() {
            let func = &functions[f];
            for (k, vd) in fd.vertices.iter().enumerate() {
                let v = func.first + k;
                let at = || format!("function `{}`, vertex `{}`", fd.name, vd.id);
                let kind = match vd.kind {
                    KindDoc::Call => {
                        let callee_name = vd.callee.as_ref().ok_or_else(|| invalid(at(), Problem::MissingCallee))?;
                        let callee = *func_ids.get(callee_name.as_str()).ok_or_else(|| invalid(at(), Problem::DanglingCallee(callee_name.clone())))?;
                        let r_name = vd.retsite.as_ref().ok_or_else(|| invalid(at(), Problem::MissingRetSite))?;
                        let r = ids
                            .get(r_name.as_str())
                            .copied()
                            .filter(|&r| func.contains(r) && fd.vertices[r - func.first].kind == KindDoc::Retsite)
                            .ok_or_else(|| invalid(at(), Problem::BadRetSite(r_name.clone())))?;
                        VertexKind::Call { callee, retsite: r }
                    }
                    _ if vd.callee.is_some() || vd.retsite.is_some() => return Err(invalid(at(), Problem::UnexpectedCallField)),
                    KindDoc::Start => VertexKind::Start,
                    KindDoc::Exit => VertexKind::Exit,
                    KindDoc::Plain => VertexKind::Plain,
                    KindDoc::Retsite => VertexKind::RetSite { call: usize::MAX },
                };
                vertices[v].kind = kind;
            }
        }
        for v in 0..vertices.len() {
            if let VertexKind::Call { retsite, .. } = vertices[v].kind {
                match &mut vertices[retsite].kind {
                    VertexKind::RetSite { call } if *call == usize::MAX => *call = v,
                    _ => {
                        let fname = &functions[vertices[v].func].name;
                        return Err(invalid(format!("function `{fname}`, vertex `{}`", vertices[retsite].name), Problem::SharedRetSite));
                    }
                }
            }
        }
        if let Some(v) = vertices.iter().find(|v| v.kind == VertexKind::RetSite { call: usize::MAX }) {
            return Err(invalid(format!("function `{}`, vertex `{}`", functions[v.func].name, v.name), Problem::UnmatchedRetSite));
        }

        // Pass 3: edges.
        let mut edges = Vec::new();
        for (f, fd) in doc.functions.iter().enumerate() {
            for ed in &fd.edges {
                let at = || format!("function `{}`, edge `{}` -> `{}`", fd.name, ed.from, ed.to);
                let lookup = |name: &String| ids.get(name.as_str()).copied().ok_or_else(|| invalid(at(), Problem::UnknownVertex(name.clone())));
                let (from, to) = (lookup(&ed.from)?, lookup(&ed.to)?);
                for v in [from, to] {
                    if vertices[v].func != f {
                        return Err(invalid(at(), Problem::CrossFunctionEdge(vertices[v].name.clone())));
                    }
                }
                let kind = match (vertices[from].kind, vertices[to].kind) {
                    (VertexKind::Exit, _) => return Err(invalid(at(), Problem::ExitOutEdge)),
                    (VertexKind::Call { retsite, .. }, _) if retsite == to => EdgeKind::CallReturn,
                    (VertexKind::Call { .. }, _) => return Err(invalid(at(), Problem::CallOutEdge)),
                    (_, VertexKind::RetSite { .. }) => return Err(invalid(at(), Problem::RetSiteInEdge)),
                    _ => EdgeKind::Intra,
                };
                let rel = make_rel(dstar, &ed.rel, options.fix_zero, at)?;
                edges.push(Edge { from, to, kind, rel });
            }
        }
        edges.sort_by_key(|e| (e.from, e.to));
        if let Some(w) = edges.windows(2).find(|w| (w[0].from, w[0].to) == (w[1].from, w[1].to)) {
            let (a, b) = (&vertices[w[0].from], &vertices[w[0].to]);
            return Err(invalid(format!("function `{}`, edge `{}` -> `{}`", functions[a.func].name, a.name, b.name), Problem::DuplicateEdge));
        }
        for (f, func) in functions.iter_mut().enumerate() {
            let lo = edges.partition_point(|e| vertices[e.from].func < f);
            let hi = edges.partition_point(|e| vertices[e.from].func <= f);
            func.edge_range = (lo, hi);
        }

        // Pass 4: call sites.
        let mut site_at: Vec<Option<usize>> = vec![None; vertices.len()];
        let mut pending: Vec<(VertexId, CallSite)> = Vec::new();
        for (f, fd) in doc.functions.iter().enumerate() {
            for cd in &fd.calls {
                let at = || format!("function `{}`, call `{}`", fd.name, cd.call);
                let c = ids
                    .get(cd.call.as_str())
                    .copied()
                    .filter(|&c| vertices[c].func == f)
                    .ok_or_else(|| invalid(at(), Problem::UnknownVertex(cd.call.clone())))?;
                let VertexKind::Call { callee, retsite } = vertices[c].kind else {
                    return Err(invalid(at(), Problem::NotACall(cd.call.clone())));
                };
                if site_at[c].replace(0).is_some() {
                    return Err(invalid(at(), Problem::DuplicateCallEntry));
                }
                let call_rel = make_rel(dstar, &cd.call_rel, options.fix_zero, || format!("{} call_rel", at()))?;
                let ret_rel = make_rel(dstar, &cd.ret_rel, options.fix_zero, || format!("{} ret_rel", at()))?;
                for (name, r) in [("call_rel", &call_rel), ("ret_rel", &ret_rel)] {
                    let degree = r.max_degree();
                    if degree > doc.bandwidth {
                        return Err(invalid(format!("{} {name}", at()), Problem::BandwidthExceeded { degree, limit: doc.bandwidth }));
                    }
                }
                pending.push((c, CallSite { call: c, retsite, caller: f, callee, call_rel, ret_rel }));
            }
        }
        for (v, vx) in vertices.iter().enumerate() {
            if let VertexKind::Call { retsite, .. } = vx.kind {
                let at = || format!("function `{}`, vertex `{}`", functions[vx.func].name, vx.name);
                if site_at[v].is_none() {
                    return Err(invalid(at(), Problem::MissingCallEntry));
                }
                if edges.binary_search_by_key(&(v, retsite), |e| (e.from, e.to)).is_err() {
                    return Err(invalid(at(), Problem::MissingCallReturnEdge));
                }
            }
        }
        pending.sort_by_key(|(c, _)| *c);
        let mut call_sites = Vec::with_capacity(pending.len());
        let mut callers = vec![Vec::new(); functions.len()];
        for (i, (c, site)) in pending.into_iter().enumerate() {
            site_at[c] = Some(i);
            functions[site.caller].call_sites.push(i);
            callers[site.callee].push(i);
            call_sites.push(site);
        }

        let mut by_name: Vec<VertexId> = (0..vertices.len()).collect();
        by_name.sort_by(|&a, &b| vertices[a].name.cmp(&vertices[b].name));

        let mut arena = Arena { domain, bandwidth: doc.bandwidth, functions, vertices, edges, call_sites, site_at, callers, by_name, fingerprint: [0; 32] };
        arena.fingerprint = arena.compute_fingerprint();
        Ok(arena)
    }

    /// Canonical document: vertices in id order, edges sorted by endpoint ids,
    /// relations sorted, `(0,0)` always explicit.
    pub fn to_document(&self) -> ArenaDocument {
        let rel = |r: &FlowRelation| r.pairs().map(|(s, d)| [s, d]).collect::<Vec<_>>();
        let functions = self
            .functions
            .iter()
            .map(|func| FunctionDoc {
                name: func.name.clone(),
                vertices: func
                    .vertices()
                    .map(|v| {
                        let vx = &self.vertices[v];
                        let (kind, callee, retsite) = match vx.kind {
                            VertexKind::Start => (KindDoc::Start, None, None),
                            VertexKind::Exit => (KindDoc::Exit, None, None),
                            VertexKind::Plain => (KindDoc::Plain, None, None),
                            VertexKind::RetSite { .. } => (KindDoc::Retsite, None, None),
                            VertexKind::Call { callee, retsite } => {
                                (KindDoc::Call, Some(self.functions[callee].name.clone()), Some(self.vertices[retsite].name.clone()))
                            }
                        };
                        VertexDoc { id: vx.name.clone(), kind, callee, retsite }
                    })
                    .collect(),
                edges: self
                    .function_edges(func)
                    .iter()
                    .map(|e| EdgeDoc { from: self.vertices[e.from].name.clone(), to: self.vertices[e.to].name.clone(), rel: rel(&e.rel) })
                    .collect(),
                calls: func
                    .call_sites
                    .iter()
                    .map(|&i| {
                        let s = &self.call_sites[i];
                        CallDoc { call: self.vertices[s.call].name.clone(), call_rel: rel(&s.call_rel), ret_rel: rel(&s.ret_rel) }
                    })
                    .collect(),
            })
            .collect();
        ArenaDocument { facts: self.domain.names().to_vec(), bandwidth: self.bandwidth, functions }
    }

    fn compute_fingerprint(&self) -> [u8; 32] {
        let bytes = serde_json::to_vec(&self.to_document()).expect("documents always serialize");
        Sha256::digest(&bytes).into()
    }

    /// SHA-256 of the canonical document.
    pub fn fingerprint(&self) -> [u8; 32] {
        self.fingerprint
    }

    pub fn domain(&self) -> &FactDomain {
        &self.domain
    }

    pub fn dstar(&self) -> usize {
        self.domain.dstar()
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn functions(&self) -> &[Function] {
        &self.functions
    }

    pub fn function(&self, f: FuncId) -> &Function {
        &self.functions[f]
    }

    pub fn function_named(&self, name: &str) -> Option<FuncId> {
        self.functions.iter().position(|f| f.name == name)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_named(&self, name: &str) -> Option<VertexId> {
        self.by_name.binary_search_by(|&v| self.vertices[v].name.as_str().cmp(name)).ok().map(|i| self.by_name[i])
    }

    /// Owning function of a vertex.
    pub fn fg(&self, v: VertexId) -> FuncId {
        self.vertices[v].func
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn function_edges(&self, func: &Function) -> &[Edge] {
        &self.edges[func.edge_range.0..func.edge_range.1]
    }

    pub fn call_sites(&self) -> &[CallSite] {
        &self.call_sites
    }

    /// Call-site index of a call vertex.
    pub fn call_site_at(&self, v: VertexId) -> Option<usize> {
        self.site_at[v]
    }

    /// Call sites whose callee is `f`.
    pub fn callers_of(&self, f: FuncId) -> &[usize] {
        &self.callers[f]
    }

    /// CFG edges of `f` in function-local vertex numbering.
    pub fn local_cfg_edges(&self, f: FuncId) -> Vec<(usize, usize)> {
        let func = &self.functions[f];
        self.function_edges(func).iter().map(|e| (e.from - func.first, e.to - func.first)).collect()
    }

    /// Human-readable `vertex:fact` label of an exploded vertex.
    pub fn label(&self, v: VertexId, d: usize) -> String {
        format!("{}:{}", self.vertices[v].name, self.domain.name(d).unwrap_or("?"))
    }
}
