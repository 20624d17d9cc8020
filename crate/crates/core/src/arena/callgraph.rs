use serde::{Deserialize, Serialize};

use super::{Arena, FuncId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallEdge {
    pub caller: FuncId,
    pub callee: FuncId,
    /// Call-site indices realizing this edge.
    pub sites: Vec<usize>,
}

/// Function-level call graph; parallel call sites collapse into one edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallGraph {
    functions: usize,
    edges: Vec<CallEdge>,
}

impl CallGraph {
    pub fn build(arena: &Arena) -> Self {
        let mut sites: Vec<(FuncId, FuncId, usize)> = arena.call_sites().iter().enumerate().map(|(i, s)| (s.caller, s.callee, i)).collect();
        sites.sort_unstable();
        let mut edges: Vec<CallEdge> = Vec::new();
        for (caller, callee, i) in sites {
            match edges.last_mut() {
                Some(e) if (e.caller, e.callee) == (caller, callee) => e.sites.push(i),
                _ => edges.push(CallEdge { caller, callee, sites: vec![i] }),
            }
        }
        CallGraph { functions: arena.functions().len(), edges }
    }

    pub fn function_count(&self) -> usize {
        self.functions
    }

    pub fn edges(&self) -> &[CallEdge] {
        &self.edges
    }

    /// Endpoint pairs with self-calls dropped, for the undirected view.
    pub fn undirected_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().filter(|e| e.caller != e.callee).map(|e| (e.caller, e.callee)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::load_arena;

    #[test]
    fn arena_a_has_one_edge() {
        let a = load_arena(include_str!("../../fixtures/arena_a.json")).unwrap();
        let cg = CallGraph::build(&a);
        assert_eq!(cg.edges(), &[CallEdge { caller: 0, callee: 1, sites: vec![0] }]);
    }

    #[test]
    fn double_call_collapses() {
        let text = r#"{"facts":[],"functions":[
          {"name":"f","vertices":[{"id":"s","kind":"start"},{"id":"c1","kind":"call","callee":"g","retsite":"r1"},{"id":"r1","kind":"retsite"},
             {"id":"c2","kind":"call","callee":"g","retsite":"r2"},{"id":"r2","kind":"retsite"},{"id":"e","kind":"exit"}],
           "edges":[{"from":"s","to":"c1","rel":[[0,0]]},{"from":"c1","to":"r1","rel":[[0,0]]},{"from":"r1","to":"c2","rel":[[0,0]]},
                    {"from":"c2","to":"r2","rel":[[0,0]]},{"from":"r2","to":"e","rel":[[0,0]]}],
           "calls":[{"call":"c1","call_rel":[[0,0]],"ret_rel":[[0,0]]},{"call":"c2","call_rel":[[0,0]],"ret_rel":[[0,0]]}]},
          {"name":"g","vertices":[{"id":"sg","kind":"start"},{"id":"eg","kind":"exit"}],"edges":[]}]}"#;
        let cg = CallGraph::build(&load_arena(text).unwrap());
        assert_eq!(cg.edges().len(), 1);
        assert_eq!(cg.edges()[0].sites.len(), 2);
        let solo = r#"{"facts":[],"functions":[{"name":"f","vertices":[{"id":"s","kind":"start"},{"id":"e","kind":"exit"}]}]}"#;
        assert!(CallGraph::build(&load_arena(solo).unwrap()).edges().is_empty());
    }
}
