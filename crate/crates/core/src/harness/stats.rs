use std::io::Write;

use serde::Serialize;

use super::HarnessError;
use crate::arena::Arena;
use crate::decomp::{balance, decompose_cfg};
use crate::engine::call_graph_pot;
use crate::samectx::cfg_graph;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FunctionStats {
    pub function: String,
    /// Width of the heuristic CFG decomposition.
    pub width: usize,
    /// Height of its balanced form.
    pub height: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArenaStats {
    pub functions: Vec<FunctionStats>,
    pub callgraph_depth: usize,
}

pub fn stats(a: &Arena) -> ArenaStats {
    let functions = a
        .functions()
        .iter()
        .enumerate()
        .map(|(f, func)| {
            let td = decompose_cfg(&cfg_graph(a, f));
            FunctionStats { function: func.name.clone(), width: td.width(), height: balance(&td).height }
        })
        .collect();
    ArenaStats { functions, callgraph_depth: call_graph_pot(a).depth() }
}

impl ArenaStats {
    /// `function,width,height` rows followed by a `callgraph,<depth>` row.
    pub fn write_csv(&self, out: impl Write) -> Result<(), HarnessError> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        w.write_record(["function", "width", "height"])?;
        for f in &self.functions {
            w.serialize((&f.function, f.width, f.height))?;
        }
        w.write_record(["callgraph".to_string(), self.callgraph_depth.to_string()])?;
        w.flush()?;
        Ok(())
    }
}
