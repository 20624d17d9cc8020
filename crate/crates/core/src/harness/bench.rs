//! Engine comparison: an agreement gate over the whole workload, then timing.

use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::{HarnessError, Query};
use crate::arena::{Arena, ExplodedSupergraph};
use crate::baselines::{exhaustive_tabulate, DemandSolver, DyckMode, DyckOracle};
use crate::engine::{preprocess, QueryIndex};
use crate::summaries::{compute_summaries, view, SearchScratch, SummaryGraph, ViewTag};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineKind {
    Param,
    IvpDfs,
    Exhaustive,
    Demand,
    Dyck,
}

impl EngineKind {
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Param => "param",
            EngineKind::IvpDfs => "ivp-dfs",
            EngineKind::Exhaustive => "exhaustive",
            EngineKind::Demand => "demand",
            EngineKind::Dyck => "dyck",
        }
    }
}

impl FromStr for EngineKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        [EngineKind::Param, EngineKind::IvpDfs, EngineKind::Exhaustive, EngineKind::Demand, EngineKind::Dyck]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::UnknownEngine(s.to_string()))
    }
}

pub trait QueryEngine {
    fn answer(&mut self, q: &Query) -> Result<bool, HarnessError>;
}

struct Param(QueryIndex);

impl QueryEngine for Param {
    fn answer(&mut self, q: &Query) -> Result<bool, HarnessError> {
        Ok(self.0.query(q.u1, q.d1, q.u2, q.d2)?)
    }
}

struct IvpDfs<'a> {
    sg: SummaryGraph<'a>,
    scratch: SearchScratch,
}

impl QueryEngine for IvpDfs<'_> {
    fn answer(&mut self, q: &Query) -> Result<bool, HarnessError> {
        let ex = self.sg.exploded();
        Ok(view(&self.sg, ViewTag::Ivp).reach_with(&mut self.scratch, ex.id(q.u1, q.d1), ex.id(q.u2, q.d2)))
    }
}

struct Exhaustive<'a>(&'a Arena, &'a ExplodedSupergraph);

impl QueryEngine for Exhaustive<'_> {
    fn answer(&mut self, q: &Query) -> Result<bool, HarnessError> {
        Ok(exhaustive_tabulate(self.0, self.1, &[self.1.id(q.u1, q.d1)]).contains(self.1.id(q.u2, q.d2)))
    }
}

struct Demand<'a>(DemandSolver<'a>);

impl QueryEngine for Demand<'_> {
    fn answer(&mut self, q: &Query) -> Result<bool, HarnessError> {
        Ok(self.0.query(q.u1, q.d1, q.u2, q.d2))
    }
}

struct Dyck<'a>(DyckOracle<'a>, &'a ExplodedSupergraph);

impl QueryEngine for Dyck<'_> {
    fn answer(&mut self, q: &Query) -> Result<bool, HarnessError> {
        Ok(self.0.reach(self.1.id(q.u1, q.d1), self.1.id(q.u2, q.d2), DyckMode::Ivp)?)
    }
}

type Build<'a> = Box<dyn Fn() -> Box<dyn QueryEngine + 'a> + 'a>;

/// A named engine constructor; construction time counts as preprocessing.
pub struct EngineSetup<'a> {
    pub name: String,
    pub build: Build<'a>,
}

pub fn engine_setup<'a>(kind: EngineKind, arena: &'a Arena, ex: &'a ExplodedSupergraph) -> EngineSetup<'a> {
    let build: Build<'a> = match kind {
        EngineKind::Param => Box::new(move || Box::new(Param(preprocess(arena)))),
        EngineKind::IvpDfs => Box::new(move || Box::new(IvpDfs { sg: compute_summaries(arena, ex), scratch: SearchScratch::default() })),
        EngineKind::Exhaustive => Box::new(move || Box::new(Exhaustive(arena, ex))),
        EngineKind::Demand => Box::new(move || Box::new(Demand(DemandSolver::new(arena, ex)))),
        EngineKind::Dyck => Box::new(move || Box::new(Dyck(DyckOracle::new(arena, ex), ex))),
    };
    EngineSetup { name: kind.name().to_string(), build }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRecord {
    pub engine: String,
    pub arena: String,
    pub exploded_edges: usize,
    pub preprocess_s: f64,
    pub mean_query_us: f64,
    pub queries: usize,
}

const RUNS: usize = 3;

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort();
    xs[xs.len() / 2]
}

/// Checks that all engines agree on every query, then times each one: the
/// checking pass doubles as warm-up and the median of three runs is reported.
pub fn bench_engines(arena_name: &str, exploded_edges: usize, workload: &[Query], setups: &[EngineSetup]) -> Result<Vec<BenchRecord>, HarnessError> {
    let mut reference: Option<(&str, Vec<bool>)> = None;
    for s in setups {
        let mut e = (s.build)();
        let answers = workload.iter().map(|q| e.answer(q)).collect::<Result<Vec<_>, _>>()?;
        match &reference {
            None => reference = Some((&s.name, answers)),
            Some((name, expected)) => {
                if let Some(i) = (0..workload.len()).find(|&i| expected[i] != answers[i]) {
                    return Err(HarnessError::EngineDisagreement {
                        engine: s.name.clone(),
                        reference: name.to_string(),
                        index: i,
                        query: workload[i],
                        expected: expected[i],
                        got: answers[i],
                    });
                }
            }
        }
    }
    let mut records = Vec::with_capacity(setups.len());
    for s in setups {
        let mut prep = Vec::with_capacity(RUNS);
        let mut run = Vec::with_capacity(RUNS);
        for _ in 0..RUNS {
            let t = Instant::now();
            let mut e = (s.build)();
            prep.push(t.elapsed());
            let t = Instant::now();
            for q in workload {
                std::hint::black_box(e.answer(q)?);
            }
            run.push(t.elapsed());
        }
        let total = median(run);
        records.push(BenchRecord {
            engine: s.name.clone(),
            arena: arena_name.to_string(),
            exploded_edges,
            preprocess_s: median(prep).as_secs_f64(),
            mean_query_us: if workload.is_empty() { 0.0 } else { total.as_secs_f64() * 1e6 / workload.len() as f64 },
            queries: workload.len(),
        });
    }
    Ok(records)
}

pub fn bench(arena_name: &str, arena: &Arena, workload: &[Query], engines: &[EngineKind]) -> Result<Vec<BenchRecord>, HarnessError> {
    let ex = ExplodedSupergraph::build(arena);
    let setups: Vec<EngineSetup> = engines.iter().map(|&k| engine_setup(k, arena, &ex)).collect();
    bench_engines(arena_name, ex.edge_count(), workload, &setups)
}

/// CSV with header `engine,arena,exploded_edges,preprocess_s,mean_query_us,queries`.
pub fn write_csv(records: &[BenchRecord], out: impl Write) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(["engine", "arena", "exploded_edges", "preprocess_s", "mean_query_us", "queries"])?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
