//! One test per acceptance criterion; each prints a single PASS/FAIL line.
//! Tests run one at a time under a shared lock.

mod common;

use std::io::Write;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::{Duration, Instant};

use ifds_core::arena::{load_arena, Arena, CallGraph, ExplodedSupergraph};
use ifds_core::baselines::{DyckMode, DyckOracle};
use ifds_core::decomp::{balance, compute_pot, decompose_cfg, verify_decomposition, verify_pot, UGraph};
use ifds_core::engine::{load_index, load_index_for, preprocess, save_index, EngineError, QueryIndex};
use ifds_core::harness::random::{random_arena, RandomArenaSpec};
use ifds_core::harness::{gen_workload, generate, GenSpec, Query, Template};
use ifds_core::samectx::cfg_graph;
use ifds_core::summaries::{compute_summaries, view, SearchScratch, ViewTag};

use common::{sweep, SweepStats};

const ARENA_A: &str = include_str!("../fixtures/arena_a.json");

fn serial() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

/// Prints the verdict line outside the test harness's capture, then asserts.
fn report(name: &str, ok: bool, detail: String) {
    let line = format!("[acceptance] {} {name}: {detail}\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stdout().write_all(line.as_bytes());
    assert!(ok, "{name}: {detail}");
}

struct Corpus {
    stats: SweepStats,
    certified: usize,
    skipped: usize,
    elapsed: Duration,
}

const CORPUS_TARGET: usize = 500;
const CORPUS_MAX_SEEDS: u64 = 2_000;

fn corpus() -> &'static Corpus {
    static CORPUS: OnceLock<Corpus> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let t = Instant::now();
        let spec = RandomArenaSpec::acceptance();
        let (mut stats, mut certified, mut skipped) = (SweepStats::default(), 0, 0);
        for seed in 0..CORPUS_MAX_SEEDS {
            if certified == CORPUS_TARGET {
                break;
            }
            let a = random_arena(&spec, seed);
            assert!(a.functions().len() <= 6 && a.domain().len() <= 3);
            assert!(a.functions().iter().all(|f| f.len <= 12));
            match sweep(&a) {
                Ok(s) => {
                    stats.add(s);
                    certified += 1;
                }
                Err(_) => skipped += 1,
            }
        }
        Corpus { stats, certified, skipped, elapsed: t.elapsed() }
    })
}

#[test]
fn oracle_equivalence() {
    let _g = serial();
    let c = corpus();
    let ok = c.certified >= CORPUS_TARGET && c.stats.ivp_mismatches == 0 && c.elapsed < Duration::from_secs(300);
    report(
        "oracle equivalence",
        ok,
        format!(
            "{} arenas ({} skipped: oracle budget), {} tuples, {} reachable, {} mismatches, {:.1?}",
            c.certified, c.skipped, c.stats.tuples, c.stats.true_ivp, c.stats.ivp_mismatches, c.elapsed
        ),
    );
}

#[test]
fn same_context_equivalence() {
    let _g = serial();
    let c = corpus();
    let ok = c.certified >= CORPUS_TARGET && c.stats.scvp_mismatches == 0;
    report(
        "same-context equivalence",
        ok,
        format!("{} arenas, {} tuples, {} reachable, {} mismatches", c.certified, c.stats.tuples, c.stats.true_scvp, c.stats.scvp_mismatches),
    );
}

#[test]
fn summary_correctness() {
    let _g = serial();
    let c = corpus();
    let ok = c.certified >= CORPUS_TARGET && c.stats.chi_checked > 0 && c.stats.chi_mismatches == 0;
    report("summary correctness", ok, format!("{} (f,d1,d2) triples, {} mismatches", c.stats.chi_checked, c.stats.chi_mismatches));
}

fn ceil_log2(x: usize) -> usize {
    let mut k = 0;
    while (1usize << k) < x {
        k += 1;
    }
    k
}

#[test]
fn decomposition_contracts() {
    let _g = serial();
    let mut failures: Vec<String> = Vec::new();
    let mut cfgs = 0;
    let mut max_width = 0;
    'outer: for seed in 0.. {
        let width = 1 + (seed as usize % 6);
        let spec = GenSpec { functions: 10, lines_min: 4, lines_max: 60, width, depth: 6, facts: 1, calls: 2, seed, ..GenSpec::default() };
        let a = generate(&spec).expect("feasible spec");
        for f in 0..a.functions().len() {
            if cfgs == 1000 {
                break 'outer;
            }
            cfgs += 1;
            let g = cfg_graph(&a, f);
            let td = decompose_cfg(&g);
            max_width = max_width.max(td.width());
            if td.width() > width {
                failures.push(format!("seed {seed} fn {f}: width {} above cap {width}", td.width()));
            }
            if let Err(e) = verify_decomposition(&g, &td) {
                failures.push(format!("seed {seed} fn {f}: {e:?}"));
            }
            let bal = balance(&td);
            if let Err(e) = verify_decomposition(&g, &bal.td) {
                failures.push(format!("seed {seed} fn {f}: balanced {e:?}"));
            }
            let height_cap = 4 * ceil_log2(td.len() + 1) + 4;
            let width_cap = 3 * (td.width() + 1) - 1;
            if bal.td.height() > height_cap || bal.td.width() > width_cap {
                failures.push(format!("seed {seed} fn {f}: height {} (cap {height_cap}), width {} (cap {width_cap})", bal.td.height(), bal.td.width()));
            }
        }
    }
    let mut graphs = 0;
    for seed in 0..200u64 {
        let depth = 2 + (seed as usize % 7);
        let spec = GenSpec { functions: 6 + (seed as usize % 40), lines_min: 8, lines_max: 20, depth, calls: 3, seed: 10_000 + seed, ..GenSpec::default() };
        let a = generate(&spec).expect("feasible spec");
        let cg = CallGraph::build(&a);
        let g = UGraph::from_edges(cg.function_count(), cg.undirected_pairs());
        let pot = compute_pot(&g);
        graphs += 1;
        if let Err(e) = verify_pot(&g, &pot) {
            failures.push(format!("call graph {seed}: {e:?}"));
        }
        if pot.depth() > depth {
            failures.push(format!("call graph {seed}: depth {} above cap {depth}", pot.depth()));
        }
    }
    for n in 2..=8 {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j));
            }
        }
        let g = UGraph::from_edges(n, edges);
        let pot = compute_pot(&g);
        if verify_pot(&g, &pot).is_err() || pot.depth() != n {
            failures.push(format!("K_{n}: depth {}", pot.depth()));
        }
    }
    report(
        "decomposition contracts",
        failures.is_empty(),
        format!(
            "{cfgs} CFGs (max width {max_width}), {graphs} call graphs, K_2..K_8; {} violations {:?}",
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>()
        ),
    );
}

fn median<T: PartialOrd + Copy>(mut xs: Vec<T>) -> T {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs[xs.len() / 2]
}

const ROUNDS: usize = 7;

struct ScalePoint {
    arena: Arena,
    index: QueryIndex,
    workload: Vec<Query>,
}

impl ScalePoint {
    fn new(n: usize) -> Self {
        let spec = GenSpec {
            functions: n / 150,
            lines_min: 100,
            lines_max: 200,
            width: 10,
            depth: 20,
            facts: 4,
            calls: 6,
            template: Template::Reach,
            seed: 1,
            bandwidth: 4,
        };
        let arena = generate(&spec).expect("feasible spec");
        let index = preprocess(&arena);
        let workload = gen_workload(&arena, arena.num_vertices(), 5).unwrap();
        ScalePoint { arena, index, workload }
    }

    fn preprocess_s(&self) -> f64 {
        let t = Instant::now();
        std::hint::black_box(preprocess(&self.arena));
        t.elapsed().as_secs_f64()
    }

    /// Mean over the workload, repeated until the sample spans at least 50 ms.
    fn query_us(&self) -> f64 {
        let t = Instant::now();
        let mut answered = 0;
        while answered == 0 || t.elapsed() < Duration::from_millis(50) {
            for q in &self.workload {
                std::hint::black_box(self.index.query(q.u1, q.d1, q.u2, q.d2).unwrap());
            }
            answered += self.workload.len();
        }
        t.elapsed().as_secs_f64() * 1e6 / answered as f64
    }

    fn ivp_search_us(&self) -> f64 {
        let ex = ExplodedSupergraph::build(&self.arena);
        let sg = compute_summaries(&self.arena, &ex);
        let ivp = view(&sg, ViewTag::Ivp);
        let mut scratch = SearchScratch::default();
        let t = Instant::now();
        for q in &self.workload {
            std::hint::black_box(ivp.reach_with(&mut scratch, ex.id(q.u1, q.d1), ex.id(q.u2, q.d2)));
        }
        t.elapsed().as_secs_f64() * 1e6 / self.workload.len() as f64
    }
}

#[test]
fn scaling() {
    let _g = serial();
    let small = ScalePoint::new(10_000);
    let large = ScalePoint::new(100_000);
    // Sizes alternate within each round; ratios are taken per round.
    let (mut prep, mut query) = (Vec::new(), Vec::new());
    let (mut prep_ratio, mut query_ratio) = (Vec::new(), Vec::new());
    small.query_us();
    large.query_us();
    for _ in 0..ROUNDS {
        let p = (small.preprocess_s(), large.preprocess_s());
        let q = (small.query_us(), large.query_us());
        prep_ratio.push(p.1 / p.0);
        query_ratio.push(q.1 / q.0);
        prep.push(p);
        query.push(q);
    }
    let (prep_ratio, query_ratio) = (median(prep_ratio), median(query_ratio));
    let large_query = median(query.iter().map(|q| q.1).collect());
    let dfs = large.ivp_search_us();
    let speedup = dfs / large_query;
    let depth = large.index.pot().depth();
    let ok = prep_ratio <= 15.0 && query_ratio <= 2.0 && speedup >= 10.0 && depth <= 20;
    report(
        "scaling",
        ok,
        format!(
            "n={}/{} (call-graph depth {}/{}): preprocess {:.3}s/{:.3}s, median ratio {prep_ratio:.1} (cap 15); query {:.3}us/{:.3}us, median ratio {query_ratio:.2} (cap 2); ivp search {dfs:.2}us at the larger size, speedup {speedup:.1} (need 10)",
            small.arena.num_vertices(),
            large.arena.num_vertices(),
            small.index.pot().depth(),
            depth,
            median(prep.iter().map(|p| p.0).collect()),
            median(prep.iter().map(|p| p.1).collect()),
            median(query.iter().map(|q| q.0).collect()),
            large_query,
        ),
    );
}

fn round_trip(idx: &QueryIndex) -> Result<QueryIndex, EngineError> {
    let mut bytes = Vec::new();
    save_index(idx, &mut bytes)?;
    load_index(&mut bytes.as_slice())
}

#[test]
fn index_persistence() {
    let _g = serial();
    let mut checks = 0;
    let mut failures = Vec::new();
    let mut arenas = vec![load_arena(ARENA_A).unwrap()];
    arenas.extend((0..20).map(|s| random_arena(&RandomArenaSpec::acceptance(), 50_000 + s)));
    arenas.push(generate(&GenSpec { functions: 30, seed: 4, ..GenSpec::default() }).unwrap());
    for (i, a) in arenas.iter().enumerate() {
        let idx = preprocess(a);
        let mut bytes = Vec::new();
        save_index(&idx, &mut bytes).unwrap();
        checks += 1;
        match round_trip(&idx) {
            Ok(back) if back == idx => {}
            other => failures.push(format!("arena {i}: round trip {:?}", other.err())),
        }
        checks += 1;
        if !load_index_for(&mut bytes.as_slice(), a).is_ok_and(|b| b == idx) {
            failures.push(format!("arena {i}: rejected by its own arena"));
        }
        checks += 1;
        let other = &arenas[(i + 1) % arenas.len()];
        if other.fingerprint() != a.fingerprint() && !matches!(load_index_for(&mut bytes.as_slice(), other), Err(EngineError::FingerprintMismatch)) {
            failures.push(format!("arena {i}: accepted for a different arena"));
        }
        for pos in [0, 9, 12, bytes.len() / 2, bytes.len() - 1] {
            checks += 1;
            let mut bad = bytes.clone();
            bad[pos] ^= 0x10;
            if load_index(&mut bad.as_slice()).is_ok() {
                failures.push(format!("arena {i}: flipped byte {pos} accepted"));
            }
        }
        checks += 1;
        if load_index(&mut &bytes[..bytes.len() - 1]).is_ok() {
            failures.push(format!("arena {i}: truncation accepted"));
        }
    }
    report("index persistence", failures.is_empty(), format!("{} arenas, {checks} checks, failures {failures:?}", arenas.len()));
}

#[test]
fn arena_a_golden() {
    let _g = serial();
    let a = load_arena(ARENA_A).unwrap();
    let ex = ExplodedSupergraph::build(&a);
    let oracle = DyckOracle::new(&a, &ex);
    let v = |name: &str| a.vertex_named(name).unwrap();
    let (main, g) = (a.function_named("main").unwrap(), a.function_named("g").unwrap());
    let fact_a = a.domain().resolve("a").unwrap();
    let scvp = |x: (usize, usize), y: (usize, usize)| oracle.reach(ex.id(x.0, x.1), ex.id(y.0, y.1), DyckMode::Scvp).unwrap();
    let ivp = |x: (usize, usize), y: (usize, usize)| oracle.reach(ex.id(x.0, x.1), ex.id(y.0, y.1), DyckMode::Ivp).unwrap();
    let mut problems = Vec::new();

    // Oracle first: the expected values must hold on the Dyck side before the engine is consulted.
    let chi_oracle: Vec<(usize, usize)> =
        (0..2).flat_map(|d1| (0..2).map(move |d2| (d1, d2))).filter(|&(d1, d2)| scvp((v("s_g"), d1), (v("e_g"), d2))).collect();
    let mut cbar_oracle = Vec::new();
    for d1 in 0..2 {
        for site in a.call_sites().iter().filter(|s| a.fg(s.call) == main) {
            for d3 in 0..2 {
                if scvp((a.function(main).start, d1), (site.call, d3)) {
                    cbar_oracle.extend(site.call_rel.image(d3).map(|d4| ((main, d1), (site.callee, d4))));
                }
            }
        }
    }
    cbar_oracle.sort();
    cbar_oracle.dedup();
    let expected_chi = vec![(0, 0), (0, fact_a)];
    let expected_cbar = vec![((main, 0), (g, 0)), ((main, fact_a), (g, fact_a))];
    if chi_oracle != expected_chi {
        problems.push(format!("oracle chi(g) = {chi_oracle:?}"));
    }
    if cbar_oracle != expected_cbar {
        problems.push(format!("oracle C-bar = {cbar_oracle:?}"));
    }
    let (sm, em, eg) = (v("s_m"), v("e_m"), v("e_g"));
    let oracle_q = [ivp((sm, 0), (eg, fact_a)), ivp((sm, fact_a), (em, fact_a)), scvp((sm, 0), (eg, fact_a))];
    if oracle_q != [true, false, false] {
        problems.push(format!("oracle queries {oracle_q:?}"));
    }

    let sg = compute_summaries(&a, &ex);
    let idx = preprocess(&a);
    if sg.chi(g) != expected_chi {
        problems.push(format!("engine chi(g) = {:?}", sg.chi(g)));
    }
    let cg = idx.exploded_call_graph();
    let mut cbar: Vec<_> = cg.edges().into_iter().map(|(x, y)| (cg.split(x), cg.split(y))).collect();
    cbar.sort();
    if cbar != expected_cbar {
        problems.push(format!("engine C-bar = {cbar:?}"));
    }
    let engine_q = [idx.query(sm, 0, eg, fact_a).unwrap(), idx.query(sm, fact_a, em, fact_a).unwrap(), idx.same_context_query(sm, 0, eg, fact_a).unwrap()];
    if engine_q != [true, false, false] {
        problems.push(format!("engine queries {engine_q:?}"));
    }
    report(
        "ARENA-A golden values",
        problems.is_empty(),
        format!("chi(g)={expected_chi:?}, C-bar={expected_cbar:?}, Q/Q/SCQ={oracle_q:?}; problems {problems:?}"),
    );
}
