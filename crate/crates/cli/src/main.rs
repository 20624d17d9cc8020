//! `ifds` command-line front end.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ifds_core::arena::{load_arena, Arena};
use ifds_core::engine::{load_index, load_index_for, preprocess, save_index, EngineError, QueryIndex, Witness};
use ifds_core::harness::{bench, gen_workload, generate_document, stats, write_csv, EngineKind, GenSpec, HarnessError, Template};

const EXIT_VALIDATION: u8 = 1;
const EXIT_DISAGREEMENT: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "ifds", version, about = "Parameterized IFDS reachability queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate an arena.
    Validate { arena: PathBuf },
    /// Per-function width and balanced height, plus call-graph depth.
    Stats {
        arena: PathBuf,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Generate a synthetic arena.
    Gen(GenArgs),
    /// Build a query index.
    Preprocess {
        arena: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Ask whether `--to` is reachable from `--from`.
    Query {
        index: PathBuf,
        /// Source as VERTEX:FACT (names or numeric ids).
        #[arg(long)]
        from: String,
        /// Target as VERTEX:FACT.
        #[arg(long)]
        to: String,
        /// Restrict to same-context paths.
        #[arg(long)]
        same_context: bool,
        /// Print the path segments behind a positive answer.
        #[arg(long)]
        witness: bool,
        /// Reject the index unless it was built from this arena.
        #[arg(long)]
        arena: Option<PathBuf>,
    },
    /// Cross-check engines on a random workload, then time them.
    Bench {
        arena: PathBuf,
        #[arg(long)]
        queries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated: param, ivp-dfs, exhaustive, demand, dyck.
        #[arg(long, default_value = "param,ivp-dfs")]
        engines: String,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 8)]
    functions: usize,
    #[arg(long, default_value_t = 8)]
    lines_min: usize,
    #[arg(long, default_value_t = 24)]
    lines_max: usize,
    #[arg(long, default_value_t = 3)]
    width: usize,
    #[arg(long, default_value_t = 6)]
    depth: usize,
    #[arg(long, default_value_t = 2)]
    facts: usize,
    #[arg(long, default_value_t = 2)]
    calls: usize,
    #[arg(long, default_value = "reach")]
    template: Template,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    bandwidth: usize,
    #[arg(short, long)]
    output: PathBuf,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure { code: EXIT_VALIDATION, message: message.into() }
    }

    fn io(path: &Path, e: io::Error) -> Self {
        Failure { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let code = if matches!(e, EngineError::Io(_)) { EXIT_IO } else { EXIT_VALIDATION };
        Failure { code, message: e.to_string() }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        let code = match &e {
            HarnessError::EngineDisagreement { .. } => EXIT_DISAGREEMENT,
            HarnessError::Io(_) | HarnessError::Csv(_) | HarnessError::Engine(EngineError::Io(_)) => EXIT_IO,
            _ => EXIT_VALIDATION,
        };
        Failure { code, message: e.to_string() }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_VALIDATION) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Validate { arena } => {
            let a = read_arena(&arena)?;
            println!(
                "ok: {} functions, {} vertices, {} edges, {} facts, {} call sites",
                a.functions().len(),
                a.num_vertices(),
                a.edges().len(),
                a.domain().len(),
                a.call_sites().len()
            );
            Ok(())
        }
        Command::Stats { arena, csv } => {
            let s = stats(&read_arena(&arena)?);
            let name_width = s.functions.iter().map(|f| f.function.len()).chain([8]).max().unwrap_or(8);
            let mut out = io::stdout().lock();
            let table = (|| -> io::Result<()> {
                writeln!(out, "{:<name_width$}  {:>5}  {:>6}", "function", "width", "height")?;
                for f in &s.functions {
                    writeln!(out, "{:<name_width$}  {:>5}  {:>6}", f.function, f.width, f.height)?;
                }
                writeln!(out, "call-graph depth: {}", s.callgraph_depth)
            })();
            table.map_err(|e| Failure { code: EXIT_IO, message: e.to_string() })?;
            if let Some(path) = csv {
                s.write_csv(create(&path)?)?;
            }
            Ok(())
        }
        Command::Gen(g) => {
            let spec = GenSpec {
                functions: g.functions,
                lines_min: g.lines_min,
                lines_max: g.lines_max,
                width: g.width,
                depth: g.depth,
                facts: g.facts,
                calls: g.calls,
                template: g.template,
                seed: g.seed,
                bandwidth: g.bandwidth,
            };
            let doc = generate_document(&spec)?;
            let mut out = create(&g.output)?;
            serde_json::to_writer(&mut out, &doc).map_err(|e| Failure { code: EXIT_IO, message: e.to_string() })?;
            out.flush().map_err(|e| Failure::io(&g.output, e))
        }
        Command::Preprocess { arena, output } => {
            let idx = preprocess(&read_arena(&arena)?);
            let mut out = create(&output)?;
            save_index(&idx, &mut out)?;
            out.flush().map_err(|e| Failure::io(&output, e))
        }
        Command::Query { index, from, to, same_context, witness, arena } => {
            let mut input = BufReader::new(File::open(&index).map_err(|e| Failure::io(&index, e))?);
            let idx = match arena {
                Some(path) => load_index_for(&mut input, &read_arena(&path)?)?,
                None => load_index(&mut input)?,
            };
            let (u1, d1) = parse_point(idx.arena(), &from)?;
            let (u2, d2) = parse_point(idx.arena(), &to)?;
            if same_context {
                println!("{}", idx.same_context_query(u1, d1, u2, d2)?);
                return Ok(());
            }
            let result = idx.query_with_witness(u1, d1, u2, d2)?;
            println!("{}", result.verdict);
            if let (true, Some(w)) = (witness, &result.witness) {
                print_witness(&idx, (u1, d1), (u2, d2), w);
            }
            Ok(())
        }
        Command::Bench { arena, queries, seed, engines, csv } => {
            let a = read_arena(&arena)?;
            let kinds = engines.split(',').map(|s| s.trim().parse::<EngineKind>()).collect::<Result<Vec<_>, _>>()?;
            let workload = gen_workload(&a, queries, seed)?;
            let name = arena.file_stem().map_or_else(|| arena.display().to_string(), |s| s.to_string_lossy().into_owned());
            let records = bench(&name, &a, &workload, &kinds)?;
            write_csv(&records, io::stdout().lock())?;
            if let Some(path) = csv {
                write_csv(&records, create(&path)?)?;
            }
            Ok(())
        }
    }
}

fn read_arena(path: &Path) -> Result<Arena, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    load_arena(&text).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure::io(path, e))
}

/// `VERTEX:FACT`, split at the last colon; each part is a name or a numeric id.
fn parse_point(a: &Arena, token: &str) -> Result<(usize, usize), Failure> {
    let (v, d) = token.rsplit_once(':').ok_or_else(|| Failure::validation(format!("expected VERTEX:FACT, got {token:?}")))?;
    let vertex = a
        .vertex_named(v)
        .or_else(|| v.parse::<usize>().ok().filter(|&i| i < a.num_vertices()))
        .ok_or_else(|| Failure::validation(format!("unknown vertex {v:?}")))?;
    let fact = a.domain().resolve(d).ok_or_else(|| Failure::validation(format!("unknown fact {d:?}")))?;
    Ok((vertex, fact))
}

fn print_witness(idx: &QueryIndex, from: (usize, usize), to: (usize, usize), w: &Witness) {
    let a = idx.arena();
    let entry = |(f, d): (usize, usize)| a.label(a.function(f).start, d);
    match w {
        Witness::SameContext => println!("same-context {} -> {}", a.label(from.0, from.1), a.label(to.0, to.1)),
        Witness::Interprocedural { call, entry: e, hops, final_fact } => {
            println!("same-context {} -> {}", a.label(from.0, from.1), a.label(call.0, call.1));
            println!("enter {}", entry(*e));
            for (x, y) in hops {
                println!("hop {} -> {}", entry(*x), entry(*y));
            }
            let last = hops.last().map_or(*e, |h| h.1);
            println!("same-context {} -> {}", entry((last.0, *final_fact)), a.label(to.0, to.1));
        }
    }
}
