//! The `thc` command-line tool.

pub mod bench;
pub mod cache;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use thc_core::counting::{count_all, CountOptions, CountReport, KSelection};
use thc_core::io::{self, load_graph, load_matrix, load_tile, load_tile_unchecked};
use thc_core::oracle::DEFAULT_VERTEX_CAP;
use thc_core::{cyclize, Error, MatrixMemo, MatrixProvider, ProductMode, TiledGraph};

use crate::bench::{run_bench, BenchTable};
use crate::cache::MatrixCache;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INCOMPATIBLE: i32 = 3;
pub const EXIT_INDIVISIBLE: i32 = 4;
pub const EXIT_ORACLE_MISMATCH: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "thc", version, about = "Count k-traversing Hamiltonian cycles of tiled graphs")]
pub struct Cli {
    /// Worker threads for matrix construction and multiplication.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check tile and graph files.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Count k-traversing Hamiltonian cycles of a graph file.
    Count(CountArgs),
    /// Build a tile's transfer matrix and write it as a matrix file.
    Matrix {
        tile: PathBuf,
        #[arg(long)]
        k: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        cache: CacheArgs,
    },
    /// Load a matrix file, check it and print its shape and entries.
    Inspect { matrix: PathBuf },
    /// Time sequence products on uniform sequences of one tile.
    Bench {
        tile: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_delimiter = ',', default_value = "1000,2000,4000")]
        lengths: Vec<usize>,
        #[arg(long, default_value_t = ProductMode::Linear, value_parser = parse_mode)]
        mode: ProductMode,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        cache: CacheArgs,
    },
    /// Side-by-side shift formula, cycle-complete formula and oracle for every k.
    Compare {
        graph: PathBuf,
        #[arg(long, default_value_t = DEFAULT_VERTEX_CAP)]
        oracle_cap: usize,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        cache: CacheArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Paper,
    CycleComplete,
    Both,
}

#[derive(Debug, Args)]
pub struct CacheArgs {
    /// Matrix cache directory.
    #[arg(long, env = "THC_CACHE_DIR")]
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    pub graph: PathBuf,
    /// `all` or a single k.
    #[arg(long, default_value = "all", value_parser = parse_k)]
    pub k: KSelection,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    pub method: Method,
    #[arg(long, default_value_t = ProductMode::Linear, value_parser = parse_mode)]
    pub mode: ProductMode,
    /// Also enumerate Hamiltonian cycles for ground truth.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = DEFAULT_VERTEX_CAP)]
    pub oracle_cap: usize,
    /// Print the `thc-report/1` JSON document instead of a table.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub cache: CacheArgs,
}

fn parse_k(s: &str) -> Result<KSelection, String> {
    if s == "all" {
        return Ok(KSelection::All);
    }
    match s.parse::<usize>() {
        Ok(k) if k >= 1 => Ok(KSelection::One(k)),
        _ => Err(format!("expected `all` or a positive integer, got `{s}`")),
    }
}

fn parse_mode(s: &str) -> Result<ProductMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::IncompatibleTiles { .. } | Error::NotCyclicallyCompatible { .. } => EXIT_INCOMPATIBLE,
        _ => EXIT_INVALID,
    }
}

fn failure_code(err: &anyhow::Error) -> i32 {
    err.chain().find_map(|e| e.downcast_ref::<Error>()).map(exit_code).unwrap_or(EXIT_INVALID)
}

/// Parse `args` (program name first) and run; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    if let Some(n) = cli.threads {
        // the global pool can be set once per process; later calls keep it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            failure_code(&e)
        }
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    match command {
        Command::Validate { paths } => validate(&paths, out, err),
        Command::Count(args) => count(&args, out),
        Command::Matrix { tile, k, out: file, cache } => matrix(&tile, k, file.as_deref(), &cache, out),
        Command::Inspect { matrix } => inspect(&matrix, out),
        Command::Bench { tile, k, lengths, mode, repeats, json, cache } => {
            let tile = load_tile(&tile)?;
            let provider = provider(&cache)?;
            let table = run_bench(&tile, k, &lengths, mode, repeats, provider.as_ref())?;
            if json {
                writeln!(out, "{}", serde_json::to_string_pretty(&bench_json(&table))?)?;
            } else {
                write_bench_table(&table, out)?;
            }
            Ok(EXIT_OK)
        }
        Command::Compare { graph, oracle_cap, json, cache } => compare(&graph, oracle_cap, json, &cache, out),
    }
}

fn provider(args: &CacheArgs) -> anyhow::Result<Box<dyn MatrixProvider>> {
    Ok(match &args.cache {
        Some(dir) => Box::new(MatrixCache::open(dir)?),
        None => Box::new(MatrixMemo::new()),
    })
}

fn is_graph_file(path: &Path) -> anyhow::Result<bool> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|source| Error::Json { path: path.to_path_buf(), source })?;
    Ok(value.get("tile_files").is_some())
}

fn validate(paths: &[PathBuf], out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let mut worst = EXIT_OK;
    for path in paths {
        let result = if is_graph_file(path)? {
            load_graph(path).and_then(|g| g.sequence()).and_then(|seq| cyclize(&seq)).map(|g| {
                format!(
                    "{}: ok, {} tiles, {} vertices, {} edges, min_ws {}",
                    path.display(),
                    g.tile_count(),
                    g.vertex_count(),
                    g.edges().len(),
                    g.min_ws()
                )
            })
        } else {
            load_tile_unchecked(path).and_then(|t| {
                t.check()?;
                Ok(format!(
                    "{}: ok, tile {} with {} vertices, walls ({}, {})",
                    path.display(),
                    t.name,
                    t.vertex_count,
                    t.left_size(),
                    t.right_size()
                ))
            })
        };
        match result {
            Ok(line) => writeln!(out, "{line}")?,
            Err(e) => {
                match &e {
                    Error::InvalidTile { name, violations } => {
                        writeln!(err, "{}: tile {name} is invalid", path.display())?;
                        for v in violations {
                            writeln!(err, "  - {v}")?;
                        }
                    }
                    other => writeln!(err, "{}: {other}", path.display())?,
                }
                worst = worst.max(exit_code(&e));
            }
        }
    }
    Ok(worst)
}

fn load_tiled(path: &Path) -> anyhow::Result<(String, TiledGraph)> {
    let loaded = load_graph(path)?;
    let graph = cyclize(&loaded.sequence()?)?;
    Ok((loaded.id(), graph))
}

fn count_exit(report: &CountReport) -> i32 {
    if report.has_oracle_mismatch() {
        EXIT_ORACLE_MISMATCH
    } else if report.has_indivisible_paper_value() {
        EXIT_INDIVISIBLE
    } else {
        EXIT_OK
    }
}

/// Run a count and render it; returns the report and its JSON form.
pub fn count_report(args: &CountArgs) -> anyhow::Result<(CountReport, Value)> {
    let (id, graph) = load_tiled(&args.graph)?;
    let options = CountOptions {
        ks: args.k,
        paper: args.method != Method::CycleComplete,
        cycle_complete: args.method != Method::Paper,
        oracle: args.oracle,
        mode: args.mode,
        oracle_cap: args.oracle_cap,
    };
    let (report, cache_stats) = match &args.cache.cache {
        Some(dir) => {
            let cache = MatrixCache::open(dir)?;
            let report = count_all(&graph, &id, &options, &cache)?;
            (report, Some(cache.stats()))
        }
        None => (count_all(&graph, &id, &options, &MatrixMemo::new())?, None),
    };
    let mut doc = io::report_json(&report);
    if let Some(s) = cache_stats {
        doc["cache"] = json!({ "hits": s.hits, "misses": s.misses });
    }
    Ok((report, doc))
}

fn count(args: &CountArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let (report, doc) = count_report(args)?;
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    } else {
        write_count_table(&report, out)?;
    }
    Ok(count_exit(&report))
}

pub fn write_count_table(report: &CountReport, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(
        out,
        "graph {}: {} tiles, {} vertices, {} edges, min_ws {}, mode {}",
        report.graph, report.tiles, report.vertices, report.edges, report.min_ws, report.mode
    )?;
    for r in &report.records {
        let mut line = format!("k={}", r.k);
        if let Some(p) = &r.paper {
            line += &format!(" paper={p}");
            if !p.divisible {
                line += " (not divisible)";
            }
        }
        if let Some(c) = &r.cycle_complete {
            line += &format!(" cycle_complete={c}");
        }
        if let Some(o) = &r.oracle {
            line += &format!(" oracle={o}");
        }
        writeln!(out, "{line}")?;
    }
    if let Some(o) = &report.oracle {
        writeln!(
            out,
            "oracle: total={} traversing={} other={} lemma_violations={}",
            o.total,
            o.traversing_total(),
            o.other,
            o.lemma_violations
        )?;
    }
    Ok(())
}

fn matrix(
    tile: &Path,
    k: usize,
    file: Option<&Path>,
    cache: &CacheArgs,
    out: &mut dyn Write,
) -> anyhow::Result<i32> {
    let tile = load_tile(tile)?;
    let m = provider(cache)?.matrix(&tile, k)?;
    let text = io::matrix_to_string(&m, &tile.canonical_hash());
    match file {
        Some(path) => {
            std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            writeln!(out, "{}: {}x{} matrix for {} at k={k}", path.display(), m.rows(), m.cols(), tile.name)?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn inspect(path: &Path, out: &mut dyn Write) -> anyhow::Result<i32> {
    let (hash, m) = load_matrix(path)?;
    writeln!(
        out,
        "tile {hash}\nk={} walls ({}, {}) shape {}x{}",
        m.k(),
        m.left_wall(),
        m.right_wall(),
        m.rows(),
        m.cols()
    )?;
    for row in m.to_rows() {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        writeln!(out, "{}", cells.join(" "))?;
    }
    Ok(EXIT_OK)
}

pub fn bench_json(table: &BenchTable) -> Value {
    json!({
        "tile": table.tile,
        "k": table.k,
        "mode": table.mode.to_string(),
        "repeats": table.repeats,
        "rows": table.rows.iter().map(|r| json!({
            "length": r.length,
            "median_ms": r.median.as_secs_f64() * 1e3,
            "samples_ms": r.samples.iter().map(|d| d.as_secs_f64() * 1e3).collect::<Vec<_>>(),
            "ratio": r.ratio,
        })).collect::<Vec<_>>(),
    })
}

fn write_bench_table(table: &BenchTable, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "tile {} k={} mode={} repeats={}", table.tile, table.k, table.mode, table.repeats)?;
    writeln!(out, "{:>10} {:>14} {:>8}", "length", "median_ms", "ratio")?;
    for r in &table.rows {
        let ratio = r.ratio.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
        writeln!(out, "{:>10} {:>14.3} {:>8}", r.length, r.median.as_secs_f64() * 1e3, ratio)?;
    }
    Ok(())
}

/// Comparison of all three counts for every k, with the report it came from.
pub struct Comparison {
    pub report: CountReport,
    pub doc: Value,
}

pub fn compare_graph(graph: &Path, oracle_cap: usize, cache: &CacheArgs) -> anyhow::Result<Comparison> {
    let args = CountArgs {
        graph: graph.to_path_buf(),
        k: KSelection::All,
        method: Method::Both,
        mode: ProductMode::Linear,
        oracle: true,
        oracle_cap,
        json: true,
        cache: CacheArgs { cache: cache.cache.clone() },
    };
    let (report, mut doc) = count_report(&args)?;
    let rows: Vec<Value> = report
        .records
        .iter()
        .map(|r| {
            json!({
                "k": r.k,
                "paper_vs_cycle_complete": r.paper_matches_cycle_complete(),
                "paper_vs_oracle": r.paper_matches_oracle(),
                "cycle_complete_vs_oracle": r.cycle_complete_matches_oracle(),
            })
        })
        .collect();
    doc["agreement"] = Value::Array(rows);
    Ok(Comparison { report, doc })
}

fn compare(
    graph: &Path,
    oracle_cap: usize,
    json: bool,
    cache: &CacheArgs,
    out: &mut dyn Write,
) -> anyhow::Result<i32> {
    let Comparison { report, doc } = compare_graph(graph, oracle_cap, cache)?;
    if json {
        writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    } else {
        write_count_table(&report, out)?;
        let mark = |b: Option<bool>| match b {
            Some(true) => "yes",
            Some(false) => "NO",
            None => "-",
        };
        writeln!(
            out,
            "{:>3} {:>20} {:>15} {:>24}",
            "k", "paper=cycle_complete", "paper=oracle", "cycle_complete=oracle"
        )?;
        for r in &report.records {
            writeln!(
                out,
                "{:>3} {:>20} {:>15} {:>24}",
                r.k,
                mark(r.paper_matches_cycle_complete()),
                mark(r.paper_matches_oracle()),
                mark(r.cycle_complete_matches_oracle())
            )?;
        }
    }
    // shift-formula disagreement is reported, not treated as failure
    Ok(if report.has_oracle_mismatch() { EXIT_ORACLE_MISMATCH } else { EXIT_OK })
}
