use std::fmt;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use gract::dataio::{gen_synthetic, read_pings_path, regularize, write_pings_path, SynthConfig};
use gract::workload::{self, Query, QueryKind, WorkloadShape};
use gract::{BuildConfig, Cell, Error, GridConfig, Mode, OracleStore, QueryOptions, QueryStats, Rect, TrajectoryIndex};

#[derive(Parser)]
#[command(name = "gract", version, about = "Compressed trajectory index")]
struct Cli {
    /// Print one JSON object per line instead of plain text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Regularize a CSV of pings and build an index.
    Build(BuildArgs),
    /// Run a single query against an index.
    Query {
        #[command(subcommand)]
        q: QueryCmd,
    },
    /// Print the size report of an index.
    Stats {
        #[arg(long)]
        index: PathBuf,
    },
    /// Write a synthetic dataset as CSV.
    Gen(GenArgs),
    /// Compare index answers against a brute-force scan.
    Verify(VerifyArgs),
    /// Time a random workload against an index.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GridArgs {
    /// Cell side in input coordinate units.
    #[arg(long, default_value_t = 50.0)]
    cell_size: f64,
    /// Seconds between instants.
    #[arg(long, default_value_t = 60.0)]
    time_step: f64,
    /// Grid origin; fitted to the data when omitted.
    #[arg(long, allow_negative_numbers = true)]
    origin_x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    origin_y: Option<f64>,
    #[arg(long)]
    width: Option<u32>,
    #[arg(long)]
    height: Option<u32>,
    /// Timestamp of instant 0; the earliest ping when omitted.
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<f64>,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 120)]
    period: u32,
    #[arg(long, default_value_t = Mode::Gract)]
    mode: Mode,
    /// k2-tree arity.
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Force the number of SCDC stoppers instead of choosing it from the data.
    #[arg(long)]
    scdc_s: Option<u32>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct TraversalArgs {
    #[arg(long)]
    no_mbr_pruning: bool,
    #[arg(long)]
    no_reach_pruning: bool,
    /// Never read a log backwards from the next snapshot.
    #[arg(long)]
    forward_only: bool,
}

impl TraversalArgs {
    fn options(&self) -> QueryOptions {
        QueryOptions {
            mbr_pruning: !self.no_mbr_pruning,
            reach_pruning: !self.no_reach_pruning,
            allow_backward: !self.forward_only,
        }
    }
}

#[derive(Subcommand)]
enum QueryCmd {
    /// Cell of one object at one instant.
    Position {
        #[arg(long)]
        index: PathBuf,
        /// Object name, or its numeric id when no object has that name.
        #[arg(long)]
        object: String,
        #[arg(long)]
        t: u32,
        #[command(flatten)]
        traversal: TraversalArgs,
    },
    /// Cells of one object over [from, to].
    Trajectory {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        object: String,
        #[arg(long)]
        from: u32,
        #[arg(long)]
        to: u32,
    },
    /// Objects inside a rectangle at one instant.
    Slice {
        #[arg(long)]
        index: PathBuf,
        /// x1,y1,x2,y2 in cells, inclusive.
        #[arg(long, value_parser = parse_rect)]
        rect: Rect,
        #[arg(long)]
        t: u32,
        #[command(flatten)]
        traversal: TraversalArgs,
    },
    /// Objects inside a rectangle at some instant of [from, to].
    Interval {
        #[arg(long)]
        index: PathBuf,
        #[arg(long, value_parser = parse_rect)]
        rect: Rect,
        #[arg(long)]
        from: u32,
        #[arg(long)]
        to: u32,
        #[command(flatten)]
        traversal: TraversalArgs,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    objects: u32,
    #[arg(long, default_value_t = 1000)]
    instants: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 4096)]
    width: u32,
    #[arg(long, default_value_t = 4096)]
    height: u32,
    /// Fraction of objects that go silent at times.
    #[arg(long, default_value_t = 0.2)]
    gap_fraction: f64,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 120)]
    period: u32,
    /// Queries per type.
    #[arg(long, default_value_t = 200)]
    queries: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Only check one mode; both when omitted.
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    index: PathBuf,
    /// Queries per type.
    #[arg(long, default_value_t = 1000)]
    workload: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[command(flatten)]
    traversal: TraversalArgs,
}

fn parse_rect(s: &str) -> Result<Rect, String> {
    let v: Vec<u32> = s
        .split(',')
        .map(|p| p.trim().parse::<u32>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("bad rectangle {s:?}: {e}"))?;
    match v[..] {
        [x1, y1, x2, y2] => Ok(Rect::new(x1, y1, x2, y2)),
        _ => Err(format!("expected x1,y1,x2,y2, got {s:?}")),
    }
}

#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: 2,
            msg: msg.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            _ if e.is_query_domain() => 1,
            Error::InvalidInput(_) => 2,
            _ => 3,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 3,
            msg: e.to_string(),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

struct Out {
    json: bool,
    w: io::BufWriter<io::StdoutLock<'static>>,
}

impl Out {
    fn emit(&mut self, text: impl fmt::Display, value: serde_json::Value) -> CliResult {
        if self.json {
            writeln!(self.w, "{value}")?;
        } else {
            writeln!(self.w, "{text}")?;
        }
        Ok(())
    }
}

fn cell_text(c: Option<Cell>) -> String {
    match c {
        Some(c) => format!("{} {}", c.x, c.y),
        None => "absent".into(),
    }
}

fn cell_json(c: Option<Cell>) -> (serde_json::Value, serde_json::Value) {
    match c {
        Some(c) => (json!(c.x), json!(c.y)),
        None => (serde_json::Value::Null, serde_json::Value::Null),
    }
}

fn load(path: &PathBuf) -> CliResult<TrajectoryIndex> {
    let t = Instant::now();
    let idx = TrajectoryIndex::load(path).map_err(|e| Failure {
        code: 3,
        msg: format!("{}: {e}", path.display()),
    })?;
    log::debug!("loaded {} in {:?}", path.display(), t.elapsed());
    Ok(idx)
}

fn resolve(idx: &TrajectoryIndex, name: &str) -> CliResult<u32> {
    if let Some(o) = idx.object_id(name) {
        return Ok(o);
    }
    match name.parse::<u32>() {
        Ok(o) if o < idx.num_objects() => Ok(o),
        _ => Err(Failure {
            code: 1,
            msg: format!("unknown object {name:?}"),
        }),
    }
}

fn name(idx: &TrajectoryIndex, o: u32) -> &str {
    idx.object_name(o).unwrap_or("?")
}

fn load_dataset(input: &PathBuf, grid: &GridArgs) -> CliResult<gract::RegularDataset> {
    if grid.cell_size.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)
        || grid.time_step.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater)
    {
        return Err(Failure::usage("--cell-size and --time-step must be positive"));
    }
    let pings = read_pings_path(input).map_err(|e| Failure {
        code: 3,
        msg: format!("{}: {e}", input.display()),
    })?;
    let mut cfg = GridConfig::fit(&pings, grid.cell_size, grid.time_step)?;
    if let Some(x) = grid.origin_x {
        cfg.origin.0 = x;
    }
    if let Some(y) = grid.origin_y {
        cfg.origin.1 = y;
    }
    if let Some(w) = grid.width {
        cfg.width = w;
    }
    if let Some(h) = grid.height {
        cfg.height = h;
    }
    if let Some(t0) = grid.t0 {
        cfg.t0 = t0;
    }
    let (data, report) = regularize(&pings, &cfg)?;
    log::info!(
        "{} pings: {} kept, {} outside the grid, {} before t0, {} superseded",
        pings.len(),
        report.accepted,
        report.out_of_grid,
        report.before_start,
        report.superseded
    );
    Ok(data)
}

fn cmd_build(args: &BuildArgs, out: &mut Out) -> CliResult {
    let mut cfg = BuildConfig::new(args.period, args.mode);
    cfg.k = args.k;
    cfg.scdc_s = args.scdc_s;
    cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;
    let data = load_dataset(&args.input, &args.grid)?;
    let t = Instant::now();
    let idx = TrajectoryIndex::build(&data, &cfg)?;
    let elapsed = t.elapsed();
    idx.save(&args.out)?;
    let h = idx.header();
    let size = idx.stats();
    out.emit(
        format_args!(
            "{} objects {} instants {}x{} grid, {} bytes ({:.2}% of plain) in {:.3}s",
            h.num_objects,
            h.num_instants,
            h.width,
            h.height,
            size.total,
            size.ratio * 100.0,
            elapsed.as_secs_f64()
        ),
        json!({
            "objects": h.num_objects,
            "instants": h.num_instants,
            "width": h.width,
            "height": h.height,
            "mode": h.mode.to_string(),
            "bytes": size.total,
            "ratio": size.ratio,
            "seconds": elapsed.as_secs_f64(),
        }),
    )
}

fn report_stats(stats: &QueryStats) {
    log::info!(
        "symbols {} rules {} candidates {} discarded {}",
        stats.symbols_processed,
        stats.rules_expanded,
        stats.candidates,
        stats.discarded
    );
}

fn cmd_query(q: &QueryCmd, out: &mut Out) -> CliResult {
    match q {
        QueryCmd::Position {
            index,
            object,
            t,
            traversal,
        } => {
            let idx = load(index)?;
            let o = resolve(&idx, object)?;
            let (c, stats) = idx.position_with(o, *t, &traversal.options())?;
            report_stats(&stats);
            let (x, y) = cell_json(c);
            out.emit(cell_text(c), json!({"object": name(&idx, o), "t": t, "x": x, "y": y}))
        }
        QueryCmd::Trajectory {
            index,
            object,
            from,
            to,
        } => {
            let idx = load(index)?;
            let o = resolve(&idx, object)?;
            let (rows, stats) = idx.trajectory_with(o, *from, *to)?;
            report_stats(&stats);
            for (t, c) in rows {
                let (x, y) = cell_json(c);
                out.emit(format_args!("{t} {}", cell_text(c)), json!({"t": t, "x": x, "y": y}))?;
            }
            Ok(())
        }
        QueryCmd::Slice {
            index,
            rect,
            t,
            traversal,
        } => {
            let idx = load(index)?;
            let (hits, stats) = idx.time_slice_with(rect, *t, &traversal.options())?;
            report_stats(&stats);
            for (o, c) in hits {
                let n = name(&idx, o);
                out.emit(
                    format_args!("{n} {} {}", c.x, c.y),
                    json!({"object": n, "x": c.x, "y": c.y}),
                )?;
            }
            Ok(())
        }
        QueryCmd::Interval {
            index,
            rect,
            from,
            to,
            traversal,
        } => {
            let idx = load(index)?;
            let (hits, stats) = idx.time_interval_with(rect, *from, *to, &traversal.options())?;
            report_stats(&stats);
            for o in hits {
                let n = name(&idx, o);
                out.emit(n, json!({"object": n}))?;
            }
            Ok(())
        }
    }
}

fn cmd_stats(index: &PathBuf, out: &mut Out) -> CliResult {
    let idx = load(index)?;
    let size = idx.stats();
    let value = serde_json::to_value(size).map_err(|e| Failure {
        code: 3,
        msg: e.to_string(),
    })?;
    out.emit(size, value)
}

fn cmd_gen(args: &GenArgs, out: &mut Out) -> CliResult {
    if args.objects == 0 || args.instants == 0 || args.width == 0 || args.height == 0 {
        return Err(Failure::usage(
            "--objects, --instants, --width and --height must be positive",
        ));
    }
    if !(0.0..=1.0).contains(&args.gap_fraction) {
        return Err(Failure::usage("--gap-fraction must lie in [0, 1]"));
    }
    let data = gen_synthetic(&SynthConfig {
        num_objects: args.objects,
        num_instants: args.instants,
        width: args.width,
        height: args.height,
        gap_fraction: args.gap_fraction,
        seed: args.seed,
        ..SynthConfig::default()
    });
    let pings = data.to_pings();
    write_pings_path(&args.out, &pings)?;
    out.emit(
        format_args!(
            "{} pings for {} objects written to {}",
            pings.len(),
            args.objects,
            args.out.display()
        ),
        json!({"pings": pings.len(), "objects": args.objects, "out": args.out.display().to_string()}),
    )
}

fn cmd_verify(args: &VerifyArgs, out: &mut Out) -> CliResult<bool> {
    let modes = match args.mode {
        Some(m) => vec![m],
        None => vec![Mode::Scdc, Mode::Gract],
    };
    for &m in &modes {
        let mut cfg = BuildConfig::new(args.period, m);
        cfg.k = args.k;
        cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;
    }
    let data = load_dataset(&args.input, &args.grid)?;
    let shape = WorkloadShape {
        num_objects: data.num_objects() as u32,
        num_instants: data.num_instants,
        width: data.width(),
        height: data.height(),
        max_span: 400,
        max_side: data.width().max(data.height()).div_ceil(2),
    };
    let queries = workload::generate(&shape, args.queries, args.seed);
    let oracle = OracleStore::new(data);
    let expected: Vec<_> = queries
        .iter()
        .map(|q| workload::run_oracle(&oracle, q))
        .collect::<Result<_, _>>()?;
    let mut all_ok = true;
    for m in modes {
        let mut cfg = BuildConfig::new(args.period, m);
        cfg.k = args.k;
        let idx = TrajectoryIndex::build(oracle.dataset(), &cfg)?;
        for kind in QueryKind::ALL {
            let (mut matched, mut total) = (0usize, 0usize);
            for (q, want) in queries.iter().zip(&expected).filter(|(q, _)| q.kind() == kind) {
                total += 1;
                match workload::run_index(&idx, q, &QueryOptions::default()) {
                    Ok((got, _)) if got == *want => matched += 1,
                    Ok(_) => log::warn!("{m}: mismatch on {q:?}"),
                    Err(e) => log::warn!("{m}: {q:?} failed: {e}"),
                }
            }
            all_ok &= matched == total;
            out.emit(
                format_args!("{m} {kind} {matched}/{total} match"),
                json!({"mode": m.to_string(), "query": kind.name(), "matched": matched, "total": total}),
            )?;
        }
    }
    Ok(all_ok)
}

#[derive(Default, Clone, Copy)]
struct Tally {
    count: u64,
    nanos: u128,
    symbols: u64,
    rules: u64,
}

fn run_chunk(idx: &TrajectoryIndex, queries: &[Query], opts: &QueryOptions) -> gract::Result<[Tally; 4]> {
    let mut tallies = [Tally::default(); 4];
    for q in queries {
        let t = Instant::now();
        let (_, stats) = workload::run_index(idx, q, opts)?;
        let ns = t.elapsed().as_nanos();
        let slot = &mut tallies[q.kind() as usize];
        slot.count += 1;
        slot.nanos += ns;
        slot.symbols += stats.symbols_processed;
        slot.rules += stats.rules_expanded;
    }
    Ok(tallies)
}

fn cmd_bench(args: &BenchArgs, out: &mut Out) -> CliResult {
    if args.threads == 0 {
        return Err(Failure::usage("--threads must be positive"));
    }
    let idx = load(&args.index)?;
    let queries = workload::generate(&WorkloadShape::for_index(&idx), args.workload, args.seed);
    let opts = args.traversal.options();
    let chunk = queries.len().div_ceil(args.threads).max(1);
    let wall = Instant::now();
    let parts: Vec<gract::Result<[Tally; 4]>> = std::thread::scope(|s| {
        let handles: Vec<_> = queries
            .chunks(chunk)
            .map(|c| {
                let idx = &idx;
                let opts = &opts;
                s.spawn(move || run_chunk(idx, c, opts))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("bench worker panicked"))
            .collect()
    });
    let wall = wall.elapsed();
    let mut total = [Tally::default(); 4];
    for part in parts {
        for (acc, t) in total.iter_mut().zip(part?) {
            acc.count += t.count;
            acc.nanos += t.nanos;
            acc.symbols += t.symbols;
            acc.rules += t.rules;
        }
    }
    for kind in QueryKind::ALL {
        let t = total[kind as usize];
        let n = t.count.max(1) as f64;
        let mean_us = t.nanos as f64 / n / 1000.0;
        let symbols = t.symbols as f64 / n;
        let rules = t.rules as f64 / n;
        out.emit(
            format_args!(
                "{kind} {} queries mean {mean_us:.1} us symbols {symbols:.1} rules {rules:.1}",
                t.count
            ),
            json!({
                "query": kind.name(),
                "count": t.count,
                "mean_us": mean_us,
                "symbols_processed": symbols,
                "rules_expanded": rules,
            }),
        )?;
    }
    log::info!("{} queries on {} threads in {:?}", queries.len(), args.threads, wall);
    Ok(())
}

fn run(cli: Cli) -> CliResult<bool> {
    let mut out = Out {
        json: cli.json,
        w: io::BufWriter::new(io::stdout().lock()),
    };
    let ok = match &cli.cmd {
        Command::Build(a) => cmd_build(a, &mut out).map(|_| true),
        Command::Query { q } => cmd_query(q, &mut out).map(|_| true),
        Command::Stats { index } => cmd_stats(index, &mut out).map(|_| true),
        Command::Gen(a) => cmd_gen(a, &mut out).map(|_| true),
        Command::Verify(a) => cmd_verify(a, &mut out),
        Command::Bench(a) => cmd_bench(a, &mut out).map(|_| true),
    }?;
    out.w.flush()?;
    Ok(ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GRACT_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("gract: {f}");
            ExitCode::from(f.code)
        }
    }
}
