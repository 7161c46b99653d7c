//! Command-line interface. [`run`] takes the arguments and output streams
//! explicitly so tests can drive it in-process.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{bench_grid, bench_method, BenchRow, CSV_HEADER, DEFAULT_UNIVERSE, DEFAULT_WORK};
use crate::deviates::RandomSource;
use crate::distsim::{reservoir_capacity_bound, reservoir_slack, simulate_streams, CapacityPolicy, StreamSpec};
use crate::error::Error;
use crate::graph::{gnm, gnp};
use crate::io::{write_samples, OutputFormat};
use crate::methods::{run_method, Method, MethodOptions};
use crate::parallel::JobSchedule;
use crate::samplers::UniverseRange;
use crate::selftest::{default_factory, faulty_factory, run_selftest, Level};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Parses a count written in decimal or as `2^k`.
pub fn parse_count(s: &str) -> std::result::Result<u64, String> {
    let s = s.trim().replace('_', "");
    if let Some(exp) = s.strip_prefix("2^") {
        let k: u32 = exp.parse().map_err(|_| format!("bad exponent in {s:?}"))?;
        return 1u64
            .checked_shl(k)
            .filter(|_| k < 64)
            .ok_or_else(|| format!("2^{k} does not fit in 64 bits"));
    }
    s.parse().map_err(|_| format!("{s:?} is not a count"))
}

#[derive(Debug, Parser)]
#[command(
    name = "samplekit",
    version,
    about = "Random sampling without replacement and friends"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a sample.
    Sample(SampleArgs),
    /// Time sampling methods and write CSV.
    Bench(BenchArgs),
    /// Run the statistical self-test batteries.
    Selftest(SelftestArgs),
    /// Generate a uniform random graph as an edge list.
    Graph(GraphArgs),
    /// Simulate distributed reservoir sampling.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Binary,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => OutputFormat::Text,
            FormatArg::Binary => OutputFormat::Binary,
        }
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Write here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    method: Method,
    /// Sample size (not used by bernoulli).
    #[arg(long, value_parser = parse_count)]
    n: Option<u64>,
    /// Universe size; samples come from 1..=N.
    #[arg(long = "N", value_parser = parse_count)]
    universe: u64,
    #[arg(long, env = "SAMPLEKIT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    sorted: bool,
    /// Worker threads (parallel, jobs).
    #[arg(long)]
    workers: Option<usize>,
    /// Number of deterministic jobs (jobs).
    #[arg(long)]
    jobs: Option<usize>,
    /// Hand jobs to workers from a shared counter instead of in blocks.
    #[arg(long)]
    dynamic: bool,
    /// Inclusion probability (bernoulli).
    #[arg(long)]
    rho: Option<f64>,
    /// Base case size of the recursive samplers.
    #[arg(long, value_parser = parse_count)]
    n0: Option<u64>,
    /// Hash table slots for the base case.
    #[arg(long, value_parser = parse_count)]
    m: Option<u64>,
    /// Print values as 0..N-1 instead of 1..N.
    #[arg(long)]
    zero_based: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_value = "r,h,d")]
    methods: Vec<Method>,
    /// Sample sizes, e.g. `2^10,2^14,2^18`.
    #[arg(long = "n", value_delimiter = ',', value_parser = parse_count, default_value = "2^10,2^14,2^18,2^22")]
    ns: Vec<u64>,
    #[arg(long = "N", value_parser = parse_count, default_value_t = DEFAULT_UNIVERSE)]
    universe: u64,
    /// Samples per (method, n); repetitions are work / n.
    #[arg(long, value_parser = parse_count, default_value_t = DEFAULT_WORK)]
    work: u64,
    /// Fixed repetition count, overriding --work.
    #[arg(long)]
    reps: Option<u64>,
    #[arg(long, env = "SAMPLEKIT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 64)]
    jobs: usize,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Debug, Args)]
struct SelftestArgs {
    #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
    level: LevelArg,
    #[arg(long, env = "SAMPLEKIT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    Gnm,
    Gnp,
}

#[derive(Debug, Args)]
struct GraphArgs {
    #[arg(long, value_enum)]
    model: Model,
    /// Number of vertices, numbered from 0.
    #[arg(long = "v", value_parser = parse_count)]
    vertices: u64,
    /// Edge count (gnm).
    #[arg(long = "m", value_parser = parse_count)]
    edges: Option<u64>,
    /// Edge probability (gnp).
    #[arg(long = "p")]
    prob: Option<f64>,
    #[arg(long, env = "SAMPLEKIT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Number of PEs; with --length gives equal streams.
    #[arg(long = "p")]
    pes: Option<usize>,
    /// Stream length of every PE.
    #[arg(long, value_parser = parse_count)]
    length: Option<u64>,
    /// Comma-separated stream lengths, one per PE.
    #[arg(long, value_delimiter = ',', value_parser = parse_count)]
    lengths: Vec<u64>,
    /// File with one line of whitespace-separated elements per PE.
    #[arg(long)]
    streams: Option<PathBuf>,
    #[arg(long, value_parser = parse_count)]
    n: u64,
    /// Size reservoirs for this overflow probability (default: exact).
    #[arg(long)]
    delta: Option<f64>,
    /// Fixed reservoir capacity for every PE.
    #[arg(long, value_parser = parse_count)]
    capacity: Option<u64>,
    #[arg(long, default_value_t = 1)]
    queries: usize,
    #[arg(long, env = "SAMPLEKIT_SEED", default_value_t = 0)]
    seed: u64,
    /// Write the message trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Print reservoir capacities for a range of deltas and exit.
    #[arg(long)]
    delta_sweep: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::Malformed(_) => Failure::Usage(e.to_string()),
            Error::RestartsExhausted(_) => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult = std::result::Result<i32, Failure>;

fn usage<T>(msg: impl Into<String>) -> std::result::Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Sample(a) => cmd_sample(a, stdout),
        Command::Bench(a) => cmd_bench(a, stdout),
        Command::Selftest(a) => cmd_selftest(a, stdout),
        Command::Graph(a) => cmd_graph(a, stdout),
        Command::Simulate(a) => cmd_simulate(a, stdout, stderr),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn with_output(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> io::Result<()> {
    match path {
        Some(p) => {
            let mut file = io::BufWriter::new(fs::File::create(p)?);
            f(&mut file)?;
            file.flush()
        }
        None => {
            f(stdout)?;
            stdout.flush()
        }
    }
}

fn cmd_sample(a: SampleArgs, stdout: &mut dyn Write) -> CliResult {
    let parallel = matches!(a.method, Method::Parallel | Method::Jobs);
    if a.rho.is_some() && a.method != Method::Bernoulli {
        return usage(format!("--rho only applies to bernoulli, not {}", a.method));
    }
    if a.workers.is_some() && !parallel {
        return usage(format!("--workers only applies to parallel and jobs, not {}", a.method));
    }
    if (a.jobs.is_some() || a.dynamic) && a.method != Method::Jobs {
        return usage(format!("--jobs and --dynamic only apply to jobs, not {}", a.method));
    }
    let n = match (a.method, a.n) {
        (Method::Bernoulli, None) => 0,
        (Method::Bernoulli, Some(_)) => return usage("bernoulli takes --rho, not --n"),
        (_, Some(n)) => n,
        (m, None) => return usage(format!("method {m} needs --n")),
    };
    if a.method == Method::Bernoulli && a.rho.is_none() {
        return usage("bernoulli needs --rho");
    }
    let mut opts = MethodOptions {
        rho: a.rho,
        ..MethodOptions::default()
    };
    opts.sampler.sorted_output = a.sorted;
    if let Some(n0) = a.n0 {
        opts.sampler.base_case = n0;
    }
    if let Some(m) = a.m {
        opts.sampler.table_capacity = usize::try_from(m).map_err(|_| Failure::Usage("--m too large".into()))?;
    }
    opts.workers = a.workers.unwrap_or(1);
    opts.jobs = a.jobs.unwrap_or(64);
    if a.dynamic {
        opts.schedule = JobSchedule::Dynamic;
    }
    if a.method == Method::Jobs && opts.jobs < opts.workers {
        return usage(format!("{} jobs cannot keep {} workers busy", opts.jobs, opts.workers));
    }
    let mut values = run_method(a.method, n, UniverseRange::one_to(a.universe), a.seed, &opts)?;
    if a.zero_based {
        for v in values.iter_mut() {
            *v -= 1;
        }
    }
    let format = a.out.format.into();
    with_output(a.out.output.as_deref(), stdout, |w| write_samples(w, &values, format))?;
    Ok(EXIT_OK)
}

fn cmd_bench(a: BenchArgs, stdout: &mut dyn Write) -> CliResult {
    if a.methods.contains(&Method::S) && a.universe > 1 << 32 {
        return usage("method s scans the whole universe; use N <= 2^32");
    }
    let opts = MethodOptions {
        workers: a.workers,
        jobs: a.jobs,
        ..MethodOptions::default()
    };
    let rows: Vec<BenchRow> = match a.reps {
        Some(reps) => {
            let mut rows = Vec::new();
            for &m in &a.methods {
                for &n in &a.ns {
                    if n > a.universe {
                        return usage(format!("n = {n} exceeds N = {}", a.universe));
                    }
                    rows.push(bench_method(m, n, a.universe, reps, a.seed, &opts)?);
                }
            }
            rows
        }
        None => bench_grid(&a.methods, &a.ns, a.universe, a.work, a.seed, &opts)?,
    };
    with_output(a.output.as_deref(), stdout, |w| {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &rows {
            writeln!(w, "{}", r.csv())?;
        }
        Ok(())
    })?;
    Ok(EXIT_OK)
}

fn cmd_selftest(a: SelftestArgs, stdout: &mut dyn Write) -> CliResult {
    let level = match a.level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    let factory = if a.inject_fault {
        faulty_factory()
    } else {
        default_factory()
    };
    let ok = run_selftest(level, &*factory, a.seed, stdout)?;
    Ok(if ok { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_graph(a: GraphArgs, stdout: &mut dyn Write) -> CliResult {
    let mut src = RandomSource::new(a.seed);
    let edges = match (a.model, a.edges, a.prob) {
        (Model::Gnm, Some(m), None) => gnm(a.vertices, m, &mut src)?,
        (Model::Gnp, None, Some(p)) => gnp(a.vertices, p, &mut src)?,
        (Model::Gnm, _, _) => return usage("gnm takes --m and no --p"),
        (Model::Gnp, _, _) => return usage("gnp takes --p and no --m"),
    };
    with_output(a.output.as_deref(), stdout, |w| {
        for (u, v) in &edges {
            writeln!(w, "{u} {v}")?;
        }
        Ok(())
    })?;
    Ok(EXIT_OK)
}

fn parse_stream_file(path: &Path) -> std::result::Result<Vec<Vec<u64>>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let mut streams = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let s: std::result::Result<Vec<u64>, _> = line.split_whitespace().map(str::parse).collect();
        match s {
            Ok(s) => streams.push(s),
            Err(_) => return Err(Error::Malformed(format!("stream file line {}: {line:?}", i + 1)).into()),
        }
    }
    Ok(streams)
}

fn cmd_simulate(a: SimulateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    let sources = [a.length.is_some(), !a.lengths.is_empty(), a.streams.is_some()];
    if sources.iter().filter(|&&s| s).count() != 1 {
        return usage("give exactly one of --length (with --p), --lengths or --streams");
    }
    let mut spec = if let Some(path) = &a.streams {
        StreamSpec {
            streams: parse_stream_file(path)?,
            ..StreamSpec::from_lengths(&[], a.n, CapacityPolicy::Exact, a.seed)
        }
    } else if let Some(len) = a.length {
        let Some(p) = a.pes else {
            return usage("--length needs --p");
        };
        StreamSpec::from_lengths(&vec![len; p], a.n, CapacityPolicy::Exact, a.seed)
    } else {
        StreamSpec::from_lengths(&a.lengths, a.n, CapacityPolicy::Exact, a.seed)
    };
    let p = spec.streams.len();
    if p == 0 {
        return usage("no streams given");
    }
    if a.pes.is_some_and(|q| q != p) {
        return usage(format!("--p {} but {p} streams", a.pes.unwrap_or(0)));
    }
    spec.queries = a.queries;
    spec.capacity = match (a.delta, a.capacity) {
        (Some(_), Some(_)) => return usage("--delta and --capacity are exclusive"),
        (Some(delta), None) => CapacityPolicy::Bound { delta },
        (None, Some(c)) => CapacityPolicy::Fixed(c),
        (None, None) => CapacityPolicy::Exact,
    };
    let lengths: Vec<u64> = spec.streams.iter().map(|s| s.len() as u64).collect();
    let total: u64 = lengths.iter().sum();

    if a.delta_sweep {
        let mut lines = vec!["delta,t,capacities".to_string()];
        for delta in [1e-1, 1e-2, 1e-3, 1e-6, 1e-9, 1e-12, 1e-20] {
            let t = reservoir_slack(a.n, p as u64, delta)?;
            let caps = lengths
                .iter()
                .map(|&l| reservoir_capacity_bound(l, total, a.n, p as u64, delta).map(|c| c.to_string()))
                .collect::<crate::Result<Vec<_>>>()?;
            lines.push(format!("{delta:e},{t:.6},{}", caps.join(";")));
        }
        with_output(a.out.output.as_deref(), stdout, |w| {
            for l in &lines {
                writeln!(w, "{l}")?;
            }
            Ok(())
        })?;
        return Ok(EXIT_OK);
    }

    let report = simulate_streams(&spec)?;
    let format = a.out.format.into();
    with_output(a.out.output.as_deref(), stdout, |w| {
        for r in &report.results {
            write_samples(w, r, format)?;
        }
        Ok(())
    })?;
    if let Some(path) = &a.trace {
        fs::write(path, report.trace_text())?;
    }
    let sent_total = |rank: usize| report.messages_sent.iter().map(|row| row[rank]).sum::<u64>();
    for rank in 0..p {
        let assigned: Vec<String> = report.assignments.iter().map(|q| q[rank].to_string()).collect();
        let _ = writeln!(
            stderr,
            "pe={rank} seen={} capacity={} occupancy={} assigned={} sent={}",
            report.seen[rank],
            report.capacities[rank],
            report.occupancy[rank],
            assigned.join(","),
            sent_total(rank)
        );
    }
    let _ = writeln!(stderr, "queries={} restarts={}", report.results.len(), report.restarts);
    Ok(EXIT_OK)
}
