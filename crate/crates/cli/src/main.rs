use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pbat_core::bench::{self, BenchConfig, BenchError, DEFAULT_RUNS};
use pbat_core::enumeration::{bat_sequence, dec_inv, EnumerationError, Mode, MAX_INDEXED_ARCS};
use pbat_core::generate::{random_network_with, ArcReliability};
use pbat_core::reliability::{parallel_reliability, vector_prob, EngineOptions, ReliabilityError, Summation};
use pbat_core::verify::{verify, VERIFY_TOLERANCE};
use pbat_core::{parse_network, LayeredSearch, Network};

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_LIMIT: u8 = 3;

#[derive(Parser)]
#[command(name = "pbat", version, about = "Exact two-terminal network reliability by parallel BAT enumeration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Backward,
    Forward,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Backward => Mode::Backward,
            ModeArg::Forward => Mode::Forward,
        }
    }
}

#[derive(clap::Args, Clone, Debug)]
struct EngineArgs {
    /// Override every arc reliability with this probability.
    #[arg(long)]
    prob: Option<f64>,
    /// Wall-clock budget per computation, in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Refuse networks with more arcs than this.
    #[arg(long, default_value_t = pbat_core::reliability::DEFAULT_MAX_ARCS)]
    max_arcs: usize,
    /// Use compensated summation for partial sums.
    #[arg(long)]
    compensated: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Compute R(G) for a network file.
    Reliability {
        file: PathBuf,
        /// Number of equal divisions / worker threads (power of two).
        #[arg(long, default_value_t = 1)]
        threads: u64,
        /// Print per-division partial reliabilities.
        #[arg(long)]
        partials: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// List state vectors in BAT order.
    Enumerate {
        /// Network file; adds connectivity and Pr(X) columns.
        file: Option<PathBuf>,
        /// Arc count when no file is given.
        #[arg(long, conflicts_with = "file")]
        arcs: Option<usize>,
        /// Print only the vector with this 1-based index.
        #[arg(long)]
        index: Option<u64>,
        #[arg(long, value_enum, default_value_t = ModeArg::Backward)]
        mode: ModeArg,
        /// Largest arc count allowed for a full listing.
        #[arg(long, default_value_t = 16)]
        max_dump_arcs: usize,
        #[arg(long)]
        prob: Option<f64>,
    },
    /// Check serial, parallel and brute-force results against each other.
    Verify {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Time the engine over a sweep of thread counts.
    Bench {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Comma-separated thread counts.
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        threads: Vec<u64>,
        #[arg(long, default_value_t = DEFAULT_RUNS)]
        runs: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Also write the structured report to this file.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Write a seeded random network in the network file format.
    Generate {
        #[arg(long)]
        nodes: u32,
        #[arg(long)]
        arcs: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Uniform arc reliability; random in [0.5, 1) when omitted.
        #[arg(long)]
        prob: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<ReliabilityError> for Failure {
    fn from(e: ReliabilityError) -> Self {
        let code = match &e {
            ReliabilityError::Timeout { .. }
            | ReliabilityError::OracleBound { .. }
            | ReliabilityError::Enumeration(EnumerationError::CapExceeded { .. })
            | ReliabilityError::Enumeration(EnumerationError::TooManyCoordinates { .. }) => EXIT_LIMIT,
            _ => EXIT_USAGE,
        };
        let message = match &e {
            ReliabilityError::Enumeration(EnumerationError::ChiNotPowerOfTwo(chi)) => {
                format!("χ must be a power of two (got {chi})")
            }
            other => other.to_string(),
        };
        Failure { code, message }
    }
}

type CmdResult = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Reliability { file, threads, partials, format, engine } => {
            cmd_reliability(&file, threads, partials, format, &engine)
        }
        Command::Enumerate { file, arcs, index, mode, max_dump_arcs, prob } => {
            cmd_enumerate(file.as_deref(), arcs, index, mode.into(), max_dump_arcs, prob)
        }
        Command::Verify { file, format, engine } => cmd_verify(&file, format, &engine),
        Command::Bench { files, threads, runs, format, output, engine } => {
            cmd_bench(&files, &threads, runs, format, output.as_deref(), &engine)
        }
        Command::Generate { nodes, arcs, seed, prob, output } => {
            cmd_generate(nodes, arcs, seed, prob, output.as_deref())
        }
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path, prob: Option<f64>) -> Result<Network, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let net = parse_network(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    match prob {
        Some(p) => net.with_uniform_reliability(p).map_err(|e| Failure::usage(format!("--prob: {e}"))),
        None => Ok(net),
    }
}

fn engine_options(args: &EngineArgs) -> Result<EngineOptions, Failure> {
    let timeout = match args.timeout {
        Some(s) if !(s.is_finite() && s >= 0.0) => return Err(Failure::usage(format!("invalid --timeout {s}"))),
        Some(s) => Some(Duration::from_secs_f64(s)),
        None => None,
    };
    Ok(EngineOptions {
        max_arcs: args.max_arcs,
        timeout,
        summation: if args.compensated { Summation::Compensated } else { Summation::Plain },
        ..EngineOptions::default()
    })
}

/// Scientific notation with a four-digit mantissa and two-digit exponent, e.g. `1.0893E-01`.
fn sci(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let s = format!("{v:.4e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mantissa}E{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

fn cmd_reliability(file: &Path, threads: u64, partials: bool, format: Format, args: &EngineArgs) -> CmdResult {
    let net = load(file, args.prob)?;
    let options = engine_options(args)?;
    let report = parallel_reliability(&net, threads, &options)?;

    if format == Format::Json {
        let mut value = serde_json::to_value(&report).expect("report serializes");
        value["network"] = file.display().to_string().into();
        value["n"] = net.node_count().into();
        value["m"] = net.arc_count().into();
        if !partials {
            value.as_object_mut().expect("object").remove("divisions");
        }
        return Ok(serde_json::to_string_pretty(&value).expect("json") + "\n");
    }

    let mut out = String::new();
    let _ = writeln!(out, "network     {}", file.display());
    let _ = writeln!(out, "nodes       {}", net.node_count());
    let _ = writeln!(out, "arcs        {}", net.arc_count());
    let _ = writeln!(out, "vectors     {}", 1u64 << net.arc_count());
    let _ = writeln!(out, "threads     {}", report.chi);
    let _ = writeln!(out, "R(G)        {:.10}", report.reliability);
    let _ = writeln!(out, "elapsed     {:.6} s", report.elapsed.as_secs_f64());
    let _ = writeln!(out, "throughput  {:.0} vectors/s", report.vectors_per_second);
    if partials {
        let _ = writeln!(out, "{:>6} {:>12} {:>20} {:>12} {:>12}", "t", "R_t", "R_t (full)", "N_t", "connected");
        for d in &report.divisions {
            let _ = writeln!(
                out,
                "{:>6} {:>12} {:>20.17} {:>12} {:>12}",
                d.t,
                sci(d.reliability),
                d.reliability,
                d.visited,
                d.connected
            );
        }
    }
    Ok(out)
}

fn cmd_enumerate(
    file: Option<&Path>,
    arcs: Option<usize>,
    index: Option<u64>,
    mode: Mode,
    max_dump_arcs: usize,
    prob: Option<f64>,
) -> CmdResult {
    let net = file.map(|f| load(f, prob)).transpose()?;
    let m = match (&net, arcs) {
        (Some(n), _) => n.arc_count(),
        (None, Some(m)) => m,
        (None, None) => return Err(Failure::usage("give a network file or --arcs <m>")),
    };
    if m == 0 || m > MAX_INDEXED_ARCS {
        return Err(Failure::usage(format!("arc count must be in 1..={MAX_INDEXED_ARCS}")));
    }

    let mut search = net.as_ref().map(LayeredSearch::new);
    let mut out = String::new();
    let mut row = |out: &mut String, i: u64, x: &pbat_core::StateVector| {
        let _ = write!(out, "{i:>8}  {x}");
        if let (Some(net), Some(search)) = (&net, search.as_mut()) {
            let connected = search.connected(x);
            let pr = vector_prob(x, net.reliabilities()).expect("length matches");
            let _ = write!(out, "  {:<12}  {}", if connected { "connected" } else { "disconnected" }, sci(pr));
        }
        out.push('\n');
    };

    if let Some(i) = index {
        let x = dec_inv(i, m, mode).map_err(|e| Failure::usage(e.to_string()))?;
        row(&mut out, i, &x);
        return Ok(out);
    }
    if m > max_dump_arcs {
        return Err(Failure {
            code: EXIT_LIMIT,
            message: format!("refusing to list 2^{m} vectors (limit 2^{max_dump_arcs}; raise --max-dump-arcs)"),
        });
    }
    for (i, x) in bat_sequence(m, mode).expect("width checked").enumerate() {
        row(&mut out, i as u64 + 1, &x);
    }
    Ok(out)
}

fn cmd_verify(file: &Path, format: Format, args: &EngineArgs) -> CmdResult {
    let net = load(file, args.prob)?;
    let options = engine_options(args)?;
    let report = verify(&net, &options)?;

    let body = if format == Format::Json {
        serde_json::to_string_pretty(&report).expect("json") + "\n"
    } else {
        let mut out = String::new();
        let _ = writeln!(out, "brute force       {:.15}", report.brute_force);
        let _ = writeln!(out, "serial            {:.15}", report.serial);
        for c in &report.parallel {
            let _ = writeln!(out, "threads {:<9} {:.15}  |Δ| {:.3e}", c.chi, c.reliability, c.discrepancy);
        }
        let _ = writeln!(out, "connectivity      {} mismatching vectors", report.connectivity_mismatches);
        let _ = writeln!(out, "max discrepancy   {:.3e} (tolerance {VERIFY_TOLERANCE:e})", report.max_discrepancy);
        let _ = writeln!(out, "{}", if report.passed { "PASS" } else { "FAIL" });
        out
    };
    if report.passed {
        return Ok(body);
    }
    print!("{body}");
    let mut msg = String::from("verification failed");
    if !report.mismatched_vectors.is_empty() {
        let _ = write!(msg, "; connectivity differs on {}", report.mismatched_vectors.join(" "));
    }
    let chis = report.failing_chis();
    if !chis.is_empty() {
        let _ = write!(msg, "; totals differ for threads {chis:?}");
    }
    Err(Failure { code: EXIT_VERIFY, message: msg })
}

fn cmd_bench(
    files: &[PathBuf],
    threads: &[u64],
    runs: usize,
    format: Format,
    output: Option<&Path>,
    args: &EngineArgs,
) -> CmdResult {
    let config = BenchConfig { chis: threads.to_vec(), runs, engine: engine_options(args)? };
    let mut records = Vec::with_capacity(files.len());
    for f in files {
        let net = load(f, args.prob)?;
        let name = f.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let rec = bench::bench_network(&name, &net, &config).map_err(|e| match e {
            BenchError::Engine { source, name } => {
                let mut f = Failure::from(source);
                f.message = format!("{name}: {}", f.message);
                f
            }
            other => Failure::usage(other.to_string()),
        })?;
        records.push(rec);
    }
    let json = bench::render_json(&records);
    if let Some(path) = output {
        fs::write(path, &json).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    }
    Ok(match format {
        Format::Json => json + "\n",
        Format::Text => bench::render_text(&records),
    })
}

fn cmd_generate(nodes: u32, arcs: usize, seed: u64, prob: Option<f64>, output: Option<&Path>) -> CmdResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reliability = match prob {
        Some(p) => ArcReliability::Uniform(p),
        None => ArcReliability::Random { lo: 0.5, hi: 1.0 },
    };
    let net = random_network_with(&mut rng, nodes, arcs, reliability).map_err(|e| Failure::usage(e.to_string()))?;
    let text = format!("# generated: nodes={nodes} arcs={arcs} seed={seed}\n{net}");
    match output {
        Some(path) => {
            fs::write(path, &text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

#[cfg(test)]
mod tests {
    use super::sci;

    #[test]
    fn scientific_format() {
        assert_eq!(sci(0.10893), "1.0893E-01");
        assert_eq!(sci(0.0), "0");
        assert_eq!(sci(12345.0), "1.2345E+04");
        assert_eq!(sci(0.72902), "7.2902E-01");
    }
}
