//! Command-line front end: generate objects to JSON-lines files, run the
//! verification experiments, benchmark entropy backends, and query backend
//! metadata.
//!
//! Exit codes: 0 success (all verification rows passed), 1 verification
//! failure, 2 argument errors, 3 entropy-backend failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench;
use crate::entropy::{EntropySource, ENTROPY_ENV_VAR};
use crate::error::{Error, Result};
use crate::qstates::{
    random_dynamical_matrix, random_ket, random_local_unitary, random_product_ket,
    random_product_state, random_state_bures, random_state_hs, random_state_induced,
    random_unitary, MeasureSpec,
};
use crate::randkit::{ginibre_matrix, random_graph, random_simplex};
use crate::statefile::{Meta, StateFile, EPOCH_TIMESTAMP};
use crate::stats::{EigenvalueAccumulator, ExperimentReport, FidelityAccumulator};

const EXIT_OK: i32 = 0;
const EXIT_VERIFY_FAILED: i32 = 1;
const EXIT_USAGE: i32 = 2;
const EXIT_BACKEND: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "qrs",
    version,
    about = "Random quantum states from pluggable entropy sources",
    after_help = "Entropy specs: prng:<seed>, os, dev:<path>, http:<url>; \
                  the QRS_ENTROPY environment variable supplies the default."
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate random quantum objects as JSON documents
    Gen(GenArgs),
    /// Run a statistical verification experiment
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Benchmark entropy-backend throughput
    Bench(BenchArgs),
    /// Print entropy-backend metadata as JSON
    EntropyInfo(EntropyInfoArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Object kind: ket, product-ket, unitary, local-unitary, state-hs,
    /// state-bures, state-induced, product-state, dynamical, ginibre,
    /// simplex, graph
    #[arg(long)]
    kind: String,

    /// Dimensions, comma separated (one entry unless the kind is a product,
    /// local-unitary or ginibre)
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<usize>,

    /// Measure for mixed-state kinds: hs, bures or induced:<K>
    #[arg(long)]
    measure: Option<String>,

    /// Number of documents to generate (JSON lines when more than one)
    #[arg(long, default_value_t = 1)]
    count: u64,

    /// Zero-eigenvalue count for dynamical matrices
    #[arg(long, default_value_t = 0)]
    k: usize,

    /// Edge count for graphs
    #[arg(long)]
    edges: Option<u64>,

    /// Entropy backend spec (default: QRS_ENTROPY, then os)
    #[arg(long)]
    entropy: Option<String>,

    /// Zero timestamps for golden-file testing
    #[arg(long)]
    deterministic: bool,

    /// Output path (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum VerifyCommand {
    /// Eigenvalue distribution of Hilbert-Schmidt states
    Eigenvalues(EigenvaluesArgs),
    /// Mean qubit fidelity under induced measures vs the closed form
    MeanFidelity(MeanFidelityArgs),
}

#[derive(Debug, Args)]
struct EigenvaluesArgs {
    /// State dimension (>= 2)
    #[arg(long)]
    dim: usize,

    /// Number of states to draw
    #[arg(long)]
    samples: u64,

    /// Histogram bins over [0, 1]
    #[arg(long, default_value_t = 50)]
    bins: usize,

    #[command(flatten)]
    common: VerifyCommonArgs,
}

#[derive(Debug, Args)]
struct MeanFidelityArgs {
    /// Ancilla dimensions, comma separated
    #[arg(long = "K", value_delimiter = ',', required = true)]
    k_values: Vec<u64>,

    /// State pairs per ancilla dimension
    #[arg(long)]
    pairs: u64,

    #[command(flatten)]
    common: VerifyCommonArgs,
}

#[derive(Debug, Args)]
struct VerifyCommonArgs {
    /// Entropy backend spec (default: QRS_ENTROPY, then os)
    #[arg(long)]
    entropy: Option<String>,

    /// Shard the experiment over this many independently seeded workers
    #[arg(long, default_value_t = 1)]
    jobs: u64,

    /// Kept for interface symmetry; reports carry no timestamps
    #[arg(long)]
    deterministic: bool,

    /// Output base path; writes <base>.json and <base>.csv
    #[arg(short, long, default_value = "report")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Entropy backend specs, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    backends: Vec<String>,

    /// Sizes: a decade range like 1e1..1e5 or a comma list like 10,100
    #[arg(long)]
    sizes: String,

    /// Timing repeats per cell (minimum is reported)
    #[arg(long, default_value_t = 5)]
    repeats: u32,

    /// Zero the timing columns so seeded runs are byte-identical
    #[arg(long)]
    deterministic: bool,

    /// CSV output path (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,

    /// Optional JSON output path
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EntropyInfoArgs {
    /// Entropy backend spec (default: QRS_ENTROPY, then os)
    #[arg(long)]
    entropy: Option<String>,
}

/// Parse `argv` and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
        Command::EntropyInfo(args) => cmd_entropy_info(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::DeviceUnavailable(_) | Error::ShortRead { .. } => EXIT_BACKEND,
        _ => EXIT_USAGE,
    }
}

/// Resolve the backend spec from the flag, the environment, or the default.
fn resolve_entropy(flag: &Option<String>) -> Result<(EntropySource, String)> {
    let spec = flag
        .clone()
        .or_else(|| std::env::var(ENTROPY_ENV_VAR).ok())
        .unwrap_or_else(|| "os".to_string());
    Ok((EntropySource::from_spec(&spec)?, spec))
}

fn timestamp(deterministic: bool) -> String {
    if deterministic {
        EPOCH_TIMESTAMP.to_string()
    } else {
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
    }
}

fn write_output(path: &Option<PathBuf>, contents: &str) -> Result<()> {
    match path {
        None => {
            std::io::stdout().write_all(contents.as_bytes())?;
            Ok(())
        }
        Some(path) => write_file_atomically(path, contents),
    }
}

/// Write via a temporary file in the target directory so failed runs leave
/// no partial output behind.
fn write_file_atomically(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn require_dims(args: &GenArgs, n: usize) -> Result<()> {
    if args.dims.len() != n {
        return Err(Error::InvalidParameter(format!(
            "kind {:?} takes exactly {n} dimension(s), got {:?}",
            args.kind, args.dims
        )));
    }
    Ok(())
}

fn reject_measure(args: &GenArgs) -> Result<()> {
    if args.measure.is_some() {
        return Err(Error::InvalidParameter(format!(
            "kind {:?} does not take a measure",
            args.kind
        )));
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<i32> {
    if args.count == 0 {
        return Err(Error::InvalidParameter("count must be >= 1".into()));
    }
    if args.dims.contains(&0) {
        return Err(Error::InvalidParameter("dimensions must be >= 1".into()));
    }
    let (mut src, spec) = resolve_entropy(&args.entropy)?;
    let meta = Meta {
        backend: spec,
        seed: src.backend().seed(),
        created: timestamp(args.deterministic),
    };

    let mut out = String::new();
    for _ in 0..args.count {
        let doc = generate_one(&args, &mut src, meta.clone())?;
        out.push_str(&doc.to_json_line());
        out.push('\n');
    }
    write_output(&args.output, &out)?;
    Ok(EXIT_OK)
}

fn generate_one(args: &GenArgs, src: &mut EntropySource, meta: Meta) -> Result<StateFile> {
    let dims = &args.dims;
    let doc = match args.kind.as_str() {
        "ket" => {
            require_dims(args, 1)?;
            reject_measure(args)?;
            StateFile::from_ket("ket", dims, &random_ket(src, dims[0])?, meta)
        }
        "product-ket" => {
            reject_measure(args)?;
            StateFile::from_ket("product-ket", dims, &random_product_ket(src, dims)?, meta)
        }
        "unitary" => {
            require_dims(args, 1)?;
            reject_measure(args)?;
            let u = random_unitary(src, dims[0])?;
            StateFile::from_matrix("unitary", dims, None, u.matrix(), meta)
        }
        "local-unitary" => {
            reject_measure(args)?;
            let u = random_local_unitary(src, dims)?;
            StateFile::from_matrix("local-unitary", dims, None, u.matrix(), meta)
        }
        "state-hs" => {
            require_dims(args, 1)?;
            reject_measure(args)?;
            let rho = random_state_hs(src, dims[0])?;
            StateFile::from_matrix("state-hs", dims, Some("hs".into()), rho.matrix(), meta)
        }
        "state-bures" => {
            require_dims(args, 1)?;
            reject_measure(args)?;
            let rho = random_state_bures(src, dims[0])?;
            StateFile::from_matrix("state-bures", dims, Some("bures".into()), rho.matrix(), meta)
        }
        "state-induced" => {
            require_dims(args, 1)?;
            let measure = args.measure.as_deref().ok_or_else(|| {
                Error::InvalidParameter(
                    "state-induced needs --measure induced:<K>".into(),
                )
            })?;
            let MeasureSpec::Induced(k) = MeasureSpec::parse(measure)? else {
                return Err(Error::InvalidParameter(
                    "state-induced needs --measure induced:<K>".into(),
                ));
            };
            let rho = random_state_induced(src, dims[0], k)?;
            StateFile::from_matrix(
                "state-induced",
                dims,
                Some(MeasureSpec::Induced(k).to_string()),
                rho.matrix(),
                meta,
            )
        }
        "product-state" => {
            let measure = match args.measure.as_deref() {
                Some(m) => MeasureSpec::parse(m)?,
                None => MeasureSpec::Hs,
            };
            let rho = random_product_state(src, dims, measure)?;
            StateFile::from_matrix(
                "product-state",
                dims,
                Some(measure.to_string()),
                rho.matrix(),
                meta,
            )
        }
        "dynamical" => {
            require_dims(args, 1)?;
            reject_measure(args)?;
            let d = random_dynamical_matrix(src, dims[0], args.k)?;
            StateFile::from_matrix("dynamical", dims, None, d.matrix(), meta)
        }
        "ginibre" => {
            reject_measure(args)?;
            let (m, n) = match dims.as_slice() {
                [n] => (*n, *n),
                [m, n] => (*m, *n),
                _ => {
                    return Err(Error::InvalidParameter(
                        "ginibre takes one or two dimensions".into(),
                    ))
                }
            };
            let g = ginibre_matrix(src, m, n)?;
            StateFile::from_matrix("ginibre", &[m, n], None, &g, meta)
        }
        "simplex" => {
            require_dims(args, 1)?;
            reject_measure(args)?;
            StateFile::from_simplex(&random_simplex(src, dims[0])?, meta)
        }
        "graph" => {
            require_dims(args, 1)?;
            reject_measure(args)?;
            let edges = args.edges.ok_or_else(|| {
                Error::InvalidParameter("graph needs --edges <count>".into())
            })?;
            let edge_list = random_graph(src, dims[0] as u64, edges)?;
            StateFile::from_graph(dims[0] as u64, &edge_list, meta)
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown kind {other:?}"
            )))
        }
    };
    Ok(doc)
}

/// Per-worker seeds for `--jobs`: seed + worker index under prng, fresh OS
/// sources otherwise.
fn shard_sources(spec: &str, jobs: u64) -> Result<Vec<EntropySource>> {
    if jobs == 0 {
        return Err(Error::InvalidParameter("jobs must be >= 1".into()));
    }
    if jobs == 1 {
        return Ok(vec![EntropySource::from_spec(spec)?]);
    }
    match EntropySource::from_spec(spec)?.backend() {
        crate::entropy::Backend::DeterministicPrng { seed } => Ok((0..jobs)
            .map(|i| EntropySource::deterministic(seed.wrapping_add(i)))
            .collect()),
        crate::entropy::Backend::OsEntropy => {
            Ok((0..jobs).map(|_| EntropySource::os_entropy()).collect())
        }
        _ => Err(Error::InvalidParameter(
            "--jobs > 1 requires a prng or os entropy backend".into(),
        )),
    }
}

fn split_work(total: u64, workers: u64) -> Vec<u64> {
    let base = total / workers;
    let extra = total % workers;
    (0..workers)
        .map(|i| base + u64::from(i < extra))
        .collect()
}

fn cmd_verify(command: VerifyCommand) -> Result<i32> {
    let (report, common) = match command {
        VerifyCommand::Eigenvalues(args) => {
            if args.samples < 100 {
                return Err(Error::InvalidParameter(
                    "need at least 100 samples".into(),
                ));
            }
            let spec = resolve_entropy(&args.common.entropy)?.1;
            let sources = shard_sources(&spec, args.common.jobs)?;
            let shares = split_work(args.samples, args.common.jobs);
            let mut accumulators = Vec::with_capacity(sources.len());
            std::thread::scope(|scope| -> Result<()> {
                let mut handles = Vec::new();
                for (mut src, share) in sources.into_iter().zip(shares) {
                    let dim = args.dim;
                    let bins = args.bins;
                    handles.push(scope.spawn(move || -> Result<EigenvalueAccumulator> {
                        let mut acc = EigenvalueAccumulator::new(dim, bins)?;
                        acc.accumulate(&mut src, share)?;
                        Ok(acc)
                    }));
                }
                for h in handles {
                    accumulators.push(h.join().expect("verify worker panicked")?);
                }
                Ok(())
            })?;
            let mut merged = accumulators.remove(0);
            for acc in &accumulators {
                merged.merge(acc);
            }
            (merged.into_report(), args.common)
        }
        VerifyCommand::MeanFidelity(args) => {
            if args.pairs < 10 {
                return Err(Error::InvalidParameter("need at least 10 pairs".into()));
            }
            let spec = resolve_entropy(&args.common.entropy)?.1;
            let sources = shard_sources(&spec, args.common.jobs)?;
            let shares = split_work(args.pairs, args.common.jobs);
            let mut accumulators = Vec::with_capacity(sources.len());
            std::thread::scope(|scope| -> Result<()> {
                let mut handles = Vec::new();
                for (mut src, share) in sources.into_iter().zip(shares) {
                    let k_values = args.k_values.clone();
                    handles.push(scope.spawn(move || -> Result<FidelityAccumulator> {
                        let mut acc = FidelityAccumulator::new(&k_values)?;
                        acc.accumulate(&mut src, share)?;
                        Ok(acc)
                    }));
                }
                for h in handles {
                    accumulators.push(h.join().expect("verify worker panicked")?);
                }
                Ok(())
            })?;
            let mut merged = accumulators.remove(0);
            for acc in &accumulators {
                merged.merge(acc);
            }
            (merged.into_report()?, args.common)
        }
    };

    let json_path = common.output.with_extension("json");
    let csv_path = common.output.with_extension("csv");
    write_file_atomically(&json_path, &(report.to_json() + "\n"))?;
    write_file_atomically(&csv_path, &report.to_csv())?;
    print_verify_summary(&report);
    Ok(if report.all_pass() {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

fn print_verify_summary(report: &ExperimentReport) {
    let with_verdict = report.rows.iter().filter(|r| r.pass.is_some()).count();
    let passed = report
        .rows
        .iter()
        .filter(|r| r.pass == Some(true))
        .count();
    println!("experiment: {}", report.experiment);
    println!("samples: {}", report.samples);
    println!("verdict rows passed: {passed}/{with_verdict}");
    println!(
        "result: {}",
        if report.all_pass() { "PASS" } else { "FAIL" }
    );
}

/// Sizes: `1e1..1e5` expands to the decade ladder; otherwise a comma list.
fn parse_sizes(s: &str) -> Result<Vec<u64>> {
    let parse_one = |tok: &str| -> Result<u64> {
        let v: f64 = tok
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("bad size {tok:?}")))?;
        if !(v.is_finite() && v >= 1.0 && v == v.trunc()) {
            return Err(Error::InvalidParameter(format!("bad size {tok:?}")));
        }
        Ok(v as u64)
    };
    if let Some((lo, hi)) = s.split_once("..") {
        let lo = parse_one(lo)?;
        let hi = parse_one(hi)?;
        if lo > hi {
            return Err(Error::InvalidParameter(format!(
                "size range {s:?} is descending"
            )));
        }
        let mut sizes = Vec::new();
        let mut v = lo;
        while v < hi {
            sizes.push(v);
            v = v.saturating_mul(10);
        }
        sizes.push(hi);
        Ok(sizes)
    } else {
        s.split(',').map(parse_one).collect()
    }
}

fn cmd_bench(args: BenchArgs) -> Result<i32> {
    let sizes = parse_sizes(&args.sizes)?;
    let rows = bench::run_bench(&args.backends, &sizes, args.repeats)?;
    let csv = bench::rows_to_csv(&rows, args.deterministic);
    write_output(&args.output, &csv)?;
    if let Some(json_path) = &args.json {
        let json = bench::rows_to_json(&rows, args.deterministic);
        write_file_atomically(json_path, &(json + "\n"))?;
    }
    Ok(EXIT_OK)
}

fn cmd_entropy_info(args: EntropyInfoArgs) -> Result<i32> {
    let (src, _) = resolve_entropy(&args.entropy)?;
    let descriptor = src.describe()?;
    println!(
        "{}",
        serde_json::to_string(&descriptor).expect("descriptor serializes")
    );
    Ok(EXIT_OK)
}
