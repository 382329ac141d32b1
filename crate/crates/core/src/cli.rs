//! The `pyp` command line tool.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::eppf::eppf_log_prob;
use crate::error::{Error, Result};
use crate::harness::verify::{run_suite, CheckResult, Suite};
use crate::harness::{
    growth_experiment, run_monte_carlo, sample_partitions, tv_distance, SamplerKind, DEFAULT_SEED,
};
use crate::params::PYParams;
use crate::partition::{enumerate_partitions, Partition};

#[derive(Debug, Parser)]
#[command(
    name = "pyp",
    version,
    about = "Pitman-Yor random partitions: exact law, samplers and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Probability of one partition.
    Eppf(EppfArgs),
    /// Draw random partitions.
    Sample(SampleArgs),
    /// Run a verification suite; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Mean number of blocks against sample size.
    Growth(GrowthArgs),
}

#[derive(Debug, Args)]
struct ParamArgs {
    /// Concentration, greater than -d.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    alpha: f64,
    /// Discount, in [0, 1).
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.5)]
    d: f64,
}

impl ParamArgs {
    fn params(&self) -> Result<PYParams> {
        PYParams::new(self.alpha, self.d)
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write to this file (atomically) instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EppfArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Blocks separated by `|`, elements by `,`, e.g. `1,3|2`.
    #[arg(long)]
    partition: String,
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    #[arg(long)]
    csv: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long, value_enum, default_value_t = SamplerKind::Stick)]
    method: SamplerKind,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Report partition frequencies against the exact law instead of draws.
    #[arg(long)]
    tabulate: bool,
    #[arg(long)]
    csv: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    /// Restrict the suite to one parameter pair.
    #[arg(long, allow_negative_numbers = true, requires = "d")]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true, requires = "alpha")]
    d: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct GrowthArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    ngrid: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    csv: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Serialize)]
struct EppfOutput {
    partition: Partition,
    n: usize,
    num_blocks: usize,
    block_sizes: Vec<usize>,
    alpha: f64,
    d: f64,
    log_prob: f64,
    prob: f64,
}

#[derive(Serialize)]
struct DrawsOutput {
    method: SamplerKind,
    params: PYParams,
    n: usize,
    trials: u64,
    seed: u64,
    partitions: Vec<Partition>,
}

#[derive(Serialize)]
struct TableRow {
    partition: Partition,
    count: u64,
    frequency: f64,
    exact: f64,
}

#[derive(Serialize)]
struct TableOutput {
    method: SamplerKind,
    params: PYParams,
    n: usize,
    trials: u64,
    seed: u64,
    tv_distance: f64,
    rows: Vec<TableRow>,
}

#[derive(Serialize)]
struct GrowthOutput {
    params: PYParams,
    trials: usize,
    seed: u64,
    #[serde(flatten)]
    report: crate::harness::GrowthReport,
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParams { .. }
        | Error::InvalidPartition(_)
        | Error::OutOfRange { .. }
        | Error::Domain(_)
        | Error::Mismatch(_) => 2,
        Error::StickCap(_) | Error::StickIndexOverflow(_) | Error::Io(_) | Error::Json(_) => 1,
    }
}

/// Returns whether the command succeeded (false only for failed checks).
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Eppf(args) => eppf(args).map(|_| true),
        Command::Sample(args) => sample(args).map(|_| true),
        Command::Verify(args) => verify(args),
        Command::Growth(args) => growth(args).map(|_| true),
    }
}

fn eppf(args: EppfArgs) -> Result<()> {
    let params = args.params.params()?;
    let partition: Partition = args.partition.parse()?;
    let lp = eppf_log_prob(&params, &partition);
    let row = EppfOutput {
        n: partition.n(),
        num_blocks: partition.num_blocks(),
        block_sizes: partition.block_sizes(),
        partition,
        alpha: params.alpha(),
        d: params.d(),
        log_prob: lp.ln(),
        prob: lp.prob(),
    };
    if args.csv {
        #[derive(Serialize)]
        struct Row {
            partition: Partition,
            alpha: f64,
            d: f64,
            log_prob: f64,
            prob: f64,
        }
        let flat = Row {
            partition: row.partition,
            alpha: row.alpha,
            d: row.d,
            log_prob: row.log_prob,
            prob: row.prob,
        };
        emit(&args.output.out, &csv_bytes(std::iter::once(flat))?)
    } else {
        emit(&args.output.out, &json_bytes(&row)?)
    }
}

fn sample(args: SampleArgs) -> Result<()> {
    let params = args.params.params()?;
    eprintln!(
        "sampling {} partitions of [{}] with {} (seed {})",
        args.trials,
        args.n,
        serde_json::to_string(&args.method)?,
        args.seed
    );
    let bytes = if args.tabulate {
        let emp = run_monte_carlo(&params, args.n, args.trials, args.method, args.seed)?;
        let rows: Vec<TableRow> = enumerate_partitions(args.n)?
            .map(|c| TableRow {
                count: emp.count(&c),
                frequency: emp.frequency(&c),
                exact: eppf_log_prob(&params, &c).prob(),
                partition: c,
            })
            .collect();
        if args.csv {
            csv_bytes(rows)?
        } else {
            json_bytes(&TableOutput {
                method: args.method,
                params,
                n: args.n,
                trials: args.trials,
                seed: args.seed,
                tv_distance: tv_distance(&emp, &params)?,
                rows,
            })?
        }
    } else {
        let partitions = sample_partitions(&params, args.n, args.trials, args.method, args.seed)?;
        if args.csv {
            #[derive(Serialize)]
            struct Draw {
                draw: usize,
                partition: Partition,
            }
            csv_bytes(
                partitions
                    .into_iter()
                    .enumerate()
                    .map(|(draw, partition)| Draw { draw, partition }),
            )?
        } else {
            json_bytes(&DrawsOutput {
                method: args.method,
                params,
                n: args.n,
                trials: args.trials,
                seed: args.seed,
                partitions,
            })?
        }
    };
    emit(&args.output.out, &bytes)
}

fn verify(args: VerifyArgs) -> Result<bool> {
    let params = match (args.alpha, args.d) {
        (Some(alpha), Some(d)) => Some(PYParams::new(alpha, d)?),
        _ => None,
    };
    let mut progress = |c: &CheckResult| {
        eprintln!(
            "{} {}: {:e} (threshold {:e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    };
    let report = run_suite(args.suite, params, args.seed, &mut progress)?;
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    eprintln!(
        "{} of {} checks passed",
        report.checks.len() - failed,
        report.checks.len()
    );
    emit(&args.output.out, &json_bytes(&report)?)?;
    Ok(report.passed)
}

fn growth(args: GrowthArgs) -> Result<()> {
    let params = args.params.params()?;
    eprintln!(
        "growth over {:?} with {} trials (seed {})",
        args.ngrid, args.trials, args.seed
    );
    let report = growth_experiment(&params, &args.ngrid, args.trials, args.seed)?;
    let bytes = if args.csv {
        csv_bytes(report.records.iter())?
    } else {
        json_bytes(&GrowthOutput {
            params,
            trials: args.trials,
            seed: args.seed,
            report,
        })?
    };
    emit(&args.output.out, &bytes)
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn csv_bytes<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(csv_error)?;
    }
    writer.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Writes to a sibling temporary file, then renames it over `path`.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
