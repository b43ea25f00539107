//! Command-line front end: `optimize`, `bench`, `compare` and `trace`.
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bench::{self, Table};
use crate::driver::{run, trace_jsonl, QagsConfig, RunReport};
use crate::error::QagsError;
use crate::grid::SearchBox;
use crate::objective::{Objective, REGISTRY};
use crate::quantum::EncodingLaw;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qags",
    version,
    about = "Quantum adaptive search for global minimization"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimize one benchmark function and print the run report.
    Optimize(RunArgs),
    /// Reproduce an accuracy table preset as CSV or Markdown.
    Bench(BenchArgs),
    /// Compare QAGS against adaptive grid search on the sphere function.
    Compare(CompareArgs),
    /// Print the sequence of search boxes as JSON lines.
    Trace(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum LawArg {
    BoltzmannProb,
    BoltzmannAmp,
}

impl From<LawArg> for EncodingLaw {
    fn from(l: LawArg) -> Self {
        match l {
            LawArg::BoltzmannProb => EncodingLaw::BoltzmannProbability,
            LawArg::BoltzmannAmp => EncodingLaw::BoltzmannAmplitude,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
enum Format {
    #[default]
    Json,
    Csv,
    Md,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableArg {
    T1,
    T2,
    T3,
    T4,
}

impl From<TableArg> for Table {
    fn from(t: TableArg) -> Self {
        match t {
            TableArg::T1 => Table::T1,
            TableArg::T2 => Table::T2,
            TableArg::T3 => Table::T3,
            TableArg::T4 => Table::T4,
        }
    }
}

/// Flags shared by `optimize` and `trace`. Every field may also come from
/// the `--config` file; flags win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct RunArgs {
    /// TOML file with the same keys as the long flags.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// One of rastrigin, styblinski_tang, rosenbrock, sphere.
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    /// Qubits per dimension.
    #[arg(long)]
    qubits: Option<u32>,
    /// Per-dimension bounds as `LO,HI`.
    #[arg(long, allow_hyphen_values = true)]
    bounds: Option<String>,
    /// Sphere centre as a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    shift: Option<String>,
    /// Probability quantile that selects the retained region.
    #[arg(long)]
    quantile: Option<f64>,
    /// Measurement shots per iteration; 0 reads probabilities exactly.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    law: Option<LawArg>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Maximum number of contraction iterations.
    #[arg(long)]
    k_max: Option<usize>,
    /// Stop once every box width falls below this.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Stop once normalized entropy falls below this.
    #[arg(long)]
    entropy_floor: Option<f64>,
    /// Cap on qubits per dimension times dimension.
    #[arg(long)]
    max_qubits: Option<u32>,
}

impl RunArgs {
    fn merged_with(self, file: RunArgs) -> RunArgs {
        RunArgs {
            config: self.config,
            function: self.function.or(file.function),
            dim: self.dim.or(file.dim),
            qubits: self.qubits.or(file.qubits),
            bounds: self.bounds.or(file.bounds),
            shift: self.shift.or(file.shift),
            quantile: self.quantile.or(file.quantile),
            shots: self.shots.or(file.shots),
            seed: self.seed.or(file.seed),
            law: self.law.or(file.law),
            format: self.format.or(file.format),
            k_max: self.k_max.or(file.k_max),
            delta: self.delta.or(file.delta),
            entropy_floor: self.entropy_floor.or(file.entropy_floor),
            max_qubits: self.max_qubits.or(file.max_qubits),
        }
    }
}

#[derive(Debug, Clone, Args)]
struct BenchArgs {
    #[arg(value_enum)]
    table: TableArg,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Clone, Args)]
struct CompareArgs {
    /// Comma-separated dimensions.
    #[arg(long, value_delimiter = ',', default_values_t = bench::COMPARE_DIMS)]
    dims: Vec<usize>,
    /// Per-dimension domain as `LO,HI`.
    #[arg(long, allow_hyphen_values = true, default_value = "-5,5")]
    domain: String,
    /// Overrides the preset qubits per dimension.
    #[arg(long)]
    qubits: Option<u32>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<QagsError> for CliError {
    fn from(e: QagsError) -> Self {
        match e {
            QagsError::Config(_)
            | QagsError::UnknownFunction { .. }
            | QagsError::InvalidInput(_)
            | QagsError::InvalidArity { .. } => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn parse_list(flag: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("--{flag}: `{t}` is not a number")))
        })
        .collect()
}

fn parse_pair(flag: &str, s: &str) -> Result<(f64, f64), CliError> {
    match parse_list(flag, s)?.as_slice() {
        &[lo, hi] => Ok((lo, hi)),
        _ => Err(CliError::Usage(format!("--{flag} expects LO,HI"))),
    }
}

struct Prepared {
    objective: Objective,
    bounds: SearchBox,
    config: QagsConfig,
    format: Format,
}

fn prepare(args: RunArgs) -> Result<Prepared, CliError> {
    let args = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            let file: RunArgs = toml::from_str(&text)
                .map_err(|e| CliError::Usage(format!("bad config file {}: {e}", path.display())))?;
            args.merged_with(file)
        }
        None => args,
    };
    let missing = |flag: &str| CliError::Usage(format!("missing required --{flag}"));
    let name = args.function.ok_or_else(|| {
        CliError::Usage(format!(
            "missing required --function (one of: {})",
            REGISTRY.join(", ")
        ))
    })?;
    let dim = args.dim.ok_or_else(|| missing("dim"))?;
    let qubits = args.qubits.ok_or_else(|| missing("qubits"))?;
    let (lo, hi) = parse_pair("bounds", &args.bounds.ok_or_else(|| missing("bounds"))?)?;
    let shift = args
        .shift
        .as_deref()
        .map(|s| parse_list("shift", s))
        .transpose()?;

    let objective = Objective::by_name(&name, dim, shift)?;
    let bounds = SearchBox::cube(dim, lo, hi)?;
    let mut config = QagsConfig::new(qubits);
    if let Some(q) = args.quantile {
        config.quantile = q;
    }
    if let Some(s) = args.shots {
        config.shots = s;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(l) = args.law {
        config.law = l.into();
    }
    if let Some(k) = args.k_max {
        config.termination.k_max = k;
    }
    if let Some(d) = args.delta {
        config.termination.delta = d;
    }
    if let Some(e) = args.entropy_floor {
        config.termination.entropy_floor = e;
    }
    if let Some(m) = args.max_qubits {
        config.max_qubits = m;
    }
    config.validate()?;
    crate::grid::GridSpec::with_max_qubits(bounds.clone(), qubits, config.max_qubits)?;
    Ok(Prepared {
        objective,
        bounds,
        config,
        format: args.format.unwrap_or_default(),
    })
}

fn render_report(report: &RunReport, format: Format) -> String {
    match format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => bench::report_csv(report),
        Format::Md => bench::report_markdown(report),
    }
}

#[derive(Serialize)]
struct TraceSummary<'a> {
    found_point: &'a [f64],
    found_value: f64,
}

fn execute(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Optimize(args) => {
            let p = prepare(args)?;
            let report = run(&p.objective, &p.bounds, &p.config)?;
            Ok(render_report(&report, p.format))
        }
        Command::Trace(args) => {
            let p = prepare(args)?;
            let report = run(&p.objective, &p.bounds, &p.config)?;
            let mut out = trace_jsonl(&report);
            let summary = TraceSummary {
                found_point: &report.found_point,
                found_value: report.found_value,
            };
            out.push_str(&serde_json::to_string(&summary).expect("summary serializes"));
            out.push('\n');
            Ok(out)
        }
        Command::Bench(args) => {
            let rows = bench::run_table(args.table.into())?;
            Ok(match args.format {
                Format::Md => bench::table_markdown(&rows),
                _ => bench::table_csv(&rows),
            })
        }
        Command::Compare(args) => {
            if args.dims.is_empty() {
                return Err(CliError::Usage(
                    "--dims must list at least one dimension".into(),
                ));
            }
            let (lo, hi) = parse_pair("domain", &args.domain)?;
            let rows = bench::run_compare(&args.dims, lo, hi, args.qubits)?;
            Ok(match args.format {
                Format::Md => bench::compare_markdown(&rows),
                _ => bench::compare_csv(&rows),
            })
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = out.write_all(rendered.as_bytes());
            } else {
                let _ = err.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match execute(cli) {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_RUNTIME
            }
        },
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Runtime(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_RUNTIME
        }
    }
}
