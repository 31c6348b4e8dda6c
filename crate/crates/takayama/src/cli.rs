//! Command-line surface.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use takayama_core::{
    build_empirical, confidence_interval, decomposability_gap, gap_variance, recompose_global,
    sigma_plugin, takayama_empirical, EmpiricalDistribution, IncomeSample, PovertyConfig,
    SubgroupPartition,
};

use crate::error::{Error, Result};
use crate::io::{ingest_csv, model_to_string, parse_model, RunConfig};
use crate::montecarlo::{bootstrap_variance, run_replicates, with_threads, ReplicateStudy, Target};
use crate::report::{
    emit_report, plot_data, DecompositionResults, Format, IndexResults, IndexRow, Results,
    SimulationResults,
};

/// Exit code of a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code of a usage error.
pub const EXIT_USAGE: i32 = 1;
/// Exit code of a data error.
pub const EXIT_DATA: i32 = 2;
/// Exit code of a numerical failure.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "takayama", version, about = "Takayama poverty index: estimates, variances, subgroup decomposition and Monte Carlo studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Index, plug-in variance and confidence interval of a survey file.
    Index(DataArgs),
    /// Variance components, optionally cross-checked by the bootstrap.
    Variance(VarianceArgs),
    /// Subgroup indices, decomposability gap and recomposed global interval.
    Decompose(DataArgs),
    /// Monte Carlo study under a population model.
    Simulate(SimulateArgs),
    /// Re-renders a JSON result file.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct Shared {
    /// JSON configuration file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Poverty line.
    #[arg(long = "poverty-line", visible_alias = "z")]
    poverty_line: Option<f64>,
    /// Confidence level of intervals.
    #[arg(long)]
    level: Option<f64>,
    /// Poor means income strictly below the line.
    #[arg(long)]
    strict: bool,
    /// Output format.
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Write the report to this file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write tidy plotting data (CSV) to this file.
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Survey CSV with household_id, income and optional adult_equiv columns.
    #[arg(long)]
    input: PathBuf,
    /// Column holding group labels.
    #[arg(long)]
    group_column: Option<String>,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Debug, Args)]
struct VarianceArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Number of bootstrap resamples (at least 100).
    #[arg(long)]
    bootstrap: Option<usize>,
    /// Seed of the bootstrap streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Model such as `uniform:0,1` or `0.5*exponential:1+0.5*exponential:0.5`.
    #[arg(long)]
    model: String,
    /// Sample size of each replicate.
    #[arg(long)]
    n: usize,
    /// Number of replicates.
    #[arg(long)]
    reps: Option<usize>,
    /// Base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Statistic to study: takayama, gap or representation.
    #[arg(long, default_value = "takayama")]
    target: Target,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Absolute tolerance of population integrals.
    #[arg(long)]
    tolerance: Option<f64>,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// JSON result file written with `--format json`.
    #[arg(long)]
    input: PathBuf,
    /// Output format.
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Write the report to this file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write tidy plotting data (CSV) to this file.
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Reports go to `out` unless an output file is given;
/// diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn run_config(shared: &Shared) -> Result<RunConfig> {
    let mut config = match &shared.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if let Some(z) = shared.poverty_line {
        config.poverty_line = Some(z);
    }
    if let Some(level) = shared.level {
        config.confidence_level = level;
    }
    if shared.strict {
        config.strict_comparison = true;
    }
    config.validated()
}

fn data_config(args: &DataArgs) -> Result<RunConfig> {
    let mut config = run_config(&args.shared)?;
    if let Some(g) = &args.group_column {
        config.group_column = Some(g.clone());
    }
    Ok(config)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn deliver(results: &Results, format: Format, output: Option<&Path>, plot: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let bytes = emit_report(results, format);
    match output {
        Some(path) => write_file(path, &bytes)?,
        None => out
            .write_all(&bytes)
            .map_err(|e| Error::io("<stdout>", e))?,
    }
    if let Some(path) = plot {
        write_file(path, &plot_data(results))?;
    }
    Ok(())
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Index(args) => {
            let results = index_results(&args, None)?;
            deliver(&results, args.shared.format, args.shared.output.as_deref(), args.shared.plot_data.as_deref(), out)
        }
        Command::Variance(args) => {
            let results = index_results(&args.data, Some(&args))?;
            let shared = &args.data.shared;
            deliver(&results, shared.format, shared.output.as_deref(), shared.plot_data.as_deref(), out)
        }
        Command::Decompose(args) => {
            let results = decompose_results(&args)?;
            deliver(&results, args.shared.format, args.shared.output.as_deref(), args.shared.plot_data.as_deref(), out)
        }
        Command::Simulate(args) => {
            let results = simulate_results(&args)?;
            deliver(&results, args.shared.format, args.shared.output.as_deref(), args.shared.plot_data.as_deref(), out)
        }
        Command::Report(args) => {
            let text = std::fs::read_to_string(&args.input).map_err(|e| Error::io(&args.input, e))?;
            let results: Results = serde_json::from_str(&text)
                .map_err(|e| Error::Data(format!("{}: not a result file: {e}", args.input.display())))?;
            deliver(&results, args.format, args.output.as_deref(), args.plot_data.as_deref(), out)
        }
    }
}

fn load(args: &DataArgs) -> Result<(RunConfig, PovertyConfig, IncomeSample)> {
    let config = data_config(args)?;
    let poverty = config.poverty_config()?;
    let sample = ingest_csv(&args.input, &config)?;
    Ok((config, poverty, sample))
}

fn index_results(args: &DataArgs, variance: Option<&VarianceArgs>) -> Result<Results> {
    let (config, poverty, sample) = load(args)?;
    let dist: EmpiricalDistribution = build_empirical(&sample)?;
    let index = takayama_empirical(&dist, &poverty).value;
    let v = sigma_plugin(&dist, &poverty).checked()?;
    let ci = confidence_interval(index, v.total_clamped(), dist.size(), poverty.confidence_level)?;
    let bootstrap_variance = match variance.and_then(|a| a.bootstrap.map(|b| (a, b))) {
        Some((a, resamples)) => {
            let seed = a.seed.unwrap_or(config.seed);
            let threads = a.threads.or(config.threads);
            let boot = || bootstrap_variance(&dist, &poverty, resamples, seed);
            Some(match threads {
                Some(k) => with_threads(k, boot)??,
                None => boot()?,
            })
        }
        None => None,
    };
    Ok(Results::Index(IndexResults {
        poverty_line: poverty.poverty_line,
        row: IndexRow {
            label: "all".into(),
            size: dist.size(),
            index,
        },
        variance: (&v).into(),
        interval: (&ci).into(),
        bootstrap_variance,
    }))
}

fn decompose_results(args: &DataArgs) -> Result<Results> {
    let (config, poverty, sample) = load(args)?;
    if config.group_column.is_none() {
        return Err(Error::Usage("decompose needs --group-column".into()));
    }
    let partition = SubgroupPartition::from_sample(&sample)?;
    let gap = decomposability_gap(&partition, &poverty)?;
    let components = gap_variance(&partition, &poverty, &config.quadrature())?;
    let variance = components.population_centred();
    let gap_ci = confidence_interval(gap.gap, variance.max(0.0), sample.len(), poverty.confidence_level)?;
    let recomposed = recompose_global(gap.weighted_local_sum, &gap_ci);
    let groups = partition
        .groups()
        .iter()
        .zip(&gap.local_indices)
        .map(|(g, &index)| IndexRow {
            label: g.label.clone(),
            size: g.size.unwrap_or(0),
            index,
        })
        .collect();
    Ok(Results::Decomposition(DecompositionResults {
        poverty_line: poverty.poverty_line,
        groups,
        weights: gap.weights.clone(),
        global: IndexRow {
            label: "Global".into(),
            size: sample.len(),
            index: gap.global_index,
        },
        weighted_local_sum: gap.weighted_local_sum,
        gap: gap.gap,
        gap_variance: variance,
        components: (&components).into(),
        gap_interval: (&gap_ci).into(),
        recomposed_interval: (&recomposed).into(),
    }))
}

fn simulate_results(args: &SimulateArgs) -> Result<Results> {
    let mut config = run_config(&args.shared)?;
    if let Some(reps) = args.reps {
        config.replicates = reps;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(threads) = args.threads {
        config.threads = Some(threads);
    }
    if let Some(tol) = args.tolerance {
        config.quadrature_tolerance = tol;
    }
    let config = config.validated()?;
    if args.n == 0 {
        return Err(Error::Usage("--n must be at least 1".into()));
    }
    let poverty = config.poverty_config()?;
    let model = parse_model(&args.model)?;
    let mut study = ReplicateStudy::new(model, poverty, args.n, config.replicates, config.seed)
        .with_quadrature(config.quadrature());
    study.threads = config.threads;
    let study = run_replicates(study, args.target)?;
    let summary = study.summary()?;
    let name = model_to_string(&study.model);
    Ok(Results::Simulation(SimulationResults::from_study(&study, name, args.target, summary)))
}
