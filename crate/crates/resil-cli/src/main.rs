use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use resil_cli::analyze::{run_analyze, AnalysisConfig, MethodChoice, Sampling};
use resil_cli::compare::{run_compare, run_tradeoff};
use resil_cli::input::{InitialState, NoiseModel, Source};
use resil_cli::output::{emit, to_json_text};
use resil_cli::repro::{run_repro, ReproTarget};
use resil_cli::sweep::{parse_values, run_sweep, Metric, SweepConfig, SweepParam};
use resil_cli::{with_workers, CliError, CliResult};
use std::path::PathBuf;
use std::process::ExitCode;

/// Noise-resilience analysis of quantum circuits and annealing schedules.
#[derive(Parser, Debug)]
#[command(name = "resil", version)]
struct Cli {
    /// Worker threads (results are identical for every count).
    #[arg(long, global = true, env = "RESIL_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fragility estimates of one compilation.
    Analyze {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Estimators to run (repeatable); defaults to avg for circuits, analog for schedules.
        #[arg(long = "method", value_enum)]
        methods: Vec<MethodChoice>,
        /// Cost observable: a Pauli label such as ZZI, or an operator document in JSON.
        #[arg(long)]
        cost: Option<String>,
    },
    /// Ranks compilations under one noise model.
    Compare {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Tabulates metrics while sweeping one parameter; writes CSV.
    Sweep {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Swept parameter: eta_x, T, n, sigma or gamma.
        #[arg(long)]
        param: String,
        /// Values as a,b,c or start:stop:count.
        #[arg(long)]
        values: String,
        /// Metrics to tabulate (repeatable).
        #[arg(long = "metric", value_enum)]
        metrics: Vec<Metric>,
        /// Append the log-log slope of every metric against the parameter.
        #[arg(long)]
        loglog_fit: bool,
    },
    /// Checks the resilience-runtime inequality.
    Tradeoff {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Cost observable; selects the cost-function inequality.
        #[arg(long)]
        cost: Option<String>,
    },
    /// Regenerates the data of a worked example and checks it.
    Repro {
        #[arg(value_enum)]
        target: ReproTarget,
        /// Output directory for the CSV tables and summary.json.
        #[arg(long, default_value = "repro-out")]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Circuit document (repeatable for compare).
    #[arg(long = "circuit")]
    circuits: Vec<PathBuf>,
    /// Schedule document (repeatable for compare).
    #[arg(long = "schedule")]
    schedules: Vec<PathBuf>,
    /// Named model such as pspin:n=5, flip-a or planar-d2:alpha=1,beta=0 (repeatable for compare).
    #[arg(long = "model")]
    models: Vec<String>,
    /// Initial state of document compilations: zero, plus or basis:K.
    #[arg(long, default_value = "zero")]
    state: String,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Noise model: none, hamiltonian[:gamma=g], qi[:gamma=g], qii[:gamma=g],
    /// biased:p=P,eta_x=E, a noise document path, or inline JSON.
    #[arg(long, default_value = "none")]
    noise: String,
    /// Seed of every random stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo samples.
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn sampling(&self) -> Sampling {
        Sampling { seed: self.seed, samples: self.samples, ..Sampling::default() }
    }
}

/// Sources in command-line order, whichever flag introduced them.
fn sources(args: &SourceArgs, matches: Option<&ArgMatches>) -> CliResult<Vec<Source>> {
    let state = InitialState::parse(&args.state)?;
    let indices = |id: &str, len: usize| -> Vec<usize> {
        matches.and_then(|m| m.indices_of(id)).map(|i| i.collect()).unwrap_or_else(|| (0..len).collect())
    };
    let mut found = Vec::new();
    for (i, p) in indices("circuits", args.circuits.len()).into_iter().zip(&args.circuits) {
        found.push((i, Source::circuit_file(p, state)?));
    }
    for (i, p) in indices("schedules", args.schedules.len()).into_iter().zip(&args.schedules) {
        found.push((i, Source::schedule_file(p, state)?));
    }
    for (i, m) in indices("models", args.models.len()).into_iter().zip(&args.models) {
        found.push((i, Source::model(m)?));
    }
    found.sort_by_key(|(i, _)| *i);
    Ok(found.into_iter().map(|(_, s)| s).collect())
}

fn single(mut sources: Vec<Source>) -> CliResult<Source> {
    match sources.len() {
        1 => Ok(sources.remove(0)),
        0 => Err(CliError::input("give one of --circuit, --schedule or --model")),
        k => Err(CliError::input(format!("expected one compilation, got {k}"))),
    }
}

fn run(cli: Cli, matches: &ArgMatches) -> CliResult<()> {
    let sub = matches.subcommand().map(|(_, m)| m);
    match cli.command {
        Command::Analyze { source, common, methods, cost } => {
            let config = AnalysisConfig {
                source: single(sources(&source, sub)?)?,
                noise: NoiseModel::parse(&common.noise)?,
                methods,
                sampling: common.sampling(),
                cost,
            };
            let report = run_analyze(&config)?;
            emit(&to_json_text(&report)?, common.out.as_deref())
        }
        Command::Compare { source, common } => {
            let report = run_compare(&sources(&source, sub)?, &NoiseModel::parse(&common.noise)?)?;
            emit(&to_json_text(&report)?, common.out.as_deref())
        }
        Command::Sweep { source, common, param, values, metrics, loglog_fit } => {
            let config = SweepConfig {
                sources: sources(&source, sub)?,
                noise: NoiseModel::parse(&common.noise)?,
                param: param.parse::<SweepParam>()?,
                values: parse_values(&values)?,
                metrics,
                sampling: common.sampling(),
                loglog_fit,
            };
            emit(&run_sweep(&config)?.to_csv()?, common.out.as_deref())
        }
        Command::Tradeoff { source, common, cost } => {
            let report =
                run_tradeoff(&single(sources(&source, sub)?)?, &NoiseModel::parse(&common.noise)?, cost.as_deref())?;
            emit(&to_json_text(&report)?, common.out.as_deref())
        }
        Command::Repro { target, out } => {
            run_repro(target, &out)?;
            eprintln!("all checks passed; tables written to {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    // Usage errors are input errors (exit 1); clap's own default of 2 is reserved for
    // numerical failures.
    let parsed = Cli::command().try_get_matches().and_then(|m| Cli::from_arg_matches(&m).map(|cli| (cli, m)));
    let (cli, matches) = match parsed {
        Ok(pair) => pair,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let workers = cli.workers;
    match with_workers(workers, || run(cli, &matches)).and_then(|r| r) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
