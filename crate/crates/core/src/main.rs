use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, LevelFilter};

use linkflow::correction::{self, CorrectionConfig, L1Solver};
use linkflow::error::{Error, Result};
use linkflow::fixtures;
use linkflow::format::{self, Scenario};
use linkflow::recoverability::{self, CertifyConfig, RecoverabilityMethod};
use linkflow::report::{self, CorrectionReport, RecoverabilitySummary};
use linkflow::synthetic::{self, SyntheticSpec};

/// Corrects inconsistent traffic link counts and certifies which links can be
/// recovered exactly.
///
/// INPUT arguments accept a file path or the name of a bundled fixture
/// (toy, toy-example1, toy-example2, parallel, parallel-highway, i405).
#[derive(Debug, Parser)]
#[command(name = "linkflow", version)]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate every link flow from the observed counts.
    Correct(CorrectArgs),
    /// Compute the recoverability of a subset of monitored links.
    Recoverability(RecoverabilityArgs),
    /// Write a random network with corrupted observations and its ground truth.
    Generate(GenerateArgs),
    /// Score a machine-readable correction report against ground truth.
    Validate(ValidateArgs),
    /// List the bundled fixtures, or write them to a directory.
    Fixtures(FixturesArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportFormat {
    Table,
    #[value(alias = "json")]
    MachineReadable,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
    format: ReportFormat,
}

#[derive(Debug, Args)]
struct CorrectArgs {
    input: String,
    /// ADMM penalty parameter.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 50_000)]
    max_iters: usize,
    /// Relative primal and dual residual tolerance.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Keep delta fixed instead of rebalancing it when ADMM stalls.
    #[arg(long)]
    fixed_delta: bool,
    /// Round estimates to whole vehicles (only when every count is an integer).
    #[arg(long, overrides_with = "no_round")]
    round: bool,
    #[arg(long, overrides_with = "round")]
    no_round: bool,
    /// Solve the l1 problem exactly with the LP solver instead of ADMM.
    #[arg(long)]
    oracle: bool,
    /// Skip the LP cross-check of the ADMM solution.
    #[arg(long)]
    no_cross_check: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct RecoverabilityArgs {
    input: String,
    /// Comma-separated link ids.
    #[arg(long, value_delimiter = ',', required = true)]
    subset: Vec<String>,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    /// Seed for the random restart directions.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use only the exact sign-pattern LP oracle.
    #[arg(long, conflicts_with = "no_oracle")]
    oracle: bool,
    /// Use only inverse power iteration.
    #[arg(long)]
    no_oracle: bool,
    /// Cap on base sets enumerated for the stability constant.
    #[arg(long, default_value_t = 10_000)]
    lambda_limit: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 9)]
    nodes: usize,
    #[arg(long, default_value_t = 18)]
    links: usize,
    #[arg(long, default_value_t = 15.0 / 18.0)]
    monitored_fraction: f64,
    #[arg(long, default_value_t = 2)]
    corrupt: usize,
    #[arg(long, default_value_t = 5_000.0)]
    magnitude_min: f64,
    #[arg(long, default_value_t = 20_000.0)]
    magnitude_max: f64,
    #[arg(long, default_value_t = 20.0)]
    noise_sigma: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Network file to write (stdout when absent).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Ground-truth sidecar to write.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Machine-readable report written by `correct`.
    report: PathBuf,
    /// Ground-truth sidecar; defaults to the bundled truth of a matching fixture.
    #[arg(long)]
    truth: Option<String>,
    /// Comma-separated link ids for the error-bound check.
    #[arg(long, value_delimiter = ',')]
    subset: Option<Vec<String>>,
    #[arg(long, default_value_t = 10_000)]
    lambda_limit: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct FixturesArgs {
    /// Directory to write the fixture files into.
    #[arg(long)]
    export: Option<PathBuf>,
}

fn read_input(input: &str) -> Result<String> {
    let path = Path::new(input);
    if path.exists() {
        return Ok(fs::read_to_string(path)?);
    }
    match fixtures::fixture(input) {
        Some(f) => {
            info!("using bundled fixture {}", f.name);
            Ok(f.document.to_owned())
        }
        None => Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{input}: no such file or bundled fixture"),
        ))),
    }
}

fn load(input: &str) -> Result<Scenario> {
    format::parse_network(&read_input(input)?)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run_correct(args: CorrectArgs) -> Result<()> {
    let scenario = load(&args.input)?;
    let instance = scenario.into_instance()?;
    let mut cfg = CorrectionConfig::default();
    cfg.admm.delta = args.delta;
    cfg.admm.max_iters = args.max_iters;
    cfg.admm.primal_tol = args.tol;
    cfg.admm.dual_tol = args.tol;
    if args.fixed_delta {
        cfg.admm.adapt_after = None;
    }
    cfg.round = args.round || !args.no_round;
    cfg.cross_check = !args.no_cross_check;
    if args.oracle {
        cfg.solver = L1Solver::Exact;
    }
    let result = correction::correct_flows(
        &instance.network,
        &instance.monitored,
        &instance.observation,
        &cfg,
    )?;
    if !result.converged() {
        log::warn!("ADMM stopped at the iteration cap; reporting the best iterate");
    }
    if result.possibly_nonunique() {
        log::warn!(
            "the l1 minimizer is not unique; the estimate is one of several optimal solutions"
        );
    }
    let rep = CorrectionReport::new(
        &instance.network,
        &instance.monitored,
        &instance.observation,
        &result,
    );
    let text = match args.out.format {
        ReportFormat::Table => rep.to_table(),
        ReportFormat::MachineReadable => rep.to_json(),
    };
    emit(&args.out.output, &text)
}

fn run_recoverability(args: RecoverabilityArgs) -> Result<()> {
    let scenario = load(&args.input)?;
    let subset = scenario.network.link_indices(&args.subset)?;
    let mut cfg = CertifyConfig {
        lambda_limit: args.lambda_limit,
        ..CertifyConfig::default()
    };
    cfg.inverse_power.restarts = args.restarts;
    cfg.inverse_power.seed = args.seed;
    cfg.method = if args.oracle {
        RecoverabilityMethod::Exact
    } else if args.no_oracle {
        RecoverabilityMethod::InversePower
    } else {
        RecoverabilityMethod::Auto
    };
    let r = recoverability::certify(&scenario.network, &scenario.monitored, &subset, &cfg)?;
    let summary = RecoverabilitySummary::new(&scenario.network, &r);
    let text = match args.out.format {
        ReportFormat::Table => summary.to_text(),
        ReportFormat::MachineReadable => summary.to_json(),
    };
    emit(&args.out.output, &text)
}

fn run_generate(args: GenerateArgs) -> Result<()> {
    let spec = SyntheticSpec {
        node_count: args.nodes,
        link_count: args.links,
        monitored_fraction: args.monitored_fraction,
        corrupt_count: args.corrupt,
        corruption_magnitude_range: (args.magnitude_min, args.magnitude_max),
        noise_sigma: args.noise_sigma,
        seed: args.seed,
    };
    let g = synthetic::generate(&spec)?;
    let s = &g.scenario;
    emit(
        &args.output,
        &format::serialize_network(&s.network, &s.monitored, s.observation.as_ref()),
    )?;
    if let Some(p) = &args.truth {
        fs::write(p, g.truth.to_json(&s.network))?;
    }
    Ok(())
}

fn run_validate(args: ValidateArgs) -> Result<()> {
    let rep = CorrectionReport::from_json(&fs::read_to_string(&args.report)?)?;
    let scenario = rep.network.to_model()?;
    let estimate = rep.estimate(&scenario.network)?;
    let truth_text = match &args.truth {
        Some(t) if Path::new(t).exists() => fs::read_to_string(t)?,
        Some(t) => fixtures::fixture(t)
            .and_then(|f| f.truth)
            .ok_or_else(|| {
                Error::MissingGroundTruth(format!("{t}: no such file or bundled ground truth"))
            })?
            .to_owned(),
        None => rep
            .network
            .name
            .as_deref()
            .and_then(fixtures::fixture)
            .and_then(|f| f.truth)
            .ok_or_else(|| {
                Error::MissingGroundTruth("pass --truth with a ground-truth file".into())
            })?
            .to_owned(),
    };
    let truth = format::parse_truth(&truth_text, &scenario.network)?;
    let subset = args
        .subset
        .as_ref()
        .map(|ids| scenario.network.link_indices(ids))
        .transpose()?;
    let cfg = CertifyConfig {
        lambda_limit: args.lambda_limit,
        ..CertifyConfig::default()
    };
    let v = report::validate_estimate(&scenario, &estimate, &truth.flows, subset.as_deref(), &cfg)?;
    let text = match args.out.format {
        ReportFormat::Table => v.to_text(),
        ReportFormat::MachineReadable => v.to_json(),
    };
    emit(&args.out.output, &text)
}

fn run_fixtures(args: FixturesArgs) -> Result<()> {
    match args.export {
        None => {
            for f in fixtures::FIXTURES {
                let s = f.scenario()?;
                println!(
                    "{:<18} {} nodes, {} links, {} monitored{}",
                    f.name,
                    s.network.node_count(),
                    s.network.link_count(),
                    s.monitored.len(),
                    if f.truth.is_some() {
                        ", ground truth"
                    } else {
                        ""
                    }
                );
            }
        }
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            for f in fixtures::FIXTURES {
                fs::write(dir.join(format!("{}.json", f.name)), f.document)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();

    let res = match cli.command {
        Command::Correct(a) => run_correct(a),
        Command::Recoverability(a) => run_recoverability(a),
        Command::Generate(a) => run_generate(a),
        Command::Validate(a) => run_validate(a),
        Command::Fixtures(a) => run_fixtures(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
