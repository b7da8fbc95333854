use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lielength_cli::config::*;
use lielength_cli::{run, CliError, CliResult};

#[derive(Parser)]
#[command(name = "lielength", version, about = "Length functions, quotient norms and coarse certificates for matrix Lie groups")]
struct Cli {
    /// Seed for every random sample; a fixed seed gives identical output.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Residual tolerance for certificates (absolute and relative).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Result file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exponential length brackets.
    El {
        #[command(subcommand)]
        action: ElAction,
    },
    /// Reduced exponential length.
    Rel {
        #[command(subcommand)]
        action: RelAction,
    },
    /// Product formula errors.
    Trotter(TrotterParams),
    /// Quotient norm of a circle-valued function.
    Cel {
        #[command(subcommand)]
        action: CelAction,
    },
    /// Schatten unitary groups.
    Schatten {
        #[command(subcommand)]
        action: SchattenAction,
    },
    /// Elementary groups.
    En {
        #[command(subcommand)]
        action: EnAction,
    },
    /// Maximality checks on a sampled metric space.
    Coarse(CoarseParams),
    /// Test batteries.
    Suite {
        #[command(subcommand)]
        action: SuiteAction,
    },
    /// Runs a JSON experiment config; command-line flags override it.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Subcommand)]
enum ElAction {
    Estimate(GroupTarget),
    Bracket(GroupTarget),
}

#[derive(Subcommand)]
enum RelAction {
    Estimate(GroupTarget),
}

#[derive(Subcommand)]
enum CelAction {
    Compute(InputParams),
}

#[derive(Subcommand)]
enum SchattenAction {
    Sandwich(SandwichParams),
    Chain(ChainParams),
    Witness(WitnessParams),
}

#[derive(Subcommand)]
enum EnAction {
    Identities(IdentityParams),
    Decompose(DecomposeParams),
    Hsdet(HsdetParams),
    Witness(UnboundedParams),
}

#[derive(Subcommand)]
enum SuiteAction {
    /// The full acceptance battery.
    Acceptance,
}

fn group_default(mut t: GroupTarget) -> GroupTarget {
    if t.group.is_none() && t.input.is_none() {
        t.group = GroupTarget::default().group;
    }
    t
}

fn config(cli: Cli) -> CliResult<ExperimentConfig> {
    let experiment = match cli.command {
        Command::El { action: ElAction::Estimate(t) } => Experiment::ElEstimate(group_default(t)),
        Command::El { action: ElAction::Bracket(t) } => Experiment::ElBracket(group_default(t)),
        Command::Rel { action: RelAction::Estimate(t) } => Experiment::RelEstimate(group_default(t)),
        Command::Trotter(p) => Experiment::Trotter(p),
        Command::Cel { action: CelAction::Compute(p) } => Experiment::CelCompute(p),
        Command::Schatten { action } => match action {
            SchattenAction::Sandwich(p) => Experiment::SchattenSandwich(p),
            SchattenAction::Chain(p) => Experiment::SchattenChain(p),
            SchattenAction::Witness(p) => Experiment::SchattenWitness(p),
        },
        Command::En { action } => match action {
            EnAction::Identities(p) => Experiment::EnIdentities(p),
            EnAction::Decompose(p) => Experiment::EnDecompose(p),
            EnAction::Hsdet(p) => Experiment::EnHsdet(p),
            EnAction::Witness(p) => Experiment::EnWitness(p),
        },
        Command::Coarse(p) => Experiment::Coarse(p),
        Command::Suite { action: SuiteAction::Acceptance } => Experiment::SuiteAcceptance,
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", config.display())))?;
            let mut cfg = ExperimentConfig::from_json(&text)?;
            override_globals(&mut cfg, cli.seed, cli.tol, cli.out, cli.format)?;
            return Ok(cfg);
        }
    };
    let mut cfg = ExperimentConfig::new(experiment);
    override_globals(&mut cfg, cli.seed, cli.tol, cli.out, cli.format)?;
    Ok(cfg)
}

fn override_globals(
    cfg: &mut ExperimentConfig,
    seed: Option<u64>,
    tol: Option<f64>,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
) -> CliResult<()> {
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = tol {
        if !(t > 0.0) {
            return Err(CliError::Usage("--tol must be positive".into()));
        }
        cfg.tol = t;
    }
    if out.is_some() {
        cfg.out = out;
    }
    if let Some(f) = format {
        cfg.format = f;
    }
    Ok(())
}

fn main() -> ExitCode {
    let outcome = config(Cli::parse()).and_then(|cfg| {
        let report = run(&cfg)?;
        report.write(cfg.format, cfg.out.as_deref())?;
        Ok(report.passed)
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
