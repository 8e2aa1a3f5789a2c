use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use exact_rwa::drive::Mutation;
use exact_rwa::functional::{DomainPreset, IntegrandKind};
use exact_rwa_cli::config::OutputFormat;
use exact_rwa_cli::{cmd_functional, cmd_minimize, cmd_trajectory, cmd_verify, CliError, Outcome, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "exact-rwa", version, about = "Effective-Hamiltonian trajectories, path functionals and variational tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; built-in defaults otherwise.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Time window: `half` or `full`.
    #[arg(long, global = true, value_parser = parse_domain)]
    domain: Option<DomainPreset>,
    /// fI, fI-simple, fII, fII-simple or fII-simple-sq.
    #[arg(long, global = true, value_parser = parse_integrand)]
    integrand: Option<IntegrandKind>,
    /// Effective-series order.
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(0..=7))]
    order: Option<u8>,
    /// Highest gauge harmonic of the trial family.
    #[arg(long = "M", global = true)]
    beta_modes: Option<usize>,
    /// Highest time harmonic of the trial family.
    #[arg(long = "N", global = true)]
    time_modes: Option<usize>,
    /// Restrict the trial family to reflection-symmetric deformations.
    #[arg(long, global = true)]
    symmetry: Option<Toggle>,
    /// Worker threads for grid sampling.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Corrupts the effective series (verification self-test).
    #[arg(long, global = true, hide = true)]
    mutate: Option<MutationArg>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Bloch trajectories of |0> as CSV.
    Trajectory,
    /// Evaluate one path functional.
    Functional,
    /// Variational minimization with a significance verdict.
    Minimize,
    /// Stroboscopic, symmetry and SU(2) checks.
    Verify,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Toggle {
    On,
    Off,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Format {
    Csv,
    Record,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum MutationArg {
    None,
    FlipSecondOrder,
}

fn parse_domain(s: &str) -> Result<DomainPreset, String> {
    s.parse().map_err(|e: exact_rwa::Error| e.to_string())
}

fn parse_integrand(s: &str) -> Result<IntegrandKind, String> {
    s.parse().map_err(|e: exact_rwa::Error| e.to_string())
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(d) = cli.domain {
        config.domain.preset = d;
    }
    if let Some(k) = cli.integrand {
        config.functional.kind = k;
    }
    if let Some(o) = cli.order {
        config.functional.order = o.into();
    }
    if let Some(m) = cli.beta_modes {
        config.variational.beta_modes = m;
    }
    if let Some(n) = cli.time_modes {
        config.variational.time_modes = n;
    }
    if let Some(s) = cli.symmetry {
        config.variational.symmetry = matches!(s, Toggle::On);
    }
    if let Some(f) = cli.format {
        config.output.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Record => OutputFormat::Record,
        };
    }
    if let Some(p) = &cli.out {
        config.output.path = Some(p.clone());
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("`--threads`: {e}")))?;
    }
    let config = build_config(cli)?;
    let mutation = match cli.mutate {
        Some(MutationArg::FlipSecondOrder) => Mutation::FlipSecondOrder,
        _ => Mutation::None,
    };
    let outcome = match cli.command {
        Command::Trajectory => cmd_trajectory(&config)?,
        Command::Functional => cmd_functional(&config)?,
        Command::Minimize => cmd_minimize(&config)?,
        Command::Verify => cmd_verify(&config, mutation)?,
    };
    match &config.output.path {
        Some(path) => std::fs::write(path, &outcome.output)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(outcome.output.as_bytes()).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(outcome) => ExitCode::from(outcome.status.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
