use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use splitfix::suites::Suite;
use splitfix_cli::{
    cmd_run, cmd_sweep, cmd_verify, CliError, ExitStatus, ExperimentConfig, Overrides,
};

#[derive(Parser)]
#[command(
    name = "splitfix",
    version,
    about = "Run and audit operator splitting experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment, writing a trace CSV and a JSON summary.
    Run(ConfigArgs),
    /// Run the config over its (gamma, lambda) grid.
    Sweep(ConfigArgs),
    /// Run property suites: proxes, reductions, fejer, lemmas, bounds.
    Verify {
        #[arg(value_parser = parse_suite)]
        suites: Vec<Suite>,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config (JSON, `schema: 1`).
    config: PathBuf,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        cfg.apply(&Overrides {
            gamma: self.gamma,
            lambda: self.lambda,
            seed: self.seed,
            max_iter: self.max_iter,
            tol: self.tol,
            out: self.out.clone(),
        });
        Ok(cfg)
    }
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: splitfix::Error| e.to_string())
}

fn exit(status: ExitStatus) -> ExitCode {
    ExitCode::from(status.code() as u8)
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("error: {e}");
    exit(ExitStatus::ConfigError)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => match args.load().and_then(|c| cmd_run(&c)) {
            Ok((status, s)) => {
                println!(
                    "{}: {} after {} iterations, residual {:e}, rate {}",
                    s.algorithm,
                    s.status,
                    s.iterations,
                    s.final_residual,
                    s.empirical_rate.map_or("n/a".into(), |r| format!("{r:.6}"))
                );
                exit(status)
            }
            Err(e) => fail(e),
        },
        Command::Sweep(args) => match args.load().and_then(|c| cmd_sweep(&c)) {
            Ok((status, rows)) => {
                println!("{} grid points", rows.len());
                exit(status)
            }
            Err(e) => fail(e),
        },
        Command::Verify { suites } => match cmd_verify(&suites, &mut std::io::stdout()) {
            Ok((status, _)) => exit(status),
            Err(e) => fail(CliError::Io(e.to_string())),
        },
    }
}
