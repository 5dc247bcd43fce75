use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stablemix_cli::{exit, exit_code, parse_config, run_experiment, thread_cap, Command, ExperimentConfig};

#[derive(Parser)]
#[command(name = "stablemix", version, about = "Mixed stable/Brownian SDE laboratory")]
struct Cli {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Top,
}

#[derive(Subcommand)]
enum Top {
    /// Admissibility inequalities for the configured indices.
    Check {
        #[command(subcommand)]
        what: CheckCmd,
    },
    /// Two-sided bound table for the stable kernel.
    VerifyKernels,
    Pide {
        #[command(subcommand)]
        what: PideCmd,
    },
    Zvonkin {
        #[command(subcommand)]
        what: ZvonkinCmd,
    },
    Sim {
        #[command(subcommand)]
        what: SimCmd,
    },
    Mc {
        #[command(subcommand)]
        what: McCmd,
    },
}

#[derive(Subcommand)]
enum CheckCmd {
    Conditions,
}

#[derive(Subcommand)]
enum PideCmd {
    /// Drift-free solve for a Gaussian source.
    Solve,
    /// Picard iteration with the configured drift.
    Picard,
}

#[derive(Subcommand)]
enum ZvonkinCmd {
    Build,
}

#[derive(Subcommand)]
enum SimCmd {
    Euler,
    Transformed,
    Uniqueness,
    Kinetic,
}

#[derive(Subcommand)]
enum McCmd {
    Krylov,
    Khasminskii,
    Girsanov,
}

fn command(top: &Top) -> Command {
    match top {
        Top::Check { what: CheckCmd::Conditions } => Command::CheckConditions,
        Top::VerifyKernels => Command::VerifyKernels,
        Top::Pide { what: PideCmd::Solve } => Command::PideSolve,
        Top::Pide { what: PideCmd::Picard } => Command::PidePicard,
        Top::Zvonkin { what: ZvonkinCmd::Build } => Command::ZvonkinBuild,
        Top::Sim { what: SimCmd::Euler } => Command::SimEuler,
        Top::Sim { what: SimCmd::Transformed } => Command::SimTransformed,
        Top::Sim { what: SimCmd::Uniqueness } => Command::SimUniqueness,
        Top::Sim { what: SimCmd::Kinetic } => Command::SimKinetic,
        Top::Mc { what: McCmd::Krylov } => Command::McKrylov,
        Top::Mc { what: McCmd::Khasminskii } => Command::McKhasminskii,
        Top::Mc { what: McCmd::Girsanov } => Command::McGirsanov,
    }
}

fn config_errors(errs: &[String]) -> ExitCode {
    eprintln!("invalid configuration:");
    for e in errs {
        eprintln!("  - {e}");
    }
    ExitCode::from(exit::CONFIG as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = command(&cli.cmd);
    match thread_cap() {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("error: {e}");
                return ExitCode::from(exit::OTHER as u8);
            }
        }
        Ok(None) => {}
        Err(e) => return config_errors(&[e]),
    }
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: reading {}: {e}", path.display());
                    return ExitCode::from(exit::IO as u8);
                }
            };
            match parse_config(&text, cmd) {
                Ok(c) => c,
                Err(errs) => return config_errors(&errs),
            }
        }
        None => {
            let c = ExperimentConfig::defaults(cmd);
            let errs = c.validate();
            if !errs.is_empty() {
                return config_errors(&errs);
            }
            c
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = cli.out {
        cfg.out = o;
    }
    match run_experiment(&cfg) {
        Ok(o) if o.check_failed => {
            eprintln!("{}: a verdict or oracle check failed; see {}", cmd.name(), cfg.out.display());
            ExitCode::from(exit::CHECK_FAILED as u8)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
