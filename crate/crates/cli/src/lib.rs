//! Experiment runner for the `stablemix` library.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, Command, ExperimentConfig};
pub use run::{run_experiment, Outcome};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const CONDITION: i32 = 3;
    pub const NO_CONVERGENCE: i32 = 4;
    pub const EXPLODED: i32 = 5;
    pub const IO: i32 = 6;
    /// The run finished but a Monte-Carlo verdict or oracle check failed.
    pub const CHECK_FAILED: i32 = 7;
}

/// Maps a library error anywhere in the chain to an exit code.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    use stablemix::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::ConditionViolated { .. } => exit::CONDITION,
                E::ContractionFailed { .. }
                | E::MaxIterExceeded { .. }
                | E::GradientTooLarge(_)
                | E::NotContractive(_)
                | E::KhasminskiiConstant { .. } => exit::NO_CONVERGENCE,
                E::Exploded(_) => exit::EXPLODED,
                E::Io(_) | E::Format(_) => exit::IO,
                E::AlphaOutOfRange(_) | E::OutOfRange { .. } | E::InvalidGrid(_) => exit::CONFIG,
                _ => exit::OTHER,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() || cause.downcast_ref::<csv::Error>().is_some() {
            return exit::IO;
        }
    }
    exit::OTHER
}

/// Reads `STABLEMIX_THREADS`; `None` when unset.
pub fn thread_cap() -> Result<Option<usize>, String> {
    match std::env::var("STABLEMIX_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("STABLEMIX_THREADS must be a positive integer, got {s:?}")),
        },
    }
}
