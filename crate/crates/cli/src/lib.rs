//! Command-line front end: configuration loading, the four pipeline stages
//! and their output files.

pub mod config;
pub mod output;
pub mod run;
pub mod svg;

use thiserror::Error;

pub use config::{ConfigError, RunConfig, Scenario};
pub use run::{generate_bs, load_config, load_config_str, place_pops, run_full, validate, Outcome, Overrides};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNASSIGNABLE: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),

    /// Malformed input file other than the config.
    #[error("{0}")]
    Input(String),

    #[error("{0}")]
    Io(String),

    #[error(transparent)]
    Library(#[from] stochtopo::Error),

    /// A post-hoc check on the produced data failed.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Invariant(_) => EXIT_INVARIANT,
            _ => EXIT_INPUT,
        }
    }
}
