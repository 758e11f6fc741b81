//! Experiments behind the `kaon-bell` binary. Every command returns a
//! [`Table`]; the binary only parses arguments and writes the rendering.

pub mod commands;
pub mod table;

use std::path::PathBuf;

use thiserror::Error;

pub use commands::{cmd_cp_check, cmd_oscillation, cmd_scan, cmd_strangeness_opt, CpInput};
pub use table::{format_real, Cell, Format, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

impl From<kaon_bell::Error> for CliError {
    fn from(e: kaon_bell::Error) -> Self {
        use kaon_bell::Error as E;
        match e {
            E::IntegrationAccuracy { .. } | E::InvalidDensity(_) => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}
