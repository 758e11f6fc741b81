use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use kaon_bell::config::ConfigFile;
use kaon_bell::optimize::ScanMode;
use kaon_bell_cli::{
    cmd_cp_check, cmd_oscillation, cmd_scan, cmd_strangeness_opt, CliError, CpInput, Format, Table,
};

#[derive(Debug, Parser)]
#[command(
    name = "kaon-bell",
    version,
    about = "Bell inequalities for entangled neutral kaons"
)]
struct Cli {
    /// Flat key-value file with physics and optimizer settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the optimizer seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,

    /// Append time columns converted to seconds.
    #[arg(long, global = true)]
    physical_units: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Equal,
    ZerosFirst,
    ZerosSecond,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// K⁰ → K⁰ / K̄⁰ probabilities and decayed weight over time.
    Oscillation {
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
    },
    /// Maximal CHSH value along a time pattern.
    Scan {
        #[arg(long, value_enum, default_value_t = Mode::Equal)]
        mode: Mode,
        #[arg(long, default_value_t = 2.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
    },
    /// Strangeness CHSH maximized over times and initial state.
    StrangenessOpt,
    /// The δ ≤ 0 inequality for a given δ or real ε.
    CpCheck {
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        epsilon: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let physics = file.physics()?;
    let mut optimizer = file.optimizer()?;
    if let Some(seed) = cli.seed {
        optimizer.seed = seed;
    }

    let table: Table = match cli.command {
        Command::Oscillation { t_max, step } => {
            cmd_oscillation(&physics, t_max, step, cli.physical_units)?
        }
        Command::Scan { mode, t_max, step } => {
            let mode = match mode {
                Mode::Equal => ScanMode::Equal,
                Mode::ZerosFirst => ScanMode::ZerosFirst,
                Mode::ZerosSecond => ScanMode::ZerosSecond,
            };
            cmd_scan(&physics, &optimizer, mode, t_max, step, cli.physical_units)?
        }
        Command::StrangenessOpt => cmd_strangeness_opt(&physics, &optimizer)?,
        Command::CpCheck { delta, epsilon } => {
            cmd_cp_check(&physics, CpInput::from_flags(delta, epsilon)?)?
        }
    };

    let format = match cli.format {
        OutputFormat::Csv => Format::Csv,
        OutputFormat::Json => Format::Json,
    };
    let text = table.render(format);
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kaon-bell: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
