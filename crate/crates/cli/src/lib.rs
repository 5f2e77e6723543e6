//! Command-line driver for `adm-core`: config loading, CSV and SVG output,
//! and one function per subcommand.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod plot;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;
pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "adm",
    version,
    about = "Asynchronous delta modulation simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `out_dir` and $ADM_OUT_DIR.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the synthesis seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Suppress the summary on stdout.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the configured input as a trace file.
    Synth(Common),
    /// Encode the input with fixed thresholds.
    Encode(Common),
    /// Rebuild a staircase from an event file.
    Decode {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        events: PathBuf,
        /// Trace to score the reconstruction against.
        #[arg(long)]
        original: Option<PathBuf>,
    },
    /// RMSE over the threshold and refractory grid.
    Sweep(Common),
    /// Encode with the adaptive threshold and export its diagnostics.
    Adaptive(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Synth(c) | Command::Encode(c) | Command::Sweep(c) | Command::Adaptive(c) => c,
            Command::Decode { common, .. } => common,
        }
    }
}

/// Runs a parsed command; returns the summary lines.
pub fn run(cli: &Cli) -> Result<Vec<String>> {
    let common = cli.command.common();
    let mut config = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        config.override_seed(seed);
    }
    let out = config.out_dir(common.out.as_deref());
    let report = match &cli.command {
        Command::Synth(_) => commands::synth(&config, &out)?,
        Command::Encode(_) => commands::encode_cmd(&config, &out)?,
        Command::Decode {
            events, original, ..
        } => commands::decode(&config, events, original.as_deref(), &out)?,
        Command::Sweep(_) => commands::sweep(&config, &out)?.0,
        Command::Adaptive(_) => commands::adaptive(&config, &out)?,
    };
    Ok(report.lines)
}

/// Parses `args`, runs, prints, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(lines) => {
            if !cli.command.common().quiet {
                for line in lines {
                    println!("{line}");
                }
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
