//! `dirac-spectral`: spectral data for a Dirac system on `[0, pi]` with a
//! spectral parameter in the boundary condition, and the way back.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{Check, Context, Failure};
use config::Config;

#[derive(Parser)]
#[command(name = "dirac-spectral", version, about = "Direct and inverse spectral problems for Dirac systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute eigenvalues and normalizing numbers; writes spectral.json.
    Direct(Common),
    /// Reconstruct the potential and boundary parameters from spectral data.
    Inverse {
        #[command(flatten)]
        common: Common,
        /// Spectral-data JSON (overrides `input.path`).
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
    },
    /// Direct then inverse, compared against the known potential.
    Roundtrip(Common),
    /// Run expansion-theory checks.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Checks to run, comma separated.
        #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
        check: Vec<CheckArg>,
    },
}

#[derive(Args)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Omit the timestamp field from JSON reports.
    #[arg(long)]
    no_timestamp: bool,
    /// Truncation index N.
    #[arg(short = 'N', value_name = "N")]
    n: Option<usize>,
    /// Grid intervals M.
    #[arg(short = 'M', value_name = "M")]
    m: Option<usize>,
    /// How F is assembled.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Override a configuration key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    #[value(name = "a_form")]
    AForm,
    #[value(name = "direct_sum")]
    DirectSum,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckArg {
    Parseval,
    Expansion,
    Zerosum,
    Hadamard,
    All,
}

impl Common {
    fn context(&self) -> Result<Context, Failure> {
        let mut config = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        for pair in &self.set {
            config.set_pair(pair)?;
        }
        if let Some(n) = self.n {
            config.set("N", &n.to_string())?;
        }
        if let Some(m) = self.m {
            config.set("M", &m.to_string())?;
        }
        if let Some(mode) = self.mode {
            config.set("glm.mode", mode.to_possible_value().expect("no skipped variants").get_name())?;
        }
        let timestamp = if self.no_timestamp {
            None
        } else {
            Some(SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
        };
        Ok(Context { config, out: self.out.clone(), timestamp })
    }
}

fn checks(args: &[CheckArg]) -> Vec<Check> {
    let mut out: Vec<Check> = args
        .iter()
        .flat_map(|a| match a {
            CheckArg::All => Check::ALL.to_vec(),
            CheckArg::Parseval => vec![Check::Parseval],
            CheckArg::Expansion => vec![Check::Expansion],
            CheckArg::Zerosum => vec![Check::ZeroSum],
            CheckArg::Hadamard => vec![Check::Hadamard],
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Direct(c) => commands::cmd_direct(&c.context()?),
        Command::Inverse { common, input } => commands::cmd_inverse(&common.context()?, input.as_deref()),
        Command::Roundtrip(c) => commands::cmd_roundtrip(&c.context()?),
        Command::Verify { common, check } => commands::cmd_verify(&common.context()?, &checks(&check)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
