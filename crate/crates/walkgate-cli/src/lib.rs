//! Command-line front end: parses a JSON configuration, dispatches to the
//! simulator, reduction, synthesis and verification commands, and emits
//! deterministic CSV/JSON artifacts.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{mode_name, needs_dt, Config, GateNameConfig, Mode};
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "walkgate",
    about = "Quantum gates as quantum walks: simulate, reduce, synthesize, verify"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GateArg {
    Z,
    H,
    Cz,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Exact,
    Full,
    Rwa,
    Resonant,
    Compare,
}

#[derive(Debug, Parser)]
pub struct CommonArgs {
    /// Configuration document.
    #[arg(short = 'c', long)]
    pub config: PathBuf,
    /// Output directory for artifacts.
    #[arg(short = 'o', long, default_value = "out")]
    pub out: PathBuf,
    /// Override simulation.mode.
    #[arg(long)]
    pub mode: Option<ModeArg>,
    /// Override simulation.dt.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Override simulation.coin_levels.
    #[arg(long)]
    pub coin_levels: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate the configured initial state and emit the trajectory.
    Simulate(CommonArgs),
    /// Apply a local graph reduction and emit the transformed graph.
    Reduce(CommonArgs),
    /// Synthesize gate parameters on the configured graph.
    Synthesize {
        gate: GateArg,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Synthesize and verify the configured gate, one walk per basis state.
    Verify(CommonArgs),
    /// Run all four propagation modes and report pairwise distances.
    Compare(CommonArgs),
    /// The coined walk on a line with a Hadamard coin.
    LineDemo {
        /// Output directory for artifacts.
        #[arg(short = 'o', long, default_value = "out")]
        out: PathBuf,
        /// Number of walk steps.
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
}

fn apply_overrides(config: &mut Config, args: &CommonArgs) -> Result<(), CliError> {
    if let Some(mode) = args.mode {
        config.simulation.mode = match mode {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Full => Mode::Full,
            ModeArg::Rwa => Mode::Rwa,
            ModeArg::Resonant => Mode::Resonant,
            ModeArg::Compare => Mode::Compare,
        };
    }
    if let Some(dt) = args.dt {
        if dt <= 0.0 {
            return Err(CliError::Usage("--dt must be positive".into()));
        }
        config.simulation.dt = Some(dt);
    }
    if let Some(levels) = args.coin_levels {
        if levels < 1 {
            return Err(CliError::Usage("--coin-levels must be at least 1".into()));
        }
        config.simulation.coin_levels = levels;
    }
    if needs_dt(config.simulation.mode) && config.simulation.dt.is_none() {
        return Err(CliError::Config(format!(
            "simulation.dt: required for mode '{}'",
            mode_name(config.simulation.mode)
        )));
    }
    Ok(())
}

fn load(args: &CommonArgs) -> Result<Config, CliError> {
    let text = fs::read_to_string(&args.config)?;
    let mut config = config::parse_config(&text)?;
    apply_overrides(&mut config, args)?;
    fs::create_dir_all(&args.out)?;
    Ok(config)
}

/// Run one subcommand; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Simulate(args) => load(args).and_then(|c| commands::simulate(&c, &args.out)),
        Command::Reduce(args) => load(args).and_then(|c| commands::reduce(&c, &args.out)),
        Command::Synthesize { gate, common } => load(common).and_then(|c| {
            let gate = match gate {
                GateArg::Z => GateNameConfig::Z,
                GateArg::H => GateNameConfig::H,
                GateArg::Cz => GateNameConfig::Cz,
            };
            commands::synthesize(&c, &common.out, gate)
        }),
        Command::Verify(args) => load(args).and_then(|c| commands::verify(&c, &args.out)),
        Command::Compare(args) => load(args).and_then(|c| commands::compare(&c, &args.out)),
        Command::LineDemo { out, steps } => fs::create_dir_all(out)
            .map_err(CliError::from)
            .and_then(|_| commands::line_demo(out, *steps)),
    };
    match outcome {
        Ok(()) => 0,
        Err(error) => {
            eprintln!("error: {error}");
            error.exit_code()
        }
    }
}

/// Parse argv and run; convenience for integration tests.
pub fn run_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => run(cli),
        Err(e) => {
            eprint!("{e}");
            10
        }
    }
}
