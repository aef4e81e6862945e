use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use eavesdrop_cli::{cmd_coherent, cmd_incoherent, cmd_simulate, cmd_symmetrize, cmd_validate, CliError, Format};
use eavesdrop_core::optimizer::{Objective, OptimizationOptions};

#[derive(Parser)]
#[command(
    name = "eavesdrop",
    version,
    about = "Optimal eavesdropping on BB84: curves, simulation, validation"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Write output to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Success,
    Information,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal incoherent attack: information and success against D
    Incoherent {
        #[arg(long, default_value_t = 0.0)]
        d_min: f64,
        #[arg(long, default_value_t = 0.5)]
        d_max: f64,
        #[arg(long, default_value_t = 51)]
        steps: usize,
    },
    /// Optimal two-qubit coherent attack against the incoherent baseline
    Coherent {
        #[arg(long, default_value_t = 0.0)]
        d_min: f64,
        #[arg(long, default_value_t = 0.5)]
        d_max: f64,
        #[arg(long, default_value_t = 51)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::Success)]
        objective: ObjectiveArg,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
    },
    /// Monte Carlo replay of an attack file
    Simulate {
        attack_file: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Relation residuals and Gram eigenvalue of an attack file
    Validate { attack_file: PathBuf },
    /// Symmetrize an attack file over all protocol symmetries
    Symmetrize { attack_file: PathBuf },
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn run(args: Args) -> Result<(String, i32), CliError> {
    let format = match args.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let output = match args.command {
        Command::Incoherent { d_min, d_max, steps } => (cmd_incoherent(d_min, d_max, steps, format)?, 0),
        Command::Coherent {
            d_min,
            d_max,
            steps,
            objective,
            seed,
            restarts,
        } => {
            let objective = match objective {
                ObjectiveArg::Success => Objective::Success,
                ObjectiveArg::Information => Objective::Information,
            };
            let opts = OptimizationOptions {
                seed,
                restarts,
                ..OptimizationOptions::default()
            };
            (cmd_coherent(d_min, d_max, steps, objective, &opts, format)?, 0)
        }
        Command::Simulate {
            attack_file,
            shots,
            seed,
        } => (cmd_simulate(&read(&attack_file)?, shots, seed, format)?, 0),
        Command::Validate { attack_file } => {
            let r = cmd_validate(&read(&attack_file)?, format)?;
            (r.text, r.exit_code)
        }
        Command::Symmetrize { attack_file } => (cmd_symmetrize(&read(&attack_file)?, format)?, 0),
    };
    if let Some(path) = &args.out {
        std::fs::write(path, &output.0).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        return Ok((String::new(), output.1));
    }
    Ok(output)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(args) {
        Ok((text, code)) => {
            print!("{text}");
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
