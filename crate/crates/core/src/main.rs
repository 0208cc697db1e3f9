use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use floquet_steps::cli::{self, Averaging, Overrides, RunConfig, StateChoice};
use floquet_steps::Error;

/// Effective-Hamiltonian synthesis and adiabatic path analysis for
/// partition-parameterized step driving protocols.
#[derive(Parser)]
#[command(name = "floquet-steps", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory override.
    #[arg(long, global = true)]
    out: Option<String>,

    /// Grid resolution override for bands/scan.
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Path sample-count override.
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Driving frequency override.
    #[arg(long, global = true)]
    omega: Option<f64>,

    /// First-order model flavor: drop or keep the one-period drive average.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeFlag>,

    /// State convention for energy costs.
    #[arg(long, global = true, value_enum)]
    state: Option<StateFlag>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeFlag {
    Paper,
    Corrected,
}

#[derive(Clone, Copy, ValueEnum)]
enum StateFlag {
    Fixed,
    Ground,
}

#[derive(Subcommand)]
enum Command {
    /// Band surfaces E∓(alpha, beta) and the field-magnitude heatmap.
    Bands,
    /// Scan the parameter square for degeneracies.
    Scan,
    /// Bloch trajectory, geometric phase, and crossing analysis of a path.
    Path,
    /// Cross-check the polynomial, harmonic, and exact constructions.
    Verify,
    /// Slow/fast energy costs along a path.
    Energies,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::UnknownPath(_) => 2,
        Error::Io(_) => 3,
        _ => 4,
    }
}

fn run(cli: &Cli) -> Result<bool, Error> {
    let mut config = RunConfig::load(cli.config.as_deref())?;
    config.apply(&Overrides {
        out: cli.out.clone(),
        grid: cli.grid,
        samples: cli.samples,
        omega: cli.omega,
        mode: cli.mode.map(|m| match m {
            ModeFlag::Paper => Averaging::Paper,
            ModeFlag::Corrected => Averaging::Corrected,
        }),
        state: cli.state.map(|s| match s {
            StateFlag::Fixed => StateChoice::Fixed,
            StateFlag::Ground => StateChoice::Ground,
        }),
    });

    let files = match cli.command {
        Command::Bands => cli::cmd_bands(&config)?,
        Command::Scan => cli::cmd_scan(&config)?,
        Command::Path => cli::cmd_path(&config)?,
        Command::Energies => cli::cmd_energies(&config)?,
        Command::Verify => {
            let (files, passed) = cli::cmd_verify(&config)?;
            for f in &files {
                eprintln!("wrote {}", f.display());
            }
            return Ok(passed);
        }
    };
    for f in &files {
        eprintln!("wrote {}", f.display());
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
