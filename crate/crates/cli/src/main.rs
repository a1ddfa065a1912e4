//! `spinboson`: batch front end writing CSV/JSON plot data and a run manifest.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use spinboson::ed::GroundStateCache;
use spinboson::excitations::Theory;

use commands::{Engine, PhaseTheory};
use config::Config;
use error::CliError;
use manifest::Run;

#[derive(Debug, Parser)]
#[command(
    name = "spinboson",
    version,
    about = "Phase diagrams, bands, spectroscopy and circuit mapping of a spin-boson chain"
)]
struct Cli {
    /// JSON configuration; missing sections take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory receiving the artifacts and manifest.json.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for grid points; defaults to the machine parallelism.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Ground-state cache of the exact-diagonalization engine [default: <out>/cache].
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
enum TheoryArg {
    All,
    /// Mean field; its excitations are the spin waves.
    #[value(alias = "mean-field", alias = "spin-wave")]
    Mf,
    Dispersive,
    Ansatz,
    /// Exact diagonalization, phase diagram only.
    Ed,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// |<sx>| and |<a>| over a (g/w, w0/w) grid plus the critical lines.
    PhaseDiagram {
        #[arg(long, value_delimiter = ',', default_value = "all")]
        theory: Vec<TheoryArg>,
    },
    /// Excitation bands on the momentum grid of the configured chain.
    Bands {
        #[arg(long, value_delimiter = ',', default_value = "all")]
        theory: Vec<TheoryArg>,
    },
    /// Probe response of an open chain.
    Spectroscopy {
        #[arg(long, value_enum, default_value = "analytic")]
        engine: Engine,
        /// Number of qubits; defaults to the configured model.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Critical exponents z and z·nu from log-log fits.
    Exponents {
        #[arg(long, value_delimiter = ',', default_value = "all")]
        theory: Vec<TheoryArg>,
    },
    /// Critical cavity frequency of a circuit or of a bare g/w0.
    Circuit {
        #[arg(long)]
        g_rel: Option<f64>,
        /// Print the critical cavity in hertz instead of units of w0.
        #[arg(long)]
        si: bool,
    },
}

fn phase_theories(args: &[TheoryArg]) -> Vec<PhaseTheory> {
    let mut out = Vec::new();
    for a in args {
        let add: &[PhaseTheory] = match a {
            TheoryArg::All => &[PhaseTheory::MeanField, PhaseTheory::Dispersive, PhaseTheory::Ansatz],
            TheoryArg::Mf => &[PhaseTheory::MeanField],
            TheoryArg::Dispersive => &[PhaseTheory::Dispersive],
            TheoryArg::Ansatz => &[PhaseTheory::Ansatz],
            TheoryArg::Ed => &[PhaseTheory::Ed],
        };
        for t in add {
            if !out.contains(t) {
                out.push(*t);
            }
        }
    }
    out
}

fn band_theories(args: &[TheoryArg]) -> Result<Vec<Theory>, CliError> {
    let mut out = Vec::new();
    for a in args {
        let add: &[Theory] = match a {
            TheoryArg::All => &Theory::ALL,
            TheoryArg::Mf => &[Theory::SpinWave],
            TheoryArg::Dispersive => &[Theory::Dispersive],
            TheoryArg::Ansatz => &[Theory::Ansatz],
            TheoryArg::Ed => return Err(CliError::Config("theory: ed has no band or exponent output".into())),
        };
        for t in add {
            if !out.contains(t) {
                out.push(*t);
            }
        }
    }
    Ok(out)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(workers) = cli.workers {
        if workers == 0 {
            return Err(CliError::Config("workers: must be at least 1".into()));
        }
        // a second initialization only happens in-process and keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    }
    let config = Config::load(cli.config.as_deref())?;
    let cache = GroundStateCache::new(cli.cache_dir.clone().unwrap_or_else(|| cli.out.join("cache")));
    let resolved = serde_json::json!({ "options": &cli.command, "config": &config });
    let (name, mut run) = {
        let name = match &cli.command {
            Command::PhaseDiagram { .. } => "phase-diagram",
            Command::Bands { .. } => "bands",
            Command::Spectroscopy { .. } => "spectroscopy",
            Command::Exponents { .. } => "exponents",
            Command::Circuit { .. } => "circuit",
        };
        (name, Run::new(&cli.out, name, resolved)?)
    };
    let outcome = match &cli.command {
        Command::PhaseDiagram { theory } => commands::phase_diagram(&mut run, &config, &phase_theories(theory), &cache),
        Command::Bands { theory } => band_theories(theory).and_then(|t| commands::bands(&mut run, &config, &t)),
        Command::Spectroscopy { engine, n } => {
            commands::spectroscopy(&mut run, &config, *engine, n.unwrap_or(config.model.n_sites), &cache)
        }
        Command::Exponents { theory } => band_theories(theory).and_then(|t| commands::exponents(&mut run, &config, &t)),
        Command::Circuit { g_rel, si } => {
            commands::circuit(&mut run, &config, *g_rel, *si).map(|line| println!("{line}"))
        }
    };
    // numerical failures still leave their partial artifacts described by a manifest
    if outcome.is_ok() || matches!(outcome, Err(CliError::Numerical(_))) {
        let manifest = run.finish()?;
        eprintln!(
            "{name}: wrote {} files to {}",
            manifest.outputs.len() + 1,
            cli.out.display()
        );
    }
    outcome
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
