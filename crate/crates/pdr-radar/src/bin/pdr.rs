//! Command-line front end for beampattern design and analysis.

use clap::{Parser, Subcommand};
use pdr_radar::commands::{
    self, cmd_baselines, cmd_design, cmd_evaluate, cmd_mismatch, load_config, AppError,
    MismatchMode,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "pdr",
    version,
    about = "Constant-modulus wideband beampattern design"
)]
struct Cli {
    /// Thread count for grid assembly/evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Design a constant-modulus waveform for the configured scenario.
    Design {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the orthogonality-penalty weight (0 disables).
        #[arg(long)]
        alpha: Option<f64>,
        /// Override the inner step size.
        #[arg(long)]
        beta: Option<f64>,
        /// Derive step size and regulariser from the descent bounds.
        #[arg(long)]
        safe_mode: bool,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Re-evaluate a stored waveform: pattern grid, deviation, ISL0.
    Evaluate {
        #[arg(long)]
        waveform: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Transmit-receive pattern under target direction mismatch.
    Mismatch {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        mode: MismatchMode,
        /// Mismatch offsets in degrees.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 10.0, 20.0])]
        deltas: Vec<f64>,
        /// Designed waveform file (required for mode 'pdr').
        #[arg(long)]
        waveform: Option<PathBuf>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Unconstrained least-squares bound and LFM reference metrics.
    Baselines {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Print the bundled case1/case2/case3 configs as JSON.
    Cases,
}

fn run(cli: Cli) -> Result<(), AppError> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| AppError::Config(format!("--threads: {e}")))?;
    }
    match cli.cmd {
        Cmd::Design {
            config,
            seed,
            alpha,
            beta,
            safe_mode,
            output_dir,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(a) = alpha {
                cfg.alpha = a;
            }
            if let Some(b) = beta {
                cfg.solver.beta = b;
            }
            if safe_mode {
                cfg.solver.safe_mode = true;
            }
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            let out = cmd_design(&cfg)?;
            println!(
                "deviation {:.2} dB, isl0 {:.2} dB, {} outer passes / {} inner steps in {:.2}s -> {}",
                out.summary.deviation_db,
                out.summary.isl0_db,
                out.summary.outer_passes,
                out.summary.total_inner_iterations,
                out.summary.wall_time_s,
                out.summary_path.display()
            );
            Ok(())
        }
        Cmd::Evaluate {
            waveform,
            config,
            output_dir,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            let s = cmd_evaluate(&waveform, &cfg)?;
            println!(
                "deviation {:.2} dB, isl0 {:.2} dB, unit_modulus {}",
                s.deviation_db, s.isl0_db, s.unit_modulus
            );
            Ok(())
        }
        Cmd::Mismatch {
            config,
            mode,
            deltas,
            waveform,
            output_dir,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            let s = cmd_mismatch(&cfg, mode, &deltas, waveform.as_deref())?;
            for (delta, peak, loss) in &s.peak_loss_db {
                println!(
                    "mode {} delta {:>5.1} deg: peak {:.4e}, loss {:.2} dB",
                    s.mode, delta, peak, loss
                );
            }
            Ok(())
        }
        Cmd::Baselines { config, output_dir } => {
            let mut cfg = load_config(&config)?;
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            let s = cmd_baselines(&cfg)?;
            println!(
                "{}: unconstrained {:.2} dB, lfm {:.2} dB (isl0 {:.2} dB)",
                s.scenario, s.unconstrained_deviation_db, s.lfm_deviation_db, s.lfm_isl0_db
            );
            Ok(())
        }
        Cmd::Cases => {
            println!("{}", commands::bundled_cases_json());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
