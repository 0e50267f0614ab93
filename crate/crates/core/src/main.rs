use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use overlap_entangle::cli::{self, CliError, OutputFormat};
use overlap_entangle::tomography::MleOptions;

#[derive(Parser)]
#[command(
    name = "overlap-entangle",
    version,
    about = "Simulate, scan and reconstruct postselected spin states of identical particles"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one configuration and write the report and density matrix.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Overrides the tomography seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Sweep one parameter (g, L<i>, or a GHZ amplitude) over an inclusive range.
    Scan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
    },
    /// Maximum-likelihood reconstruction from a counts file.
    Reconstruct {
        #[arg(long)]
        counts: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn dispatch(args: Args) -> Result<String, CliError> {
    match args.command {
        Command::Run {
            config,
            out_dir,
            seed,
            format,
        } => {
            let report = cli::run(&config, &cli::RunOptions { out_dir, seed, format })?;
            Ok(cli::render(&report, format))
        }
        Command::Scan {
            config,
            param,
            from,
            to,
            steps,
            out_dir,
            format,
        } => {
            let rows = cli::scan(
                &config,
                &cli::ScanOptions {
                    parameter: param,
                    from,
                    to,
                    steps,
                    out_dir,
                    format,
                },
            )?;
            Ok(cli::render_scan(&rows, format))
        }
        Command::Reconstruct {
            counts,
            out_dir,
            format,
            max_iters,
            tol,
        } => {
            let mut mle = MleOptions::default();
            if let Some(m) = max_iters {
                mle.max_iters = m;
            }
            if let Some(t) = tol {
                mle.tol = t;
            }
            let report = cli::reconstruct(&counts, &cli::ReconstructOptions { out_dir, format, mle })?;
            Ok(cli::render(&report, format))
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Args::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::from(cli::EXIT_OK as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code as u8)
        }
    }
}
