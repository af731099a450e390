use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dout::commands::{cmd_exponents, cmd_figure, cmd_sweep, parse_pair, parse_triple};
use dout::error::Result;

#[derive(Parser)]
#[command(
    name = "dout",
    version,
    about = "Distortion outage of Gaussian sources over MIMO block-fading channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print closed-form SNR exponents for a scenario.
    Exponents {
        scenario: PathBuf,
        /// Emit `quantity,value,detail` CSV instead of a text report.
        #[arg(long)]
        csv: bool,
        /// Tabulate exponents against the bandwidth ratio on `lo,hi,step`.
        #[arg(long, value_name = "LO,HI,STEP")]
        b_grid: Option<String>,
    },
    /// Run the Monte Carlo sweep and write `<out>.csv`.
    Sweep {
        scenario: PathBuf,
        /// Output prefix; `.csv` is appended.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads. Falls back to DOUT_WORKERS, then the core count.
        #[arg(long)]
        workers: Option<usize>,
        /// Fit the log-log slope over rows in `lo,hi` dB.
        #[arg(long, value_name = "LO,HI")]
        window_db: Option<String>,
        /// Confidence level of the Clopper-Pearson intervals.
        #[arg(long)]
        confidence: Option<f64>,
    },
    /// Render one or more CSV tables as a single SVG figure.
    Figure {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Exponents {
            scenario,
            csv,
            b_grid,
        } => {
            let grid = b_grid.map(|g| parse_triple(&g, "--b-grid")).transpose()?;
            print!("{}", cmd_exponents(&scenario, csv, grid)?);
        }
        Command::Sweep {
            scenario,
            out,
            workers,
            window_db,
            confidence,
        } => {
            let window = window_db
                .map(|w| parse_pair(&w, "--window-db"))
                .transpose()?;
            let (path, report) = cmd_sweep(&scenario, workers, &out, window, confidence)?;
            print!("{report}");
            println!("wrote {}", path.display());
        }
        Command::Figure { inputs, out } => {
            cmd_figure(&inputs, &out)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
