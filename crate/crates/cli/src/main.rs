use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bcm_cli::{CliError, PipelineConfig, MEDIUM_FILE, RECON_FILE};
use bcm_core::Mode;
use clap::{Parser, Subcommand, ValueEnum};

// A closed pipe (e.g. `bcm inspect f | head`) is not an error.
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(name = "bcm", version, about = "Sound-speed recovery from boundary wave data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Pipeline config (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Dataset file (default: the configured name inside the output directory).
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Recorded in the resolved config; the pipeline itself is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the forward problems and write the trace dataset.
    Simulate,
    /// Invert a dataset; the true medium is not read.
    Reconstruct,
    /// Score a reconstruction against the true medium; exit code 5 below threshold.
    Validate {
        /// Reconstruction file (default: inside the output directory).
        #[arg(long)]
        reconstruction: Option<PathBuf>,
        /// Medium file (default: inside the output directory).
        #[arg(long)]
        medium: Option<PathBuf>,
    },
    /// Write CSV and PGM renderings of a reconstruction.
    Export {
        #[arg(long)]
        reconstruction: Option<PathBuf>,
    },
    /// Summarize an artifact file.
    Inspect { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    InverseData,
    Pseudo,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(dir) = cli.out {
        cfg.output.dir = dir;
    }
    if let Some(m) = cli.mode {
        cfg.mode = match m {
            ModeArg::InverseData => Mode::InverseData,
            ModeArg::Pseudo => Mode::Pseudo,
        };
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let dir = cfg.output.dir.clone();
    let dataset = cli.dataset.unwrap_or_else(|| dir.join(&cfg.output.dataset));
    match cli.command {
        Command::Simulate => {
            let mf = bcm_cli::simulate(&cfg)?;
            out!("{}", toml::to_string(&mf).map_err(|e| CliError::Input(e.to_string()))?);
        }
        Command::Reconstruct => {
            let r = bcm_cli::reconstruct(&cfg, &dataset)?;
            let last = r.report.per_xi.last();
            out!(
                "alpha {} masked {:.4} condition(T) {:.3e} slope {:.2}",
                r.report.alpha,
                r.report.masked_fraction,
                last.map_or(f64::NAN, |x| x.condition),
                r.report.condition_slope
            );
        }
        Command::Validate { reconstruction, medium } => {
            let recon = reconstruction.unwrap_or_else(|| dir.join(RECON_FILE));
            let medium = medium.unwrap_or_else(|| dir.join(MEDIUM_FILE));
            let v = bcm_cli::validate(&cfg, &recon, &medium)?;
            out!(
                "{} of {} nodes within {:.0}%: median {:.4} p90 {:.4}",
                v.stats.within, v.stats.nodes, 100.0 * v.stats.threshold, v.stats.median, v.stats.p90
            );
        }
        Command::Export { reconstruction } => {
            let recon = reconstruction.unwrap_or_else(|| dir.join(RECON_FILE));
            for p in bcm_cli::export(&cfg, &recon)? {
                out!("{}", p.display());
            }
        }
        Command::Inspect { file } => out!("{}", bcm_cli::inspect(&file)?.trim_end()),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bcm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
