//! `cvqit` — batch front-end for the continuous-variable quantum
//! information toolkit.
//!
//! Every command is a pure function of its configuration and seed: the same
//! flags (or config file) and the same `--seed` produce byte-identical
//! output. Parameters resolve as CLI flag → config-file value → documented
//! default; the default seed is 7. Results are emitted as CSV (data only)
//! or JSON (with a metadata block echoing the effective configuration).
//!
//! Exit codes: 0 success, 1 numeric failure or regression mismatch, 2 usage
//! error. `CVQIT_THREADS` caps the worker-thread count.

mod commands;
mod config;
mod regress;
mod table;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use config::DEFAULT_SEED;
use table::ResultTable;

/// Error category that maps to exit code 2 (invalid configuration or
/// arguments); everything else exits with code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// RFC-4180-style CSV, header plus numeric rows.
    Csv,
    /// Pretty JSON including the metadata block.
    Json,
}

/// Batch front-end: experiment configs, table emission, deterministic
/// seeds, golden-file regression.
#[derive(Parser)]
#[command(name = "cvqit", version, about, propagate_version = true)]
struct Cli {
    /// JSON config file with flat per-command sections ("qkd",
    /// "broadcast.ptilde", …); flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Seed for stochastic commands (default 7).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Key-distribution acceptance window and protocol efficiency.
    Qkd(commands::QkdArgs),
    /// Tripartite broadcast protocol data.
    Broadcast {
        #[command(subcommand)]
        cmd: BroadcastCmd,
    },
    /// Bit correlations of two-mode states.
    Qcorr {
        #[command(subcommand)]
        cmd: QcorrCmd,
    },
    /// Atom-light interface pipelines.
    Atomlight {
        #[command(subcommand)]
        cmd: AtomlightCmd,
    },
    /// State-algebra summary of a two-mode standard-form state.
    Core(commands::CoreArgs),
    /// Re-run the registered configurations against golden files.
    Regress(RegressArgs),
}

#[derive(Subcommand)]
enum BroadcastCmd {
    /// Conditional probability p̃ over an (x₀, Δ) grid.
    Ptilde(commands::BroadcastPtildeArgs),
    /// Feasible entanglement range over an (x₀/√n, Δ/√n) grid.
    Region(commands::BroadcastRegionArgs),
    /// One seeded protocol execution.
    Run(commands::BroadcastRunArgs),
}

#[derive(Subcommand)]
enum QcorrCmd {
    /// Q versus negativity along a one-parameter family.
    Curve(commands::QcorrCurveArgs),
    /// Scatter over random two-mode Gaussian states.
    Scatter(commands::QcorrScatterArgs),
}

#[derive(Subcommand)]
enum AtomlightCmd {
    /// Standard form of the post-measurement two-sample state.
    Epr(commands::AtomEprArgs),
    /// Entanglement versus the second coupling, through the erasing point.
    Eraser(commands::AtomEraserArgs),
    /// GHZ-type register variances and separability test.
    Ghz(commands::AtomGhzArgs),
    /// Cluster-variable variances on a path graph.
    Cluster(commands::AtomClusterArgs),
}

/// Golden-file regression options.
#[derive(clap::Args)]
struct RegressArgs {
    /// Directory holding the golden CSV files.
    #[arg(long, default_value = "goldens")]
    golden_dir: PathBuf,
    /// Rewrite the golden files from the current build.
    #[arg(long)]
    update: bool,
    /// Restrict to a single registered table.
    #[arg(long)]
    only: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.chain().any(|e| e.is::<UsageError>()) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// Caps the global worker pool at `CVQIT_THREADS` when set.
fn init_threads() {
    if let Ok(value) = std::env::var("CVQIT_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            if threads > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let section_key = section_key(&cli.command);
    let mut src = config::load_section(cli.config.as_deref(), section_key)?;
    let seed = match cli.seed {
        Some(s) => s,
        None => src.u64("seed", None, DEFAULT_SEED)?,
    };

    let table = match &cli.command {
        Command::Qkd(args) => commands::qkd(args, &mut src)?,
        Command::Broadcast { cmd } => match cmd {
            BroadcastCmd::Ptilde(args) => commands::broadcast_ptilde(args, &mut src)?,
            BroadcastCmd::Region(args) => commands::broadcast_region(args, &mut src)?,
            BroadcastCmd::Run(args) => commands::broadcast_run(args, &mut src, seed)?,
        },
        Command::Qcorr { cmd } => match cmd {
            QcorrCmd::Curve(args) => commands::qcorr_curve(args, &mut src)?,
            QcorrCmd::Scatter(args) => commands::qcorr_scatter(args, &mut src, seed)?,
        },
        Command::Atomlight { cmd } => match cmd {
            AtomlightCmd::Epr(args) => commands::atomlight_epr(args, &mut src, seed)?,
            AtomlightCmd::Eraser(args) => commands::atomlight_eraser(args, &mut src, seed)?,
            AtomlightCmd::Ghz(args) => commands::atomlight_ghz(args, &mut src, seed)?,
            AtomlightCmd::Cluster(args) => commands::atomlight_cluster(args, &mut src, seed)?,
        },
        Command::Core(args) => commands::core_summary(args, &mut src)?,
        Command::Regress(args) => {
            let report = regress::run(&args.golden_dir, args.update, args.only.as_deref())?;
            for line in &report.lines {
                println!("{line}");
            }
            if report.failures > 0 {
                anyhow::bail!("{} golden table(s) drifted", report.failures);
            }
            return Ok(());
        }
    };
    emit(&table, cli.format, cli.output.as_deref())
}

fn section_key(command: &Command) -> &'static str {
    match command {
        Command::Qkd(_) => "qkd",
        Command::Broadcast { cmd } => match cmd {
            BroadcastCmd::Ptilde(_) => "broadcast.ptilde",
            BroadcastCmd::Region(_) => "broadcast.region",
            BroadcastCmd::Run(_) => "broadcast.run",
        },
        Command::Qcorr { cmd } => match cmd {
            QcorrCmd::Curve(_) => "qcorr.curve",
            QcorrCmd::Scatter(_) => "qcorr.scatter",
        },
        Command::Atomlight { cmd } => match cmd {
            AtomlightCmd::Epr(_) => "atomlight.epr",
            AtomlightCmd::Eraser(_) => "atomlight.eraser",
            AtomlightCmd::Ghz(_) => "atomlight.ghz",
            AtomlightCmd::Cluster(_) => "atomlight.cluster",
        },
        Command::Core(_) => "core",
        Command::Regress(_) => "regress",
    }
}

fn emit(table: &ResultTable, format: Format, output: Option<&std::path::Path>) -> Result<()> {
    let text = match format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let mut s = table.to_json()?;
            s.push('\n');
            s
        }
    };
    match output {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write output file {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}
