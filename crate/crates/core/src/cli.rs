//! Command-line front end: `run` and `sweep` subcommands.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{SchedulerKind, SimConfig};
use crate::engine::{SimRun, SUMMARY_HEADER};
use crate::sweep::{render_csv, run_sweep, SweepSpec};

/// Exit code for unreadable, malformed or invalid configuration.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for output failures.
pub const EXIT_IO: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "lte-sched", version, about = "LTE downlink scheduling simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Config file (`key = value` per line).
    #[arg(long)]
    pub config: PathBuf,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `rng_seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override any config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and print its summary row.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Per-TTI debug CSV: one row per (tti, user, prb).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Sweep user counts and schedulers over several seeds.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated user counts.
        #[arg(long, value_delimiter = ',', default_values_t = vec![10, 20, 30, 40, 50, 60, 70])]
        users: Vec<usize>,
        /// Comma-separated scheduler kinds.
        #[arg(long, value_delimiter = ',', default_values = ["fd_pf", "fd_mlwdf", "td_grouping"])]
        schedulers: Vec<String>,
        /// Seeds per point.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Append per-point means over seeds.
        #[arg(long)]
        mean: bool,
    },
}

fn load_config(common: &CommonArgs) -> Result<SimConfig, String> {
    let mut cfg = SimConfig::load(&common.config).map_err(|e| e.to_string())?;
    for item in &common.set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| format!("--set expects KEY=VALUE, got `{item}`"))?;
        cfg.set(k, v).map_err(|e| e.to_string())?;
    }
    if let Some(seed) = common.seed {
        cfg.rng_seed = seed;
    }
    Ok(cfg)
}

fn write_output(path: &Option<PathBuf>, stdout: &mut dyn Write, content: &str) -> io::Result<()> {
    match path {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p)?);
            f.write_all(content.as_bytes())?;
            f.flush()
        }
        None => {
            stdout.write_all(content.as_bytes())?;
            stdout.flush()
        }
    }
}

fn cmd_run(
    common: &CommonArgs,
    trace: &Option<PathBuf>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let cfg = match load_config(common).and_then(|c| c.validate().map(|_| c).map_err(|e| e.to_string())) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let result = (|| -> Result<String, String> {
        let mut sim = SimRun::new(cfg).map_err(|e| e.to_string())?;
        if let Some(path) = trace {
            let file = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
            sim = sim
                .with_trace(Box::new(BufWriter::new(file)))
                .map_err(|e| e.to_string())?;
        }
        sim.run_to_end().map_err(|e| e.to_string())?;
        Ok(sim.summary().to_csv())
    })();
    let row = match result {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_IO;
        }
    };
    match write_output(&common.out, stdout, &format!("{SUMMARY_HEADER}\n{row}\n")) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_IO
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    common: &CommonArgs,
    users: &[usize],
    schedulers: &[String],
    seeds: u64,
    jobs: usize,
    mean: bool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let base = match load_config(common) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let kinds: Result<Vec<SchedulerKind>, String> = schedulers.iter().map(|s| s.parse()).collect();
    let spec = match kinds {
        Ok(schedulers) => SweepSpec {
            n_users: users.to_vec(),
            schedulers,
            seeds,
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = spec.validate() {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_CONFIG;
    }
    let rows = run_sweep(&base, &spec, jobs.max(1));
    let csv = render_csv(&rows, mean);
    match write_output(&common.out, stdout, &csv) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_IO
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
            } else {
                let _ = write!(stdout, "{e}");
            }
            return code;
        }
    };
    match &cli.command {
        Command::Run { common, trace } => cmd_run(common, trace, stdout, stderr),
        Command::Sweep {
            common,
            users,
            schedulers,
            seeds,
            jobs,
            mean,
        } => cmd_sweep(common, users, schedulers, *seeds, *jobs, *mean, stdout, stderr),
    }
}
