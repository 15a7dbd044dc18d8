//! Batch front end: configuration, subcommands, exports and images.

pub mod commands;
pub mod config;
pub mod image;

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use commands::{Output, Status};
use config::Params;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "bony",
    version,
    about = "Simulate and verify bony attractors of skew products over a linear Anosov map",
    arg_required_else_help = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check every hypothesis of the construction.
    Verify(Common),
    /// Build and export the Markov partition and marked rectangles.
    Partition(Common),
    /// Certify bones over repellor words, test persistence, propagate.
    Bones(Common),
    /// Classify fibers over the base grid and draw the census.
    Graph(Common),
    /// Dimension bound and box-counting estimate.
    Dimension(Common),
    /// Compare forward orbits with the slice covers.
    Sample(Common),
}

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// key=value config file (keys: m d eps r0 seed mesh grid n workers out).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub m: Option<i64>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub mesh: Option<f64>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Worker threads (0: one per core).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Common {
    /// Defaults, then the config file, then the flags.
    pub fn params(&self) -> Result<Params> {
        let mut p = match &self.config {
            Some(path) => Params::load(path)?,
            None => Params::default(),
        };
        macro_rules! over {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { p.$f = v; } )* };
        }
        over!(m, d, eps, r0, seed, mesh, grid, n, workers, out);
        Ok(p)
    }
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Verify(c)
            | Command::Partition(c)
            | Command::Bones(c)
            | Command::Graph(c)
            | Command::Dimension(c)
            | Command::Sample(c) => c,
        }
    }
}

fn execute(cmd: &Command, p: &Params) -> Result<Output> {
    match cmd {
        Command::Verify(_) => commands::verify(p),
        Command::Partition(_) => commands::partition(p),
        Command::Bones(_) => commands::bones(p),
        Command::Graph(_) => commands::graph(p),
        Command::Dimension(_) => commands::dimension(p),
        Command::Sample(_) => commands::sample(p),
    }
}

fn write_outputs(p: &Params, out: &Output) -> Result<()> {
    std::fs::create_dir_all(&p.out)
        .with_context(|| format!("cannot create output directory {}", p.out.display()))?;
    for (name, bytes) in &out.files {
        let path = p.out.join(name);
        std::fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}

/// Exit code for a failed run: hypothesis failures of valid input give 2,
/// everything else (bad parameters, files) gives 1.
fn error_code(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<bony_core::Error>() {
        Some(core) if commands::is_hypothesis_error(core) => EXIT_HYPOTHESIS,
        _ => EXIT_USAGE,
    }
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let p = match cli.command.common().params() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(p.workers)
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start workers: {e}");
            return EXIT_USAGE;
        }
    };
    let result = pool
        .install(|| execute(&cli.command, &p))
        .and_then(|out| write_outputs(&p, &out).map(|_| out));
    match result {
        Ok(out) => {
            println!("{}", out.summary);
            match out.status {
                Status::Pass => EXIT_OK,
                Status::HypothesisFailure => EXIT_HYPOTHESIS,
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            error_code(&e)
        }
    }
}
