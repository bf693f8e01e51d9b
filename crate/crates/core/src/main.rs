use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sumlab::config::RunConfig;
use sumlab::harness::{error_exit_code, run, Command};
use sumlab::Error;

#[derive(Parser)]
#[command(name = "sumlab", version, about = "Cesaro kernels on spheres, divergence witnesses and summation methods")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the invariant suite and print PASS/FAIL per invariant
    Verify(Opts),
    /// Write the kernel decomposition table
    Kernel(Opts),
    /// Write a greedy maximal packing
    Pack(Opts),
    /// Write the divergence scan over a point grid
    Scan(Opts),
    /// Write the summation-method comparison
    Summability(Opts),
    /// Run the staged construction and write its JSON record
    Stage(Opts),
}

#[derive(Args, Clone)]
struct Opts {
    /// `key = value` file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    trunc: Option<usize>,
    #[arg(long)]
    stages: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Opts {
    fn resolve(&self) -> sumlab::Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.merge_file(path)?;
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = self.$f.clone() { cfg.$f = v; } )* };
        }
        take!(n, r, seed, nmax, grid, trunc, stages, out);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn init_threads() -> sumlab::Result<()> {
    let Ok(raw) = std::env::var("SUMLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::Config(format!("SUMLAB_THREADS = {raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| Error::Config(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, opts) = match cli.command {
        Cmd::Verify(o) => (Command::Verify, o),
        Cmd::Kernel(o) => (Command::Kernel, o),
        Cmd::Pack(o) => (Command::Pack, o),
        Cmd::Scan(o) => (Command::Scan, o),
        Cmd::Summability(o) => (Command::Summability, o),
        Cmd::Stage(o) => (Command::Stage, o),
    };
    let result = init_threads().and_then(|_| opts.resolve()).and_then(|cfg| run(cmd, &cfg));
    match result {
        Ok(outcome) => {
            for line in &outcome.report {
                println!("{line}");
            }
            for path in &outcome.files {
                println!("wrote {}", path.display());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("sumlab {}: {e}", cmd.name());
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
