mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Pipeline(twomapper::Error),
    /// A good-cover condition failed.
    Falsified,
}

impl From<twomapper::Error> for CliError {
    fn from(e: twomapper::Error) -> Self {
        CliError::Pipeline(e)
    }
}

#[derive(Parser, Debug)]
#[command(name = "twomapper", version, about = "2-Mapper and multiscale 2-Mapper pipelines")]
struct Cli {
    /// Output directory; every written path is relative to it.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Worker threads (1 runs everything sequentially).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a torus or Klein bottle and write it as CSV.
    Generate(GenerateArgs),
    /// Build one 2-Mapper complex and report its Betti numbers.
    Mapper(PipelineArgs),
    /// Build a multiscale 2-Mapper over a schedule and its barcode.
    Multiscale(PipelineArgs),
    /// Test the good-cover conditions on a tower and its cluster covers.
    Check(PipelineArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// torus or klein
    shape: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "R", default_value_t = 2.0)]
    major: f64,
    #[arg(long = "r", default_value_t = 1.0)]
    minor: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

/// Flags mirror the config-file keys and override them.
#[derive(Args, Debug, Default)]
pub struct PipelineArgs {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV path, or a generator spec such as `torus:n=5000,R=2,r=1,seed=7`.
    #[arg(long)]
    input: Option<String>,
    /// The CSV has a header row.
    #[arg(long)]
    header: bool,
    /// Comma-separated projection axes, or `identity`.
    #[arg(long)]
    lens: Option<String>,
    /// Intervals per axis.
    #[arg(long)]
    k: Option<String>,
    /// Overlap fraction of a single cover.
    #[arg(long)]
    g: Option<String>,
    /// Overlap fractions, as a list or `start:stop:step`.
    #[arg(long = "g-schedule")]
    g_schedule: Option<String>,
    /// Set diameters; `2s` is twice the base resolution, `4d` four lens diameters.
    #[arg(long = "eps-schedule")]
    eps_schedule: Option<String>,
    /// Overlap of the base cover of an epsilon tower.
    #[arg(long = "base-g")]
    base_g: Option<String>,
    /// DBSCAN radius, or `knn` for the nearest-neighbour heuristic.
    #[arg(long)]
    radius: Option<String>,
    #[arg(long = "min-pts")]
    min_pts: Option<String>,
    /// Keep noise clusters as vertices.
    #[arg(long = "include-noise")]
    include_noise: bool,
    #[arg(long = "betti-dims")]
    betti_dims: Option<String>,
    /// Sampled subsets per good-cover condition.
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// 1 writes the Mapper graph only.
    #[arg(long)]
    skeleton: Option<String>,
}

impl PipelineArgs {
    fn resolve(&self, threads: Option<usize>) -> Result<config::Config, CliError> {
        let mut raw = match &self.config {
            Some(path) => config::read_file(path)?,
            None => config::Raw::new(),
        };
        let flags = [
            ("input", &self.input),
            ("lens", &self.lens),
            ("k", &self.k),
            ("g", &self.g),
            ("g-schedule", &self.g_schedule),
            ("eps-schedule", &self.eps_schedule),
            ("base-g", &self.base_g),
            ("radius", &self.radius),
            ("min-pts", &self.min_pts),
            ("betti-dims", &self.betti_dims),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("skeleton", &self.skeleton),
        ];
        // A cover flag replaces whatever cover the file chose.
        if self.g.is_some() || self.g_schedule.is_some() || self.eps_schedule.is_some() {
            for k in ["g", "g-schedule", "eps-schedule"] {
                raw.remove(k);
            }
        }
        for (k, v) in flags {
            if let Some(v) = v {
                raw.insert(k.to_string(), v.clone());
            }
        }
        if self.header {
            raw.insert("header".into(), "true".into());
        }
        if self.include_noise {
            raw.insert("include-noise".into(), "true".into());
        }
        if let Some(t) = threads {
            raw.insert("threads".into(), t.to_string());
        }
        config::resolve(&raw)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Generate(args) => commands::generate(args, &cli.out),
        Command::Mapper(args) => commands::mapper(&args.resolve(cli.threads)?, &cli.out),
        Command::Multiscale(args) => commands::multiscale(&args.resolve(cli.threads)?, &cli.out),
        Command::Check(args) => commands::check(&args.resolve(cli.threads)?, &cli.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Pipeline(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(CliError::Falsified) => ExitCode::from(3),
    }
}
