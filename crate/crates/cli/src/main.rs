//! Command-line driver for momentum-space transport invariants.
//!
//! One experiment per invocation: `run` computes an invariant or a phase
//! profile and writes JSON or CSV, `validate` checks a configuration
//! without running it, and `repro` regenerates the full reference suite.
//!
//! Exit codes: 0 success; 2 configuration problem (bad flags, bad file,
//! failed validation); 3 spectral constraint violated (a protecting gap
//! closed); 4 discretization too coarse (aliased winding or plaquette
//! overflow); 5 any other computation error; 6 output I/O failure.

mod config;
mod output;
mod repro;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use config::{Experiment, ExperimentConfig, ModelSpec, OutputFormat};
use repro::ReproError;
use uhlmann::Axis;

#[derive(Parser)]
#[command(
    name = "uhlmann",
    version,
    about = "Geometric phases and topological invariants of momentum-space density matrices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its results
    Run(RunArgs),
    /// Check a configuration and list its problems without running it
    Validate(RunArgs),
    /// Reproduce the reference suite into a directory
    Repro(ReproArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file; explicit flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,

    /// chern | uhlmann-wind | uhlmann-chern | phase-profile | beta-scan | gap-scan | band-sum
    #[arg(long, value_parser = Experiment::from_str)]
    experiment: Option<Experiment>,

    /// "builtin" or the path of a TOML model file
    #[arg(long)]
    model: Option<String>,

    /// Inverse temperature of the thermal state
    #[arg(long)]
    beta: Option<f64>,

    /// Bisection bracket for beta-scan, as "a,b"
    #[arg(long, value_parser = parse_f64_pair)]
    beta_bracket: Option<[f64; 2]>,

    /// Momentum grid as "NX,NY"
    #[arg(long, value_parser = parse_usize_pair)]
    grid: Option<[usize; 2]>,

    /// Segments per transport loop
    #[arg(long)]
    loop_points: Option<usize>,

    /// Slow axis of a profile or scan: x | y
    #[arg(long, value_parser = Axis::from_str)]
    axis: Option<Axis>,

    /// Starting coordinate of the fast loops
    #[arg(long, allow_hyphen_values = true)]
    footpoint: Option<f64>,

    /// Number of leading spectral levels in the protected subspace
    #[arg(long)]
    subspace: Option<usize>,

    /// Smallest admissible purity gap for subspace invariants
    #[arg(long)]
    min_gap: Option<f64>,

    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,

    /// json | csv
    #[arg(long, value_parser = OutputFormat::from_str)]
    format: Option<OutputFormat>,

    /// Cap on worker threads (defaults to all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ReproArgs {
    /// Directory for the suite's data files
    #[arg(long, default_value = "repro")]
    out_dir: PathBuf,

    /// Cap on worker threads (defaults to all cores)
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_f64_pair(s: &str) -> Result<[f64; 2], String> {
    parse_pair(s, "expected two comma-separated numbers, e.g. 0.5,2.0")
}

fn parse_usize_pair(s: &str) -> Result<[usize; 2], String> {
    parse_pair(s, "expected two comma-separated sizes, e.g. 100,100")
}

fn parse_pair<T: FromStr>(s: &str, usage: &str) -> Result<[T; 2], String> {
    let mut parts = s.split(',');
    let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(usage.into());
    };
    match (a.trim().parse(), b.trim().parse()) {
        (Ok(a), Ok(b)) => Ok([a, b]),
        _ => Err(usage.into()),
    }
}

impl RunArgs {
    fn as_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            experiment: self.experiment,
            model: self.model.clone().map(ModelSpec::Reference),
            beta: self.beta,
            beta_bracket: self.beta_bracket,
            grid: self.grid,
            loop_points: self.loop_points,
            axis: self.axis,
            footpoint: self.footpoint,
            subspace: self.subspace,
            min_gap: self.min_gap,
            out: self.out.clone(),
            format: self.format,
        }
    }

    /// File config (when given) overlaid with the explicit flags.
    fn assemble(&self) -> Result<ExperimentConfig, String> {
        let base = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                ExperimentConfig::from_toml(&text).map_err(|d| d.to_string())?
            }
            None => ExperimentConfig::default(),
        };
        Ok(base.merged_with(&self.as_config()))
    }
}

const EXIT_CONFIG: u8 = 2;
const EXIT_SPECTRAL: u8 = 3;
const EXIT_RESOLUTION: u8 = 4;
const EXIT_COMPUTE: u8 = 5;
const EXIT_IO: u8 = 6;

fn exit_for(error: &uhlmann::Error) -> u8 {
    use uhlmann::Error::*;
    match error {
        SpectralConstraintViolated { .. } | GapClosed { .. } => EXIT_SPECTRAL,
        UnderResolved { .. } | PlaquetteOverflow { .. } => EXIT_RESOLUTION,
        ModelFile(_) => EXIT_CONFIG,
        _ => EXIT_COMPUTE,
    }
}

fn cap_threads(threads: Option<usize>) {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("thread pool configured before any parallel work");
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => run(&args),
        Command::Validate(args) => validate(&args),
        Command::Repro(args) => reproduce(&args),
    }
}

fn run(args: &RunArgs) -> ExitCode {
    let config = match args.assemble() {
        Ok(config) => config,
        Err(message) => {
            eprintln!("config error: {message}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let plan = match config::resolve(&config) {
        Ok(plan) => plan,
        Err(diags) => {
            for diag in diags {
                eprintln!("config error: {diag}");
            }
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    cap_threads(args.threads);

    let envelope = match runner::execute(&plan) {
        Ok(envelope) => envelope,
        Err(error) => {
            eprintln!("error: {error}");
            return ExitCode::from(exit_for(&error));
        }
    };
    for warning in &envelope.warnings {
        eprintln!("warning: {warning}");
    }
    let rendered = output::render(&envelope, plan.format);
    if let Err(error) = output::write_out(plan.out.as_deref(), &rendered) {
        eprintln!("error: cannot write output: {error}");
        return ExitCode::from(EXIT_IO);
    }
    ExitCode::SUCCESS
}

fn validate(args: &RunArgs) -> ExitCode {
    let config = match args.assemble() {
        Ok(config) => config,
        Err(message) => {
            println!("config: {message}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let diags = config::validate(&config);
    if diags.is_empty() {
        println!("ok");
        ExitCode::SUCCESS
    } else {
        for diag in &diags {
            println!("{diag}");
        }
        ExitCode::from(EXIT_CONFIG)
    }
}

fn reproduce(args: &ReproArgs) -> ExitCode {
    cap_threads(args.threads);
    match repro::run(&args.out_dir) {
        Ok(_) => ExitCode::SUCCESS,
        Err(ReproError::Core(error)) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_for(&error))
        }
        Err(ReproError::Io(error)) => {
            eprintln!("error: {error}");
            ExitCode::from(EXIT_IO)
        }
    }
}
