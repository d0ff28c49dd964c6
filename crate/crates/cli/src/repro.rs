//! The reference reproduction suite: every headline number of the built-in
//! model in one command.
//!
//! Runs, in order: the pure-state Chern number on a 200x200 grid, both
//! transport-phase profiles at beta = 1.3 (500 loops of 500 segments), the
//! winding numbers those profiles carry, both critical-temperature scans,
//! and the holonomy-gap scan on a 100x100 footpoint grid. Plot data and
//! envelopes land in the output directory together with `summary.csv`; the
//! same summary table is printed to stdout.

use std::fmt;
use std::io;
use std::path::Path;

use uhlmann::{winding_number, Axis, InvariantReport, PhaseProfile};

use crate::config::{resolve, Experiment, ExperimentConfig};
use crate::output;
use crate::runner::{execute, ResultEnvelope};

/// Why the suite stopped: a computation failed or a file refused to write.
#[derive(Debug)]
pub enum ReproError {
    Core(uhlmann::Error),
    Io(io::Error),
}

impl fmt::Display for ReproError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReproError::Core(e) => write!(f, "{e}"),
            ReproError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<uhlmann::Error> for ReproError {
    fn from(e: uhlmann::Error) -> ReproError {
        ReproError::Core(e)
    }
}

impl From<io::Error> for ReproError {
    fn from(e: io::Error) -> ReproError {
        ReproError::Io(e)
    }
}

const BETA_PROFILE: f64 = 1.3;

fn base_config(experiment: Experiment) -> ExperimentConfig {
    ExperimentConfig { experiment: Some(experiment), ..Default::default() }
}

fn run_config(config: ExperimentConfig) -> Result<ResultEnvelope, ReproError> {
    let plan = resolve(&config)
        .unwrap_or_else(|diags| panic!("reference suite config invalid: {diags:?}"));
    Ok(execute(&plan)?)
}

fn profile_step(
    dir: &Path,
    axis: Axis,
    summary: &mut Vec<InvariantReport>,
) -> Result<(), ReproError> {
    let mut config = base_config(Experiment::PhaseProfile);
    config.beta = Some(BETA_PROFILE);
    config.axis = Some(axis);
    let envelope = run_config(config)?;
    let data = envelope.profile.as_ref().expect("profile experiments produce rows");

    let reconstructed = PhaseProfile {
        axis: data.axis,
        slow_samples: data.rows.iter().map(|r| r[0]).collect(),
        phases: data.rows.iter().map(|r| r[1]).collect(),
        footpoint: data.footpoint,
        loop_points: data.loop_points,
        failures: Vec::new(),
    };
    summary.push(winding_number(&reconstructed)?);

    let path = dir.join(format!("profile-{axis}.csv"));
    output::write_out(Some(&path), &output::profile_csv(&data.rows))?;
    eprintln!("wrote {} ({} rows)", path.display(), data.rows.len());
    Ok(())
}

fn envelope_step(
    dir: &Path,
    file: &str,
    config: ExperimentConfig,
    summary: &mut Vec<InvariantReport>,
) -> Result<(), ReproError> {
    let envelope = run_config(config)?;
    summary.extend(envelope.reports.iter().cloned());
    let path = dir.join(file);
    output::write_out(Some(&path), &output::render_json(&envelope))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

/// Run the whole suite into `dir`, returning the summary reports in run
/// order.
pub fn run(dir: &Path) -> Result<Vec<InvariantReport>, ReproError> {
    std::fs::create_dir_all(dir)?;
    let mut summary = Vec::new();

    let mut chern = base_config(Experiment::Chern);
    chern.grid = Some([200, 200]);
    envelope_step(dir, "chern.json", chern, &mut summary)?;

    profile_step(dir, Axis::X, &mut summary)?;
    profile_step(dir, Axis::Y, &mut summary)?;

    let mut scan_x = base_config(Experiment::BetaScan);
    scan_x.axis = Some(Axis::X);
    scan_x.beta_bracket = Some([0.5, 1.5]);
    envelope_step(dir, "beta-critical-x.json", scan_x, &mut summary)?;

    let mut scan_y = base_config(Experiment::BetaScan);
    scan_y.axis = Some(Axis::Y);
    scan_y.beta_bracket = Some([0.5, 2.0]);
    envelope_step(dir, "beta-critical-y.json", scan_y, &mut summary)?;

    let mut gap = base_config(Experiment::GapScan);
    gap.beta = Some(BETA_PROFILE);
    envelope_step(dir, "holonomy-gap.json", gap, &mut summary)?;

    output::write_out(Some(&dir.join("summary.csv")), &output::reports_csv(&summary))?;
    print_table(&summary);
    Ok(summary)
}

fn print_table(summary: &[InvariantReport]) {
    println!("{:<24} {:>20} {:>16}", "name", "value", "tolerance");
    for report in summary {
        println!(
            "{:<24} {:>20} {:>16}",
            report.name.to_string(),
            output::format_value(&report.value),
            format!("{:.2e}", report.tolerance)
        );
    }
}
