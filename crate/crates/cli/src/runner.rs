//! Experiment dispatch: a resolved [`Plan`] in, a [`ResultEnvelope`] out.

use std::time::Instant;

use serde::Serialize;
use uhlmann::{
    band_chern_sum, chern_dvector, critical_beta, holonomy_gap, phase_profile, uhlmann_chern,
    winding_number, Axis, InvariantReport, KGrid, PhaseProfile, ScanOpts, StateRule,
    SubspaceSelector,
};

use crate::config::{Experiment, ExperimentConfig, Plan};

/// Everything one invocation produced: the configuration as run, the
/// invariant reports and/or profile data, and run metadata.
///
/// All fields except `wall_time_s` are deterministic for a fixed
/// configuration.
#[derive(Debug, Serialize)]
pub struct ResultEnvelope {
    pub config: ExperimentConfig,
    pub reports: Vec<InvariantReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileData>,
    pub warnings: Vec<String>,
    pub wall_time_s: f64,
    pub version: String,
}

/// Plot-ready phase profile: one `[slow coordinate, phase]` row per
/// successful sample.
#[derive(Debug, Serialize)]
pub struct ProfileData {
    pub axis: Axis,
    pub footpoint: f64,
    pub loop_points: usize,
    pub rows: Vec<[f64; 2]>,
}

impl ProfileData {
    fn from_profile(profile: &PhaseProfile) -> ProfileData {
        ProfileData {
            axis: profile.axis,
            footpoint: profile.footpoint,
            loop_points: profile.loop_points,
            rows: profile
                .slow_samples
                .iter()
                .zip(&profile.phases)
                .map(|(&k, &phi)| [k, phi])
                .collect(),
        }
    }
}

/// Run the plan's experiment and package the outcome.
pub fn execute(plan: &Plan) -> Result<ResultEnvelope, uhlmann::Error> {
    let started = Instant::now();
    let mut warnings = plan.notes.clone();
    let mut reports = Vec::new();
    let mut profile = None;

    let grid = KGrid::new(plan.grid[0], plan.grid[1])?;
    let slow_count = match plan.axis {
        Axis::X => plan.grid[0],
        Axis::Y => plan.grid[1],
    };

    match plan.experiment {
        Experiment::Chern => {
            reports.push(chern_dvector(&plan.model, &grid)?);
        }
        Experiment::UhlmannWind => {
            let rule = StateRule::thermal(plan.model.clone(), plan.beta);
            let scan =
                phase_profile(&rule, plan.axis, plan.footpoint, plan.loop_points, slow_count)?;
            reports.push(winding_number(&scan)?);
        }
        Experiment::UhlmannChern => {
            let rule = StateRule::thermal(plan.model.clone(), plan.beta);
            let selector = SubspaceSelector::new(plan.subspace, plan.min_gap);
            reports.push(uhlmann_chern(&rule, &grid, &selector)?);
        }
        Experiment::PhaseProfile => {
            let rule = StateRule::thermal(plan.model.clone(), plan.beta);
            let scan =
                phase_profile(&rule, plan.axis, plan.footpoint, plan.loop_points, slow_count)?;
            for (index, error) in &scan.failures {
                warnings.push(format!("slow sample {index} failed: {error}"));
            }
            profile = Some(ProfileData::from_profile(&scan));
        }
        Experiment::BetaScan => {
            let opts = ScanOpts {
                loop_points: plan.loop_points,
                slow_count,
                footpoint: plan.footpoint,
                ..ScanOpts::default()
            };
            let model = plan.model.clone();
            let report = critical_beta(
                move |beta| StateRule::thermal(model.clone(), beta),
                plan.axis,
                (plan.beta_bracket[0], plan.beta_bracket[1]),
                &opts,
            )?;
            reports.push(report);
        }
        Experiment::GapScan => {
            let rule = StateRule::thermal(plan.model.clone(), plan.beta);
            reports.push(holonomy_gap(&rule, &grid, plan.loop_points)?);
        }
        Experiment::BandSum => {
            let rule = StateRule::thermal(plan.model.clone(), plan.beta);
            reports.extend(band_chern_sum(&rule, &grid)?);
        }
    }

    Ok(ResultEnvelope {
        config: plan.echo.clone(),
        reports,
        profile,
        warnings,
        wall_time_s: started.elapsed().as_secs_f64(),
        version: uhlmann::VERSION.to_string(),
    })
}
