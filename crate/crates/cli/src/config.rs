//! Experiment configuration: the TOML schema mirrored by the command-line
//! flags, plus validation and resolution into a runnable plan.
//!
//! A configuration names one experiment and its numeric parameters. Every
//! field is optional in the file; `resolve` fills experiment-specific
//! defaults and reports anything missing or out of range as [`Diagnostic`]s
//! carrying the offending field name. Fields another experiment would use
//! but this one ignores are dropped from the resolved echo and surfaced as
//! warnings, never errors.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use uhlmann::{load_model, parse_model, Axis, BlochModel};

/// The experiments the driver knows how to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// Pure-state Chern number of the Bloch vector texture.
    Chern,
    /// Winding number of the transport phase around the slow axis.
    UhlmannWind,
    /// Purity-gap-protected Chern number of a spectral subspace.
    UhlmannChern,
    /// Transport phase at each slow-coordinate sample, for plotting.
    PhaseProfile,
    /// Bisection for the inverse temperature where the winding changes.
    BetaScan,
    /// Minimum holonomy eigenvalue-modulus gap over a footpoint grid.
    GapScan,
    /// Per-band Chern numbers of every spectral level.
    BandSum,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Chern,
        Experiment::UhlmannWind,
        Experiment::UhlmannChern,
        Experiment::PhaseProfile,
        Experiment::BetaScan,
        Experiment::GapScan,
        Experiment::BandSum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Chern => "chern",
            Experiment::UhlmannWind => "uhlmann-wind",
            Experiment::UhlmannChern => "uhlmann-chern",
            Experiment::PhaseProfile => "phase-profile",
            Experiment::BetaScan => "beta-scan",
            Experiment::GapScan => "gap-scan",
            Experiment::BandSum => "band-sum",
        }
    }

    fn needs_beta(self) -> bool {
        matches!(
            self,
            Experiment::UhlmannWind
                | Experiment::UhlmannChern
                | Experiment::PhaseProfile
                | Experiment::GapScan
                | Experiment::BandSum
        )
    }

    fn needs_axis(self) -> bool {
        matches!(
            self,
            Experiment::UhlmannWind | Experiment::PhaseProfile | Experiment::BetaScan
        )
    }

    fn needs_loop(self) -> bool {
        matches!(
            self,
            Experiment::UhlmannWind
                | Experiment::PhaseProfile
                | Experiment::BetaScan
                | Experiment::GapScan
        )
    }

    /// Loops start from a configurable footpoint (gap scans sweep the
    /// footpoint over the whole grid instead).
    fn needs_footpoint(self) -> bool {
        matches!(
            self,
            Experiment::UhlmannWind | Experiment::PhaseProfile | Experiment::BetaScan
        )
    }

    fn default_grid(self) -> [usize; 2] {
        match self {
            Experiment::Chern => [200, 200],
            Experiment::UhlmannWind
            | Experiment::PhaseProfile
            | Experiment::BetaScan => [500, 500],
            Experiment::UhlmannChern | Experiment::GapScan | Experiment::BandSum => [100, 100],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;
    fn from_str(s: &str) -> Result<Experiment, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!("unknown experiment \"{s}\"; expected one of {}", names.join(", "))
            })
    }
}

/// Output encoding for result files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<OutputFormat, String> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(format!("unknown format \"{other}\"; expected json or csv")),
        }
    }
}

/// Model reference: the builtin name, a path to a model file, or the model
/// document embedded directly in the configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    /// `"builtin"` or a filesystem path to a TOML model file.
    Reference(String),
    /// An inline model document with the same layout as a model file.
    Inline(toml::Value),
}

impl ModelSpec {
    pub fn build(&self) -> Result<BlochModel, uhlmann::Error> {
        match self {
            ModelSpec::Reference(name) if name == "builtin" => {
                Ok(BlochModel::aniso_qah_default())
            }
            ModelSpec::Reference(path) => load_model(path),
            ModelSpec::Inline(value) => {
                let text = toml::to_string(value).map_err(|e| {
                    uhlmann::Error::ModelFile(format!("inline model is not a table: {e}"))
                })?;
                parse_model(&text)
            }
        }
    }
}

impl Default for ModelSpec {
    fn default() -> ModelSpec {
        ModelSpec::Reference("builtin".into())
    }
}

/// One experiment invocation as written in a file or assembled from flags.
///
/// All fields are optional so that a partially-specified draft can be
/// merged from several sources before [`resolve`] applies defaults and
/// checks experiment-specific requirements.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_bracket: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loop_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub footpoint: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subspace: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig, Diagnostic> {
        toml::from_str(text).map_err(|e| Diagnostic {
            field: "config".into(),
            message: e.message().to_string(),
        })
    }

    /// Overlay: any field set in `other` replaces the value in `self`.
    pub fn merged_with(mut self, other: &ExperimentConfig) -> ExperimentConfig {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f.clone(); } )* };
        }
        take!(
            experiment, model, beta, beta_bracket, grid, loop_points, axis, footpoint,
            subspace, min_gap, out, format
        );
        self
    }
}

/// One validation finding: the configuration field at fault and why.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// A fully-resolved invocation: every parameter the experiment needs, with
/// defaults applied, plus the echo configuration the result envelope
/// carries.
#[derive(Clone, Debug)]
pub struct Plan {
    pub experiment: Experiment,
    pub model: BlochModel,
    pub beta: f64,
    pub beta_bracket: [f64; 2],
    pub grid: [usize; 2],
    pub loop_points: usize,
    pub axis: Axis,
    pub footpoint: f64,
    pub subspace: usize,
    pub min_gap: f64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    /// The configuration as actually run: defaults filled in, ignored
    /// fields dropped. Serializing and re-parsing it yields an equal value.
    pub echo: ExperimentConfig,
    /// Ignored-field notes, forwarded into the envelope's warnings.
    pub notes: Vec<String>,
}

/// Check a configuration without running it. Empty result means `resolve`
/// would succeed.
pub fn validate(config: &ExperimentConfig) -> Vec<Diagnostic> {
    match resolve(config) {
        Ok(_) => Vec::new(),
        Err(diags) => diags,
    }
}

/// Apply defaults, enforce experiment-specific requirements, and build the
/// plan. All findings are collected before returning so a single pass
/// reports every problem.
pub fn resolve(config: &ExperimentConfig) -> Result<Plan, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut notes = Vec::new();
    let diag = |diags: &mut Vec<Diagnostic>, field: &str, message: String| {
        diags.push(Diagnostic { field: field.into(), message });
    };

    let experiment = match config.experiment {
        Some(e) => e,
        None => {
            diag(&mut diags, "experiment", "required; nothing to run without it".into());
            return Err(diags);
        }
    };

    let model_spec = config.model.clone().unwrap_or_default();
    let model = match model_spec.build() {
        Ok(m) => Some(m),
        Err(e) => {
            diag(&mut diags, "model", e.to_string());
            None
        }
    };

    let grid = config.grid.unwrap_or_else(|| experiment.default_grid());
    if grid[0] < 2 || grid[1] < 2 {
        diag(
            &mut diags,
            "grid",
            format!("needs at least 2 points per axis, got {}x{}", grid[0], grid[1]),
        );
    }

    let axis = config.axis.unwrap_or(Axis::X);
    if experiment.needs_axis() {
        if config.axis.is_none() {
            diag(&mut diags, "axis", format!("required by {experiment} (x or y)"));
        }
        let slow = match axis {
            Axis::X => grid[0],
            Axis::Y => grid[1],
        };
        if slow < 3 && config.axis.is_some() {
            diag(
                &mut diags,
                "grid",
                format!("slow axis {axis} needs at least 3 samples, got {slow}"),
            );
        }
    } else if config.axis.is_some() {
        notes.push(format!("axis is ignored by {experiment}"));
    }

    let beta = config.beta.unwrap_or(f64::NAN);
    if experiment.needs_beta() {
        match config.beta {
            None => diag(&mut diags, "beta", format!("required by {experiment}")),
            Some(b) if !b.is_finite() || b < 0.0 => {
                diag(&mut diags, "beta", format!("must be finite and >= 0, got {b}"))
            }
            Some(_) => {}
        }
    } else if config.beta.is_some() {
        notes.push(format!("beta is ignored by {experiment}"));
    }

    let bracket = config.beta_bracket.unwrap_or([f64::NAN, f64::NAN]);
    if experiment == Experiment::BetaScan {
        match config.beta_bracket {
            None => diag(&mut diags, "beta-bracket", "required by beta-scan (a,b)".into()),
            Some([a, b]) if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b) => diag(
                &mut diags,
                "beta-bracket",
                format!("needs finite 0 <= a < b, got [{a}, {b}]"),
            ),
            Some(_) => {}
        }
    } else if config.beta_bracket.is_some() {
        notes.push(format!("beta-bracket is ignored by {experiment}"));
    }

    let loop_points = config.loop_points.unwrap_or(500);
    if experiment.needs_loop() {
        if loop_points < 3 {
            diag(
                &mut diags,
                "loop-points",
                format!("a loop needs at least 3 segments, got {loop_points}"),
            );
        }
    } else if config.loop_points.is_some() {
        notes.push(format!("loop-points is ignored by {experiment}"));
    }

    let footpoint = config.footpoint.unwrap_or(-std::f64::consts::PI);
    if experiment.needs_footpoint() {
        if !footpoint.is_finite() {
            diag(&mut diags, "footpoint", format!("must be finite, got {footpoint}"));
        }
    } else if config.footpoint.is_some() {
        notes.push(format!("footpoint is ignored by {experiment}"));
    }

    let subspace = config.subspace.unwrap_or(1);
    let min_gap = config.min_gap.unwrap_or(1e-6);
    if experiment == Experiment::UhlmannChern {
        if let Some(m) = &model {
            if subspace == 0 || subspace >= m.dim() {
                diag(
                    &mut diags,
                    "subspace",
                    format!("must be between 1 and {} for this model, got {subspace}", m.dim() - 1),
                );
            }
        }
        if !(min_gap.is_finite() && min_gap > 0.0) {
            diag(&mut diags, "min-gap", format!("must be finite and > 0, got {min_gap}"));
        }
    } else {
        if config.subspace.is_some() {
            notes.push(format!("subspace is ignored by {experiment}"));
        }
        if config.min_gap.is_some() {
            notes.push(format!("min-gap is ignored by {experiment}"));
        }
    }

    if !diags.is_empty() {
        return Err(diags);
    }
    let model = model.expect("diagnostics were empty");
    let format = config.format.unwrap_or(OutputFormat::Json);

    let echo = ExperimentConfig {
        experiment: Some(experiment),
        model: Some(model_spec),
        beta: experiment.needs_beta().then_some(beta),
        beta_bracket: (experiment == Experiment::BetaScan).then_some(bracket),
        grid: Some(grid),
        loop_points: experiment.needs_loop().then_some(loop_points),
        axis: experiment.needs_axis().then_some(axis),
        footpoint: experiment.needs_footpoint().then_some(footpoint),
        subspace: (experiment == Experiment::UhlmannChern).then_some(subspace),
        min_gap: (experiment == Experiment::UhlmannChern).then_some(min_gap),
        out: config.out.clone(),
        format: Some(format),
    };

    Ok(Plan {
        experiment,
        model,
        beta,
        beta_bracket: bracket,
        grid,
        loop_points,
        axis,
        footpoint,
        subspace,
        min_gap,
        out: config.out.clone(),
        format,
        echo,
        notes,
    })
}
