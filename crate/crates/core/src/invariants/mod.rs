//! Topological invariants and diagnostics of momentum-space state families.
//!
//! The central objects are the phase of the transported state around a
//! momentum loop, its winding as the loop's footpoint sweeps the transverse
//! direction, Chern numbers of purity-gap-protected eigenvalue subspaces,
//! and the spectral diagnostics (purity gap, holonomy-matrix gap) that
//! certify when those integers are well defined. Results are wrapped in
//! [`InvariantReport`] so callers see the value together with the grid it
//! was computed on and the achieved numerical slack.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::herm_eig;
use crate::models::{Axis, KPoint, StateRule};
use crate::transport::{uhlmann_holonomy, KPath};

mod chern;
mod gap;

pub use chern::{
    band_chern_sum, chern_dvector, uhlmann_chern, uhlmann_chern_scrambled, SubspaceSelector,
};
pub use gap::holonomy_gap;

const TAU: f64 = std::f64::consts::TAU;
const PI: f64 = std::f64::consts::PI;
const ZERO_TRACE_TOL: f64 = 1e-12;
const JUMP_GUARD: f64 = PI / 2.0;
const REFINE_DEPTH: usize = 14;

/// Translate an angle difference into `[-pi, pi)`.
pub(crate) fn principal_branch(v: f64) -> f64 {
    v - TAU * (v / TAU + 0.5).floor()
}

/// Which invariant a report carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvariantName {
    /// Chern number of the Bloch vector texture of a two-band model.
    ChernPure,
    /// Winding of the transport phase, slow axis `x`.
    CUhlmannX,
    /// Winding of the transport phase, slow axis `y`.
    CUhlmannY,
    /// Chern number of a protected eigenvalue subspace: `count` levels
    /// starting at descending-eigenvalue index `level`.
    ChernMixed { level: usize, count: usize },
    HolonomyGap,
    PurityGap,
    BetaCritical { axis: Axis },
}

impl fmt::Display for InvariantName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvariantName::ChernPure => write!(f, "chern_pure"),
            InvariantName::CUhlmannX => write!(f, "c_uhlmann_x"),
            InvariantName::CUhlmannY => write!(f, "c_uhlmann_y"),
            InvariantName::ChernMixed { level: 0, count } => write!(f, "chern_mixed(n={count})"),
            InvariantName::ChernMixed { level, count } => {
                write!(f, "chern_mixed(level={level},n={count})")
            }
            InvariantName::HolonomyGap => write!(f, "holonomy_gap"),
            InvariantName::PurityGap => write!(f, "purity_gap"),
            InvariantName::BetaCritical { axis } => write!(f, "beta_critical_{axis}"),
        }
    }
}

impl Serialize for InvariantName {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Integer-quantized or real-valued result.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum InvariantValue {
    Integer(i64),
    Real(f64),
}

impl InvariantValue {
    pub fn as_integer(self) -> Option<i64> {
        match self {
            InvariantValue::Integer(v) => Some(v),
            InvariantValue::Real(_) => None,
        }
    }

    pub fn as_real(self) -> f64 {
        match self {
            InvariantValue::Integer(v) => v as f64,
            InvariantValue::Real(v) => v,
        }
    }
}

/// Discretization a result was computed on; unset fields are omitted from
/// serialized output.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ny: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loop_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slow_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub footpoint: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

/// A computed invariant: what it is, its value, the grid, and the achieved
/// numerical slack (for integer invariants, the distance of the raw sum
/// from the reported integer).
#[derive(Clone, Debug, Serialize)]
pub struct InvariantReport {
    pub name: InvariantName,
    pub value: InvariantValue,
    pub grid: GridMeta,
    pub tolerance: f64,
}

impl InvariantReport {
    pub fn integer(&self) -> Option<i64> {
        self.value.as_integer()
    }

    pub fn real(&self) -> f64 {
        self.value.as_real()
    }
}

/// Transport phases of a family of loops, one per slow-coordinate sample.
///
/// `slow_samples` and `phases` are aligned and contain the successful
/// samples only; samples whose loop failed are recorded in `failures` with
/// their original index.
#[derive(Clone, Debug)]
pub struct PhaseProfile {
    /// The slow coordinate; loops run along the other axis.
    pub axis: Axis,
    pub slow_samples: Vec<f64>,
    /// Phases in `(-pi, pi]`, aligned with `slow_samples`.
    pub phases: Vec<f64>,
    /// Starting value of the fast (loop) coordinate.
    pub footpoint: f64,
    /// Fast-loop discretization: segments per loop.
    pub loop_points: usize,
    pub failures: Vec<(usize, Error)>,
}

impl PhaseProfile {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }
}

/// Transport phase of `rule`'s states around a closed loop: the argument of
/// `Tr[rho(k_0) H]` with `H` the loop holonomy based at the loop's first
/// sample `k_0`. Returned in `(-pi, pi]`.
///
/// The trace modulus is generally below one for mixed states; when it drops
/// under `1e-12` the phase is undefined and [`Error::ZeroTrace`] is raised.
pub fn uhlmann_phase(rule: &StateRule, path: &KPath) -> Result<f64> {
    if !path.is_closed() {
        return Err(Error::invalid("transport phase requires a closed path"));
    }
    let holonomy = uhlmann_holonomy(rule, path)?;
    let rho0 = rule.density(path.samples()[0])?;
    let trace = rho0.mul(&holonomy.unitary).trace();
    let modulus = trace.norm();
    if modulus < ZERO_TRACE_TOL {
        return Err(Error::ZeroTrace { modulus });
    }
    Ok(trace.arg())
}

fn loop_phase(
    rule: &StateRule,
    axis: Axis,
    slow_value: f64,
    footpoint: f64,
    loop_points: usize,
) -> Result<f64> {
    let path = KPath::coordinate_loop(axis.other(), slow_value, footpoint, loop_points)?;
    uhlmann_phase(rule, &path)
}

/// Transport phase at `slow_count` equidistant values of the `axis`
/// coordinate, each from a `loop_points`-segment loop along the other axis
/// starting at `footpoint`. Per-sample failures are collected in the
/// profile rather than aborting the scan.
pub fn phase_profile(
    rule: &StateRule,
    axis: Axis,
    footpoint: f64,
    loop_points: usize,
    slow_count: usize,
) -> Result<PhaseProfile> {
    if slow_count < 3 {
        return Err(Error::invalid(format!(
            "a phase profile needs at least 3 slow samples, got {slow_count}"
        )));
    }
    if !footpoint.is_finite() {
        return Err(Error::NonFinite { what: "loop footpoint" });
    }
    let slow_values: Vec<f64> = (0..slow_count)
        .map(|j| -PI + TAU * j as f64 / slow_count as f64)
        .collect();
    let outcomes: Vec<Result<f64>> = slow_values
        .par_iter()
        .map(|&s| loop_phase(rule, axis, s, footpoint, loop_points))
        .collect();

    let mut slow_samples = Vec::with_capacity(slow_count);
    let mut phases = Vec::with_capacity(slow_count);
    let mut failures = Vec::new();
    for (j, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(phi) => {
                slow_samples.push(slow_values[j]);
                phases.push(phi);
            }
            Err(e) => failures.push((j, e)),
        }
    }
    Ok(PhaseProfile { axis, slow_samples, phases, footpoint, loop_points, failures })
}

/// Winding number of a complete phase profile around the slow circle.
///
/// Consecutive (cyclic) phase differences are translated to the principal
/// branch, which removes genuine branch jumps of `2 pi`; any remaining
/// difference above `pi/2` means the slow grid cannot distinguish winding
/// from aliasing and is reported as [`Error::UnderResolved`]. The total
/// divided by `2 pi` is integer up to accumulated rounding, recorded in the
/// report's `tolerance`.
pub fn winding_number(profile: &PhaseProfile) -> Result<InvariantReport> {
    if !profile.is_complete() {
        return Err(Error::IncompleteProfile {
            failed: profile.failures.len(),
            total: profile.phases.len() + profile.failures.len(),
        });
    }
    let n = profile.phases.len();
    if n < 3 {
        return Err(Error::invalid("winding needs at least 3 profile samples"));
    }
    let mut total = 0.0;
    for j in 0..n {
        let next = (j + 1) % n;
        let delta = principal_branch(profile.phases[next] - profile.phases[j]);
        if delta.abs() > JUMP_GUARD {
            return Err(Error::UnderResolved { index: j, jump: delta });
        }
        total += delta;
    }
    let raw = total / TAU;
    let value = raw.round();
    Ok(InvariantReport {
        name: match profile.axis {
            Axis::X => InvariantName::CUhlmannX,
            Axis::Y => InvariantName::CUhlmannY,
        },
        value: InvariantValue::Integer(value as i64),
        grid: GridMeta {
            slow_count: Some(n),
            loop_points: Some(profile.loop_points),
            footpoint: Some(profile.footpoint),
            ..GridMeta::default()
        },
        tolerance: (raw - value).abs(),
    })
}

/// Difference between the `selector.count`-th and next eigenvalue of
/// `rule`'s state at `k`, eigenvalues sorted descending.
pub fn purity_gap(rule: &StateRule, k: KPoint, selector: &SubspaceSelector) -> Result<f64> {
    let n = rule.dim();
    if selector.count == 0 || selector.count >= n {
        return Err(Error::invalid(format!(
            "subspace size must be between 1 and {}, got {}",
            n - 1,
            selector.count
        )));
    }
    let eig = herm_eig(&rule.density(k)?)?;
    Ok((eig.values[selector.count - 1] - eig.values[selector.count]).max(0.0))
}

/// Options for winding scans over an inverse-temperature bracket.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScanOpts {
    /// Segments per fast loop.
    pub loop_points: usize,
    /// Base number of slow-axis samples.
    pub slow_count: usize,
    /// Fast-loop starting coordinate.
    pub footpoint: f64,
    /// Stop once the bracket is narrower than this.
    pub beta_tol: f64,
}

impl Default for ScanOpts {
    fn default() -> ScanOpts {
        ScanOpts { loop_points: 500, slow_count: 500, footpoint: -PI, beta_tol: 1e-3 }
    }
}

/// Winding with adaptive slow-axis refinement.
///
/// Starts from the base grid and recursively bisects any slow segment whose
/// principal phase difference exceeds the aliasing guard; near a transition
/// the profile develops a steep feature that a fixed grid cannot resolve,
/// and refinement follows it down to width `2 pi / slow_count / 2^14`.
fn adaptive_winding(rule: &StateRule, axis: Axis, opts: &ScanOpts) -> Result<i64> {
    let s = opts.slow_count;
    let slow_values: Vec<f64> = (0..s).map(|j| -PI + TAU * j as f64 / s as f64).collect();
    let phases: Vec<f64> = slow_values
        .par_iter()
        .map(|&v| loop_phase(rule, axis, v, opts.footpoint, opts.loop_points))
        .collect::<Result<Vec<f64>>>()?;

    let mut total = 0.0;
    for j in 0..s {
        let next = (j + 1) % s;
        let hi_coord = if next == 0 { slow_values[j] + TAU / s as f64 } else { slow_values[next] };
        total += refined_delta(
            rule,
            axis,
            opts,
            j,
            (slow_values[j], phases[j]),
            (hi_coord, phases[next]),
            REFINE_DEPTH,
        )?;
    }
    let raw = total / TAU;
    Ok(raw.round() as i64)
}

fn refined_delta(
    rule: &StateRule,
    axis: Axis,
    opts: &ScanOpts,
    index: usize,
    lo: (f64, f64),
    hi: (f64, f64),
    depth: usize,
) -> Result<f64> {
    let delta = principal_branch(hi.1 - lo.1);
    if delta.abs() <= JUMP_GUARD {
        return Ok(delta);
    }
    if depth == 0 {
        return Err(Error::UnderResolved { index, jump: delta });
    }
    let mid_coord = 0.5 * (lo.0 + hi.0);
    let mid_phase = loop_phase(rule, axis, mid_coord, opts.footpoint, opts.loop_points)?;
    let left = refined_delta(rule, axis, opts, index, lo, (mid_coord, mid_phase), depth - 1)?;
    let right = refined_delta(rule, axis, opts, index, (mid_coord, mid_phase), hi, depth - 1)?;
    Ok(left + right)
}

/// Inverse temperature where the winding number changes, located by
/// bisection on `family(beta)` until the bracket is narrower than
/// `opts.beta_tol`. Fails with [`Error::NoTransition`] when the windings at
/// the bracket ends agree.
pub fn critical_beta<F>(
    family: F,
    axis: Axis,
    bracket: (f64, f64),
    opts: &ScanOpts,
) -> Result<InvariantReport>
where
    F: Fn(f64) -> StateRule + Sync,
{
    let (mut lo, mut hi) = bracket;
    if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || lo >= hi {
        return Err(Error::invalid(format!(
            "bracket must satisfy 0 <= low < high, got ({lo}, {hi})"
        )));
    }
    if opts.beta_tol <= 0.0 {
        return Err(Error::invalid("bisection tolerance must be positive"));
    }
    let w_lo = adaptive_winding(&family(lo), axis, opts)?;
    let w_hi = adaptive_winding(&family(hi), axis, opts)?;
    if w_lo == w_hi {
        return Err(Error::NoTransition { low: lo, high: hi, winding: w_lo });
    }
    while hi - lo > opts.beta_tol {
        let mid = 0.5 * (lo + hi);
        let w_mid = adaptive_winding(&family(mid), axis, opts)?;
        if w_mid == w_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(InvariantReport {
        name: InvariantName::BetaCritical { axis },
        value: InvariantValue::Real(0.5 * (lo + hi)),
        grid: GridMeta {
            loop_points: Some(opts.loop_points),
            slow_count: Some(opts.slow_count),
            footpoint: Some(opts.footpoint),
            ..GridMeta::default()
        },
        tolerance: 0.5 * (hi - lo),
    })
}
