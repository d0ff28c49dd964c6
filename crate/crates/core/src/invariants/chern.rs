//! Chern numbers on the momentum torus.
//!
//! [`chern_dvector`] counts how often the Bloch vector of a two-band model
//! wraps the unit sphere, by summing signed solid angles of a plaquette
//! triangulation. [`uhlmann_chern`] generalizes to mixed states: the
//! occupied direction is replaced by a purity-gap-protected subspace of the
//! density matrix, transported with the same parallel-transport steps as
//! the loop holonomies, and the curvature is accumulated from link
//! determinants. Both sum a principal-branch angle per plaquette, so the
//! total is an exact multiple of `2 pi` whenever every plaquette stays
//! below the branch cut; the distance from the reported integer is exposed
//! as the report's `tolerance`.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matcore::{from_spectral, herm_eig, CMatrix, Frame};
use crate::models::{BlochModel, DVector, KGrid, StateRule};
use crate::transport::step_from_roots;

use super::{GridMeta, InvariantName, InvariantReport, InvariantValue};

const PI: f64 = std::f64::consts::PI;
const TAU: f64 = std::f64::consts::TAU;
const FLOOR_ETA: f64 = 1e-10;
const LINK_COLLAPSE_TOL: f64 = 1e-9;
const BAND_SUM_MIN_GAP: f64 = 1e-6;

/// Which density-matrix eigenlevels form the transported subspace: the
/// `count` largest, protected by a purity gap of at least `min_gap` on
/// every grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubspaceSelector {
    pub count: usize,
    pub min_gap: f64,
}

impl SubspaceSelector {
    pub fn new(count: usize, min_gap: f64) -> SubspaceSelector {
        SubspaceSelector { count, min_gap }
    }
}

struct Node {
    root: CMatrix,
    frame: Frame,
}

/// Per-node spectral data for the subspace of `count` levels starting at
/// descending-eigenvalue index `level`: the frame of selected eigenvectors
/// and the square root of the projected, renormalized, floored state.
///
/// Also returns the smallest purity gap isolating the subspace across the
/// grid together with the point achieving it.
fn spectral_nodes(
    rule: &StateRule,
    grid: &KGrid,
    level: usize,
    count: usize,
    phases: Option<&[Vec<f64>]>,
) -> Result<(Vec<Node>, f64, usize)> {
    let dim = rule.dim();
    let end = level + count;
    let outcomes: Vec<Result<(Node, f64)>> = (0..grid.nx * grid.ny)
        .into_par_iter()
        .map(|idx| {
            let k = grid.point(idx / grid.ny, idx % grid.ny);
            let eig = herm_eig(&rule.density(k)?)?;
            let p = &eig.values;

            let mut isolation = f64::INFINITY;
            if level > 0 {
                isolation = isolation.min(p[level - 1] - p[level]);
            }
            if end < dim {
                isolation = isolation.min(p[end - 1] - p[end]);
            }

            let selected: f64 = p[level..end].iter().sum();
            let mut weights = Vec::with_capacity(dim);
            for (t, &pt) in p.iter().enumerate() {
                let share = if t >= level && t < end {
                    if selected > 0.0 { pt / selected } else { 1.0 / count as f64 }
                } else {
                    0.0
                };
                weights.push(((1.0 - FLOOR_ETA) * share + FLOOR_ETA / dim as f64).sqrt());
            }
            let root = from_spectral(&eig.vectors, &weights);

            let columns: Vec<usize> = (level..end).collect();
            let mut frame = Frame::from_columns(&eig.vectors, &columns);
            if let Some(all) = phases {
                for (c, &theta) in all[idx].iter().enumerate() {
                    frame.scale_col(c, C64::from_polar(1.0, theta));
                }
            }
            Ok((Node { root, frame }, isolation))
        })
        .collect();

    let mut nodes = Vec::with_capacity(outcomes.len());
    let mut worst_gap = f64::INFINITY;
    let mut worst_idx = 0;
    for (idx, outcome) in outcomes.into_iter().enumerate() {
        let (node, isolation) = outcome?;
        if isolation < worst_gap {
            worst_gap = isolation;
            worst_idx = idx;
        }
        nodes.push(node);
    }
    Ok((nodes, worst_gap, worst_idx))
}

fn link(grid: &KGrid, nodes: &[Node], from: usize, to: usize) -> Result<C64> {
    let a = &nodes[from];
    let b = &nodes[to];
    let step = step_from_roots(&a.root, &b.root)?;
    let moved = b.frame.adjoint_mul(&a.frame.left_mul(&step));
    let delta = moved.det();
    if delta.norm() < LINK_COLLAPSE_TOL {
        return Err(Error::PlaquetteOverflow {
            ix: from / grid.ny,
            iy: from % grid.ny,
            flux: PI,
        });
    }
    Ok(delta)
}

/// Chern number of the subspace of `count` eigenlevels starting at `level`,
/// as `(integer, distance of the raw flux sum from it)`.
fn chern_core(
    rule: &StateRule,
    grid: &KGrid,
    level: usize,
    count: usize,
    min_gap: f64,
    seed: Option<u64>,
) -> Result<(i64, f64)> {
    let dim = rule.dim();
    if count == 0 || level + count > dim {
        return Err(Error::invalid(format!(
            "levels [{level}, {}) do not fit a dimension-{dim} state",
            level + count
        )));
    }
    if !(min_gap.is_finite() && min_gap >= 0.0) {
        return Err(Error::invalid(format!("purity-gap threshold must be >= 0, got {min_gap}")));
    }

    let phases: Option<Vec<Vec<f64>>> = seed.map(|s| {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        (0..grid.nx * grid.ny)
            .map(|_| (0..count).map(|_| rng.gen_range(0.0..TAU)).collect())
            .collect()
    });

    let (nodes, worst_gap, worst_idx) =
        spectral_nodes(rule, grid, level, count, phases.as_deref())?;
    if worst_gap < min_gap {
        return Err(Error::SpectralConstraintViolated {
            k: grid.point(worst_idx / grid.ny, worst_idx % grid.ny),
            gap: worst_gap,
            required: min_gap,
        });
    }

    let (nx, ny) = (grid.nx, grid.ny);
    let at = |ix: usize, iy: usize| (ix % nx) * ny + (iy % ny);
    let links = |dir_x: bool| -> Result<Vec<C64>> {
        let raw: Vec<Result<C64>> = (0..nx * ny)
            .into_par_iter()
            .map(|idx| {
                let (ix, iy) = (idx / ny, idx % ny);
                let to = if dir_x { at(ix + 1, iy) } else { at(ix, iy + 1) };
                link(grid, &nodes, idx, to)
            })
            .collect();
        raw.into_iter().collect()
    };
    let dx = links(true)?;
    let dy = links(false)?;

    let mut total = 0.0;
    for ix in 0..nx {
        for iy in 0..ny {
            let product = dx[at(ix, iy)] * dy[at(ix + 1, iy)]
                * dx[at(ix, iy + 1)].conj()
                * dy[at(ix, iy)].conj();
            let flux = product.arg();
            if flux.abs() >= PI {
                return Err(Error::PlaquetteOverflow { ix, iy, flux });
            }
            total += flux;
        }
    }
    let raw = total / TAU;
    let value = raw.round();
    Ok((value as i64, (raw - value).abs()))
}

/// Chern number of the `selector.count` largest eigenlevels of `rule`'s
/// states over `grid`, defined whenever the purity gap stays at or above
/// `selector.min_gap` everywhere; otherwise the grid point with the
/// smallest gap is reported in [`Error::SpectralConstraintViolated`].
pub fn uhlmann_chern(
    rule: &StateRule,
    grid: &KGrid,
    selector: &SubspaceSelector,
) -> Result<InvariantReport> {
    let dim = rule.dim();
    if selector.count == 0 || selector.count >= dim {
        return Err(Error::invalid(format!(
            "subspace size must be between 1 and {}, got {}",
            dim - 1,
            selector.count
        )));
    }
    let (value, residual) = chern_core(rule, grid, 0, selector.count, selector.min_gap, None)?;
    Ok(report(InvariantName::ChernMixed { level: 0, count: selector.count }, value, residual, grid))
}

/// Same as [`uhlmann_chern`] with every frame column multiplied by a
/// seeded random phase, for verifying that results carry no gauge
/// dependence.
pub fn uhlmann_chern_scrambled(
    rule: &StateRule,
    grid: &KGrid,
    selector: &SubspaceSelector,
    seed: u64,
) -> Result<InvariantReport> {
    let dim = rule.dim();
    if selector.count == 0 || selector.count >= dim {
        return Err(Error::invalid(format!(
            "subspace size must be between 1 and {}, got {}",
            dim - 1,
            selector.count
        )));
    }
    let (value, residual) =
        chern_core(rule, grid, 0, selector.count, selector.min_gap, Some(seed))?;
    Ok(report(InvariantName::ChernMixed { level: 0, count: selector.count }, value, residual, grid))
}

/// Chern number of each single eigenlevel, largest first. Requires all
/// adjacent eigenvalue gaps to stay at or above `1e-6` on the grid; the
/// values of a full set of levels sum to zero.
pub fn band_chern_sum(rule: &StateRule, grid: &KGrid) -> Result<Vec<InvariantReport>> {
    let dim = rule.dim();
    let mut reports = Vec::with_capacity(dim);
    for level in 0..dim {
        let (value, residual) = chern_core(rule, grid, level, 1, BAND_SUM_MIN_GAP, None)?;
        reports.push(report(
            InvariantName::ChernMixed { level, count: 1 },
            value,
            residual,
            grid,
        ));
    }
    Ok(reports)
}

fn report(name: InvariantName, value: i64, residual: f64, grid: &KGrid) -> InvariantReport {
    InvariantReport {
        name,
        value: InvariantValue::Integer(value),
        grid: GridMeta { nx: Some(grid.nx), ny: Some(grid.ny), ..GridMeta::default() },
        tolerance: residual,
    }
}

fn unit_d(model: &BlochModel, grid: &KGrid, ix: usize, iy: usize) -> Result<DVector> {
    let k = grid.point(ix, iy);
    let d = model.d_vector(k)?;
    let norm = d.norm();
    if norm <= 1e-10 {
        return Err(Error::GapClosed { k, gap: 2.0 * norm });
    }
    Ok(d.scaled(1.0 / norm))
}

fn solid_angle(a: DVector, b: DVector, c: DVector) -> f64 {
    let numer = a.dot(b.cross(c));
    let denom = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * numer.atan2(denom)
}

/// Chern number of the lower band of a two-band model: the signed number
/// of times the unit Bloch vector wraps the sphere, accumulated from the
/// solid angles of two spherical triangles per grid plaquette. Requires
/// the spectral gap `2 |d|` open on every grid point.
pub fn chern_dvector(model: &BlochModel, grid: &KGrid) -> Result<InvariantReport> {
    let (nx, ny) = (grid.nx, grid.ny);
    let hats: Vec<DVector> = (0..nx * ny)
        .into_par_iter()
        .map(|idx| unit_d(model, grid, idx / ny, idx % ny))
        .collect::<Result<Vec<DVector>>>()?;

    let at = |ix: usize, iy: usize| (ix % nx) * ny + (iy % ny);
    let mut total = 0.0;
    for ix in 0..nx {
        for iy in 0..ny {
            let v00 = hats[at(ix, iy)];
            let v10 = hats[at(ix + 1, iy)];
            let v11 = hats[at(ix + 1, iy + 1)];
            let v01 = hats[at(ix, iy + 1)];
            total += solid_angle(v00, v10, v11) + solid_angle(v00, v11, v01);
        }
    }
    let raw = total / (2.0 * TAU);
    let value = raw.round();
    Ok(InvariantReport {
        name: InvariantName::ChernPure,
        value: InvariantValue::Integer(value as i64),
        grid: GridMeta { nx: Some(nx), ny: Some(ny), ..GridMeta::default() },
        tolerance: (raw - value).abs(),
    })
}
