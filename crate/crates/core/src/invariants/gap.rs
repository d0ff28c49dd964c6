//! Spectral gap of the loop-holonomy observable.
//!
//! For every grid point, transport the state once around the Brillouin
//! zone along `k_y` and form `rho(k) H` with `H` the loop holonomy based
//! at `k`. The two eigenvalue moduli of that matrix coincide exactly where
//! the transport-phase winding changes, so their smallest separation over
//! the grid measures how well the winding is protected.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matcore::CMatrix;
use crate::models::{Axis, KGrid, StateRule};
use crate::transport::{uhlmann_holonomy, uhlmann_steps, KPath};

use super::{GridMeta, InvariantName, InvariantReport, InvariantValue};

const PI: f64 = std::f64::consts::PI;

fn modulus_gap(footpoint_density: &CMatrix, holonomy: &CMatrix) -> f64 {
    let (l1, l2) = footpoint_density.mul(holonomy).eigenvalues2();
    (l1.norm() - l2.norm()).abs()
}

/// Holonomy gaps for one column of footpoints sharing `kx`, reusing a
/// single master loop: every footpoint lies on the `loop_points` lattice,
/// so its holonomy is a cyclic rotation `P H P^dagger` of the master
/// holonomy `H` by the prefix product `P` up to the footpoint.
fn column_gaps_shared(
    rule: &StateRule,
    grid: &KGrid,
    ix: usize,
    loop_points: usize,
) -> Result<Vec<f64>> {
    let kx = grid.point(ix, 0).x;
    let path = KPath::coordinate_loop(Axis::Y, kx, -PI, loop_points)?;
    let steps = uhlmann_steps(rule, &path)?;

    let stride = loop_points / grid.ny;
    let mut prefixes = Vec::with_capacity(grid.ny);
    let mut acc = CMatrix::identity(rule.dim());
    for (t, record) in steps.iter().enumerate() {
        if t % stride == 0 {
            prefixes.push(acc.clone());
        }
        acc = record.unitary.mul(&acc);
    }
    let master = acc;

    let mut gaps = Vec::with_capacity(grid.ny);
    for (iy, prefix) in prefixes.iter().enumerate() {
        let holonomy = prefix.mul(&master).mul(&prefix.adjoint());
        let rho = rule.density(grid.point(ix, iy))?;
        gaps.push(modulus_gap(&rho, &holonomy));
    }
    Ok(gaps)
}

fn column_gaps_direct(
    rule: &StateRule,
    grid: &KGrid,
    ix: usize,
    loop_points: usize,
) -> Result<Vec<f64>> {
    let kx = grid.point(ix, 0).x;
    let mut gaps = Vec::with_capacity(grid.ny);
    for iy in 0..grid.ny {
        let k = grid.point(ix, iy);
        let path = KPath::coordinate_loop(Axis::Y, kx, k.y, loop_points)?;
        let holonomy = uhlmann_holonomy(rule, &path)?;
        let rho = rule.density(k)?;
        gaps.push(modulus_gap(&rho, &holonomy.unitary));
    }
    Ok(gaps)
}

/// Smallest holonomy gap over a grid of footpoints, each transported
/// around a `loop_points`-segment loop along `k_y`.
pub fn holonomy_gap(rule: &StateRule, grid: &KGrid, loop_points: usize) -> Result<InvariantReport> {
    if rule.dim() != 2 {
        return Err(Error::invalid(format!(
            "the holonomy gap is defined for two-band states, got dimension {}",
            rule.dim()
        )));
    }
    let shared = loop_points.is_multiple_of(grid.ny);
    let columns: Vec<Result<Vec<f64>>> = (0..grid.nx)
        .into_par_iter()
        .map(|ix| {
            if shared {
                column_gaps_shared(rule, grid, ix, loop_points)
            } else {
                column_gaps_direct(rule, grid, ix, loop_points)
            }
        })
        .collect();

    let mut min = f64::INFINITY;
    for column in columns {
        for gap in column? {
            if gap < min {
                min = gap;
            }
        }
    }
    Ok(InvariantReport {
        name: InvariantName::HolonomyGap,
        value: InvariantValue::Real(min),
        grid: GridMeta {
            nx: Some(grid.nx),
            ny: Some(grid.ny),
            loop_points: Some(loop_points),
            ..GridMeta::default()
        },
        tolerance: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::BlochModel;

    fn model() -> BlochModel {
        BlochModel::aniso_qah_default()
    }

    #[test]
    fn infinite_temperature_gap_vanishes() {
        let rule = StateRule::thermal(model(), 0.0);
        let grid = KGrid::new(12, 12).unwrap();
        let report = holonomy_gap(&rule, &grid, 24).unwrap();
        assert!(report.real() < 1e-12, "gap {}", report.real());
    }

    #[test]
    fn near_pure_states_have_a_wide_gap() {
        let rule = StateRule::thermal(model(), 1e3).with_floor(1e-10);
        let grid = KGrid::new(10, 10).unwrap();
        let report = holonomy_gap(&rule, &grid, 50).unwrap();
        assert!(report.real() > 0.9, "gap {}", report.real());
    }

    #[test]
    fn shared_and_direct_loops_agree() {
        let rule = StateRule::thermal(model(), 1.3);
        let grid = KGrid::new(6, 12).unwrap();
        let mut shared = Vec::new();
        let mut direct = Vec::new();
        for ix in 0..grid.nx {
            shared.extend(column_gaps_shared(&rule, &grid, ix, 24).unwrap());
            direct.extend(column_gaps_direct(&rule, &grid, ix, 24).unwrap());
        }
        for (s, d) in shared.iter().zip(&direct) {
            assert!((s - d).abs() < 1e-9, "shared {s} direct {d}");
        }
    }

    #[test]
    fn indivisible_loop_counts_use_direct_loops() {
        let rule = StateRule::thermal(model(), 1.3);
        let grid = KGrid::new(5, 7).unwrap();
        let report = holonomy_gap(&rule, &grid, 23).unwrap();
        assert!(report.real().is_finite() && report.real() > 0.0);
    }

    #[test]
    fn wide_bands_are_required() {
        let three = BlochModel::custom(3, |_| CMatrix::diag_re(&[1.0, 0.0, -1.0]));
        let rule = StateRule::thermal(three, 1.0);
        let grid = KGrid::new(4, 4).unwrap();
        assert!(matches!(holonomy_gap(&rule, &grid, 8), Err(Error::InvalidInput(_))));
    }
}
