//! Invariant-level properties exercised through the public API: exact
//! integer quantization, grid-refinement stability, gauge independence,
//! footpoint independence, the pure-state limit, and the single winding
//! transition in temperature.

use uhlmann::invariants::uhlmann_chern_scrambled;
use uhlmann::{
    band_chern_sum, chern_dvector, phase_profile, purity_gap, uhlmann_chern, winding_number,
    Axis, BlochModel, Error, KGrid, KPoint, StateRule, SubspaceSelector,
};

const PI: f64 = std::f64::consts::PI;

fn model() -> BlochModel {
    BlochModel::aniso_qah_default()
}

#[test]
fn protected_integers_survive_grid_refinement() {
    let sel = SubspaceSelector::new(1, 1e-6);
    for beta in [0.5, 1.3, 5.0] {
        let rule = StateRule::thermal(model(), beta);
        for n in [50, 100, 200] {
            let grid = KGrid::new(n, n).unwrap();
            let report = uhlmann_chern(&rule, &grid, &sel).unwrap();
            assert_eq!(report.integer(), Some(-1), "beta {beta}, grid {n}");
            assert!(
                report.tolerance <= 1e-9,
                "beta {beta}, grid {n}: residual {}",
                report.tolerance
            );
        }
    }
}

#[test]
fn texture_number_survives_grid_refinement() {
    for n in [50, 100, 200] {
        let grid = KGrid::new(n, n).unwrap();
        let report = chern_dvector(&model(), &grid).unwrap();
        assert_eq!(report.integer(), Some(-1), "grid {n}");
        assert!(report.tolerance <= 1e-9, "grid {n}: residual {}", report.tolerance);
    }
}

#[test]
fn frame_gauge_is_invisible() {
    let grid = KGrid::new(40, 40).unwrap();
    let sel = SubspaceSelector::new(1, 1e-6);
    let rule = StateRule::thermal(model(), 1.3);
    let plain = uhlmann_chern(&rule, &grid, &sel).unwrap();
    for seed in [1u64, 99, 4096] {
        let scrambled = uhlmann_chern_scrambled(&rule, &grid, &sel, seed).unwrap();
        assert_eq!(scrambled.integer(), plain.integer(), "seed {seed}");
        assert!(scrambled.tolerance <= 1e-9, "seed {seed}");
    }
}

#[test]
fn level_numbers_sum_to_zero() {
    let grid = KGrid::new(60, 60).unwrap();
    for beta in [0.9, 5.0] {
        let rule = StateRule::thermal(model(), beta);
        let reports = band_chern_sum(&rule, &grid).unwrap();
        let values: Vec<i64> = reports.iter().map(|r| r.integer().unwrap()).collect();
        assert_eq!(values.iter().sum::<i64>(), 0, "beta {beta}: {values:?}");
        assert_eq!(values, vec![-1, 1], "beta {beta}");
    }
}

#[test]
fn winding_ignores_the_footpoint() {
    for beta in [1.3, 2.0] {
        let rule = StateRule::thermal(model(), beta);
        let mut values = Vec::new();
        for footpoint in [-PI, 0.0] {
            let profile = phase_profile(&rule, Axis::X, footpoint, 300, 300).unwrap();
            values.push(winding_number(&profile).unwrap().integer().unwrap());
        }
        assert_eq!(values[0], values[1], "beta {beta}");
        assert_eq!(values[0], -1, "beta {beta}");
    }
}

#[test]
fn pure_limit_invariants_are_mutually_consistent() {
    // Deep in the pure limit every invariant reduces to band topology: the
    // slow-x winding and the protected-subspace number equal the texture
    // number, and the slow-y winding is its negative because the two slow
    // axes circulate the same curvature in opposite senses.
    let texture = chern_dvector(&model(), &KGrid::new(100, 100).unwrap())
        .unwrap()
        .integer()
        .unwrap();
    assert_eq!(texture, -1);

    let rule = StateRule::thermal(model(), 1e3).with_floor(1e-10);
    let protected = uhlmann_chern(
        &rule,
        &KGrid::new(50, 50).unwrap(),
        &SubspaceSelector::new(1, 1e-6),
    )
    .unwrap()
    .integer()
    .unwrap();
    assert_eq!(protected, texture);

    let wind = |axis: Axis| {
        let profile = phase_profile(&rule, axis, -PI, 400, 200).unwrap();
        winding_number(&profile).unwrap().integer().unwrap()
    };
    assert_eq!(wind(Axis::X), texture);
    assert_eq!(wind(Axis::Y), -texture);
}

#[test]
fn winding_magnitude_changes_exactly_once_in_temperature() {
    let mut windings = Vec::new();
    for beta in [0.5, 0.7, 0.824, 0.924, 1.1, 1.5] {
        let rule = StateRule::thermal(model(), beta);
        let profile = phase_profile(&rule, Axis::X, -PI, 500, 500).unwrap();
        windings.push(winding_number(&profile).unwrap().integer().unwrap());
    }
    let changes = windings.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(changes, 1, "windings {windings:?}");
    assert_eq!(windings, vec![0, 0, 0, -1, -1, -1]);
}

#[test]
fn purity_gap_interpolates_between_limits() {
    let m = model();
    let sel = SubspaceSelector::new(1, 0.0);
    let k = KPoint::new(0.9, -1.4);
    let dn = m.d_vector(k).unwrap().norm();
    for beta in [0.0, 0.4, 1.3, 60.0] {
        let rule = StateRule::thermal(m.clone(), beta);
        let gap = purity_gap(&rule, k, &sel).unwrap();
        assert!(
            (gap - (beta * dn).tanh()).abs() <= 1e-12,
            "beta {beta}: gap {gap}"
        );
    }
}

#[test]
fn degenerate_spectra_are_refused() {
    let grid = KGrid::new(16, 16).unwrap();
    let hot = StateRule::thermal(model(), 0.0);
    assert!(matches!(
        uhlmann_chern(&hot, &grid, &SubspaceSelector::new(1, 1e-6)),
        Err(Error::SpectralConstraintViolated { .. })
    ));
    assert!(matches!(
        band_chern_sum(&hot, &grid),
        Err(Error::SpectralConstraintViolated { .. })
    ));
}
