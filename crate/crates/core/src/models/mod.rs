//! Momentum-space band models and the density matrices built from them.
//!
//! A [`BlochModel`] maps a point of the two-dimensional Brillouin zone to a
//! Hermitian Bloch Hamiltonian. Density matrices at each momentum come from
//! a [`StateRule`]: thermal (Gibbs at inverse temperature `beta`), the pure
//! ground-band projector, or an explicit spectral-weight assignment. Rules
//! can carry an optional uniform floor that mixes in a small multiple of the
//! identity, keeping states full-rank where transport would otherwise hit a
//! numerically singular square root.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{from_spectral, herm_eig, CMatrix};

mod modelfile;

pub use modelfile::{load_model, parse_model};

pub(crate) const GAP_EPS: f64 = 1e-10;
pub(crate) const FLOOR_TRIGGER: f64 = 1e-12;

const TAU: f64 = std::f64::consts::TAU;

/// Point of the two-dimensional Brillouin zone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KPoint {
    pub x: f64,
    pub y: f64,
}

impl KPoint {
    pub fn new(x: f64, y: f64) -> KPoint {
        KPoint { x, y }
    }

    /// Translate both coordinates into `[-pi, pi)`.
    ///
    /// Values already inside the window pass through bit-exactly, and the
    /// upper endpoint `pi` lands exactly on `-pi`.
    pub fn reduced(self) -> KPoint {
        KPoint { x: reduce(self.x), y: reduce(self.y) }
    }

    pub fn coordinate(self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }
}

fn reduce(v: f64) -> f64 {
    v - TAU * (v / TAU + 0.5).floor()
}

impl fmt::Display for KPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6})", self.x, self.y)
    }
}

/// Coordinate direction in the Brillouin zone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Axis> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            other => Err(Error::invalid(format!("axis must be \"x\" or \"y\", got \"{other}\""))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::X => write!(f, "x"),
            Axis::Y => write!(f, "y"),
        }
    }
}

/// Trigonometric factor of a Fourier term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigKind {
    Sin,
    Cos,
}

/// One harmonic `amplitude * trig(nx*kx + ny*ky)` feeding a Pauli component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierTerm {
    pub kind: TrigKind,
    pub nx: i32,
    pub ny: i32,
    pub amplitude: f64,
    /// Pauli component the term feeds: 1, 2, or 3.
    pub component: usize,
}

impl FourierTerm {
    pub fn eval(&self, k: KPoint) -> f64 {
        let arg = self.nx as f64 * k.x + self.ny as f64 * k.y;
        let trig = match self.kind {
            TrigKind::Sin => arg.sin(),
            TrigKind::Cos => arg.cos(),
        };
        self.amplitude * trig
    }
}

/// Real three-component Bloch vector of a two-band Hamiltonian `H = d . sigma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl DVector {
    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(self, o: DVector) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: DVector) -> DVector {
        DVector {
            x: self.y * o.z - self.z * o.y,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }

    pub fn scaled(self, s: f64) -> DVector {
        DVector { x: self.x * s, y: self.y * s, z: self.z * s }
    }

}

impl std::ops::Sub for DVector {
    type Output = DVector;

    fn sub(self, o: DVector) -> DVector {
        DVector { x: self.x - o.x, y: self.y - o.y, z: self.z - o.z }
    }
}

/// Bloch Hamiltonian over the Brillouin zone.
#[derive(Clone)]
pub enum BlochModel {
    /// Two-band model `H(k) = d(k) . sigma` with `d` a sum of Fourier terms.
    TwoBand { terms: Vec<FourierTerm> },
    /// Arbitrary Hermitian map, for callers that assemble `H(k)` themselves.
    Custom {
        dim: usize,
        map: Arc<dyn Fn(KPoint) -> CMatrix + Send + Sync>,
    },
}

impl BlochModel {
    /// Anisotropic two-band model
    /// `d(k) = (a1 sin kx, a2 sin ky, m - cos kx - cos ky)`.
    pub fn aniso_qah(a1: f64, a2: f64, m: f64) -> BlochModel {
        BlochModel::TwoBand {
            terms: vec![
                FourierTerm { kind: TrigKind::Sin, nx: 1, ny: 0, amplitude: a1, component: 1 },
                FourierTerm { kind: TrigKind::Sin, nx: 0, ny: 1, amplitude: a2, component: 2 },
                FourierTerm { kind: TrigKind::Cos, nx: 0, ny: 0, amplitude: m, component: 3 },
                FourierTerm { kind: TrigKind::Cos, nx: 1, ny: 0, amplitude: -1.0, component: 3 },
                FourierTerm { kind: TrigKind::Cos, nx: 0, ny: 1, amplitude: -1.0, component: 3 },
            ],
        }
    }

    /// The `aniso_qah` model at its reference parameters `(1, 3, 1)`.
    pub fn aniso_qah_default() -> BlochModel {
        BlochModel::aniso_qah(1.0, 3.0, 1.0)
    }

    pub fn from_terms(terms: Vec<FourierTerm>) -> Result<BlochModel> {
        for (i, t) in terms.iter().enumerate() {
            if !(1..=3).contains(&t.component) {
                return Err(Error::invalid(format!(
                    "term {}: component must be 1, 2, or 3, got {}",
                    i + 1,
                    t.component
                )));
            }
            if !t.amplitude.is_finite() {
                return Err(Error::invalid(format!("term {}: amplitude must be finite", i + 1)));
            }
        }
        Ok(BlochModel::TwoBand { terms })
    }

    pub fn custom(
        dim: usize,
        map: impl Fn(KPoint) -> CMatrix + Send + Sync + 'static,
    ) -> BlochModel {
        BlochModel::Custom { dim, map: Arc::new(map) }
    }

    pub fn dim(&self) -> usize {
        match self {
            BlochModel::TwoBand { .. } => 2,
            BlochModel::Custom { dim, .. } => *dim,
        }
    }

    /// Bloch vector at `k`; only defined for two-band models.
    pub fn d_vector(&self, k: KPoint) -> Result<DVector> {
        match self {
            BlochModel::TwoBand { terms } => {
                let mut d = DVector { x: 0.0, y: 0.0, z: 0.0 };
                for t in terms {
                    let v = t.eval(k);
                    match t.component {
                        1 => d.x += v,
                        2 => d.y += v,
                        _ => d.z += v,
                    }
                }
                Ok(d)
            }
            BlochModel::Custom { .. } => {
                Err(Error::invalid("Bloch vector is only defined for two-band models"))
            }
        }
    }

    pub fn hamiltonian(&self, k: KPoint) -> CMatrix {
        match self {
            BlochModel::TwoBand { .. } => {
                let d = self.d_vector(k).expect("two-band model has a Bloch vector");
                CMatrix::from_rows(&[
                    vec![C64::new(d.z, 0.0), C64::new(d.x, -d.y)],
                    vec![C64::new(d.x, d.y), C64::new(-d.z, 0.0)],
                ])
            }
            BlochModel::Custom { map, .. } => map(k),
        }
    }
}

impl fmt::Debug for BlochModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlochModel::TwoBand { terms } => {
                f.debug_struct("TwoBand").field("terms", terms).finish()
            }
            BlochModel::Custom { dim, .. } => f
                .debug_struct("Custom")
                .field("dim", dim)
                .finish_non_exhaustive(),
        }
    }
}

/// How the density matrix at each momentum is assembled from band data.
#[derive(Clone, Debug)]
pub enum StateKind {
    /// Gibbs state `exp(-beta H) / Z`.
    Thermal { beta: f64 },
    /// Projector onto the lowest-energy band.
    PureGround,
    /// Explicit band weights, listed in ascending energy order.
    Spectral { weights: Vec<f64>, normalize: bool },
}

/// A model together with a state recipe and an optional identity floor.
///
/// When `floor = Some(eta)` and the assembled state has a spectral weight
/// below `1e-12`, the state is replaced by
/// `(1 - eta) rho + eta (tr rho / N) 1`, which preserves the trace and keeps
/// every eigenvalue at or above roughly `eta / N`.
#[derive(Clone, Debug)]
pub struct StateRule {
    pub model: BlochModel,
    pub kind: StateKind,
    pub floor: Option<f64>,
}

impl StateRule {
    pub fn thermal(model: BlochModel, beta: f64) -> StateRule {
        StateRule { model, kind: StateKind::Thermal { beta }, floor: None }
    }

    pub fn pure_ground(model: BlochModel) -> StateRule {
        StateRule { model, kind: StateKind::PureGround, floor: None }
    }

    pub fn spectral(model: BlochModel, weights: Vec<f64>, normalize: bool) -> StateRule {
        StateRule { model, kind: StateKind::Spectral { weights, normalize }, floor: None }
    }

    pub fn with_floor(mut self, eta: f64) -> StateRule {
        self.floor = Some(eta);
        self
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    /// Density matrix at `k`.
    pub fn density(&self, k: KPoint) -> Result<CMatrix> {
        let eig = herm_eig(&self.model.hamiltonian(k))?;
        let mut weights = descending_weights(&self.kind, &eig.values, k)?;
        if let Some(eta) = self.floor {
            let min = weights.iter().copied().fold(f64::INFINITY, f64::min);
            if min < FLOOR_TRIGGER {
                let n = weights.len() as f64;
                let trace: f64 = weights.iter().sum();
                for w in weights.iter_mut() {
                    *w = (1.0 - eta) * *w + eta * trace / n;
                }
            }
        }
        Ok(from_spectral(&eig.vectors, &weights))
    }
}

/// Band weights in the descending-eigenvalue order used by [`herm_eig`].
fn descending_weights(kind: &StateKind, values_desc: &[f64], k: KPoint) -> Result<Vec<f64>> {
    let n = values_desc.len();
    match kind {
        StateKind::Thermal { beta } => {
            if !beta.is_finite() || *beta < 0.0 {
                return Err(Error::invalid(format!(
                    "inverse temperature must be finite and non-negative, got {beta}"
                )));
            }
            let e_min = values_desc.iter().copied().fold(f64::INFINITY, f64::min);
            let mut w: Vec<f64> = values_desc.iter().map(|&e| (-beta * (e - e_min)).exp()).collect();
            let z: f64 = w.iter().sum();
            for v in w.iter_mut() {
                *v /= z;
            }
            Ok(w)
        }
        StateKind::PureGround => {
            if n >= 2 {
                let gap = values_desc[n - 2] - values_desc[n - 1];
                if gap < GAP_EPS {
                    return Err(Error::GapClosed { k, gap });
                }
            }
            let mut w = vec![0.0; n];
            w[n - 1] = 1.0;
            Ok(w)
        }
        StateKind::Spectral { weights, normalize } => {
            if weights.len() != n {
                return Err(Error::invalid(format!(
                    "expected {} band weights, got {}",
                    n,
                    weights.len()
                )));
            }
            if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(Error::invalid("band weights must be finite and non-negative"));
            }
            let sum: f64 = weights.iter().sum();
            if sum <= 0.0 {
                return Err(Error::invalid("band weights must not all be zero"));
            }
            // weights[b] refers to ascending band b = column n-1-b.
            let mut w: Vec<f64> = (0..n).map(|t| weights[n - 1 - t]).collect();
            for t in 0..n.saturating_sub(1) {
                let gap = values_desc[t] - values_desc[t + 1];
                if gap < GAP_EPS && w[t] != w[t + 1] {
                    return Err(Error::GapClosed { k, gap });
                }
            }
            if *normalize {
                for v in w.iter_mut() {
                    *v /= sum;
                }
            }
            Ok(w)
        }
    }
}

/// Gibbs state `exp(-beta H(k)) / Z` of `model` at momentum `k`.
pub fn thermal_state(model: &BlochModel, beta: f64, k: KPoint) -> Result<CMatrix> {
    StateRule::thermal(model.clone(), beta).density(k)
}

/// Projector onto the lowest-energy band of `model` at momentum `k`.
///
/// Fails with [`Error::GapClosed`] when the two lowest bands are degenerate
/// to within `1e-10`, where the projector stops being well defined.
pub fn pure_ground_state(model: &BlochModel, k: KPoint) -> Result<CMatrix> {
    StateRule::pure_ground(model.clone()).density(k)
}

/// State with explicit `weights` on the energy-ascending bands of `model`.
///
/// Degenerate bands must carry equal weights; with `normalize` the weights
/// are rescaled to unit trace, otherwise they are used as given.
pub fn spectral_state(
    model: &BlochModel,
    weights: &[f64],
    normalize: bool,
    k: KPoint,
) -> Result<CMatrix> {
    StateRule::spectral(model.clone(), weights.to_vec(), normalize).density(k)
}

/// Uniform momentum grid `k_(i,j) = (-pi + i 2pi/nx, -pi + j 2pi/ny)`.
///
/// Indices wrap: `point(i + nx, j)` is bit-identical to `point(i, j)`, so
/// grid traversals close periodically without floating-point drift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KGrid {
    pub nx: usize,
    pub ny: usize,
}

impl KGrid {
    pub fn new(nx: usize, ny: usize) -> Result<KGrid> {
        if nx < 2 || ny < 2 {
            return Err(Error::invalid(format!(
                "momentum grid needs at least 2 points per axis, got {nx}x{ny}"
            )));
        }
        Ok(KGrid { nx, ny })
    }

    pub fn point(&self, ix: usize, iy: usize) -> KPoint {
        let ix = ix % self.nx;
        let iy = iy % self.ny;
        KPoint {
            x: -std::f64::consts::PI + TAU * ix as f64 / self.nx as f64,
            y: -std::f64::consts::PI + TAU * iy as f64 / self.ny as f64,
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All grid nodes in row-major `(ix, iy)` order.
    pub fn points(&self) -> impl Iterator<Item = (usize, usize, KPoint)> + '_ {
        let g = *self;
        (0..self.nx).flat_map(move |ix| (0..g.ny).map(move |iy| (ix, iy, g.point(ix, iy))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const PI: f64 = std::f64::consts::PI;

    fn model() -> BlochModel {
        BlochModel::aniso_qah_default()
    }

    #[test]
    fn bloch_vector_at_reference_points() {
        let m = model();
        let d0 = m.d_vector(KPoint::new(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(d0.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d0.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d0.z, -1.0, epsilon = 1e-15);

        let dx = m.d_vector(KPoint::new(PI / 2.0, 0.0)).unwrap();
        assert_abs_diff_eq!(dx.x, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dx.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dx.z, 0.0, epsilon = 1e-15);

        let dy = m.d_vector(KPoint::new(0.0, PI / 2.0)).unwrap();
        assert_abs_diff_eq!(dy.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dy.y, 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dy.z, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn bloch_vector_norm_is_one_on_the_kx_axis() {
        let m = model();
        for i in 0..40 {
            let kx = -PI + TAU * i as f64 / 40.0;
            let d = m.d_vector(KPoint::new(kx, 0.0)).unwrap();
            // (sin kx, 0, -cos kx) has unit length for every kx.
            assert_abs_diff_eq!(d.norm(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn ground_projector_at_gamma() {
        let p = pure_ground_state(&model(), KPoint::new(0.0, 0.0)).unwrap();
        // H(0,0) = -sigma_3: the ground band is the first basis vector.
        assert_abs_diff_eq!(p[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert!(p[(1, 1)].norm() < 1e-12);
        assert!(p[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn thermal_weights_match_closed_form() {
        let m = model();
        let k = KPoint::new(1.0, 1.0);
        let beta = 1.3;
        let rho = thermal_state(&m, beta, k).unwrap();
        let dn = m.d_vector(k).unwrap().norm();
        let z = (beta * dn).exp() + (-beta * dn).exp();
        let eig = herm_eig(&rho).unwrap();
        assert_abs_diff_eq!(eig.values[0], (beta * dn).exp() / z, epsilon = 1e-13);
        assert_abs_diff_eq!(eig.values[1], (-beta * dn).exp() / z, epsilon = 1e-13);
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn infinite_temperature_is_maximally_mixed() {
        let rho = thermal_state(&model(), 0.0, KPoint::new(0.7, -2.1)).unwrap();
        let half = CMatrix::identity(2).scaled_re(0.5);
        assert!(rho.max_abs_diff(&half) < 1e-14);
    }

    #[test]
    fn deep_thermal_limit_approaches_ground_projector() {
        let m = model();
        let k = KPoint::new(1.0, 2.0);
        let rho = thermal_state(&m, 1e3, k).unwrap();
        let p = pure_ground_state(&m, k).unwrap();
        assert!(rho.max_abs_diff(&p) < 1e-6);
    }

    #[test]
    fn spectral_state_special_cases() {
        let m = model();
        let k = KPoint::new(0.4, -1.2);

        let pure = spectral_state(&m, &[1.0, 0.0], false, k).unwrap();
        assert!(pure.max_abs_diff(&pure_ground_state(&m, k).unwrap()) < 1e-13);

        let mixed = spectral_state(&m, &[0.5, 0.5], false, k).unwrap();
        assert!(mixed.max_abs_diff(&CMatrix::identity(2).scaled_re(0.5)) < 1e-13);

        // Ground weight 0.8 matches a Gibbs state when tanh(beta |d|) = 0.6.
        let dn = m.d_vector(k).unwrap().norm();
        let beta = 0.6f64.atanh() / dn;
        let s = spectral_state(&m, &[0.8, 0.2], false, k).unwrap();
        let t = thermal_state(&m, beta, k).unwrap();
        assert!(s.max_abs_diff(&t) < 1e-13);
    }

    #[test]
    fn degenerate_bands_reject_unequal_weights() {
        let flat = BlochModel::from_terms(vec![FourierTerm {
            kind: TrigKind::Cos,
            nx: 0,
            ny: 0,
            amplitude: 0.0,
            component: 3,
        }])
        .unwrap();
        let k = KPoint::new(0.3, 0.3);
        match pure_ground_state(&flat, k) {
            Err(Error::GapClosed { gap, .. }) => assert!(gap.abs() < 1e-12),
            other => panic!("expected GapClosed, got {other:?}"),
        }
        match spectral_state(&flat, &[1.0, 0.0], false, k) {
            Err(Error::GapClosed { .. }) => {}
            other => panic!("expected GapClosed, got {other:?}"),
        }
        // Equal weights on a degenerate pair are fine.
        let ok = spectral_state(&flat, &[0.5, 0.5], false, k).unwrap();
        assert!(ok.max_abs_diff(&CMatrix::identity(2).scaled_re(0.5)) < 1e-14);
    }

    #[test]
    fn floor_lifts_zero_weights_and_preserves_trace() {
        let m = model();
        let k = KPoint::new(0.9, 0.2);
        let eta = 1e-10;
        let rule = StateRule::pure_ground(m.clone()).with_floor(eta);
        let rho = rule.density(k).unwrap();
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-13);
        let eig = herm_eig(&rho).unwrap();
        assert!(eig.values[1] > 0.0);
        assert_abs_diff_eq!(eig.values[1], eta / 2.0, epsilon = 1e-14);
        // Full-rank states pass through untouched.
        let thermal = StateRule::thermal(m.clone(), 1.0).with_floor(eta);
        let a = thermal.density(k).unwrap();
        let b = thermal_state(&m, 1.0, k).unwrap();
        assert_eq!(a.max_abs_diff(&b), 0.0);
    }

    #[test]
    fn momentum_reduction_window() {
        let k = KPoint::new(-PI, PI);
        let r = k.reduced();
        assert_eq!(r.x, -PI);
        assert_eq!(r.y, -PI);
        let inside = KPoint::new(0.123456, -3.1).reduced();
        assert_eq!(inside.x, 0.123456);
        assert_eq!(inside.y, -3.1);
        let shifted = KPoint::new(0.25 + TAU, 0.25 - 2.0 * TAU).reduced();
        assert_abs_diff_eq!(shifted.x, 0.25, epsilon = 1e-13);
        assert_abs_diff_eq!(shifted.y, 0.25, epsilon = 1e-13);
    }

    #[test]
    fn grid_indices_wrap_bit_exactly() {
        let g = KGrid::new(7, 5).unwrap();
        for ix in 0..7 {
            for iy in 0..5 {
                let a = g.point(ix, iy);
                let b = g.point(ix + 7, iy + 5);
                assert_eq!(a.x.to_bits(), b.x.to_bits());
                assert_eq!(a.y.to_bits(), b.y.to_bits());
            }
        }
        assert_eq!(g.point(0, 0), KPoint::new(-PI, -PI));
    }

    #[test]
    fn hamiltonian_is_periodic_to_rounding() {
        let m = model();
        let k = KPoint::new(0.37, -1.91);
        let shifted = KPoint::new(k.x + TAU, k.y - TAU);
        let diff = m.hamiltonian(k).max_abs_diff(&m.hamiltonian(shifted));
        assert!(diff < 1e-13);
    }

    #[test]
    fn negative_inverse_temperature_is_rejected() {
        match thermal_state(&model(), -0.5, KPoint::new(0.0, 0.0)) {
            Err(Error::InvalidInput(_)) => {}
            other => panic!("expected InvalidInput, got {other:?}"),
        }
    }
}
