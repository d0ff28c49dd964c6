//! Parallel transport of density matrices along momentum paths.
//!
//! The discrete transport step between neighboring states is the unitary
//! polar factor of `sqrt(rho_next) * sqrt(rho_here)`; it maximizes the
//! fidelity overlap between purifications of the two states, and composing
//! steps along a closed path yields the mixed-state holonomy. Pure-state
//! limits are covered by the overlap-product phase of a single band and by
//! the polar-unitarized Wilson line of a band subspace, which the transport
//! step reproduces as the state purity approaches one.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::matcore::{herm_eig, sqrt_psd, unitary_polar, CMatrix, Frame};
use crate::models::{Axis, BlochModel, KPoint, StateRule, GAP_EPS};

const TAU: f64 = std::f64::consts::TAU;
const FD_STEP: f64 = 1e-4;
const REUNITARIZE_EVERY: usize = 64;

/// Discretized path through the Brillouin zone.
#[derive(Clone, Debug)]
pub struct KPath {
    samples: Vec<KPoint>,
}

impl KPath {
    pub fn from_samples(samples: Vec<KPoint>) -> Result<KPath> {
        if samples.len() < 2 {
            return Err(Error::invalid("a path needs at least 2 samples"));
        }
        if samples.iter().any(|k| !k.x.is_finite() || !k.y.is_finite()) {
            return Err(Error::NonFinite { what: "path sample" });
        }
        Ok(KPath { samples })
    }

    /// Closed loop of `segments` equal steps along `vary`, holding the other
    /// coordinate at `fixed`. The varying coordinate starts at `start`,
    /// advances by `2 pi / segments`, and the final sample is a bit-exact
    /// copy of the first, so the loop closes without floating-point drift.
    pub fn coordinate_loop(vary: Axis, fixed: f64, start: f64, segments: usize) -> Result<KPath> {
        if segments < 3 {
            return Err(Error::invalid(format!(
                "a coordinate loop needs at least 3 segments, got {segments}"
            )));
        }
        if !fixed.is_finite() || !start.is_finite() {
            return Err(Error::NonFinite { what: "loop coordinate" });
        }
        let mut samples = Vec::with_capacity(segments + 1);
        for t in 0..segments {
            let coord = start + TAU * t as f64 / segments as f64;
            let k = match vary {
                Axis::X => KPoint::new(coord, fixed),
                Axis::Y => KPoint::new(fixed, coord),
            };
            samples.push(k.reduced());
        }
        samples.push(samples[0]);
        Ok(KPath { samples })
    }

    pub fn samples(&self) -> &[KPoint] {
        &self.samples
    }

    pub fn segment_count(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn is_closed(&self) -> bool {
        self.samples.first() == self.samples.last()
    }

    pub fn reversed(&self) -> KPath {
        let mut samples = self.samples.clone();
        samples.reverse();
        KPath { samples }
    }
}

/// One transport step: the unitary carrying the state at `from` to `to`.
#[derive(Clone, Debug)]
pub struct StepRecord {
    pub index: usize,
    pub from: KPoint,
    pub to: KPoint,
    pub unitary: CMatrix,
}

/// Accumulated transport around a path.
#[derive(Clone, Debug)]
pub struct Holonomy {
    pub unitary: CMatrix,
    pub segments: usize,
}

/// Unitary polar factor of `sqrt(to) * sqrt(from)`.
///
/// Both arguments are density matrices (Hermitian positive semidefinite,
/// any positive trace -- the step is invariant under rescaling either one).
/// Fails with [`Error::RankDeficient`] when the overlap matrix is
/// numerically singular, which happens when either state has (near-)zero
/// eigenvalues; a [`StateRule`] floor lifts such states back to full rank.
pub fn uhlmann_step(from: &CMatrix, to: &CMatrix) -> Result<CMatrix> {
    let root_from = sqrt_psd(from)?;
    let root_to = sqrt_psd(to)?;
    step_from_roots(&root_from, &root_to)
}

pub(crate) fn step_from_roots(root_from: &CMatrix, root_to: &CMatrix) -> Result<CMatrix> {
    unitary_polar(&root_to.mul(root_from))
}

fn tag_segment(e: Error, index: usize) -> Error {
    match e {
        Error::RankDeficient { sigma_min, segment: None } => {
            Error::RankDeficient { sigma_min, segment: Some(index) }
        }
        other => other,
    }
}

/// State roots `sqrt(rho)` at every path sample, reusing the first root for
/// a bit-exact closing sample.
pub(crate) fn roots_along(rule: &StateRule, path: &KPath) -> Result<Vec<CMatrix>> {
    let samples = path.samples();
    let mut roots: Vec<CMatrix> = Vec::with_capacity(samples.len());
    for (i, &k) in samples.iter().enumerate() {
        if i + 1 == samples.len() && path.is_closed() {
            roots.push(roots[0].clone());
            break;
        }
        let rho = rule.density(k)?;
        roots.push(sqrt_psd(&rho).map_err(|e| tag_segment(e, i))?);
    }
    Ok(roots)
}

/// Transport of `rule`'s states along `path`: the ordered product of the
/// per-segment step unitaries, later segments applied on the left.
///
/// The accumulated product is re-unitarized periodically so that rounding
/// drift stays negligible even for paths with many thousands of segments.
pub fn uhlmann_holonomy(rule: &StateRule, path: &KPath) -> Result<Holonomy> {
    let roots = roots_along(rule, path)?;
    let n = rule.dim();
    let mut acc = CMatrix::identity(n);
    for i in 0..path.segment_count() {
        let step = step_from_roots(&roots[i], &roots[i + 1]).map_err(|e| tag_segment(e, i))?;
        acc = step.mul(&acc);
        if (i + 1) % REUNITARIZE_EVERY == 0 {
            acc = unitary_polar(&acc).map_err(|e| tag_segment(e, i))?;
        }
    }
    Ok(Holonomy { unitary: acc, segments: path.segment_count() })
}

/// Per-segment transport steps along `path`, in path order.
pub fn uhlmann_steps(rule: &StateRule, path: &KPath) -> Result<Vec<StepRecord>> {
    let roots = roots_along(rule, path)?;
    let samples = path.samples();
    let mut records = Vec::with_capacity(path.segment_count());
    for i in 0..path.segment_count() {
        let unitary = step_from_roots(&roots[i], &roots[i + 1]).map_err(|e| tag_segment(e, i))?;
        records.push(StepRecord { index: i, from: samples[i], to: samples[i + 1], unitary });
    }
    Ok(records)
}

/// Local transport generator at `k` along `axis`.
#[derive(Clone, Debug)]
pub struct ConnectionSample {
    pub k: KPoint,
    pub axis: Axis,
    /// Central-difference step used for the momentum derivative.
    pub step: f64,
    /// Anti-Hermitian generator `X` with
    /// `uhlmann_step(rho(k), rho(k + h e_axis)) = 1 + h X + O(h^2)`.
    pub generator: CMatrix,
}

/// Transport generator of a two-band state rule.
///
/// With `s = sqrt(rho)` and `ds` its momentum derivative along `axis`, the
/// generator is the anti-Hermitian solution `X` of the Sylvester equation
/// `X rho + rho X = ds s - s ds`, solved in the eigenbasis of `rho`. Fails
/// with [`Error::RankDeficient`] when an eigenvalue-pair sum of `rho` is
/// numerically zero, where the generator stops being determined.
pub fn two_band_connection(rule: &StateRule, k: KPoint, axis: Axis) -> Result<ConnectionSample> {
    if rule.dim() != 2 {
        return Err(Error::invalid(format!(
            "transport generator is implemented for two-band rules, got dimension {}",
            rule.dim()
        )));
    }
    let h = FD_STEP;
    let (kp, km) = match axis {
        Axis::X => (KPoint::new(k.x + h, k.y), KPoint::new(k.x - h, k.y)),
        Axis::Y => (KPoint::new(k.x, k.y + h), KPoint::new(k.x, k.y - h)),
    };
    let s_plus = sqrt_psd(&rule.density(kp)?)?;
    let s_minus = sqrt_psd(&rule.density(km)?)?;
    let s_here = sqrt_psd(&rule.density(k)?)?;
    let ds = s_plus.sub(&s_minus).scaled_re(1.0 / (2.0 * h));
    let rhs = ds.mul(&s_here).sub(&s_here.mul(&ds));

    let rho = rule.density(k)?;
    let eig = herm_eig(&rho)?;
    let v = &eig.vectors;
    let compressed = v.adjoint().mul(&rhs).mul(v);
    let n = rho.dim();
    let mut x = CMatrix::zeros(n);
    for a in 0..n {
        for b in 0..n {
            let denom = eig.values[a] + eig.values[b];
            if denom <= 1e-12 {
                return Err(Error::RankDeficient { sigma_min: denom, segment: None });
            }
            x[(a, b)] = compressed[(a, b)] / denom;
        }
    }
    let generator = v.mul(&x).mul(&v.adjoint());
    Ok(ConnectionSample { k, axis, step: h, generator })
}

/// Cyclic phase of a vector chain: `-arg` of the product of neighboring
/// overlaps `<v_i | v_(i+1 mod n)>`.
///
/// The product is accumulated on the unit circle, so its phase is immune to
/// modulus underflow on long chains. Invariant under any per-vector phase
/// change, since each vector enters once as a bra and once as a ket.
pub(crate) fn closed_overlap_phase(vectors: &[Vec<C64>]) -> Result<f64> {
    if vectors.len() < 2 {
        return Err(Error::invalid("overlap phase needs at least 2 vectors"));
    }
    let mut acc = C64::new(1.0, 0.0);
    for i in 0..vectors.len() {
        let next = (i + 1) % vectors.len();
        let overlap = inner(&vectors[i], &vectors[next]);
        let mag = overlap.norm();
        if mag < 1e-12 {
            return Err(Error::invalid(format!(
                "vanishing overlap between samples {i} and {next}; refine the path"
            )));
        }
        acc *= overlap / mag;
    }
    Ok(-acc.arg())
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Geometric phase of one energy band around a closed path.
///
/// `band` counts bands in ascending energy order, `0` being the lowest.
/// The phase is the cyclic overlap product of the band eigenvectors and is
/// returned in `(-pi, pi]`. Fails with [`Error::GapClosed`] when the band
/// touches a neighbor at some sample.
pub fn berry_phase(model: &BlochModel, band: usize, path: &KPath) -> Result<f64> {
    let n = model.dim();
    if band >= n {
        return Err(Error::invalid(format!(
            "band index {band} out of range for a {n}-band model"
        )));
    }
    if !path.is_closed() {
        return Err(Error::invalid("geometric phase requires a closed path"));
    }
    let samples = &path.samples()[..path.segment_count()];
    let mut vectors = Vec::with_capacity(samples.len());
    for &k in samples {
        let eig = herm_eig(&model.hamiltonian(k))?;
        let col = n - 1 - band;
        check_isolated(&eig.values, col, k)?;
        vectors.push(eig.vectors.col(col));
    }
    closed_overlap_phase(&vectors)
}

fn check_isolated(values_desc: &[f64], col: usize, k: KPoint) -> Result<()> {
    if col > 0 {
        let gap = values_desc[col - 1] - values_desc[col];
        if gap < GAP_EPS {
            return Err(Error::GapClosed { k, gap });
        }
    }
    if col + 1 < values_desc.len() {
        let gap = values_desc[col] - values_desc[col + 1];
        if gap < GAP_EPS {
            return Err(Error::GapClosed { k, gap });
        }
    }
    Ok(())
}

/// Holonomy of the subspace spanned by the `n_bands` lowest bands around a
/// closed path: the ordered product of polar-unitarized frame overlaps.
///
/// Returns an `n_bands x n_bands` unitary in the frame of the starting
/// sample. Fails with [`Error::GapClosed`] when the selected subspace
/// touches the rest of the spectrum, and with [`Error::RankDeficient`] when
/// consecutive frames overlap too weakly to define a transport step.
pub fn kato_holonomy(model: &BlochModel, n_bands: usize, path: &KPath) -> Result<CMatrix> {
    let n = model.dim();
    if n_bands == 0 || n_bands > n {
        return Err(Error::invalid(format!(
            "subspace size must be between 1 and {n}, got {n_bands}"
        )));
    }
    if !path.is_closed() {
        return Err(Error::invalid("holonomy requires a closed path"));
    }
    let samples = &path.samples()[..path.segment_count()];
    let columns: Vec<usize> = (0..n_bands).map(|b| n - 1 - b).collect();
    let mut frames = Vec::with_capacity(samples.len() + 1);
    for &k in samples {
        let eig = herm_eig(&model.hamiltonian(k))?;
        if n_bands < n {
            let gap = eig.values[n - 1 - n_bands] - eig.values[n - n_bands];
            if gap < GAP_EPS {
                return Err(Error::GapClosed { k, gap });
            }
        }
        frames.push(Frame::from_columns(&eig.vectors, &columns));
    }
    frames.push(frames[0].clone());

    let mut acc = CMatrix::identity(n_bands);
    for i in 0..samples.len() {
        let overlap = frames[i + 1].adjoint_mul(&frames[i]);
        let step = unitary_polar(&overlap).map_err(|e| tag_segment(e, i))?;
        acc = step.mul(&acc);
    }
    Ok(acc)
}
