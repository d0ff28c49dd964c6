//! Failure modes shared by every layer of the crate.
//!
//! Conditions that name a momentum carry the offending `k` so that callers
//! (and the command-line driver) can report where on the torus a constraint
//! failed, not just that it failed.

use thiserror::Error;

use crate::models::KPoint;

/// Everything that can go wrong while building states or transporting them.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The input matrix deviates from its own adjoint beyond tolerance.
    #[error("input matrix is not Hermitian: deviation {deviation:.3e} exceeds {tol:.3e}")]
    NonHermitianInput { deviation: f64, tol: f64 },

    /// An eigenvalue is negative beyond the PSD tolerance.
    #[error("matrix is not positive semi-definite: eigenvalue {eigenvalue:.6e}")]
    NotPositive { eigenvalue: f64 },

    /// A transport step or polar factor is undefined because the input is
    /// (numerically) singular.
    #[error("rank-deficient transport input: smallest singular value {sigma_min:.3e}{}",
        segment.map(|s| format!(" at segment {s}")).unwrap_or_default())]
    RankDeficient { sigma_min: f64, segment: Option<usize> },

    /// A protecting spectral gap closed at some momentum.
    #[error("spectral gap closed at k = ({:.6}, {:.6}): gap {gap:.3e}", k.x, k.y)]
    GapClosed { k: KPoint, gap: f64 },

    /// The trace defining a phase has modulus too small to carry an argument.
    #[error("trace modulus {modulus:.3e} is too small to define a phase")]
    ZeroTrace { modulus: f64 },

    /// A phase profile jumps by more than pi/2 between consecutive slow
    /// samples even after branch unwrapping.
    #[error("phase profile under-resolved: unwrapped jump {jump:.4} rad at slow sample {index} exceeds pi/2")]
    UnderResolved { index: usize, jump: f64 },

    /// The purity gap protecting a subspace invariant dropped below the
    /// requested minimum somewhere on the grid.
    #[error("spectral constraint violated at k = ({:.6}, {:.6}): purity gap {gap:.3e} < required {required:.3e}", k.x, k.y)]
    SpectralConstraintViolated { k: KPoint, gap: f64, required: f64 },

    /// A plaquette flux reached the branch cut; the grid cannot resolve the
    /// curvature.
    #[error("plaquette flux {flux:.4} rad at cell ({ix}, {iy}) reached the principal branch boundary; grid too coarse")]
    PlaquetteOverflow { ix: usize, iy: usize, flux: f64 },

    /// A bisection bracket does not straddle a winding-number transition.
    #[error("no transition inside bracket [{low}, {high}]: winding {winding} at both ends")]
    NoTransition { low: f64, high: f64, winding: i64 },

    /// A phase profile with failed samples cannot feed a winding number.
    #[error("phase profile incomplete: {failed} of {total} slow samples failed")]
    IncompleteProfile { failed: usize, total: usize },

    /// A NaN or infinity appeared where a finite number was required.
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    /// A precondition on arguments was violated.
    #[error("{0}")]
    InvalidInput(String),

    /// A model definition file could not be parsed or validated.
    #[error("model definition: {0}")]
    ModelFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
