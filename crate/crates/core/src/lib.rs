//! Geometric phases and topological invariants of momentum-parameterized
//! density matrices.
//!
//! A density matrix `rho(k)` on the Brillouin-zone torus carries geometric
//! structure beyond its pure-state limit: parallel transport of purifications
//! (Uhlmann transport) assigns a unitary holonomy to every closed loop, the
//! phase of its trace against the footpoint state winds around the torus, and
//! the holonomies of small plaquettes integrate to an integer Chern number
//! protected by the purity gap rather than the energy gap. This crate computes
//! those objects for small Bloch problems (`2 <= N <= 16`), together with
//! their pure-state counterparts (Berry phases, Kato/Wilson holonomies,
//! d-vector Chern numbers) so that every mixed-state quantity can be checked
//! against its zero-temperature limit.
//!
//! The layers, bottom up:
//!
//! * [`matcore`] — dense complex linear algebra sized for small `N`
//!   (Hermitian eigensolver, SVD, PSD square root, unitary polar factor).
//! * [`models`] — Bloch Hamiltonians on the torus and the density-matrix
//!   rules built from them (thermal, ground-state projector, spectral).
//! * [`transport`] — discrete parallel transport along k-space paths:
//!   Uhlmann steps and holonomies, Berry phases, Kato holonomies.
//! * [`invariants`] — the quantities a scan reports: phase profiles, winding
//!   numbers, mixed-state Chern numbers, purity and holonomy gaps, critical
//!   inverse temperatures.

pub mod error;
pub mod invariants;
pub mod matcore;
pub mod models;
pub mod transport;

/// Library version, embedded in result envelopes by downstream tools.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use invariants::{
    band_chern_sum, chern_dvector, critical_beta, holonomy_gap, phase_profile, purity_gap,
    uhlmann_chern, uhlmann_phase, winding_number, GridMeta, InvariantName, InvariantReport,
    InvariantValue, PhaseProfile, ScanOpts, SubspaceSelector,
};
pub use matcore::{herm_eig, sqrt_psd, svd, unitary_polar, CMatrix, EigDecomposition, SvdTriple, C64};
pub use models::{
    load_model, parse_model, pure_ground_state, spectral_state, thermal_state, Axis, BlochModel,
    DVector, FourierTerm, KGrid, KPoint, StateKind, StateRule, TrigKind,
};
pub use transport::{
    berry_phase, kato_holonomy, two_band_connection, uhlmann_holonomy, uhlmann_step,
    uhlmann_steps, ConnectionSample, Holonomy, KPath, StepRecord,
};
