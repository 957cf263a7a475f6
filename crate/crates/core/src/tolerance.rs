//! Numerical tolerances shared across the crate.

/// Slack on the uncertainty relation: every symplectic eigenvalue must be at
/// least `1 - STATE_VALIDITY`.
pub const STATE_VALIDITY: f64 = 1e-9;

/// Slack for derived quantities (entropies, mutual information, entropy
/// production) that are non-negative in exact arithmetic.
pub const DERIVED: f64 = 1e-8;

/// Largest acceptable `max |S^T Ω S - Ω|` for a recorded propagator.
pub const SYMPLECTIC_DEFECT: f64 = 1e-8;

/// Integration aborts once the defect passes this multiple of
/// [`SYMPLECTIC_DEFECT`].
pub const DEFECT_ABORT_FACTOR: f64 = 100.0;

/// Largest tolerated asymmetry, relative to the largest entry, before a
/// matrix is rejected as non-symmetric.
pub const SYMMETRY: f64 = 1e-10;

/// Allowed mismatch `|ζ - I - D|` between the two entropy-production routes.
pub const RECONCILIATION: f64 = 1e-6;

/// Allowed drift of the joint entropy over a run.
pub const ENTROPY_DRIFT: f64 = 1e-6;

/// Allowed relative drift of the total energy while the coupling is constant.
pub const ENERGY_DRIFT: f64 = 1e-6;

/// Relative size (against ν) of `|σ_qq - σ_pp|` and `|σ_qp|` below which a
/// single-mode state counts as thermal.
pub const THERMALITY: f64 = 1e-3;
