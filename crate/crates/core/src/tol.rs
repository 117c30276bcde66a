//! Central tolerances and thresholds.
//!
//! Every numeric gate used by the solvers, the verification suites and the
//! acceptance tests is named here, not scattered as ad-hoc literals.

/// Mimetic identities (curl grad = 0, div curl = 0) hold up to roundoff.
/// Measured relative to the input field scale.
pub const MIMETIC_REL: f64 = 1e-12;

/// Relative residual target for the SPD conductivity solve.
pub const ELLIPTIC_REL: f64 = 1e-10;

/// Relative residual target for the time-harmonic curl-curl solve.
pub const MAXWELL_REL: f64 = 1e-8;

/// FOSLS objective target, as a fraction of the initial objective.
pub const FOSLS_REL: f64 = 1e-10;

/// Right-inverse contract: ||M M^+ - I|| on freshly built matrices.
pub const RIGHT_INV_BUILD: f64 = 1e-10;

/// Right-inverse contract on random conditioned matrices (cond <= 1e3).
pub const RIGHT_INV_RANDOM: f64 = 1e-9;

/// Discrete stencils are exact on low-degree polynomials up to this
/// relative error.
pub const STENCIL_EXACT_REL: f64 = 1e-10;

/// Symbolic-oracle comparisons for the eta scaling identity on polynomial
/// inputs.
pub const ETA_POLY_REL: f64 = 1e-8;

/// Observed MMS convergence orders must land in this window.
pub const MMS_ORDER_LO: f64 = 1.7;
pub const MMS_ORDER_HI: f64 = 2.3;

/// Small-omega consistency: ||E_omega - E_0||_inf at omega = 1e-3.
pub const SMALL_OMEGA_INF: f64 = 1e-2;

/// Round-trip reconstruction accuracy (relative L-inf, noiseless).
pub const ROUNDTRIP_LINF: f64 = 0.05;

/// Default admissibility floor for transport matrices, as a fraction of
/// the median field scale.
pub const SLIN_FRACTION: f64 = 1e-3;

/// Frequencies beyond this count in a cover trigger an informational
/// warning, not a failure.
pub const COVER_SOFT_MAX_K: usize = 4;
