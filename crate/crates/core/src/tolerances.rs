//! Pinned numerical tolerances.
//!
//! Every threshold used by checks and tests lives here so that a change
//! to a bound is a one-line edit.

/// Clifford relations, Hermiticity and grading identities.
pub const ALGEBRA: f64 = 1e-12;

/// Pointwise anticommutators and exact-zero eigenspace identities.
pub const POINTWISE: f64 = 1e-10;

/// Transport closed-form comparisons.
pub const CLOSED_FORM: f64 = 1e-10;

/// Capillary and boundary second fundamental form identities on flat data.
pub const CAPILLARY: f64 = 1e-10;

/// Exact-zero integral identity cases.
pub const EXACT_ZERO: f64 = 1e-12;

/// Sub-box additivity of volume terms.
pub const ADDITIVITY: f64 = 1e-12;

/// Minimum observed order for second-order schemes.
pub const ORDER_SECOND: f64 = 1.7;

/// Minimum observed order for fourth-order transport drift.
pub const ORDER_RK4: f64 = 3.5;

/// Residuals below this are treated as roundoff; order is then not meaningful.
pub const ROUNDOFF_FLOOR: f64 = 1e-10;

/// Smoothed-normal agreement at face centers for large smoothing parameter.
pub const SMOOTH_NORMAL: f64 = 1e-6;

/// Half-space membership and activity tolerance.
pub const HALFSPACE: f64 = 1e-9;

/// Unit-length tolerance for inputs declared to be unit vectors.
pub const UNIT: f64 = 1e-9;

/// Eigenspace membership defect for coefficient vectors.
pub const EIGENSPACE: f64 = 1e-10;
