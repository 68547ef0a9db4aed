//! Numeric tolerances shared across the crate.
//!
//! Every threshold that gates a geometric decision is defined here rather
//! than inline, so the degeneracy behavior of the solvers is auditable in
//! one place.

/// Relative threshold for dehomogenization: a homogeneous point with
/// `|w| <= EPS_W_REL * norm` has no finite representative.
pub const EPS_W_REL: f64 = 1e-12;

/// Candidate vanishing lines with `|l3| / ||l||` below this are rejected;
/// they belong to the pencil through the distortion center, where the
/// division parameter is unobservable.
pub const L3_REJECT_REL: f64 = 1e-8;

/// Feasibility window for the division-model parameter in normalized
/// image coordinates. Synthetic scenes draw from [-6, 0]; the margin
/// keeps noisy-but-usable roots.
pub const LAMBDA_FEASIBLE: (f64, f64) = (-8.0, 1.0);

/// Two polynomial roots closer than this (relative to magnitude) are
/// reported once.
pub const ROOT_MERGE_REL: f64 = 1e-8;

/// A returned root r of p must satisfy |p(r)| <= this times
/// `max|c_i| * max(1, |r|)^deg`.
pub const ROOT_RESIDUAL_REL: f64 = 1e-8;

/// The determinant polynomial counts as identically zero when its largest
/// coefficient is below this times the cubed scale of the constraint
/// matrix entries (degenerate configuration, e.g. all points on a circle
/// about the distortion center).
pub const DET_ZERO_REL: f64 = 1e-10;

/// A constraint row whose largest polynomial coefficient is below this
/// times the largest over the matrix is treated as the zero row
/// (collinear joins or duplicate points).
pub const ROW_ZERO_REL: f64 = 1e-10;

/// Accepted models must satisfy ||M(lambda) l|| <= this * ||M||_F.
pub const NULLSPACE_RESIDUAL_REL: f64 = 1e-8;

/// Condition-number limit for the KKT system of the constrained
/// least-squares vanishing-point estimate.
pub const KKT_COND_MAX: f64 = 1e12;

/// Symmetric-transfer contribution substituted when a point has no real
/// preimage under the distortion map (normalized units squared).
pub const NO_PREIMAGE_SENTINEL_SQ: f64 = 1.0;

/// Generated scenes keep `|l3| / ||l||` of the ground-truth vanishing line
/// above this margin.
pub const SCENE_L3_MIN_REL: f64 = 1e-3;

/// Generated frames keep the spread of distorted point radii above this
/// fraction of their mean radius (guards the circle degeneracy).
pub const SCENE_RADIUS_SPREAD_MIN: f64 = 0.01;
