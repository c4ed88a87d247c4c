//! Numerical thresholds shared across modules.

/// Max entrywise `|A − A†|` accepted as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Eigenvalues closer than this are merged into one eigenspace.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Outcomes with Born probability at or below this are treated as impossible.
pub const ZERO_PROBABILITY_EPS: f64 = 1e-12;

/// Slack allowed when clamping probabilities into `[0, 1]`.
pub const PROBABILITY_SLACK: f64 = 1e-12;

/// Max commutator entry treated as zero.
pub const COMMUTATOR_TOL: f64 = 1e-10;

/// Trace and completeness tolerance for states and measurement models.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Most spacelike-incomparable events for which every causal ordering is enumerated.
pub const MAX_PERMUTED_EVENTS: usize = 6;
