//! Numeric tolerances used across the crate.
//!
//! Inequalities that hold exactly in real arithmetic are checked with a
//! small slack to absorb floating-point rounding; anything larger than
//! these constants is a genuine violation, not noise.

/// Slack for identities that are exact up to f64 rounding.
pub const EXACT_F64: f64 = 1e-12;

/// Slack for the factor-2 oscillation/testing inequality.
pub const NECESSITY_SLACK: f64 = 1e-9;

/// Agreement required between the dense SVD and the power-iteration
/// oracle for the top singular value.
pub const SPECTRUM_AGREEMENT: f64 = 1e-10;

/// Singular values below this are treated as zero when counting rank.
pub const RANK_CUTOFF: f64 = 1e-10;

/// Default decay tolerance for "consistent with admissibility at this
/// prefix" verdicts on finite data.
pub const DECAY_DEFAULT: f64 = 1e-6;

/// Power-iteration convergence threshold (relative change per sweep).
pub const POWER_ITERATION_REL: f64 = 1e-14;
