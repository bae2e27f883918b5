//! Dyadic analysis on general measure spaces.
//!
//! The crate works with finite truncated dyadic trees over a box window.
//! Leaves carry nonnegative weights (an arbitrary finite measure) and
//! complex values (simple functions). On top of that it provides:
//!
//! * averages, martingale differences, and a family of norms (`L^p`,
//!   weak `L^1`, distribution-threshold `L^inf_gamma`),
//! * mean oscillation, BMO/VMO-style moduli, and cube-collection surgery
//!   (measure windows, anchor reductions, chain decompositions),
//! * dyadic paraproducts as explicit finite-rank operators with exact
//!   `p = 2` singular spectra and certified bounds for other exponents,
//! * weakly-null test family diagnostics (pairing and Cesaro profiles,
//!   greedy support disjointification, improved triangle bounds),
//! * stopping-time forests with exponential level-set bounds and the
//!   related good-lambda style comparisons.
//!
//! Everything is deterministic given a seed; the heavier sweeps
//! parallelize with rayon when the `parallel` feature (default) is on.

pub mod admissibility;
pub mod collection;
pub mod error;
pub mod func;
pub mod generators;
pub mod john_nirenberg;
pub mod measure;
pub mod oscillation;
pub mod parallel;
pub mod paraproduct;
pub mod serialize;
pub mod spectral;
pub mod tol;
pub mod tree;

pub use collection::CubeCollection;
pub use error::{Error, Result};
pub use func::{C64, MonotoneMap, PowerMap, SimpleFunction, Space};
pub use measure::MeasureWeights;
pub use paraproduct::Paraproduct;
pub use spectral::SingularSpectrum;
pub use tree::{CubeId, DyadicTree, Rational};
