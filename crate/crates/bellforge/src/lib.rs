//! Multipartite Bell inequalities built from merged correlation-function
//! expressions, so that low-order correlations suffice.
//!
//! The crate covers the full pipeline:
//!
//! * [`term`]: sign patterns over `{+, -, 0}`, weighted terms, and whole
//!   inequalities, with exact rational bookkeeping.
//! * [`builder`]: the seed expression on `2^N` full terms, pairwise merging
//!   that introduces `0` slots, stochastic search over cyclic-orbit families,
//!   and a catalog of hard-coded reference inequalities.
//! * [`lhv`]: exhaustive, exact certification of local-hidden-variable
//!   bounds over all `4^N` deterministic assignments.
//! * [`quantum`]: state vectors, measurement settings, correlation tensors,
//!   Bell operators applied implicitly, and extremal eigenvalue search.
//! * [`optimizer`]: symmetric-angle scans, see-saw alternation, and
//!   fixed-state coordinate ascent over XZ-plane settings.
//! * [`condition`]: a Cauchy-Schwarz sufficient condition for the absence
//!   of violation, via sums of squared correlation-tensor entries.
//! * [`repro`]: the reference-value check suite the CLI exposes.

pub mod builder;
pub mod condition;
mod error;
pub mod lhv;
pub mod optimizer;
pub mod quantum;
pub mod repro;
pub mod term;

pub use error::Error;

/// Exact rational scalar used for weights and bounds.
pub type Rational = num::rational::Ratio<i64>;

/// Largest party count accepted by the exhaustive certifier (`4^N` vertices).
pub const MAX_CERTIFY_N: usize = 14;

/// Largest party count accepted by the builder (`2^N` seed terms).
pub const MAX_BUILD_N: usize = 12;
