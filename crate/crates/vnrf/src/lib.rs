//! Lattice random fields with variable-size neighborhoods.
//!
//! This crate implements simulation and inference for translation-covariant
//! random fields on `Z^d` (`d` = 1 or 2) whose single-site conditional law
//! depends on a data-dependent context: a finite set of neighboring sites
//! whose radius varies from site to site. It provides
//!
//! * lattice geometry, pattern extraction and injective pattern keys
//!   ([`lattice`]),
//! * concrete models: an embedded binary renewal process, a planar
//!   polygon-interaction model, and i.i.d. / nearest-neighbor baselines,
//!   plus composition of multi-site kernels from single-site ones
//!   ([`models`]),
//! * exact and Monte-Carlo samplers ([`sampler`]),
//! * a penalized pseudo-likelihood estimator of the per-site context radius
//!   ([`estimator`]),
//! * brute-force oracles: exact small-window measures, Dobrushin interdependence
//!   matrices, algebraic identity checks, and deviation-bound diagnostics
//!   ([`oracle`]),
//! * a Monte-Carlo experiment harness with JSON reports ([`harness`]).
//!
//! All randomness is driven by explicit `u64` seeds through ChaCha streams;
//! every public entry point is deterministic given its seed.

pub mod estimator;
pub mod harness;
pub mod lattice;
pub mod models;
pub mod oracle;
pub mod sampler;

/// Symbol type: alphabet symbols are `0..|A|-1`.
pub type Sym = u8;
/// Linearized (row-major) site index inside a window.
pub type Site = usize;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("site outside window: {0}")]
    SiteOutsideWindow(Site),
    #[error("pattern exceeds window: site {site}, radius {radius}")]
    PatternExceedsWindow { site: Site, radius: usize },
    #[error("window too small for margin: min extent {extent} <= 2*{margin}")]
    WindowTooSmallForMargin { extent: usize, margin: usize },
    #[error("context exceeds window: site {0}")]
    ContextExceedsWindow(Site),
    #[error("invalid run distance: k={k}, l={l} (both must be >= 2)")]
    InvalidRunDistance { k: i64, l: i64 },
    #[error("positivity violated: {0}")]
    PositivityViolated(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
