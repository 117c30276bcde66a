//! Error type shared across the workbench.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: expected n = {expected}, got n = {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("layout mismatch: expected {expected}, got {got}")]
    LayoutMismatch { expected: String, got: String },

    #[error("grid too small: n = {n} cannot support margin {margin} (need n >= 2*margin + 3)")]
    GridTooSmall { n: usize, margin: usize },

    #[error("interior band too thin for stencil depth {depth} on an n = {n} grid")]
    BandTooThin { n: usize, depth: usize },

    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{solver} did not converge: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence {
        solver: &'static str,
        residual: f64,
        iterations: usize,
    },

    #[error("forward solve failed at omega = {omega}, illumination '{illumination}': {source}")]
    ForwardFailure {
        omega: f64,
        illumination: String,
        #[source]
        source: Box<Error>,
    },

    #[error("rank-deficient matrix at cell ({0}, {1}, {2}): sigma_min = {3:.3e}")]
    RankDeficient(usize, usize, usize, f64),

    #[error("no positive threshold achievable: condition vanishes at cell ({0}, {1}, {2}) for every sampled frequency")]
    Uncoverable(usize, usize, usize),

    #[error("seed cell ({0}, {1}, {2}) lies outside the cover")]
    SeedOutsideCover(usize, usize, usize),

    #[error("reconstruction diverged at cell ({0}, {1}, {2}): Im q = {3:.3e} <= 0")]
    NonPhysicalQ(usize, usize, usize, f64),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
