//! Distinguishability norms for restricted families of quantum measurements.
//!
//! A finite family of POVMs induces a norm on traceless Hermitian operators:
//! the best bias the family achieves when discriminating two equiprobable
//! states whose difference is the operator. This crate computes the exact
//! constants known for the isotropic (uniform) POVM, audits spherical
//! 2-/4-design POVMs against their guaranteed bias bounds, evaluates the
//! PPT value of the symmetric/antisymmetric data-hiding pair by a
//! symmetry-reduced linear program, brute-forces the `S4 x S4`
//! permutation-trace bounds behind the bipartite fourth-moment estimate,
//! and derives the resulting certainty relations and accessible-information
//! lower bounds. Every Monte-Carlo routine takes an explicit seed and is
//! bit-reproducible.

pub mod bipartite;
pub mod designs;
pub mod info;
pub mod io;
pub mod op;
pub mod perm;
pub mod povm;
pub mod report;
pub mod rng;
pub mod uniform;

pub use op::{HermitianOp, PureState, Spectrum};
pub use povm::{DominationEstimate, MeasurementFamily, Povm, TwoOutcomeTest};
pub use rng::RngStream;
pub use uniform::{McEstimate, RankSplit};

/// Hard cap on operator dimension; tensor products beyond it are rejected.
pub const DIM_CAP: usize = 4096;

/// Errors shared by all modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("non-finite entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },
    #[error("not Hermitian: relative residual {residual:.3e} exceeds {tol:.1e}")]
    NotHermitian { residual: f64, tol: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("operator has no bipartite shape")]
    MissingShape,
    #[error("shape {da}x{db} does not factor dimension {dim}")]
    BadShape { da: usize, db: usize, dim: usize },
    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("not a density matrix: {reason}")]
    NotDensity { reason: String },
    #[error("effect {index}: eigenvalue {min_eig:.3e} below tolerance")]
    NegativeEffect { index: usize, min_eig: f64 },
    #[error("effects sum deviates from identity by {residual:.3e} (Frobenius)")]
    Incomplete { residual: f64 },
    #[error("weights sum to {sum:.12}, expected 1")]
    BadWeights { sum: f64 },
    #[error("matrix is not unitary: residual {residual:.3e}")]
    NotUnitary { residual: f64 },
    #[error("measurement family is empty")]
    EmptyFamily,
    #[error("family is not separating; the induced seminorm vanishes on some direction")]
    NotSeparating,
    #[error("operator is not traceless: trace {trace:.3e}")]
    NotTraceless { trace: f64 },
    #[error("unsupported dimension {dim}: {reason}")]
    UnsupportedDimension { dim: usize, reason: String },
    #[error("not a {t}-design: defect {defect:.3e}")]
    NotDesign { t: usize, defect: f64 },
    #[error("too few samples: {got} < {min}")]
    TooFewSamples { got: usize, min: usize },
    #[error("invalid distribution: {0}")]
    BadDistribution(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
