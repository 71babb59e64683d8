use thiserror::Error;

use crate::linalg::C64;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("matrix is not normal (commutator norm {commutator_norm:.3e})")]
    NotNormal { commutator_norm: f64 },

    #[error("{lambda} is not an eigenvalue of the resolution")]
    UnknownEigenvalue { lambda: C64 },

    #[error("branch collision at t = {t:.3e}: nearest/second-nearest ratio {ratio:.2}")]
    BranchCollision { t: f64, ratio: f64 },

    #[error("branch tracking failed: {0}")]
    Tracking(String),

    #[error("Richardson extrapolation did not converge (error estimate {estimate:.3e})")]
    Extrapolation { estimate: f64 },

    #[error("eigenvalue within {distance:.3e} of the integration contour")]
    EigenvalueOnContour { distance: f64 },

    #[error("contour quadrature did not stabilise within {nodes} nodes (last change {change:.3e})")]
    Quadrature { nodes: usize, change: f64 },

    #[error("contour separation failed: nearest excluded eigenvalue at distance {distance:.3e}")]
    Separation { distance: f64 },

    #[error("component projections blow up along the ladder (fitted exponent {exponent:.3})")]
    BlowUp { exponent: f64 },

    #[error("relation requires a multiplicity-one branch (got {multiplicity})")]
    Multiplicity { multiplicity: usize },

    #[error("hypotheses not met: {0}")]
    Hypotheses(String),

    #[error("ambiguous branch pairing: {0}")]
    Pairing(String),

    #[error("matrix has no eigenvalues at +1 or -1; invariant subspace is empty")]
    EmptySubspace,

    #[error("inconsistent representation assignment: {0}")]
    InconsistentAssignment(String),

    #[error("failed to parse input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
