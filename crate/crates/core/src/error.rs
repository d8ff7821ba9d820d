use thiserror::Error;

/// Errors produced by the numeric kernel and the synthesis layers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        got: String,
    },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("matrix is indefinite beyond tolerance (min eigenvalue {min_eig:e})")]
    NotPositiveSemidefinite { min_eig: f64 },
    #[error("matrix is singular to working precision in {context}")]
    Singular { context: &'static str },
    #[error("eigenvalue iteration failed to converge after {iterations} sweeps")]
    EigNonConvergence { iterations: usize },
    #[error("non-finite entry encountered in {context}")]
    NonFinite { context: &'static str },
    #[error("matrix A must be Hurwitz for the Lyapunov solve (spectral abscissa {abscissa:e})")]
    UnstableLyapunov { abscissa: f64 },
    #[error("Riccati equation is ill-posed: Hamiltonian eigenvalue within {distance:e} of the imaginary axis")]
    RiccatiIllPosed { distance: f64 },
    #[error("Riccati refinement diverged (residual {residual:e} after {iterations} iterations)")]
    RiccatiDivergence { residual: f64, iterations: usize },
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("SDP is infeasible (phase-1 margin {margin:e})")]
    SdpInfeasible { margin: f64 },
    #[error("SDP solver exceeded the iteration cap")]
    SdpMaxIterations,
    #[error("SDP solver hit a numerical failure: {0}")]
    SdpNumericalFailure(String),
    #[error("feedback is not well posed: I - F*D is singular to working precision")]
    FeedbackIllPosed,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
