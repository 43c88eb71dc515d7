use thiserror::Error;

/// Errors raised by the spectral transforms, charts and flows.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid Jacobi matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("eigenvalue bisection did not converge")]
    ConvergenceFailure,

    #[error("argument {0} lies on the spectrum")]
    OnSpectrum(f64),

    #[error("argument lies at the pole {0}")]
    AtPole(f64),

    #[error("quotient is not a Herglotz function: {0}")]
    NotHerglotz(String),

    #[error("not a Weyl quotient: c^2 = {0} at depth {1}")]
    NotHerglotzInput(f64, usize),

    #[error("function is not normalized (sum of residues = {0})")]
    NotNormalized(f64),

    #[error("Lanczos breakdown at step {0}")]
    Breakdown(usize),

    #[error("interlacing violated: {0}")]
    InterlacingViolated(String),

    #[error("divisor data leaves the chart: {0}")]
    NoHerglotzSolution(String),

    #[error("bracket arguments coincide: |lambda - mu| = {0}")]
    CoincidentArguments(f64),

    #[error("finite-difference gradient is inconsistent in coordinate {0}")]
    GradientFailure(usize),

    #[error("constraint bracket matrix is singular")]
    ConstraintDegenerate,

    #[error("flow exponent spread {0} exceeds the representable range")]
    Overflow(f64),

    #[error("eigenvalue drift {0} per step exceeds 1e-6")]
    StepTooLarge(f64),

    #[error("series length {0} exceeds the cap of 12")]
    SeriesTooLong(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
