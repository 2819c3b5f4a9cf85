use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("chain must have at least two sites (got {0})")]
    TooFewSites(usize),

    #[error("2^{n_sites} basis states exceed the capacity budget (max {max_sites} sites)")]
    Capacity { n_sites: usize, max_sites: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("site index {site} out of range 1..={n_sites}")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("state norm {0} is not 1 within 1e-12")]
    NotNormalized(f64),

    #[error("eigensolver did not converge after {iterations} iterations (best residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("dense dimension {dim} exceeds the cutoff {cutoff}")]
    DenseCutoff { dim: usize, cutoff: usize },

    #[error("LAPACK routine {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },

    #[error("ground state is degenerate or nearly so (gap {gap:.3e})")]
    DegenerateGroundState { gap: f64 },

    #[error("step {delta:.3e} leaves the quadratic fidelity regime (1 - F = {one_minus_f:.3e})")]
    RegimeViolation { delta: f64, one_minus_f: f64 },

    #[error("finite-difference estimates kept drifting after halving down to {delta:.3e} (relative drift {drift:.3e})")]
    FiniteDifferenceUnstable { delta: f64, drift: f64 },

    #[error("observable is insensitive to the field here (|d<A>/d lambda| = {susceptibility:.3e})")]
    InsensitiveObservable { susceptibility: f64 },

    #[error("temperature must be positive (got {0})")]
    NonPositiveTemperature(f64),

    #[error("state is not positive semi-definite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("state trace {0} is not 1 within 1e-10")]
    NotTraceOne(f64),

    #[error("susceptibility sandwich violated: chi_tilde = {chi_tilde:.6e}, chi = {chi:.6e}")]
    SandwichViolated { chi_tilde: f64, chi: f64 },

    #[error("|J_z| must be below 1 (got {0}); the line |J_z| = 1 is outside the supported critical regime")]
    JzOutOfRange(f64),

    #[error("power-law fit needs at least 3 points inside the window (got {0})")]
    InsufficientPoints(usize),

    #[error("power-law fit requires strictly positive data")]
    NonPositiveData,

    #[error("time series carries no system-size metadata")]
    MissingMetadata,

    #[error("time grid must be non-empty, non-negative and strictly increasing")]
    BadTimeGrid,

    #[error("propagation did not converge at {steps} steps (overlap drift {drift:.3e})")]
    PropagationNotConverged { steps: usize, drift: f64 },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("config error: {0}")]
    ConfigGlobal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
