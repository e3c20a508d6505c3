//! Error taxonomy shared across the crate.

/// Everything that can go wrong inside the simulation core.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Angular-momentum inputs that are not non-negative half-integers or
    /// whose labels are inconsistent with each other.
    #[error("mismatched quantum numbers: {0}")]
    MismatchedQuantumNumbers(String),

    /// A physical parameter outside its admissible range.
    #[error("non-physical input: {0}")]
    NonPhysicalInput(String),

    /// The steady-state system has extra null directions beyond the trace
    /// freedom, so the steady state is not unique.
    #[error("degenerate null space: {null_dim} independent steady directions")]
    DegenerateNullSpace { null_dim: usize },

    /// No steady state exists (the generator does not conserve total
    /// population, as in the verbatim relaxation bookkeeping).
    #[error("no steady state: residual {residual:.3e} after trace-constrained solve")]
    NoSteadyState { residual: f64 },

    /// Local truncation error of the explicit integrator exceeded its bound.
    #[error("integration step too large: estimated local error {estimated_error:.3e}")]
    StepSizeTooLarge { estimated_error: f64 },

    /// A velocity grid request that cannot produce a usable quadrature.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// A sweep point failed; carries the offending detuning and velocity.
    #[error("sweep failed at delta_c = {delta_c:.6e} rad/s, v = {velocity:.3} m/s: {source}")]
    SweepPoint {
        delta_c: f64,
        velocity: f64,
        #[source]
        source: Box<Error>,
    },

    /// Configuration file problems: missing keys, bad ranges, parse errors.
    #[error("config error: {0}")]
    Config(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
