use alloc::string::String;

/// Unified error type for the core library.
///
/// Variants map one-to-one onto the distinct failure modes of the public
/// operations; callers that need to branch (for example falling back from the
/// null-space design when no null space exists) match on the variant rather
/// than parsing messages.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A matrix expected to be Hermitian deviated from conjugate symmetry.
    #[error("matrix deviates from Hermitian symmetry by {deviation:.3e} (allowed {allowed:.3e})")]
    NotHermitian { deviation: f64, allowed: f64 },

    /// A matrix expected to be positive semidefinite had a significantly
    /// negative eigenvalue.
    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.6e}, spectral scale {scale:.6e}")]
    NotPsd { min_eigenvalue: f64, scale: f64 },

    /// The angular power spectrum did not integrate to 1 within tolerance at
    /// the requested quadrature resolution.
    #[error("quadrature too coarse: spectrum mass {mass:.9} at {points} points (|mass - 1| must be < {tolerance:.1e})")]
    QuadratureResolution {
        mass: f64,
        points: usize,
        tolerance: f64,
    },

    /// Fewer pilot symbols than users; no orthogonal pilot book exists.
    #[error("pilot book infeasible: tau = {tau} symbols for {users} users")]
    InfeasiblePilots { tau: usize, users: usize },

    /// The adversary's transmit-side correlation at some cell has no
    /// eigenvalues below the threshold, so no null space to project onto.
    #[error("empty null space at cell {cell}: no eigenvalue of the adversary correlation falls below {threshold:.1e}")]
    EmptyNullSpace { cell: usize, threshold: f64 },

    /// A channel estimate was identically zero (or numerically so), so no
    /// beam direction can be formed from it.
    #[error("degenerate channel estimate: {0}")]
    DegenerateEstimate(String),

    /// An operation that is only defined for a restricted topology (single
    /// adversary antenna, single cell, single user) was called outside it.
    #[error("wrong specialization: {0}")]
    WrongSpecialization(String),

    /// A fixed-point iteration failed to converge; the payload carries the
    /// last iterate for diagnostics.
    #[error("iteration did not converge after {iterations} steps (last iterate {last:.6e}, residual {residual:.3e})")]
    NonConvergence {
        iterations: usize,
        last: f64,
        residual: f64,
    },

    /// Too many Monte Carlo trials had to be discarded for the run to be
    /// trustworthy.
    #[error("data quality: {discarded} of {total} trials degenerate (more than 1% of the run)")]
    DataQuality { discarded: usize, total: usize },

    /// The requested combination of design and evaluator has no closed form.
    #[error("unsupported: {0}")]
    Unsupported(String),
}
