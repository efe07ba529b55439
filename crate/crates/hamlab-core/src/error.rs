use thiserror::Error;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// A level set `{H = E}` has no turning points, or `E` lies below the minimum.
    #[error("non-compact level set: {0}")]
    NonCompactLevelSet(String),

    /// Adaptive step-size control underflowed; the problem is too stiff at this tolerance.
    #[error("stiffness: step size underflow at t = {t}")]
    Stiffness { t: f64 },

    /// An operation was evaluated at (or too near) a critical point of `H`.
    #[error("critical point: {0}")]
    CriticalPoint(String),

    /// A verification routine received an empty sample list.
    #[error("empty sample list")]
    EmptySamples,

    /// The requested method does not apply to this system (e.g. quadrature on a
    /// non-separable Hamiltonian); the caller should fall back to another route.
    #[error("method unavailable: {0}")]
    MethodUnavailable(String),

    /// Tail truncation could not reach the requested tolerance within the box-growth limit.
    #[error("tail bound not achievable: {0}")]
    TailBound(String),

    /// A deformation failed a catalog screen (f(0) != 0, non-monotone, bounded, bad inverse).
    #[error("invalid deformation `{label}`: {reason}")]
    InvalidDeformation { label: String, reason: String },

    /// A matrix that must be symmetric/Hermitian positive-definite is not.
    #[error("not positive-definite: {0}")]
    NotPositiveDefinite(String),

    /// Hamiltonian spectrum is degenerate; the commutant construction is not supported there.
    #[error("degenerate spectrum: eigenvalue gap {gap:.3e} below threshold")]
    DegenerateSpectrum { gap: f64 },

    /// Second-structure weights overflowed the floating-point range.
    #[error("weight overflow: {0}; reduce the cutoff N or use a slower-growing f")]
    WeightOverflow(String),

    /// Root bracketing or refinement failed.
    #[error("root solve failed: {0}")]
    RootSolve(String),

    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// An unknown catalog label, with the available entries listed.
    #[error("unknown {kind} label `{label}`; available: {available}")]
    UnknownLabel {
        kind: &'static str,
        label: String,
        available: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
