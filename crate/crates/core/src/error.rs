//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter is outside its admissible domain.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// Configuration file or CLI input violates the schema.
    #[error("configuration error: {0}")]
    ConfigSchema(String),

    /// Polar coordinates are singular (an amplitude fell below the floor).
    #[error("singular polar coordinates: R_a={r_a:.3e}, R_b={r_b:.3e} (floor {floor:.1e})")]
    SingularCoordinates { r_a: f64, r_b: f64, floor: f64 },

    /// Adaptive step size underflowed; the problem is too stiff for the
    /// explicit integrator at the requested tolerance.
    #[error("step size underflow at t={t:.6e} (h={h:.3e}); system too stiff")]
    Stiffness { t: f64, h: f64 },

    /// A non-finite value appeared during integration.
    #[error("non-finite state at t={t:.6e}")]
    NonFinite { t: f64 },

    /// Phase diagnostics straddle the classification thresholds.
    #[error("inconclusive phase classification: {0}; extend t_end and retry")]
    InconclusiveClassification(String),

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("averaging window [{lo}, {hi}] lies outside the sampled span")]
    EmptyWindow { lo: f64, hi: f64 },

    /// A covariance matrix failed its symmetry check.
    #[error("covariance matrix is not symmetric (max asymmetry {0:.3e})")]
    NonSymmetric(f64),

    /// A state or covariance matrix violates a physicality bound.
    #[error("unphysical input: {0}")]
    Unphysical(String),

    /// Gaussian-measurement optimization did not converge.
    #[error("measurement optimization did not converge (residual {residual:.3e})")]
    NonConvergence { residual: f64 },

    /// A requested observable needs density-matrix sectors that were not
    /// supplied in the initial condition.
    #[error("missing sector ({n}, {n_prime}) for requested observable")]
    MissingSector { n: usize, n_prime: usize },

    #[error("operator dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    /// The n=n' block has more than one numerically null direction.
    #[error("degenerate null space (numerical nullity {nullity})")]
    DegenerateNullSpace { nullity: usize },

    /// A time series is too short for reliable spectral analysis.
    #[error("series too short: {0}")]
    TooShortSeries(String),

    #[error("insufficient points for fit: got {got}, need {need}")]
    InsufficientPoints { got: usize, need: usize },

    /// A finite-N operation was invoked without `n_total`.
    #[error("ModelParams.n_total is required for finite-N computations")]
    MissingNTotal,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
