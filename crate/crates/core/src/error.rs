use std::path::PathBuf;

use thiserror::Error;

use crate::ensemble::Frame;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A kernel was evaluated at its unregularized singularity.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("particles {0} and {1} coincide in phase space with zero regularization")]
    Coincidence(usize, usize),

    #[error("frame mismatch: expected {expected:?}, found {found:?}")]
    FrameMismatch { expected: Frame, found: Frame },

    #[error("implicit midpoint did not converge after {iters} iterations (residual {residual:e})")]
    StepFailure { iters: usize, residual: f64 },

    #[error("ensemble is empty")]
    EmptyEnsemble,

    #[error("record mismatch: {0}")]
    Mismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

/// Validation failures for run configurations. Each variant names the
/// offending field; no invalid value is silently replaced by a default.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("params.omega_c must be nonzero and finite (got {0})")]
    OmegaC(f64),
    #[error("params.epsilon must be positive and finite (got {0})")]
    Epsilon(f64),
    #[error("params.delta must be nonnegative and finite (got {0})")]
    Delta(f64),
    #[error("initial.radius_x must be positive (got {0})")]
    RadiusX(f64),
    #[error("initial.radius_v must be positive (got {0})")]
    RadiusV(f64),
    #[error("initial.total_mass must be positive (got {0})")]
    TotalMass(f64),
    #[error("sampling.n_per_dim must be at least 2 (got {0})")]
    NPerDim(usize),
    #[error("sampling.n_per_dim_v must be at least 1 (got {0})")]
    NPerDimV(usize),
    #[error("integrator.dt must be positive (got {0})")]
    IntegratorDt(f64),
    #[error("integrator.midpoint_tol must be positive (got {0})")]
    MidpointTol(f64),
    #[error("integrator.midpoint_max_iters must be at least 1")]
    MidpointMaxIters,
    #[error("tree.mac_theta must lie in [0, 1) (got {0})")]
    MacTheta(f64),
    #[error("split.dt must be positive (got {0})")]
    SplitDt(f64),
    #[error("split.substeps_per_cyclotron_period must be at least 20 (got {0})")]
    Substeps(u32),
    #[error("split.dt = {dt} does not resolve the cyclotron period: need dt <= {max}")]
    SplitDtTooLarge { dt: f64, max: f64 },
    #[error("run.t_end must be positive (got {0})")]
    TEnd(f64),
    #[error("run.snapshot_every must be positive (got {0})")]
    SnapshotEvery(f64),
    #[error("run.snapshot_every = {every} is not a multiple of the time step {dt}")]
    SnapshotCadence { every: f64, dt: f64 },
    #[error("epsilon list must be nonempty, positive and strictly decreasing")]
    EpsList,
    #[error("could not parse configuration: {0}")]
    Parse(String),
}
