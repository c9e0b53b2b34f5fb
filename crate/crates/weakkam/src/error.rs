//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Newton iteration on the fiber failed; usually signals a model whose
    /// convexity invariants do not hold.
    #[error("newton iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("singular fiber hessian at x = {0:?}")]
    SingularHessian(Vec<f64>),

    #[error("energy drift {drift:.3e} exceeds bound {bound:.3e} (reduce dt or check the model)")]
    EnergyDriftExceeded { drift: f64, bound: f64 },

    #[error("bad input: {0}")]
    BadInput(String),

    #[error("no bracket for the critical value in [{lo}, {hi}] after widening")]
    BracketNotFound { lo: f64, hi: f64 },

    #[error("linear program infeasible: {0}")]
    LpInfeasible(String),

    #[error("linear program unbounded: {0}")]
    LpUnbounded(String),

    #[error("barrier ladder not stabilized: oscillation {osc:.3e} at T_max = {t_max}")]
    NotStabilized { osc: f64, t_max: f64 },

    #[error("supremum attained on the boundary of the alpha table; enlarge the c-box")]
    SupOnBoundary,

    #[error("degenerate argmin (ties within tolerance): {0}")]
    DegenerateArgmin(String),

    #[error("iteration did not converge: {0}")]
    NotConverged(String),

    #[error("model audit failed: {0}")]
    AuditFailed(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("model file: {0}")]
    ModelFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
