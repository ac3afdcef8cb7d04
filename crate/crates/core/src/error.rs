use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid fractional order {0}: orders must be finite and non-negative")]
    InvalidOrder(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular aggregate matrix: sum of state matrices has reciprocal condition number {rcond:.3e}")]
    SingularAggregateMatrix { rcond: f64 },

    #[error("pair (A, B) is not stabilizable: Riccati iteration {reason}; largest open-loop mode modulus {mode_modulus:.6}")]
    NotStabilizable { reason: String, mode_modulus: f64 },

    #[error("closed loop is not Schur stable: spectral radius {rho:.12}")]
    UnstableClosedLoop { rho: f64 },

    #[error("no admissible kappa: c_psi * psi(v) = {condition:.6e} >= 1")]
    KappaInfeasible { condition: f64 },

    #[error("no window v in 1..={0} satisfies c_psi * psi(v) < 1")]
    InfeasibleUpTo(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
