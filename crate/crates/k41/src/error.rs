use thiserror::Error;

#[derive(Debug, Error)]
pub enum K41Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("unreachable shell: target is positive at n = {0}, which has no lattice point in the box")]
    UnreachableShell(u64),
    #[error("empty shell band around K = {0}")]
    EmptyShell(f64),
    #[error("time window not covered: {0}")]
    Window(String),
    #[error("CFL violation: dt = {dt} exceeds bound {bound}")]
    Cfl { dt: f64, bound: f64 },
    #[error("non-finite values at t = {0}")]
    NaN(f64),
    #[error("step failed at t = {t}: {source}")]
    StepFailed { t: f64, source: Box<K41Error> },
    #[error("no inertial range: {0}")]
    NoRange(String),
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    #[error("degenerate history: {0}")]
    Degenerate(String),
    #[error("insufficient shells: {0} nonzero, need 8")]
    InsufficientShells(usize),
    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),
    #[error("unsupported direction rule: {0} directions")]
    DirectionRule(usize),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, K41Error>;
