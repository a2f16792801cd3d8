use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("undefined roots: zero polynomial")]
    UndefinedRoots,
    #[error("root iteration did not converge after {iterations} iterations")]
    NoConvergence {
        iterations: usize,
        best: Vec<Complex64>,
    },
    #[error("resultant degenerate")]
    ResultantDegenerate,
    #[error("singular path near {at}")]
    SingularPath { at: Complex64 },
    #[error("stiff or singular flow at t = {t}")]
    StiffFlow { t: f64 },
    #[error("non-generic curve: {0}")]
    NonGeneric(String),
    #[error("expansion inconsistency: remainder {0:e}")]
    ExpansionInconsistency(f64),
    #[error("matching failed, reduce h_rel")]
    MatchingFailed,
    #[error("path could not be routed around branch point {at}")]
    Reroute { at: Complex64 },
    #[error("pole at {at}")]
    Pole { at: Complex64 },
    #[error("branch obstruction at {at}")]
    BranchObstruction { at: Complex64 },
    #[error("tau too degenerate: Im tau = {0}")]
    TauDegenerate(f64),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("reduction undefined: some xi vanishes")]
    ReductionUndefined,
    #[error("missed zeros, refine grid: validated {found}, argument principle {expected}")]
    MissedZeros { found: usize, expected: i64 },
    #[error("basis construction failed: {0}")]
    Basis(String),
    #[error("construction error: {0}")]
    Construction(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
