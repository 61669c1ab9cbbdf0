use thiserror::Error;

/// Errors raised while reading a case file or building a network from it.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CaseError {
    #[error("missing section `mpc.{0}`")]
    MissingSection(String),
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("non-numeric token `{token}` at line {line}")]
    NonNumeric { line: usize, token: String },
    #[error("base MVA must be positive, got {0}")]
    InvalidBaseMva(f64),
    #[error("bus {bus}: invalid type code {code}")]
    InvalidBusType { bus: i64, code: f64 },
    #[error("network has no slack bus")]
    NoSlack,
    #[error("network has more than one slack bus ({0} and {1})")]
    MultipleSlack(i64, i64),
    #[error("duplicate bus id {0}")]
    DuplicateBusId(i64),
    #[error("bus {0}: generators disagree on voltage setpoint")]
    ConflictingVset(i64),
    #[error("branch {from}-{to} references an unknown bus")]
    BranchToUnknownBus { from: i64, to: i64 },
    #[error("generator references unknown bus {0}")]
    GenToUnknownBus(i64),
    #[error("polynomial load references unknown bus {0}")]
    PolyLoadToUnknownBus(i64),
    #[error("bus {0}: voltage setpoint must be positive")]
    NonPositiveVset(i64),
    #[error("branch {from}-{to}: {reason}")]
    InvalidBranch { from: i64, to: i64, reason: String },
    #[error("polynomial load file: {0}")]
    PolyLoadFormat(String),
}

/// Failures inside a device model evaluation.
#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum DeviceError {
    /// |V|² fell below the denominator guard.
    #[error("voltage collapse: |V|^2 = {0:e}")]
    VoltageCollapse(f64),
    #[error("branch has zero series impedance")]
    ZeroImpedance,
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum LinearSolveError {
    #[error("matrix is numerically singular at elimination step {step}")]
    Singular { step: usize },
    #[error("linear solve residual {residual:e} above accuracy bound")]
    Inaccurate { residual: f64 },
    #[error("dimension mismatch: matrix {n}, right-hand side {len}")]
    Dimension { n: usize, len: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid solver options: {0}")]
pub struct OptionsError(pub String);
