use thiserror::Error;

/// Errors reported by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// An operand had the wrong dimension.
    #[error("{context}: expected dimension {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// An operation that needs at least one entry received none.
    #[error("{0}: empty input")]
    EmptyInput(&'static str),

    /// Dykstra's alternating projections ran out of sweeps.
    #[error("Dykstra projection did not reach tolerance {tol:e} within {max_sweeps} sweeps (worst violation {worst_violation:e})")]
    DykstraExhausted {
        tol: f64,
        max_sweeps: usize,
        worst_violation: f64,
    },

    /// A schedule kind that divides by the operator norm was built with
    /// norm zero. Use a custom table (constant explicit steps) instead.
    #[error("schedule `{kind}` divides by the operator norm, which is 0; use a custom/constant schedule with explicit steps")]
    ScheduleNormZero { kind: &'static str },

    /// A proximal oracle failed inside a solver step.
    #[error("prox oracle failed at iteration {iteration}: {source}")]
    ProxAtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    /// A reference saddle point was required but not available.
    #[error("{0}: no reference saddle point available")]
    MissingReference(&'static str),

    /// A gap evaluation set was unbounded or otherwise out of contract.
    #[error("gap evaluation set invalid: {0}")]
    InvalidGapSet(String),

    /// The vertex-enumeration LP oracle found no feasible vertex.
    #[error("LP oracle: {0}")]
    LpOracle(String),

    /// The proximal-gradient lasso oracle hit its iteration cap.
    #[error("lasso oracle exceeded {cap} iterations (final duality gap {gap:e})")]
    LassoOracleCap { cap: usize, gap: f64 },

    /// A configuration or file-format problem.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Text/CSV parse failure.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}
