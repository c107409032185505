use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the estimators, simulators and IO helpers.
#[derive(Debug, Error)]
pub enum TmesError {
    #[error("invalid extremal level m_n = {m_n}: must satisfy 1 <= m_n <= n = {n}")]
    InvalidLevel { m_n: usize, n: usize },

    #[error("lag {h} out of range for series of length {n} (need h < n)")]
    LagOutOfRange { h: usize, n: usize },

    #[error("series length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("series too short: need at least {min} observations, got {got}")]
    TooShort { min: usize, got: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("invalid parameter `{name}` = {value}: {bound}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        bound: &'static str,
    },

    #[error("extremogram undefined: no exceedances of the threshold")]
    UndefinedExtremogram,

    #[error("plug-in variance undefined: no exceedances at lag {h}")]
    UndefinedVariance { h: usize },

    #[error("degenerate distribution: replicates have zero spread")]
    DegenerateDistribution,

    #[error("integration failed: {0}")]
    IntegrationFailure(String),

    #[error("insufficient sample: {got} exceedances, need at least {need}")]
    InsufficientSample { got: usize, need: usize },

    #[error("memory budget exceeded: {cells} field cells requested, budget is {budget}")]
    MemoryBudget { cells: usize, budget: usize },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("empty intersection of date calendars")]
    EmptyIntersection,

    #[error("calendars differ: {0}")]
    CalendarGap(String),

    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },

    #[error("{path}: column `{column}` not found")]
    MissingColumn { path: PathBuf, column: String },

    #[error("{path}: duplicate date {date}")]
    DuplicateDate { path: PathBuf, date: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl TmesError {
    /// True for errors caused by bad inputs or parameters (as opposed to IO
    /// or other runtime failures).
    pub fn is_usage(&self) -> bool {
        !matches!(
            self,
            TmesError::Io(_)
                | TmesError::Csv(_)
                | TmesError::Json(_)
                | TmesError::IntegrationFailure(_)
                | TmesError::InsufficientSample { .. }
                | TmesError::UndefinedExtremogram
                | TmesError::UndefinedVariance { .. }
                | TmesError::DegenerateDistribution
        )
    }
}

pub type Result<T, E = TmesError> = std::result::Result<T, E>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    ok: bool,
    bound: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(TmesError::InvalidParameter { name, value, bound })
    }
}
