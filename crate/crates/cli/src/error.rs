use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lielength::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
    #[error("oracle budget exceeded: {candidates} candidates, limit {limit}")]
    BudgetExceeded { candidates: usize, limit: usize },
    #[error("oracle range exceeded: {0}")]
    RangeExceeded(String),
}
