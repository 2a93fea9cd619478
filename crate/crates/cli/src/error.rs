use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("config error: {0}")]
    Config(String),

    #[error("infeasible scenario: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Model(#[from] ntn_harq::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 when the link cannot meet its target, 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Infeasible(_) | AppError::Model(ntn_harq::Error::Infeasible { .. }) => 2,
            _ => 3,
        }
    }
}

pub type AppResult<T> = std::result::Result<T, AppError>;
