use crate::harq::Direction;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no BLER curve for tbs {tbs} bits with {n_rep} repetitions")]
    CurveNotFound { tbs: u32, n_rep: u32 },

    #[error("no repetition count reaches BLER {target} for tbs {tbs} bits at {snr_db:.2} dB")]
    Infeasible { tbs: u32, snr_db: f64, target: f64 },

    #[error("TB {tb}: {direction} delay of {delay} SF is below the minimum of {min} SF")]
    MinDelayViolation {
        direction: Direction,
        tb: u32,
        delay: u32,
        min: u32,
    },

    #[error("BLER table line {line}: {msg}")]
    TableFormat { line: usize, msg: String },

    #[error("timeline line {line}: {msg}")]
    TimelineFormat { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
