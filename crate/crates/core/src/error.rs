use crate::evolve::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    /// The integration left the finite / bounded regime. `partial` holds every
    /// sample recorded before the abort.
    #[error("numerical blow-up at t = {time}: {reason}")]
    BlowUp {
        time: f64,
        reason: String,
        partial: Box<Trajectory>,
    },

    #[error("truncated series did not converge: {0}")]
    Truncation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient fit band: {0}")]
    InsufficientBand(String),

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) => 1,
            Error::Numerical(_)
            | Error::BlowUp { .. }
            | Error::Truncation(_)
            | Error::InsufficientBand(_) => 2,
            Error::Format(_) | Error::Io(_) => 3,
        }
    }
}
