use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point is not in the polytope {kappa}·P^{dim} (tol {tol})", dim = .q.saturating_sub(1))]
    NotInPolytope { q: usize, kappa: f64, tol: f64 },

    #[error("brute-force projection refused: q = {q} exceeds the limit {max}")]
    TooLarge { q: usize, max: usize },

    #[error("scene is not Morse: {0}")]
    NotMorse(String),

    #[error("separatrix tracing incomplete: saddle {saddle}, direction {direction}")]
    TracingIncomplete { saddle: usize, direction: String },

    #[error("saddle distance graph is disconnected: {0} (try a smaller delta_ext)")]
    Disconnected(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
