use thiserror::Error;

/// Errors surfaced by the engine. Everything here is a numerical or usage
/// problem; I/O and configuration-file errors live in the harness crate.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A matrix that must have full column rank does not. Carries the
    /// offending subcarrier when the failure happened inside the per-bin
    /// combiner path.
    #[error("singular matrix{}", subcarrier_suffix(.subcarrier))]
    SingularMatrix { subcarrier: Option<usize> },

    /// A normalized correlation left [-1, 1] by more than the clip
    /// tolerance. This signals a covariance-computation bug upstream.
    #[error("arcsine domain violation: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),
}

fn subcarrier_suffix(k: &Option<usize>) -> String {
    match k {
        Some(k) => format!(" at subcarrier {k}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
