use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid material parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("Newton iteration did not converge in {stage} (iterations {iterations}, residual {residual:e})")]
    NoConvergence {
        stage: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("orientation lost: min deformation gradient {min_f:e}")]
    OrientationLoss { min_f: f64 },

    #[error("positivity lost: min concentration {min_c:e}")]
    PositivityLoss { min_c: f64 },

    #[error("singular system at pivot {pivot}")]
    SingularSystem { pivot: usize },

    #[error("step failed at t = {time}: {source}")]
    StepFailed {
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
