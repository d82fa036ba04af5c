use thiserror::Error;

#[derive(Debug, Error)]
pub enum Failure {
    /// Bad arguments, unreadable input or a schema violation.
    #[error("{0}")]
    Usage(String),
    #[error("{op} failed: {source}")]
    Numerical {
        op: &'static str,
        source: stabkit_core::Error,
    },
    #[error("{0}")]
    Output(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Numerical { .. } => 3,
            Self::Output(_) => 1,
        }
    }
}

/// Tags a core error with the operation that raised it.
pub trait At<T> {
    fn at(self, op: &'static str) -> Result<T, Failure>;
}

impl<T> At<T> for stabkit_core::Result<T> {
    fn at(self, op: &'static str) -> Result<T, Failure> {
        self.map_err(|source| match source {
            stabkit_core::Error::Schema(msg) => Failure::Usage(msg),
            source => Failure::Numerical { op, source },
        })
    }
}
