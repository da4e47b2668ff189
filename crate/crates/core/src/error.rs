use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum ChuteError {
    /// Malformed instance text. `line`/`column` are 1-based, 0 when unknown.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("dimension error: {0}")]
    Dimension(String),

    /// A value outside the admissible domain (e.g. a negative knapsack weight).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// An operation was called on an object in the wrong state (e.g. an empty shell).
    #[error("state error: {0}")]
    State(String),

    /// Lower and upper bounds crossed. Theory forbids this, so it signals an upstream bug.
    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("shell kind mismatch: {0}")]
    ShellKind(String),

    /// The engine only supports two or three objectives.
    #[error("out of scope: {0}")]
    Scope(String),

    /// Brute-force enumeration refused because the instance is too large.
    #[error("enumeration guard: {0}")]
    Guard(String),

    /// An inner error tagged with the pipeline stage it came from.
    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<ChuteError>,
    },
}

impl ChuteError {
    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        ChuteError::Dimension(msg.into())
    }

    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        ChuteError::Parameter(msg.into())
    }

    /// Wraps `self` with a stage label.
    pub fn at_stage(self, stage: impl Into<String>) -> Self {
        ChuteError::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, with all stage labels stripped.
    pub fn root(&self) -> &ChuteError {
        match self {
            ChuteError::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for errors caused by bad input rather than by a failing computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self.root(),
            ChuteError::Parse { .. }
                | ChuteError::Dimension(_)
                | ChuteError::Domain(_)
                | ChuteError::Parameter(_)
                | ChuteError::Scope(_)
                | ChuteError::Guard(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, ChuteError>;
