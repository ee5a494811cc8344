use std::collections::BTreeMap;

/// Error type shared across the pipeline.
///
/// `Parse` and `Contract` errors map to exit code 2 in the CLI,
/// `Config` to exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error in {location}: {message}")]
    Parse { location: String, message: String },

    #[error("missing mandatory column: {0}")]
    MissingColumn(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("input contract violated: {0}")]
    Contract(String),

    #[error("unmapped actor keys: {}", keys.join(", "))]
    UnmappedActors { keys: Vec<String> },

    #[error("unknown stakeholder '{name}'{}", near_matches_hint(near))]
    UnknownStakeholder { name: String, near: Vec<String> },

    #[error("unknown metadata key '{key}', available: {}", available.join(", "))]
    UnknownMetadataKey { key: String, available: Vec<String> },

    #[error("artifact total participation is zero; weight undefined")]
    UndefinedWeight,

    #[error("eigenvector iteration did not converge after {iterations} iterations")]
    NonConvergence {
        iterations: usize,
        /// Last iterate, for inspection.
        last: BTreeMap<String, f64>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("schema-invalid file {path}: {message}")]
    Schema { path: String, message: String },
}

fn near_matches_hint(near: &[String]) -> String {
    if near.is_empty() {
        String::new()
    } else {
        format!(", did you mean one of: {}", near.join(", "))
    }
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// CLI exit status: 1 for usage/config errors, 2 for data/contract errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            _ => 2,
        }
    }
}
