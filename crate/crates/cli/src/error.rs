use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Text { line: usize, msg: String },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("missing set `{0}` in the instance")]
    MissingSet(&'static str),
    #[error(transparent)]
    Core(#[from] cyclotile::Error),
}

impl CliError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        use cyclotile::Error as E;
        match self {
            CliError::Io { .. } => "io",
            CliError::Write(_) => "io",
            CliError::Text { .. } | CliError::Json(_) => "parse",
            CliError::Invalid(_) | CliError::MissingSet(_) => "invalid-instance",
            CliError::Core(e) => match e {
                E::Precondition(_) => "precondition",
                E::Inapplicable(_) => "inapplicable",
                E::Invariant(_) => "invariant",
                E::TooLarge(_) | E::ModulusTooLarge(_) => "too-large",
                E::NotATiling => "not-a-tiling",
                E::Overflow => "overflow",
                _ => "invalid-argument",
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.code(), "message": self.to_string() }).to_string()
    }
}
