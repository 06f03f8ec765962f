use serde_json::{json, Value};
use thiserror::Error;

/// Everything that stops a subcommand before it can report. All of these
/// exit with status 2; a check that runs and fails is not an error.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("missing section [{0}]")]
    MissingSection(&'static str),
    #[error("missing key {0}")]
    MissingKey(&'static str),
    #[error("line {line}, column {column}: {message}")]
    Config { code: &'static str, message: String, line: usize, column: usize },
    #[error("{message}")]
    Module { code: String, message: String },
}

impl CliError {
    /// Tag a library error with its module and variant, e.g. `cosmology.singular_start`.
    pub fn module<E: std::fmt::Debug + std::fmt::Display>(module: &str, err: &E) -> Self {
        let debug = format!("{err:?}");
        let variant: String = debug.chars().take_while(|c| c.is_alphanumeric()).collect();
        CliError::Module { code: format!("{module}.{}", snake(&variant)), message: err.to_string() }
    }

    pub fn code(&self) -> String {
        match self {
            CliError::Usage(_) => "usage".into(),
            CliError::Io(_) => "io".into(),
            CliError::MissingSection(_) => "config.missing_section".into(),
            CliError::MissingKey(_) => "config.missing_key".into(),
            CliError::Config { code, .. } => (*code).into(),
            CliError::Module { code, .. } => code.clone(),
        }
    }

    pub fn to_json(&self) -> Value {
        let mut body = json!({ "code": self.code(), "message": self.to_string() });
        if let CliError::Config { message, line, column, .. } = self {
            body["message"] = json!(message);
            body["line"] = json!(line);
            body["column"] = json!(column);
        }
        json!({ "error": body })
    }
}

fn snake(name: &str) -> String {
    let mut out = String::new();
    for (i, c) in name.chars().enumerate() {
        if c.is_uppercase() {
            if i > 0 {
                out.push('_');
            }
            out.extend(c.to_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}
