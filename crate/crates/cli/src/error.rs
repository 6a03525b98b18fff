use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unknown key `{key}` at line {line}, column {column}")]
    UnknownKey { key: String, line: usize, column: usize },
    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] dissipact::Error),
}

impl CliError {
    /// Converts a TOML error, locating it by line and column in `text`.
    pub(crate) fn from_toml(text: &str, err: toml::de::Error) -> Self {
        let (line, column) = err.span().map_or((0, 0), |s| line_col(text, s.start));
        let message = err.message().trim().to_string();
        match unknown_field(&message) {
            Some(key) => CliError::UnknownKey { key, line, column },
            None => CliError::Parse { line, column, message },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub(crate) fn invalid(key: &str, message: impl Into<String>) -> Self {
        CliError::InvalidValue { key: key.to_string(), message: message.into() }
    }
}

/// One-based line and column (in characters) of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// The key named by serde's "unknown field `x`, expected …" message.
fn unknown_field(message: &str) -> Option<String> {
    let rest = message.strip_prefix("unknown field `")?;
    rest.split('`').next().map(str::to_string)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_are_one_based() {
        let text = "a = 1\nbb = 2\n";
        assert_eq!(line_col(text, 0), (1, 1));
        assert_eq!(line_col(text, 6), (2, 1));
        assert_eq!(line_col(text, 9), (2, 4));
    }

    #[test]
    fn unknown_field_name_is_extracted() {
        assert_eq!(unknown_field("unknown field `taux`, expected one of `t0`, `tau`"), Some("taux".into()));
        assert_eq!(unknown_field("invalid type: string"), None);
    }
}
