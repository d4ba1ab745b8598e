use std::fmt;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_UNPHYSICAL: u8 = 3;
pub const EXIT_CONSTRUCTION: u8 = 4;
pub const EXIT_AUDIT: u8 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(EXIT_PARSE, message)
    }

    /// Prefixes the message with the offending key.
    pub fn at(mut self, key: &str) -> Self {
        self.message = format!("{key}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<bellbound::Error> for CliError {
    fn from(e: bellbound::Error) -> Self {
        use bellbound::Error::*;
        let code = match e {
            InvalidInput(_) | Constraint(_) | Domain(_) => EXIT_PARSE,
            Unphysical(_) => EXIT_UNPHYSICAL,
            ConstructionFailure(_) => EXIT_CONSTRUCTION,
            InternalConsistency(_) => EXIT_INTERNAL,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(EXIT_INTERNAL, format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::new(EXIT_INTERNAL, format!("csv error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
