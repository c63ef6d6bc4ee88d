use std::fmt;

/// Stable exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Code {
    Config = 2,
    Input = 3,
    Data = 4,
    Model = 5,
    Output = 6,
}

impl Code {
    pub fn tag(self) -> &'static str {
        match self {
            Code::Config => "E-CONFIG",
            Code::Input => "E-INPUT",
            Code::Data => "E-DATA",
            Code::Model => "E-MODEL",
            Code::Output => "E-OUTPUT",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: Code,
    pub message: String,
}

impl CliError {
    pub fn new(code: Code, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(Code::Config, message)
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self::new(Code::Data, message)
    }

    pub fn input(path: &std::path::Path, err: impl fmt::Display) -> Self {
        Self::new(Code::Input, format!("{}: {err}", path.display()))
    }

    pub fn output(path: &std::path::Path, err: impl fmt::Display) -> Self {
        Self::new(Code::Output, format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.code.tag(), self.message)
    }
}

impl From<msstgarch::Error> for CliError {
    fn from(e: msstgarch::Error) -> Self {
        use msstgarch::Error as E;
        let code = match e {
            E::InvalidConfig(_) | E::InvalidPrior(_) | E::InvalidDelta(_) | E::ProbabilityOutOfRange(_) => Code::Config,
            E::InsufficientData { .. } | E::NonFinite { .. } => Code::Data,
            _ => Code::Model,
        };
        Self::new(code, e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
