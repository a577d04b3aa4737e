use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or incomplete configuration.
    Config(String),
    /// Parameters outside the domain of the bounds.
    Domain(String),
    /// A soundness check on simulated output failed.
    Invariant(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Invariant(_) => 4,
            CliError::Io(_) => 1,
        })
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Domain(m) => write!(f, "domain error: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violated: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<driftbound::Error> for CliError {
    fn from(e: driftbound::Error) -> Self {
        match e {
            driftbound::Error::Domain(m) => CliError::Domain(m),
            driftbound::Error::Convergence(m) => CliError::Domain(format!("no convergence: {m}")),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
