use std::fmt;

use spinstar::Error;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or input files.
    Usage(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Error::NoDynamics
                | Error::ZeroCouplings
                | Error::NonPositiveCoupling
                | Error::NonUniformCouplings
                | Error::NonZeroDetuning(_)
                | Error::SectorTooLarge { .. }
                | Error::FullSpaceTooLarge { .. } => 3,
                Error::NotNormalized(_)
                | Error::ZeroProbabilityBranch
                | Error::InvalidDensityMatrix(_)
                | Error::SeriesTooShort { .. }
                | Error::Aliased { .. }
                | Error::NoConvergence { .. } => 4,
                _ => 2,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}
