// SPDX-License-Identifier: MIT OR Apache-2.0

use std::process::ExitCode;

use autoknot::ErrorKind;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Input that cannot be read or fitted.
    #[error("{0}")]
    Data(String),
    /// Flags or configuration files that are invalid.
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] autoknot::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        let code = match self {
            CliError::Data(_) => 2,
            CliError::Config(_) => 3,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Data => 2,
                ErrorKind::Config => 3,
            },
        };
        ExitCode::from(code)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
