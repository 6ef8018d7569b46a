//! CLI error taxonomy and exit codes: 0 success, 2 configuration, 3 runtime.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<airnet_sim::ScenarioError> for CliError {
    fn from(e: airnet_sim::ScenarioError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<airnet_gateway::GatewayError> for CliError {
    fn from(e: airnet_gateway::GatewayError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<airnet_pipeline::PipelineError> for CliError {
    fn from(e: airnet_pipeline::PipelineError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<airnet_analytics::AnalyticsError> for CliError {
    fn from(e: airnet_analytics::AnalyticsError) -> Self {
        CliError::Runtime(e.to_string())
    }
}
