//! CLI error classification onto the documented exit codes.

use thiserror::Error;

use hrgen_core::pipeline::PipelineError;
use hrgen_core::rendering::EndpointError;

/// Exit codes: 0 success, 1 usage/config, 2 data validation,
/// 3 endpoint failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Endpoint(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Endpoint(_) => 3,
        }
    }

    pub fn data(err: impl std::fmt::Display) -> Self {
        CliError::Data(err.to_string())
    }
}

impl From<hrgen_core::graph::GraphError> for CliError {
    fn from(e: hrgen_core::graph::GraphError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<hrgen_core::clustering::ClusterError> for CliError {
    fn from(e: hrgen_core::clustering::ClusterError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<hrgen_core::curation::CurationError> for CliError {
    fn from(e: hrgen_core::curation::CurationError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<hrgen_core::annotation::AnnotationError> for CliError {
    fn from(e: hrgen_core::annotation::AnnotationError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<hrgen_core::tasks::TaskError> for CliError {
    fn from(e: hrgen_core::tasks::TaskError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<hrgen_core::metrics::MetricsError> for CliError {
    fn from(e: hrgen_core::metrics::MetricsError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<EndpointError> for CliError {
    fn from(e: EndpointError) -> Self {
        match e {
            EndpointError::CredentialMissing { .. } => CliError::Config(e.to_string()),
            other => CliError::Endpoint(other.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Endpoint(inner) => inner.into(),
            other => CliError::Data(other.to_string()),
        }
    }
}
