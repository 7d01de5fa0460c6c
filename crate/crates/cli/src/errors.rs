use grasp_core::heuristic::HeuristicError;
use grasp_core::inference::InferenceError;
use grasp_core::io::IoError;
use grasp_core::model::ModelError;
use grasp_core::perception::PerceptionError;
use grasp_core::synthetic::SyntheticError;

/// CLI failure with the documented exit-code taxonomy:
/// 2 = io, 3 = data/fit, 4 = inference.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Data(String),
    Inference(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io(_) => "io",
            CliError::Data(_) => "data",
            CliError::Inference(_) => "inference",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 2,
            CliError::Data(_) => 3,
            CliError::Inference(_) => 4,
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError::Data(message.into())
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError::Io(message.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(m) | CliError::Data(m) | CliError::Inference(m) => f.write_str(m),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            // Malformed content is a data problem; missing/unreadable files
            // are io.
            IoError::Parse { .. } | IoError::Version { .. } | IoError::Invalid(_) => {
                CliError::Data(e.to_string())
            }
            _ => CliError::Io(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<PerceptionError> for CliError {
    fn from(e: PerceptionError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<HeuristicError> for CliError {
    fn from(e: HeuristicError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<InferenceError> for CliError {
    fn from(e: InferenceError) -> Self {
        CliError::Inference(e.to_string())
    }
}

impl From<SyntheticError> for CliError {
    fn from(e: SyntheticError) -> Self {
        match e {
            SyntheticError::Inference(inner) => CliError::Inference(inner.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}
