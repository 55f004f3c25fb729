use std::fmt;

use thiserror::Error;

/// Pipeline stage in which a failure happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Read,
    Distance,
    Cluster,
    Write,
    Synth,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Read => "read",
            Stage::Distance => "distance",
            Stage::Cluster => "cluster",
            Stage::Write => "write",
            Stage::Synth => "synth",
        })
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: leafdens_core::Error,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("{stage}: {message}")]
    Input { stage: Stage, message: String },
}

impl CliError {
    pub fn new(stage: Stage, source: leafdens_core::Error) -> Self {
        CliError::Stage { stage, source }
    }

    pub fn config(message: String) -> Self {
        CliError::Config(message)
    }

    pub fn stage(&self) -> Stage {
        match self {
            CliError::Stage { stage, .. } => *stage,
            CliError::Config(_) => Stage::Config,
            CliError::Input { stage, .. } => *stage,
        }
    }

    /// 1 for bad input or configuration, 2 for a failed computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input { .. } => 1,
            CliError::Stage { source, .. } if source.is_input_error() => 1,
            CliError::Stage { stage: Stage::Read, .. } => 1,
            // Out-of-range user settings caught by the core.
            CliError::Stage {
                source:
                    leafdens_core::Error::CutOutOfRange { .. }
                    | leafdens_core::Error::ZeroMomentOrder
                    | leafdens_core::Error::InvalidConfig(_),
                ..
            } => 1,
            CliError::Stage { .. } => 2,
        }
    }
}

/// Attaches a stage to core results.
pub(crate) trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T, CliError>;
}

impl<T> StageExt<T> for leafdens_core::Result<T> {
    fn stage(self, stage: Stage) -> Result<T, CliError> {
        self.map_err(|e| CliError::new(stage, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use leafdens_core::Error;

    #[test]
    fn exit_codes() {
        let too_short = Error::TooShort { id: "a".into(), len: 1 };
        assert_eq!(CliError::new(Stage::Read, too_short).exit_code(), 1);
        let bad_matrix = || Error::InvalidMatrix("asymmetric".into());
        assert_eq!(CliError::new(Stage::Read, bad_matrix()).exit_code(), 1);
        assert_eq!(CliError::new(Stage::Distance, bad_matrix()).exit_code(), 2);
        let bad_tree = Error::InvalidDendrogram("cycle".into());
        assert_eq!(CliError::new(Stage::Cluster, bad_tree).exit_code(), 2);
        let cut = Error::CutOutOfRange { k: 9, m: 3 };
        assert_eq!(CliError::new(Stage::Cluster, cut).exit_code(), 1);
        assert_eq!(CliError::config("x".into()).exit_code(), 1);
    }

    #[test]
    fn message_names_stage_and_record() {
        let e = CliError::new(Stage::Read, Error::AllZero { id: "leaf7".into() });
        let msg = e.to_string();
        assert!(msg.starts_with("read: "), "{msg}");
        assert!(msg.contains("leaf7"), "{msg}");
    }
}
