use std::path::PathBuf;

use hvdc_cba_core::cost::CostError;
use hvdc_cba_core::freq::FreqError;
use hvdc_cba_core::market::{ClearError, CompareError, YearError};
use hvdc_cba_core::model::ModelError;
use hvdc_cba_core::synth::SynthError;
use serde_json::{json, Value};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("cannot read {}: {source}", path.display())]
    Input { path: PathBuf, source: ModelError },
    #[error("cannot read {}: {message}", path.display())]
    Document { path: PathBuf, message: String },
    #[error(transparent)]
    Clear(#[from] ClearError),
    #[error(transparent)]
    Year(#[from] YearError),
    #[error(transparent)]
    Compare(#[from] CompareError),
    #[error(transparent)]
    Freq(#[from] FreqError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("cannot write {}: {source}", path.display())]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config(message.into())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Input { .. } | CliError::Document { .. } => "input",
            CliError::Clear(ClearError::Infeasible { .. }) => "infeasible",
            CliError::Clear(_) | CliError::Year(_) | CliError::Compare(_) => "market",
            CliError::Freq(FreqError::Unreachable(_)) => "unreachable",
            CliError::Freq(_) => "frequency",
            CliError::Cost(_) => "cost",
            CliError::Synth(_) => "synth",
            CliError::Output { .. } => "output",
        }
    }

    /// 2 for problems detected before any computation, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input { .. } | CliError::Document { .. } => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut error = json!({ "kind": self.kind(), "message": self.to_string() });
        if let CliError::Clear(ClearError::Infeasible { hour, imbalances }) = self {
            error["hour"] = json!(hour);
            error["imbalances"] = serde_json::to_value(imbalances).unwrap_or(Value::Null);
        }
        if let CliError::Input { source: ModelError::Invalid(v), .. } = self {
            error["violations"] = serde_json::to_value(v).unwrap_or(Value::Null);
        }
        json!({ "error": error })
    }
}
