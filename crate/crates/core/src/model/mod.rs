//! Shared domain types: bidding zones, interconnectors, bids and hourly series,
//! with their validation and file formats.
//!
//! `network.json` mirrors [`NetworkModel`] field for field; every numeric field
//! name carries its unit (`atc_fwd_mw`, `c_per_mw`, ...) and unknown fields are
//! rejected, so a value in an unexpected unit cannot slip through.

mod bids;
mod network;
mod series;
mod validate;

use std::path::Path;

pub use bids::{BidBook, BidCurve, BidStep, Side, ZoneBids};
pub use network::{
    HourOverride, HourlyStates, Interconnector, InterconnectorKind, LineState, NetworkModel,
    QuadraticLossModel, SynchronousArea, Zone,
};
pub use series::{HourlySeries, Unit};
pub use validate::{validate, validate_loss_model, Rule, Violation};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("parse error at {path} (line {line}, column {column}): {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("csv error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Csv { line: Option<u64>, message: String },
    #[error("unknown unit '{0}'")]
    UnknownUnit(String),
    #[error("{} validation violation(s): {}", .0.len(), join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl ModelError {
    pub(crate) fn from_csv(e: csv::Error) -> Self {
        let line = e.position().map(|p| p.line());
        ModelError::Csv {
            line,
            message: e.to_string(),
        }
    }
}

/// Parses and validates a `network.json` document.
pub fn load_network(document: &str) -> Result<NetworkModel, ModelError> {
    let de = &mut serde_json::Deserializer::from_str(document);
    let network: NetworkModel = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ModelError::Parse {
            path,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    if network.zones.is_empty() {
        return Err(ModelError::Schema("'zones' must contain at least one zone".into()));
    }
    let violations = validate(&network);
    if !violations.is_empty() {
        return Err(ModelError::Invalid(violations));
    }
    Ok(network)
}

pub fn save_network(network: &NetworkModel) -> String {
    let mut s = serde_json::to_string_pretty(network).expect("network serializes");
    s.push('\n');
    s
}

pub fn read_network(path: &Path) -> Result<NetworkModel, ModelError> {
    load_network(&std::fs::read_to_string(path)?)
}

pub fn read_bids(path: &Path) -> Result<BidBook, ModelError> {
    BidBook::read_csv(std::fs::File::open(path)?)
}

pub fn read_series(path: &Path) -> Result<HourlySeries, ModelError> {
    HourlySeries::read_csv(std::fs::File::open(path)?)
}
