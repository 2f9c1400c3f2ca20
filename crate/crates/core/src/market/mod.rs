//! Welfare-maximizing zonal clearing with internalized interconnector losses.
//!
//! Each hour is one linear program. Per zone, the balance row reads
//!
//! ```text
//! accepted demand − accepted supply + sent flow − delivered flow = pinned net import
//! ```
//!
//! and its dual is the zonal price. An interconnector whose losses are
//! internalized delivers `f − loss(f)` at the receiving end, which forces
//! `π_send = (1 − s)·π_recv` across an uncongested link with marginal loss `s`.

mod clear;
mod year;

pub use clear::{
    clear, settle, AcceptedStep, FLOW_TIE_BREAK, ClearError, FlowResult, MarketInstance, MarketSolution,
    SolveStatus, ZoneImbalance, ZonePrice,
};
pub use year::{
    compare, run_year, run_year_with_states, write_losses_csv, CompareError, HourFailure, HourRecord, LineRecord,
    Savings, YearError, YearReport, YearRun,
};

use serde::{Deserialize, Serialize};

use crate::model::InterconnectorKind;

/// Default price cap for inelastic load, EUR/MWh.
pub const DEFAULT_PRICE_CAP: f64 = 3000.0;

/// Which interconnector losses the clearing sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum LossMode {
    /// Reference: losses ignored in clearing and settled afterwards.
    #[serde(rename = "none")]
    NoFactors,
    /// Secant loss factors on HVDC links.
    LinearHvdc,
    /// Piecewise-linear loss factors on HVDC links.
    PwlHvdc { segments: usize },
    /// Piecewise-linear loss factors on AC and HVDC links.
    #[serde(rename = "pwl-all")]
    PwlAcHvdc { segments: usize },
}

impl LossMode {
    pub fn all(segments: usize) -> [LossMode; 4] {
        [
            LossMode::NoFactors,
            LossMode::LinearHvdc,
            LossMode::PwlHvdc { segments },
            LossMode::PwlAcHvdc { segments },
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            LossMode::NoFactors => "none",
            LossMode::LinearHvdc => "linear-hvdc",
            LossMode::PwlHvdc { .. } => "pwl-hvdc",
            LossMode::PwlAcHvdc { .. } => "pwl-all",
        }
    }

    pub fn parse(name: &str, segments: usize) -> Option<Self> {
        match name {
            "none" => Some(LossMode::NoFactors),
            "linear-hvdc" => Some(LossMode::LinearHvdc),
            "pwl-hvdc" => Some(LossMode::PwlHvdc { segments }),
            "pwl-all" => Some(LossMode::PwlAcHvdc { segments }),
            _ => None,
        }
    }

    pub fn internalizes(self, kind: InterconnectorKind) -> bool {
        match self {
            LossMode::NoFactors => false,
            LossMode::LinearHvdc | LossMode::PwlHvdc { .. } => kind == InterconnectorKind::Hvdc,
            LossMode::PwlAcHvdc { .. } => true,
        }
    }

    pub fn segments(self) -> Option<usize> {
        match self {
            LossMode::PwlHvdc { segments } | LossMode::PwlAcHvdc { segments } => Some(segments),
            _ => None,
        }
    }
}

impl std::fmt::Display for LossMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.segments() {
            Some(n) => write!(f, "{}({n})", self.name()),
            None => f.write_str(self.name()),
        }
    }
}
