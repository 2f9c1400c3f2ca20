use std::io::Write;

use serde::{Deserialize, Serialize};

use super::clear::{clear, settle, ClearError, MarketInstance, ZoneImbalance};
use super::LossMode;
use crate::exec::{map_range, Execution};
use crate::loss::{build_pwl, LossError};
use crate::model::{BidBook, HourlyStates, InterconnectorKind, NetworkModel};

#[derive(Debug, thiserror::Error)]
pub enum YearError {
    #[error("bid book is empty")]
    EmptyHorizon,
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error("writing losses: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourFailure {
    pub hour: usize,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub imbalances: Vec<ZoneImbalance>,
}

/// Per-line outcome of one hour, aligned with the network's interconnectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineRecord {
    pub net_mw: f64,
    pub modeled_loss_mw: f64,
    pub realized_loss_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourRecord {
    pub hour: usize,
    pub welfare_eur: f64,
    pub settlement_eur: f64,
    pub lines: Vec<LineRecord>,
}

/// Annual sums for one loss mode. Losses are realized (true) losses in MWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearReport {
    pub mode: LossMode,
    pub horizon_hours: usize,
    pub feasible_hours: usize,
    pub infeasible_hours: Vec<usize>,
    pub hvdc_loss_mwh: f64,
    pub ac_loss_mwh: f64,
    /// Losses on pinned lines; settled, but outside the market's control.
    pub pinned_loss_mwh: f64,
    pub modeled_loss_mwh: f64,
    pub welfare_eur: f64,
    pub settlement_eur: f64,
}

impl YearReport {
    pub fn total_loss_mwh(&self) -> f64 {
        self.hvdc_loss_mwh + self.ac_loss_mwh
    }

    pub fn net_benefit_eur(&self) -> f64 {
        self.welfare_eur - self.settlement_eur
    }
}

#[derive(Debug, Clone)]
pub struct YearRun {
    pub report: YearReport,
    pub hours: Vec<HourRecord>,
    pub failures: Vec<HourFailure>,
}

/// Clears every hour of `bids`; overrides in the network apply per hour.
pub fn run_year(
    network: &NetworkModel,
    bids: &BidBook,
    mode: LossMode,
    exec: Execution,
) -> Result<YearRun, YearError> {
    let states = HourlyStates::build(network, bids.horizon());
    run_year_with_states(network, &states, bids, mode, exec)
}

pub fn run_year_with_states(
    network: &NetworkModel,
    states: &HourlyStates,
    bids: &BidBook,
    mode: LossMode,
    exec: Execution,
) -> Result<YearRun, YearError> {
    let horizon = bids.horizon();
    if horizon == 0 {
        return Err(YearError::EmptyHorizon);
    }
    if let Some(n) = mode.segments() {
        // Surface a bad segment count once instead of in every hour.
        for line in &network.interconnectors {
            build_pwl(&line.loss, n)?;
        }
    }

    let outcomes = map_range(exec, horizon, |hour| {
        let instance = MarketInstance {
            hour,
            network,
            lines: states.get(hour),
            bids: &bids.hours[hour],
            mode,
        };
        clear(&instance).map(|s| HourRecord {
            hour,
            welfare_eur: s.welfare_eur,
            settlement_eur: settle(&s),
            lines: s
                .flows
                .iter()
                .map(|f| LineRecord {
                    net_mw: f.net_mw,
                    modeled_loss_mw: f.modeled_loss_mw,
                    realized_loss_mw: f.realized_loss_mw,
                })
                .collect(),
        })
    });

    let mut report = YearReport {
        mode,
        horizon_hours: horizon,
        feasible_hours: 0,
        infeasible_hours: Vec::new(),
        hvdc_loss_mwh: 0.0,
        ac_loss_mwh: 0.0,
        pinned_loss_mwh: 0.0,
        modeled_loss_mwh: 0.0,
        welfare_eur: 0.0,
        settlement_eur: 0.0,
    };
    let mut hours = Vec::with_capacity(horizon);
    let mut failures = Vec::new();
    // Fixed hour order keeps the sums independent of the worker count.
    for (hour, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(rec) => {
                report.feasible_hours += 1;
                report.welfare_eur += rec.welfare_eur;
                report.settlement_eur += rec.settlement_eur;
                for ((line, state), l) in network
                    .interconnectors
                    .iter()
                    .zip(states.get(hour))
                    .zip(&rec.lines)
                {
                    report.modeled_loss_mwh += l.modeled_loss_mw;
                    if state.fixed_flow.is_some() {
                        report.pinned_loss_mwh += l.realized_loss_mw;
                    } else {
                        match line.kind {
                            InterconnectorKind::Hvdc => report.hvdc_loss_mwh += l.realized_loss_mw,
                            InterconnectorKind::Ac => report.ac_loss_mwh += l.realized_loss_mw,
                        }
                    }
                }
                hours.push(rec);
            }
            Err(e) => {
                report.infeasible_hours.push(hour);
                let imbalances = match &e {
                    ClearError::Infeasible { imbalances, .. } => imbalances.clone(),
                    _ => Vec::new(),
                };
                failures.push(HourFailure {
                    hour,
                    message: e.to_string(),
                    imbalances,
                });
            }
        }
    }
    Ok(YearRun {
        report,
        hours,
        failures,
    })
}

/// Writes `hour,interconnector,flow_mw,modeled_loss_mw,realized_loss_mw`.
pub fn write_losses_csv<W: Write>(
    network: &NetworkModel,
    run: &YearRun,
    writer: W,
) -> Result<(), YearError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "hour",
        "interconnector",
        "flow_mw",
        "modeled_loss_mw",
        "realized_loss_mw",
    ])?;
    for rec in &run.hours {
        for (line, l) in network.interconnectors.iter().zip(&rec.lines) {
            w.write_record([
                rec.hour.to_string(),
                line.id.clone(),
                l.net_mw.to_string(),
                l.modeled_loss_mw.to_string(),
                l.realized_loss_mw.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompareError {
    #[error("horizons differ: {reference} vs {alternative} hours")]
    HorizonMismatch {
        reference: usize,
        alternative: usize,
    },
}

/// Alternative minus reference. Negative loss deltas are reductions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Savings {
    pub reference: LossMode,
    pub alternative: LossMode,
    pub savings_eur: f64,
    pub welfare_delta_eur: f64,
    pub settlement_delta_eur: f64,
    pub hvdc_loss_delta_mwh: f64,
    pub ac_loss_delta_mwh: f64,
    pub net_loss_delta_mwh: f64,
    pub hvdc_loss_delta_pct: Option<f64>,
    pub ac_loss_delta_pct: Option<f64>,
    pub net_loss_delta_pct: Option<f64>,
}

fn pct(delta: f64, base: f64) -> Option<f64> {
    (base != 0.0).then(|| 100.0 * delta / base)
}

pub fn compare(reference: &YearReport, alternative: &YearReport) -> Result<Savings, CompareError> {
    if reference.horizon_hours != alternative.horizon_hours {
        return Err(CompareError::HorizonMismatch {
            reference: reference.horizon_hours,
            alternative: alternative.horizon_hours,
        });
    }
    let hvdc = alternative.hvdc_loss_mwh - reference.hvdc_loss_mwh;
    let ac = alternative.ac_loss_mwh - reference.ac_loss_mwh;
    let net = alternative.total_loss_mwh() - reference.total_loss_mwh();
    Ok(Savings {
        reference: reference.mode,
        alternative: alternative.mode,
        savings_eur: alternative.net_benefit_eur() - reference.net_benefit_eur(),
        welfare_delta_eur: alternative.welfare_eur - reference.welfare_eur,
        settlement_delta_eur: alternative.settlement_eur - reference.settlement_eur,
        hvdc_loss_delta_mwh: hvdc,
        ac_loss_delta_mwh: ac,
        net_loss_delta_mwh: net,
        hvdc_loss_delta_pct: pct(hvdc, reference.hvdc_loss_mwh),
        ac_loss_delta_pct: pct(ac, reference.ac_loss_mwh),
        net_loss_delta_pct: pct(net, reference.total_loss_mwh()),
    })
}
