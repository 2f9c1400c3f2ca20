use serde::{Deserialize, Serialize};

use super::LossMode;
use crate::loss::{build_pwl, eval_true_loss, linearize_secant, LossError};
use crate::lp::{LinearProgram, LpError, Relation};
use crate::model::{
    Interconnector, InterconnectorKind, LineState, NetworkModel, Side, ZoneBids,
};

/// One hour of the market.
#[derive(Debug, Clone, Copy)]
pub struct MarketInstance<'a> {
    pub hour: usize,
    pub network: &'a NetworkModel,
    /// Effective bounds, aligned with `network.interconnectors`.
    pub lines: &'a [LineState],
    pub bids: &'a [ZoneBids],
    pub mode: LossMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneImbalance {
    pub zone: String,
    /// Positive: energy the zone cannot absorb; negative: energy it cannot source.
    pub residual_mw: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClearError {
    #[error("hour {hour}: {message}")]
    InvalidInstance { hour: usize, message: String },
    #[error("hour {hour}: no feasible dispatch ({})", describe(imbalances))]
    Infeasible {
        hour: usize,
        imbalances: Vec<ZoneImbalance>,
    },
    #[error("hour {hour}: welfare is unbounded; cap demand prices")]
    Unbounded { hour: usize },
    #[error("hour {hour}: solver failed: {source}")]
    Solver { hour: usize, source: LpError },
    #[error(transparent)]
    Loss(#[from] LossError),
}

fn describe(imbalances: &[ZoneImbalance]) -> String {
    imbalances
        .iter()
        .map(|i| {
            let what = if i.residual_mw > 0.0 { "surplus" } else { "shortage" };
            format!("{} {what} {:.3} MW", i.zone, i.residual_mw.abs())
        })
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZonePrice {
    pub zone: String,
    pub price_eur_mwh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptedStep {
    pub zone: String,
    pub side: Side,
    pub step: usize,
    pub price_eur_mwh: f64,
    pub offered_mw: f64,
    pub accepted_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowResult {
    pub interconnector: String,
    pub kind: InterconnectorKind,
    pub pinned: bool,
    pub internalized: bool,
    pub forward_mw: f64,
    pub reverse_mw: f64,
    /// Forward minus reverse part.
    pub net_mw: f64,
    pub modeled_loss_mw: f64,
    pub realized_loss_mw: f64,
    pub no_load_loss_mw: f64,
    pub sending_zone: String,
    pub receiving_zone: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveStatus {
    pub optimal: bool,
    pub iterations: usize,
    pub duality_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSolution {
    pub hour: usize,
    pub mode: LossMode,
    pub prices: Vec<ZonePrice>,
    pub accepted: Vec<AcceptedStep>,
    pub flows: Vec<FlowResult>,
    pub welfare_eur: f64,
    pub status: SolveStatus,
}

impl MarketSolution {
    pub fn price(&self, zone: &str) -> Option<f64> {
        self.prices
            .iter()
            .find(|p| p.zone == zone)
            .map(|p| p.price_eur_mwh)
    }
}

/// Column of one directed flow piece: sent from `send`, delivered at `recv`
/// with the given marginal loss.
struct Piece {
    var: usize,
    forward: bool,
    slope: f64,
}

enum LineVars {
    Pinned(f64),
    Cleared(Vec<Piece>),
}

/// Uniform cost per MW of cleared flow (EUR/MWh). It carries no loss
/// information; it only stops zero-cost loop flows in lossless paths and is
/// removed again from the reported welfare.
pub const FLOW_TIE_BREAK: f64 = 1e-7;

fn directional_pieces(
    line: &Interconnector,
    state: &LineState,
    mode: LossMode,
) -> Result<Vec<(bool, f64, f64)>, LossError> {
    // (forward, width, slope)
    let mut out = Vec::new();
    if !mode.internalizes(line.kind) {
        out.push((true, state.atc_forward, 0.0));
        out.push((false, state.atc_reverse, 0.0));
        return Ok(out);
    }
    match mode {
        LossMode::LinearHvdc => {
            let gamma = linearize_secant(&line.loss)?.gamma();
            out.push((true, state.atc_forward, gamma));
            out.push((false, state.atc_reverse, gamma));
        }
        LossMode::PwlHvdc { segments } | LossMode::PwlAcHvdc { segments } => {
            let pwl = build_pwl(&line.loss, segments)?;
            for (forward, atc) in [(true, state.atc_forward), (false, state.atc_reverse)] {
                let mut start = 0.0;
                for (width, slope) in pwl.segments() {
                    let end = (start + width).min(atc);
                    if end > start {
                        out.push((forward, end - start, slope));
                    }
                    start += width;
                }
            }
        }
        LossMode::NoFactors => unreachable!("reference mode internalizes nothing"),
    }
    Ok(out)
}

/// Clears one hour. Prices are the duals of the zonal balance rows.
pub fn clear(instance: &MarketInstance<'_>) -> Result<MarketSolution, ClearError> {
    let MarketInstance {
        hour,
        network,
        lines,
        bids,
        mode,
    } = *instance;
    let invalid = |message: String| ClearError::InvalidInstance { hour, message };
    if lines.len() != network.interconnectors.len() {
        return Err(invalid(format!(
            "{} line states for {} interconnectors",
            lines.len(),
            network.interconnectors.len()
        )));
    }
    let nz = network.zones.len();
    let mut zone_bids: Vec<Option<&ZoneBids>> = vec![None; nz];
    for zb in bids {
        let z = network
            .zone_index(&zb.zone)
            .ok_or_else(|| invalid(format!("bids for unknown zone {}", zb.zone)))?;
        if zone_bids[z].is_some() {
            return Err(invalid(format!("duplicate bids for zone {}", zb.zone)));
        }
        zone_bids[z] = Some(zb);
    }
    for (z, zb) in zone_bids.iter().enumerate() {
        if zb.is_none_or(|b| b.curves().next().is_none()) {
            return Err(invalid(format!("zone {} has no bid curve", network.zones[z].id)));
        }
    }

    let mut lp = LinearProgram::new();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nz];
    let mut rhs = vec![0.0; nz];

    // Bid steps.
    let mut step_vars: Vec<(usize, Side, usize, f64, f64, usize)> = Vec::new();
    for (z, zb) in zone_bids.iter().enumerate() {
        for curve in zb.expect("checked above").curves() {
            let (sign, coef) = match curve.side {
                Side::Supply => (-1.0, -1.0),
                Side::Demand => (1.0, 1.0),
            };
            for (k, step) in curve.steps.iter().enumerate() {
                let v = lp.add_variable(sign * step.price_eur_mwh, 0.0, step.quantity_mw);
                rows[z].push((v, coef));
                step_vars.push((z, curve.side, k, step.price_eur_mwh, step.quantity_mw, v));
            }
        }
    }

    // Interconnectors.
    let mut line_vars = Vec::with_capacity(lines.len());
    for (line, state) in network.interconnectors.iter().zip(lines) {
        let from = network
            .zone_index(&line.from_zone)
            .ok_or_else(|| invalid(format!("{}: unknown zone {}", line.id, line.from_zone)))?;
        let to = network
            .zone_index(&line.to_zone)
            .ok_or_else(|| invalid(format!("{}: unknown zone {}", line.id, line.to_zone)))?;
        if let Some(f) = state.fixed_flow {
            rhs[from] -= f;
            rhs[to] += f;
            line_vars.push(LineVars::Pinned(f));
        } else {
            let mut pieces = Vec::new();
            for (forward, width, slope) in directional_pieces(line, state, mode)? {
                let var = lp.add_variable(-FLOW_TIE_BREAK, 0.0, width);
                let (send, recv) = if forward { (from, to) } else { (to, from) };
                rows[send].push((var, 1.0));
                rows[recv].push((var, -(1.0 - slope)));
                pieces.push(Piece {
                    var,
                    forward,
                    slope,
                });
            }
            line_vars.push(LineVars::Cleared(pieces));
        }
    }

    for (coeffs, b) in rows.into_iter().zip(&rhs) {
        lp.add_row(coeffs, Relation::Eq, *b);
    }

    let sol = lp.maximize().map_err(|e| match e {
        LpError::Infeasible { residuals } => ClearError::Infeasible {
            hour,
            imbalances: residuals
                .iter()
                .enumerate()
                .filter(|(_, r)| r.abs() > 1e-6)
                .map(|(z, r)| ZoneImbalance {
                    zone: network.zones[z].id.clone(),
                    residual_mw: *r,
                })
                .collect(),
        },
        LpError::Unbounded { .. } => ClearError::Unbounded { hour },
        source => ClearError::Solver { hour, source },
    })?;

    let prices: Vec<ZonePrice> = network
        .zones
        .iter()
        .zip(&sol.duals)
        .map(|(z, &y)| ZonePrice {
            zone: z.id.clone(),
            price_eur_mwh: y,
        })
        .collect();

    let accepted = step_vars
        .iter()
        .map(|&(z, side, step, price, offered, v)| AcceptedStep {
            zone: network.zones[z].id.clone(),
            side,
            step,
            price_eur_mwh: price,
            offered_mw: offered,
            accepted_mw: sol.values[v].clamp(0.0, offered),
        })
        .collect();

    let mut flows = Vec::with_capacity(lines.len());
    let mut tie_break = 0.0;
    for ((line, state), vars) in network.interconnectors.iter().zip(lines).zip(&line_vars) {
        let (forward, reverse, modeled, pinned, internalized) = match vars {
            LineVars::Pinned(f) => (f.max(0.0), (-f).max(0.0), 0.0, true, false),
            LineVars::Cleared(pieces) => {
                let (mut fwd, mut rev, mut loss) = (0.0, 0.0, 0.0);
                for p in pieces {
                    let x = sol.values[p.var].max(0.0);
                    if p.forward {
                        fwd += x;
                    } else {
                        rev += x;
                    }
                    loss += p.slope * x;
                    tie_break += FLOW_TIE_BREAK * x;
                }
                (
                    fwd.min(state.atc_forward),
                    rev.min(state.atc_reverse),
                    loss,
                    false,
                    mode.internalizes(line.kind),
                )
            }
        };
        let net = forward - reverse;
        let magnitude = net.abs().min(line.loss.p_max);
        let realized = eval_true_loss(&line.loss, magnitude)?;
        let (sending, receiving) = if net >= 0.0 {
            (&line.from_zone, &line.to_zone)
        } else {
            (&line.to_zone, &line.from_zone)
        };
        flows.push(FlowResult {
            interconnector: line.id.clone(),
            kind: line.kind,
            pinned,
            internalized,
            forward_mw: forward,
            reverse_mw: reverse,
            net_mw: net,
            modeled_loss_mw: modeled,
            realized_loss_mw: realized,
            no_load_loss_mw: line.loss.a0,
            sending_zone: sending.clone(),
            receiving_zone: receiving.clone(),
        });
    }

    Ok(MarketSolution {
        hour,
        mode,
        prices,
        accepted,
        flows,
        welfare_eur: sol.objective + tie_break,
        status: SolveStatus {
            optimal: true,
            iterations: sol.iterations,
            duality_gap: sol.duality_gap,
        },
    })
}

/// Cost of buying the losses the market did not cover, at receiving-zone prices.
pub fn settle(solution: &MarketSolution) -> f64 {
    solution
        .flows
        .iter()
        .map(|f| {
            let residual = (f.realized_loss_mw - f.no_load_loss_mw - f.modeled_loss_mw).max(0.0)
                + f.no_load_loss_mw;
            residual * solution.price(&f.receiving_zone).unwrap_or(0.0)
        })
        .sum()
}
