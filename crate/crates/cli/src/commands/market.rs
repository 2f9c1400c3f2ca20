use clap::{Args, Subcommand};
use hvdc_cba_core::market::{
    clear, compare, run_year, settle, write_losses_csv, LossMode, MarketInstance, YearReport,
};
use serde::Serialize;
use serde_json::json;

use super::Summary;
use crate::error::CliError;
use crate::output::Outputs;
use crate::Context;

#[derive(Debug, Subcommand)]
pub enum MarketCommand {
    /// Clear a single hour (solution.json)
    Clear {
        /// Hour index into the bid book
        #[arg(long)]
        hour: usize,
        #[command(flatten)]
        mode: ModeArgs,
    },
    /// Clear every hour under one loss mode (report.json, losses.csv)
    RunYear {
        #[command(flatten)]
        mode: ModeArgs,
    },
    /// Run every loss mode and compare against clearing without loss factors
    /// (report.json, fig6.csv)
    Compare {
        /// Segments of the piecewise-linear modes [default: from config, 5]
        #[arg(long)]
        segments: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct ModeArgs {
    /// Loss mode: none, linear-hvdc, pwl-hvdc or pwl-all [default: from config, pwl-all]
    #[arg(long)]
    mode: Option<String>,
    /// Segments of the piecewise-linear modes [default: from config, 5]
    #[arg(long)]
    segments: Option<usize>,
}

fn apply(ctx: &mut Context, mode: Option<&String>, segments: Option<usize>) -> Result<LossMode, CliError> {
    if let Some(m) = mode {
        ctx.config.market.mode = m.clone();
    }
    if let Some(n) = segments {
        ctx.config.market.segments = n;
    }
    ctx.config.validate()?;
    ctx.config.loss_mode()
}

#[derive(Serialize)]
struct Fig6Row {
    mode: &'static str,
    hvdc_loss_gwh: f64,
    ac_loss_gwh: f64,
    net_loss_gwh: f64,
    pinned_loss_gwh: f64,
    welfare_eur: f64,
    settlement_eur: f64,
    savings_eur: f64,
    infeasible_hours: usize,
}

pub fn run(ctx: &mut Context, cmd: &MarketCommand, out: &mut Outputs) -> Result<Summary, CliError> {
    match cmd {
        MarketCommand::Clear { hour, mode } => {
            let mode = apply(ctx, mode.mode.as_ref(), mode.segments)?;
            let network = super::network(ctx)?;
            let bids = super::bids(ctx)?;
            let Some(zone_bids) = bids.hour(*hour) else {
                return Err(CliError::config(format!(
                    "hour {hour} is outside the bid book (0..{})",
                    bids.horizon()
                )));
            };
            let lines = network.states_for_hour(*hour);
            let solution = clear(&MarketInstance {
                hour: *hour,
                network: &network,
                lines: &lines,
                bids: zone_bids,
                mode,
            })?;
            let settlement = settle(&solution);
            out.json("solution.json", &json!({ "solution": solution, "settlement_eur": settlement }));
            Ok((
                "market clear",
                json!({
                    "hour": hour,
                    "mode": mode.name(),
                    "welfare_eur": solution.welfare_eur,
                    "settlement_eur": settlement,
                    "prices": solution.prices,
                }),
            ))
        }
        MarketCommand::RunYear { mode } => {
            let mode = apply(ctx, mode.mode.as_ref(), mode.segments)?;
            let network = super::network(ctx)?;
            let bids = super::bids(ctx)?;
            let run = run_year(&network, &bids, mode, ctx.exec)?;
            let mut csv = Vec::new();
            write_losses_csv(&network, &run, &mut csv)?;
            out.json("report.json", &json!({ "report": run.report, "failures": run.failures }));
            out.raw("losses.csv", csv);
            Ok(("market run-year", year_summary(&run.report)))
        }
        MarketCommand::Compare { segments } => {
            apply(ctx, None, *segments)?;
            let n = ctx.config.market.segments;
            let network = super::network(ctx)?;
            let bids = super::bids(ctx)?;
            let mut reports = Vec::new();
            let mut failures = Vec::new();
            for mode in LossMode::all(n) {
                let run = run_year(&network, &bids, mode, ctx.exec)?;
                failures.push(json!({ "mode": mode.name(), "failures": run.failures }));
                reports.push(run.report);
            }
            let reference = &reports[0];
            let savings = reports[1..]
                .iter()
                .map(|r| compare(reference, r))
                .collect::<Result<Vec<_>, _>>()?;
            let rows: Vec<Fig6Row> = reports
                .iter()
                .map(|r| Fig6Row {
                    mode: r.mode.name(),
                    hvdc_loss_gwh: r.hvdc_loss_mwh / 1e3,
                    ac_loss_gwh: r.ac_loss_mwh / 1e3,
                    net_loss_gwh: r.total_loss_mwh() / 1e3,
                    pinned_loss_gwh: r.pinned_loss_mwh / 1e3,
                    welfare_eur: r.welfare_eur,
                    settlement_eur: r.settlement_eur,
                    savings_eur: r.net_benefit_eur() - reference.net_benefit_eur(),
                    infeasible_hours: r.infeasible_hours.len(),
                })
                .collect();
            let summary = json!({
                "horizon_hours": reference.horizon_hours,
                "savings_meur": savings
                    .iter()
                    .map(|s| (s.alternative.name().to_string(), json!(s.savings_eur / 1e6)))
                    .collect::<serde_json::Map<_, _>>(),
                "net_loss_gwh": rows
                    .iter()
                    .map(|r| (r.mode.to_string(), json!(r.net_loss_gwh)))
                    .collect::<serde_json::Map<_, _>>(),
            });
            out.json(
                "report.json",
                &json!({ "reports": reports, "savings": savings, "failures": failures }),
            );
            out.csv("fig6.csv", rows);
            Ok(("market compare", summary))
        }
    }
}

fn year_summary(r: &YearReport) -> serde_json::Value {
    json!({
        "mode": r.mode.name(),
        "horizon_hours": r.horizon_hours,
        "infeasible_hours": r.infeasible_hours.len(),
        "hvdc_loss_gwh": r.hvdc_loss_mwh / 1e3,
        "ac_loss_gwh": r.ac_loss_mwh / 1e3,
        "welfare_eur": r.welfare_eur,
        "settlement_eur": r.settlement_eur,
    })
}
