use clap::Subcommand;
use hvdc_cba_core::freq::{
    required_kinetic_energy, simulate, size_action, sweep, write_trajectory_csv, Action, FreqError,
};
use serde::Serialize;
use serde_json::json;

use super::Summary;
use crate::error::CliError;
use crate::output::Outputs;
use crate::Context;

#[derive(Debug, Subcommand)]
pub enum FreqCommand {
    /// Simulate one disturbance (traj.csv, model.json)
    Simulate {
        /// Kinetic energy, GWs [default: from model]
        #[arg(long)]
        ek: Option<f64>,
        /// Lost generation, MW [default: from model]
        #[arg(long)]
        disturbance_mw: Option<f64>,
        /// FFR block at the model's FFR trigger, MW
        #[arg(long)]
        ffr_mw: Option<f64>,
        /// Emergency power control block at the model's EPC trigger, MW
        #[arg(long)]
        epc_mw: Option<f64>,
        /// Integration step, s [default: from model]
        #[arg(long)]
        dt: Option<f64>,
        /// Simulated time, s [default: from model]
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Size remedial actions at one kinetic energy (size.csv)
    Size {
        /// Kinetic energy, GWs
        #[arg(long)]
        ek: f64,
        /// di, ffr or epc [default: all three]
        #[arg(long)]
        action: Option<Action>,
    },
    /// Lowest kinetic energy that withstands the disturbance unaided (threshold.json)
    Threshold,
    /// Requirement of every action over a kinetic-energy grid (fig2.csv)
    Sweep {
        /// First grid point, GWs
        #[arg(long, default_value_t = 80.0)]
        ek_min: f64,
        /// Last grid point, GWs (inclusive)
        #[arg(long, default_value_t = 240.0)]
        ek_max: f64,
        /// Grid spacing, GWs
        #[arg(long, default_value_t = 10.0)]
        ek_step: f64,
    },
}

#[derive(Serialize)]
struct SizeRow {
    ek_gws: f64,
    action: &'static str,
    /// Empty when the action cannot secure the hour.
    mw: Option<f64>,
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(format!("--{name} must be positive, got {v}")))
    }
}

pub fn run(ctx: &mut Context, cmd: &FreqCommand, out: &mut Outputs) -> Result<Summary, CliError> {
    let mut study = super::study(ctx)?;
    match cmd {
        FreqCommand::Simulate {
            ek,
            disturbance_mw,
            ffr_mw,
            epc_mw,
            dt,
            horizon,
        } => {
            if let Some(e) = ek {
                study.model.kinetic_energy_gws = positive("ek", *e)?;
            }
            if let Some(d) = disturbance_mw {
                study.disturbance.lost_generation_mw = *d;
            }
            if let Some(dt) = dt {
                study.sim.dt_s = *dt;
            }
            if let Some(h) = horizon {
                study.sim.horizon_s = *h;
            }
            study.validate()?;
            // A zero block means no reserve at all.
            let block = |name: &str, v: Option<f64>| match v {
                Some(mw) if !(mw >= 0.0 && mw.is_finite()) => {
                    Err(CliError::config(format!("--{name} must be non-negative, got {mw}")))
                }
                Some(mw) => Ok((mw > 0.0).then_some(mw)),
                None => Ok(None),
            };
            let ffr = block("ffr-mw", *ffr_mw)?.map(|mw| study.ffr.with_block(mw));
            let epc = block("epc-mw", *epc_mw)?.map(|mw| study.epc.with_block(mw));
            let traj = simulate(
                &study.model,
                &study.disturbance,
                ffr.as_ref(),
                epc.as_ref(),
                &study.sim,
            )?;
            let mut csv = Vec::new();
            write_trajectory_csv(&traj, &mut csv)
                .map_err(|e| CliError::config(format!("trajectory: {e}")))?;
            out.raw("traj.csv", csv);
            out.json("model.json", &study);
            Ok((
                "freq simulate",
                json!({
                    "nadir_hz": traj.nadir_hz,
                    "nadir_time_s": traj.nadir_time_s,
                    "secure": traj.nadir_hz >= study.model.nadir_floor_hz,
                    "load_shed": traj.load_shed,
                    "activations": traj.activations,
                }),
            ))
        }
        FreqCommand::Size { ek, action } => {
            let ek = positive("ek", *ek)?;
            let actions = match action {
                Some(a) => vec![*a],
                None => Action::ALL.to_vec(),
            };
            let mut rows = Vec::new();
            for a in actions {
                let mw = match size_action(&study, ek, a) {
                    Ok(mw) => Some(mw),
                    Err(FreqError::Unreachable(_)) => None,
                    Err(e) => return Err(e.into()),
                };
                rows.push(SizeRow {
                    ek_gws: ek,
                    action: a.name(),
                    mw,
                });
            }
            let summary = rows
                .iter()
                .map(|r| (r.action.to_string(), json!(r.mw)))
                .collect::<serde_json::Map<_, _>>();
            out.csv("size.csv", rows);
            Ok(("freq size", json!({ "ek_gws": ek, "mw": summary })))
        }
        FreqCommand::Threshold => {
            let th = required_kinetic_energy(&study.model, &study.disturbance, None, None, &study.sim)?;
            let doc = json!({
                "threshold_gws": th,
                "lost_generation_mw": study.disturbance.lost_generation_mw,
                "fcr_d_mw": study.model.fcr_d_mw,
                "nadir_floor_hz": study.model.nadir_floor_hz,
            });
            out.json("threshold.json", &doc);
            Ok(("freq threshold", doc))
        }
        FreqCommand::Sweep {
            ek_min,
            ek_max,
            ek_step,
        } => {
            let (lo, hi, step) = (positive("ek-min", *ek_min)?, *ek_max, positive("ek-step", *ek_step)?);
            if !(hi >= lo && hi.is_finite()) {
                return Err(CliError::config("--ek-max must not be below --ek-min"));
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
            if n > 100_000 {
                return Err(CliError::config(format!("sweep grid has {n} points; use a coarser step")));
            }
            let grid: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
            let rows = sweep(&study, &grid, ctx.exec)?;
            out.csv("fig2.csv", &rows);
            Ok(("freq sweep", json!({ "points": rows.len(), "ek_min": lo, "ek_max": grid[n - 1] })))
        }
    }
}
