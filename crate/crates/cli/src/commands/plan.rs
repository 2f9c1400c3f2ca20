use clap::Subcommand;
use hvdc_cba_core::planning::{plan_all, PlanSummary};
use serde_json::json;

use super::Summary;
use crate::error::CliError;
use crate::output::Outputs;
use crate::Context;

#[derive(Debug, Subcommand)]
pub enum PlanCommand {
    /// DI-reduction, FFR and EPC plans for the kinetic-energy series
    /// (plan.json, table1.csv)
    Build,
}

pub fn run(ctx: &mut Context, cmd: &PlanCommand, out: &mut Outputs) -> Result<Summary, CliError> {
    match cmd {
        PlanCommand::Build => {
            ctx.config.validate()?;
            let study = super::study(ctx)?;
            let ek = super::kinetic_energy(ctx)?;
            let p = &ctx.config.planner;
            let set = plan_all(&study, &ek, &p.params(), p.grid_step_gws, ctx.exec)?;
            let table: Vec<PlanSummary> = set.plans().into_iter().map(PlanSummary::from).collect();
            let summary = json!({
                "threshold_gws": set.threshold_gws,
                "deficit_hours": ek.values.iter().filter(|&&v| v < set.threshold_gws).count(),
                "plans": table,
            });
            out.json("plan.json", &set);
            out.csv("table1.csv", &table);
            Ok(("plan build", summary))
        }
    }
}
