use clap::Subcommand;
use hvdc_cba_core::cost::{
    compare_costs, di_cost, epc_cost, epc_cost_for_volume, ffr_cost, ffr_cost_for_volume, Eur,
    ReservationMwH,
};
use hvdc_cba_core::freq::Action;
use hvdc_cba_core::planning::{plan_all, PlanEvent, PlanSummary, RemedialPlan};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::Summary;
use crate::config::require;
use crate::error::CliError;
use crate::output::Outputs;
use crate::Context;

#[derive(Debug, Subcommand)]
pub enum CostCommand {
    /// Price the DI, FFR and EPC strategies and compare them
    /// (cba.json, table1.csv, fig3.csv)
    Cba,
}

/// `inputs.di_events`: a fixed DI-reduction schedule, e.g. a historical year.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiEvents {
    scenario: String,
    horizon_hours: usize,
    events: Vec<PlanEvent>,
}

impl DiEvents {
    fn check(&self) -> Result<(), String> {
        for (i, e) in self.events.iter().enumerate() {
            if e.start_hour > e.end_hour || e.end_hour >= self.horizon_hours {
                return Err(format!("event {i}: hours {}..={} outside 0..{}", e.start_hour, e.end_hour, self.horizon_hours));
            }
            if !(e.mw > 0.0 && e.mw.is_finite()) {
                return Err(format!("event {i}: mw must be positive"));
            }
            if i > 0 && e.start_hour <= self.events[i - 1].end_hour {
                return Err(format!("event {i} overlaps the previous one"));
            }
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct Fig3Row {
    strategy: &'static str,
    item: String,
    eur: f64,
}

pub fn run(ctx: &mut Context, cmd: &CostCommand, out: &mut Outputs) -> Result<Summary, CliError> {
    let CostCommand::Cba = cmd;
    let cfg = &ctx.config;
    cfg.validate()?;

    let mut prices = super::prices(ctx)?;
    if let Some(seed) = cfg.seed {
        prices.epc.seed = Some(seed);
    }
    if let Some(n) = cfg.cost.bootstrap_n {
        prices.epc.bootstrap_n = n;
    }
    if prices.epc.seed.is_none() {
        return Err(CliError::config(
            "the EPC bootstrap needs a seed: pass --seed, set seed in the config or epc.seed in prices.json",
        ));
    }
    prices.di.validate()?;
    prices.ffr.validate()?;
    prices.epc.validate()?;

    let di_fixed = match &cfg.inputs.di_events {
        Some(_) => {
            let path = require(&cfg.inputs.di_events, "di_events")?;
            let doc: DiEvents = super::read_json(path)?;
            doc.check().map_err(|message| CliError::Document {
                path: path.to_path_buf(),
                message,
            })?;
            Some(RemedialPlan::from_events(
                Action::DiReduction,
                &doc.scenario,
                doc.horizon_hours,
                doc.events,
            ))
        }
        None => None,
    };
    let (ffr_volume, epc_volume) = (cfg.cost.ffr_volume_mw_h, cfg.cost.epc_volume_mw_h);

    let planned = if di_fixed.is_none() || ffr_volume.is_none() || epc_volume.is_none() {
        let study = super::study(ctx)?;
        let ek = super::kinetic_energy(ctx)?;
        let p = &cfg.planner;
        Some(plan_all(&study, &ek, &p.params(), p.grid_step_gws, ctx.exec)?)
    } else {
        None
    };
    // At least one of each pair is present by construction.
    let di_plan = di_fixed.as_ref().or(planned.as_ref().map(|s| &s.di)).expect("DI plan");

    let di = di_cost(di_plan, &prices.di)?;
    let ffr = match (ffr_volume, &planned) {
        (Some(v), _) => ffr_cost_for_volume(ReservationMwH(v), &prices.ffr)?,
        (None, Some(set)) => ffr_cost(&set.ffr, &prices.ffr)?,
        (None, None) => unreachable!(),
    };
    let epc = match (epc_volume, &planned) {
        (Some(v), _) => epc_cost_for_volume(ReservationMwH(v), &prices.epc, ctx.exec)?,
        (None, Some(set)) => epc_cost(&set.epc, &prices.epc, ctx.exec)?,
        (None, None) => unreachable!(),
    };
    let report = compare_costs(di, ffr, epc);

    let mut used: Vec<&RemedialPlan> = vec![di_plan];
    if let Some(set) = &planned {
        if ffr_volume.is_none() {
            used.push(&set.ffr);
        }
        if epc_volume.is_none() {
            used.push(&set.epc);
        }
    }
    let table: Vec<PlanSummary> = used.into_iter().map(PlanSummary::from).collect();

    let mut fig3 = Vec::new();
    let mut push = |a: Action, item: &str, eur: Eur| {
        fig3.push(Fig3Row {
            strategy: a.name(),
            item: item.to_string(),
            eur: eur.0,
        })
    };
    for b in [&report.di, &report.ffr.breakdown, &report.epc.breakdown] {
        for i in &b.items {
            push(b.strategy, &i.item, i.eur);
        }
    }
    for a in Action::ALL {
        push(a, "total", report.total(a));
    }
    push(Action::Epc, "p5", report.epc.p5_eur);
    push(Action::Epc, "p95", report.epc.p95_eur);

    let totals = Action::ALL
        .iter()
        .map(|&a| (a.name().to_string(), json!(report.total(a).0)))
        .collect::<serde_json::Map<_, _>>();
    let summary = json!({
        "total_eur": totals,
        "savings_pct": report.savings,
        "epc_interval_eur": [report.epc.p5_eur.0, report.epc.p95_eur.0],
    });
    out.json(
        "cba.json",
        &json!({
            "report": report,
            "plans": table,
            "threshold_gws": planned.as_ref().map(|s| s.threshold_gws),
            "bootstrap": { "seed": prices.epc.seed, "replicates": prices.epc.bootstrap_n },
        }),
    );
    out.csv("table1.csv", &table);
    out.csv("fig3.csv", fig3);
    Ok(("cost cba", summary))
}
