use clap::Args;
use hvdc_cba_core::model::save_network;
use hvdc_cba_core::synth::generate;
use serde_json::json;

use super::Summary;
use crate::error::CliError;
use crate::output::Outputs;
use crate::Context;

/// Starts from the config's `[synth]` table (or the built-in spec); flags
/// override individual fields. The seed comes from `--seed` or the config.
#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of zones (1-6)
    #[arg(long)]
    zones: Option<usize>,
    /// Hours to generate
    #[arg(long)]
    horizon: Option<usize>,
    /// Hydrological scaling of kinetic energy (below 1 for dry years)
    #[arg(long)]
    dry_scaling: Option<f64>,
    /// Scenario label written into the kinetic-energy series
    #[arg(long)]
    scenario: Option<String>,
}

pub fn run(ctx: &mut Context, args: &SynthArgs, out: &mut Outputs) -> Result<Summary, CliError> {
    let mut spec = ctx.config.synth.clone().unwrap_or_default();
    spec.seed = ctx
        .config
        .seed
        .ok_or_else(|| CliError::config("synth needs a seed: pass --seed or set seed in the config"))?;
    if let Some(z) = args.zones {
        spec.zones = z;
    }
    if let Some(h) = args.horizon {
        spec.horizon_hours = h;
    }
    if let Some(d) = args.dry_scaling {
        spec.ek.dry_scaling = d;
    }
    if let Some(s) = &args.scenario {
        spec.scenario = s.clone();
    }
    spec.validate()?;
    let data = generate(&spec, ctx.exec)?;

    let mut bids = Vec::new();
    data.bids
        .write_csv(&mut bids)
        .map_err(|e| CliError::config(format!("bids: {e}")))?;
    let mut ek = Vec::new();
    data.ek
        .write_csv(&mut ek)
        .map_err(|e| CliError::config(format!("kinetic energy: {e}")))?;
    out.raw("network.json", save_network(&data.network).into_bytes());
    out.raw("bids.csv", bids);
    out.raw("ek.csv", ek);
    out.json("prices.json", &data.prices);
    out.json("spec.json", &spec);

    let values = &data.ek.values;
    Ok((
        "synth",
        json!({
            "seed": spec.seed,
            "zones": data.network.zones.len(),
            "interconnectors": data.network.interconnectors.len(),
            "horizon_hours": spec.horizon_hours,
            "ek_min_gws": values.iter().copied().fold(f64::INFINITY, f64::min),
            "ek_max_gws": values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }),
    ))
}
