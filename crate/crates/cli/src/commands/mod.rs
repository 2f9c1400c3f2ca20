//! One module per subcommand group. Every command loads and validates all of
//! its inputs before computing anything and stages its outputs in
//! [`Outputs`](crate::output::Outputs); `main` commits them on success.

pub mod cost;
pub mod freq;
pub mod market;
pub mod plan;
pub mod synth;

use std::path::Path;

use hvdc_cba_core::cost::PriceBook;
use hvdc_cba_core::freq::FreqStudy;
use hvdc_cba_core::model::{self, BidBook, HourlySeries, NetworkModel, Unit};
use serde::de::DeserializeOwned;

use crate::config::require;
use crate::error::CliError;
use crate::Context;

/// Command name and a short JSON summary for stdout.
pub type Summary = (&'static str, serde_json::Value);

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let doc = |message: String| CliError::Document {
        path: path.to_path_buf(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| doc(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| doc(e.to_string()))
}

fn input(path: &Path) -> impl FnOnce(model::ModelError) -> CliError + '_ {
    move |source| CliError::Input {
        path: path.to_path_buf(),
        source,
    }
}

pub fn network(ctx: &Context) -> Result<NetworkModel, CliError> {
    let path = require(&ctx.config.inputs.network, "network")?;
    model::read_network(path).map_err(input(path))
}

pub fn bids(ctx: &Context) -> Result<BidBook, CliError> {
    let path = require(&ctx.config.inputs.bids, "bids")?;
    let book = model::read_bids(path).map_err(input(path))?;
    if book.horizon() == 0 {
        return Err(CliError::Document {
            path: path.to_path_buf(),
            message: "no bids".into(),
        });
    }
    Ok(book)
}

pub fn kinetic_energy(ctx: &Context) -> Result<HourlySeries, CliError> {
    let path = require(&ctx.config.inputs.ek, "ek")?;
    let series = model::read_series(path).map_err(input(path))?;
    series.require_unit(Unit::Gws).map_err(input(path))?;
    if let Some(h) = series.values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(CliError::Document {
            path: path.to_path_buf(),
            message: format!("hour {h}: kinetic energy must be positive"),
        });
    }
    Ok(series)
}

pub fn prices(ctx: &Context) -> Result<PriceBook, CliError> {
    let path = require(&ctx.config.inputs.prices, "prices")?;
    read_json(path)
}

/// The configured frequency study, or the built-in one.
pub fn study(ctx: &Context) -> Result<FreqStudy, CliError> {
    let study = match &ctx.config.inputs.model {
        Some(_) => read_json(require(&ctx.config.inputs.model, "model")?)?,
        None => FreqStudy::default(),
    };
    study.validate()?;
    Ok(study)
}
