use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::validate::{Rule, Violation};
use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Supply,
    Demand,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Supply => f.write_str("supply"),
            Side::Demand => f.write_str("demand"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BidStep {
    pub quantity_mw: f64,
    pub price_eur_mwh: f64,
}

impl BidStep {
    pub fn new(quantity_mw: f64, price_eur_mwh: f64) -> Self {
        Self {
            quantity_mw,
            price_eur_mwh,
        }
    }
}

/// Stepwise bid curve. Supply steps are ordered by rising price, demand steps
/// by falling price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidCurve {
    pub side: Side,
    pub steps: Vec<BidStep>,
}

impl BidCurve {
    pub fn new(side: Side, steps: Vec<BidStep>) -> Self {
        Self { side, steps }
    }

    /// Builds a curve from unordered steps, sorting them into merit order.
    pub fn from_unsorted(side: Side, mut steps: Vec<BidStep>) -> Self {
        match side {
            Side::Supply => steps.sort_by(|a, b| a.price_eur_mwh.total_cmp(&b.price_eur_mwh)),
            Side::Demand => steps.sort_by(|a, b| b.price_eur_mwh.total_cmp(&a.price_eur_mwh)),
        }
        Self { side, steps }
    }

    pub fn total_mw(&self) -> f64 {
        self.steps.iter().map(|s| s.quantity_mw).sum()
    }

    pub fn violations(&self, entity: &str) -> Vec<Violation> {
        let mut out = Vec::new();
        for (k, s) in self.steps.iter().enumerate() {
            if !(s.quantity_mw > 0.0) || !s.quantity_mw.is_finite() {
                out.push(Violation::new(
                    entity,
                    Rule::NonPositiveQuantity,
                    format!("step {k} quantity {} MW", s.quantity_mw),
                ));
            }
            if !s.price_eur_mwh.is_finite() {
                out.push(Violation::new(
                    entity,
                    Rule::NonFinite,
                    format!("step {k} price {}", s.price_eur_mwh),
                ));
            }
        }
        for (k, w) in self.steps.windows(2).enumerate() {
            let ordered = match self.side {
                Side::Supply => w[0].price_eur_mwh <= w[1].price_eur_mwh,
                Side::Demand => w[0].price_eur_mwh >= w[1].price_eur_mwh,
            };
            if !ordered {
                out.push(Violation::new(
                    entity,
                    Rule::BidOrder,
                    format!("{} steps {} and {} out of merit order", self.side, k, k + 1),
                ));
            }
        }
        out
    }
}

/// All curves of one zone for one hour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneBids {
    pub zone: String,
    pub supply: Option<BidCurve>,
    pub demand: Option<BidCurve>,
}

impl ZoneBids {
    pub fn new(zone: impl Into<String>, supply: Vec<BidStep>, demand: Vec<BidStep>) -> Self {
        let supply = (!supply.is_empty()).then(|| BidCurve::from_unsorted(Side::Supply, supply));
        let demand = (!demand.is_empty()).then(|| BidCurve::from_unsorted(Side::Demand, demand));
        Self {
            zone: zone.into(),
            supply,
            demand,
        }
    }

    pub fn curves(&self) -> impl Iterator<Item = &BidCurve> {
        self.supply.iter().chain(self.demand.iter())
    }
}

/// Hour-indexed collection of zonal bids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BidBook {
    pub hours: Vec<Vec<ZoneBids>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BidRow {
    hour: usize,
    zone: String,
    side: Side,
    price_eur_mwh: f64,
    quantity_mw: f64,
}

impl BidBook {
    pub fn horizon(&self) -> usize {
        self.hours.len()
    }

    pub fn hour(&self, hour: usize) -> Option<&[ZoneBids]> {
        self.hours.get(hour).map(Vec::as_slice)
    }

    /// Reads `hour,zone,side,price_eur_mwh,quantity_mw` rows. Steps of one
    /// (hour, zone, side) are sorted into merit order; every hour in
    /// `0..=max_hour` must carry at least one row.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, ModelError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        // hour -> zone -> (supply, demand)
        type Steps = (Vec<BidStep>, Vec<BidStep>);
        let mut grouped: BTreeMap<usize, BTreeMap<String, Steps>> = BTreeMap::new();
        for result in rdr.deserialize::<BidRow>() {
            let row = result.map_err(ModelError::from_csv)?;
            if !(row.quantity_mw > 0.0) || !row.quantity_mw.is_finite() {
                return Err(ModelError::Schema(format!(
                    "hour {} zone {}: quantity_mw must be positive, got {}",
                    row.hour, row.zone, row.quantity_mw
                )));
            }
            if !row.price_eur_mwh.is_finite() {
                return Err(ModelError::Schema(format!(
                    "hour {} zone {}: price_eur_mwh must be finite",
                    row.hour, row.zone
                )));
            }
            let entry = grouped.entry(row.hour).or_default().entry(row.zone).or_default();
            let step = BidStep::new(row.quantity_mw, row.price_eur_mwh);
            match row.side {
                Side::Supply => entry.0.push(step),
                Side::Demand => entry.1.push(step),
            }
        }
        let horizon = grouped.keys().next_back().map_or(0, |h| h + 1);
        let mut hours = Vec::with_capacity(horizon);
        for h in 0..horizon {
            let Some(zones) = grouped.remove(&h) else {
                return Err(ModelError::Schema(format!("hour {h} has no bids")));
            };
            hours.push(
                zones
                    .into_iter()
                    .map(|(zone, (s, d))| ZoneBids::new(zone, s, d))
                    .collect(),
            );
        }
        Ok(Self { hours })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), ModelError> {
        let mut wtr = csv::Writer::from_writer(writer);
        for (hour, zones) in self.hours.iter().enumerate() {
            for zb in zones {
                for curve in zb.curves() {
                    for s in &curve.steps {
                        wtr.serialize(BidRow {
                            hour,
                            zone: zb.zone.clone(),
                            side: curve.side,
                            price_eur_mwh: s.price_eur_mwh,
                            quantity_mw: s.quantity_mw,
                        })
                        .map_err(ModelError::from_csv)?;
                    }
                }
            }
        }
        wtr.flush()?;
        Ok(())
    }
}
