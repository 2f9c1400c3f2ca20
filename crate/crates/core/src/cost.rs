//! Euro costs of the three remedial strategies.
//!
//! Prices and volumes are distinct types: an energy price only multiplies an
//! energy volume and a capacity price only multiplies a reservation volume,
//! so mixing EUR/MWh with EUR/MW/h does not compile.

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Mul};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::exec::{map_range, Execution};
use crate::freq::Action;
use crate::planning::RemedialPlan;
use crate::rng::{substream, BOOTSTRAP_STREAM};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Eur(pub f64);

/// EUR/MWh
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EnergyPrice(pub f64);

/// EUR/MW/h
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CapacityPrice(pub f64);

/// MWh delivered or withheld.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EnergyMwh(pub f64);

/// MW reserved times hours reserved.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReservationMwH(pub f64);

impl Mul<EnergyPrice> for EnergyMwh {
    type Output = Eur;
    fn mul(self, p: EnergyPrice) -> Eur {
        Eur(self.0 * p.0)
    }
}

impl Mul<CapacityPrice> for ReservationMwH {
    type Output = Eur;
    fn mul(self, p: CapacityPrice) -> Eur {
        Eur(self.0 * p.0)
    }
}

impl Mul<f64> for Eur {
    type Output = Eur;
    fn mul(self, k: f64) -> Eur {
        Eur(self.0 * k)
    }
}

impl Add for Eur {
    type Output = Eur;
    fn add(self, o: Eur) -> Eur {
        Eur(self.0 + o.0)
    }
}

impl AddAssign for Eur {
    fn add_assign(&mut self, o: Eur) {
        self.0 += o.0;
    }
}

impl std::iter::Sum for Eur {
    fn sum<I: Iterator<Item = Eur>>(iter: I) -> Eur {
        iter.fold(Eur(0.0), Add::add)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CostError {
    #[error("{strategy:?} plan given to the {expected:?} cost model")]
    WrongStrategy { strategy: Action, expected: Action },
    #[error("no regulating price for hour {hour}")]
    MissingPrice { hour: usize },
    #[error("invalid cost parameters: {0}")]
    InvalidParams(String),
    #[error("bootstrap needs a seed")]
    MissingSeed,
}

/// Scalar mean or one price per plan hour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegulatingPrice {
    Scalar(EnergyPrice),
    Hourly(Vec<EnergyPrice>),
}

impl RegulatingPrice {
    fn at(&self, hour: usize) -> Result<EnergyPrice, CostError> {
        match self {
            RegulatingPrice::Scalar(p) => Ok(*p),
            RegulatingPrice::Hourly(v) => v.get(hour).copied().ok_or(CostError::MissingPrice { hour }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiCostParams {
    pub opportunity_eur_mwh: EnergyPrice,
    pub fixed_eur_per_event: Eur,
    pub regulating_price_eur_mwh: RegulatingPrice,
    pub substitute_hours_per_event: usize,
}

impl Default for DiCostParams {
    fn default() -> Self {
        Self {
            opportunity_eur_mwh: EnergyPrice(4.64),
            fixed_eur_per_event: Eur(4740.0),
            regulating_price_eur_mwh: RegulatingPrice::Scalar(EnergyPrice(54.06)),
            substitute_hours_per_event: 24,
        }
    }
}

impl DiCostParams {
    pub fn validate(&self) -> Result<(), CostError> {
        let prices_ok = match &self.regulating_price_eur_mwh {
            RegulatingPrice::Scalar(p) => p.0 >= 0.0,
            RegulatingPrice::Hourly(v) => v.iter().all(|p| p.0 >= 0.0),
        };
        if !(self.opportunity_eur_mwh.0 >= 0.0 && self.fixed_eur_per_event.0 >= 0.0 && prices_ok) {
            return Err(CostError::InvalidParams("DI prices must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FfrCostParams {
    pub price_eur_mw_h: CapacityPrice,
    pub tso_shares: BTreeMap<String, f64>,
}

impl Default for FfrCostParams {
    fn default() -> Self {
        let shares = [
            ("Energinet", 0.14),
            ("Statnett", 0.42),
            ("SvK", 0.24),
            ("Fingrid", 0.20),
        ];
        Self {
            price_eur_mw_h: CapacityPrice(48.95),
            tso_shares: shares.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

impl FfrCostParams {
    pub fn validate(&self) -> Result<(), CostError> {
        let sum: f64 = self.tso_shares.values().sum();
        if self.tso_shares.values().any(|s| *s < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(CostError::InvalidParams(format!("TSO shares sum to {sum}, not 1")));
        }
        if !(self.price_eur_mw_h.0 >= 0.0) {
            return Err(CostError::InvalidParams("FFR price must be non-negative".into()));
        }
        Ok(())
    }
}

pub const DEFAULT_BOOTSTRAP_N: usize = 10_000;
pub const MIN_BOOTSTRAP_N: usize = 1_000;

fn default_bootstrap_n() -> usize {
    DEFAULT_BOOTSTRAP_N
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpcCostParams {
    /// Historical primary-reserve prices.
    pub reserve_price_samples: Vec<CapacityPrice>,
    /// Historical congestion rents, standing in for the price of holding
    /// HVDC capacity back.
    pub reservation_price_samples: Vec<CapacityPrice>,
    #[serde(default = "default_bootstrap_n")]
    pub bootstrap_n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl EpcCostParams {
    pub fn validate(&self) -> Result<(), CostError> {
        if self.reserve_price_samples.is_empty() || self.reservation_price_samples.is_empty() {
            return Err(CostError::InvalidParams("EPC sample lists must be non-empty".into()));
        }
        if self.bootstrap_n < MIN_BOOTSTRAP_N {
            return Err(CostError::InvalidParams(format!(
                "bootstrap_n must be at least {MIN_BOOTSTRAP_N}"
            )));
        }
        let all = self.reserve_price_samples.iter().chain(&self.reservation_price_samples);
        if all.clone().any(|p| !p.0.is_finite()) {
            return Err(CostError::InvalidParams("EPC samples must be finite".into()));
        }
        Ok(())
    }
}

/// Parameter blocks of all three strategies; the `prices.json` document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceBook {
    #[serde(default)]
    pub di: DiCostParams,
    #[serde(default)]
    pub ffr: FfrCostParams,
    pub epc: EpcCostParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostItem {
    pub item: String,
    pub eur: Eur,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub strategy: Action,
    pub items: Vec<CostItem>,
    pub total_eur: Eur,
}

impl CostBreakdown {
    fn new(strategy: Action, items: Vec<(&str, Eur)>) -> Self {
        let items: Vec<CostItem> = items
            .into_iter()
            .map(|(name, eur)| CostItem {
                item: name.to_string(),
                eur,
            })
            .collect();
        let total_eur = items.iter().map(|i| i.eur).sum();
        Self {
            strategy,
            items,
            total_eur,
        }
    }
}

fn expect(plan: &RemedialPlan, expected: Action) -> Result<(), CostError> {
    if plan.strategy != expected {
        return Err(CostError::WrongStrategy {
            strategy: plan.strategy,
            expected,
        });
    }
    Ok(())
}

/// Opportunity cost of withheld energy, a fixed fee per event, and
/// substitute energy bought for the first hours of each event.
pub fn di_cost(plan: &RemedialPlan, params: &DiCostParams) -> Result<CostBreakdown, CostError> {
    expect(plan, Action::DiReduction)?;
    params.validate()?;
    let opportunity = EnergyMwh(plan.volume_mwh()) * params.opportunity_eur_mwh;
    let fixed = params.fixed_eur_per_event * plan.occasions.unwrap_or(plan.events.len()) as f64;
    let mut substitution = Eur(0.0);
    for e in &plan.events {
        let n = e.hours().min(params.substitute_hours_per_event);
        for h in e.start_hour..e.start_hour + n {
            substitution += EnergyMwh(e.mw) * params.regulating_price_eur_mwh.at(h)?;
        }
    }
    Ok(CostBreakdown::new(
        Action::DiReduction,
        vec![
            ("opportunity", opportunity),
            ("fixed", fixed),
            ("substitution", substitution),
        ],
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsoShare {
    pub tso: String,
    pub share: f64,
    pub eur: Eur,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FfrCost {
    pub breakdown: CostBreakdown,
    pub volume_mw_h: ReservationMwH,
    pub attribution: Vec<TsoShare>,
}

pub fn ffr_cost(plan: &RemedialPlan, params: &FfrCostParams) -> Result<FfrCost, CostError> {
    expect(plan, Action::Ffr)?;
    ffr_cost_for_volume(ReservationMwH(plan.volume_mwh()), params)
}

/// FFR cost of a bare reservation volume.
pub fn ffr_cost_for_volume(
    volume: ReservationMwH,
    params: &FfrCostParams,
) -> Result<FfrCost, CostError> {
    params.validate()?;
    let total = volume * params.price_eur_mw_h;
    let attribution = params
        .tso_shares
        .iter()
        .map(|(tso, &share)| TsoShare {
            tso: tso.clone(),
            share,
            eur: total * share,
        })
        .collect();
    Ok(FfrCost {
        breakdown: CostBreakdown::new(Action::Ffr, vec![("reservation", total)]),
        volume_mw_h: volume,
        attribution,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpcCost {
    /// Items at the bootstrap means.
    pub breakdown: CostBreakdown,
    pub volume_mw_h: ReservationMwH,
    pub replicates: usize,
    pub mean_eur: Eur,
    pub p5_eur: Eur,
    pub p95_eur: Eur,
}

fn sorted(samples: &[CapacityPrice]) -> Vec<f64> {
    let mut v: Vec<f64> = samples.iter().map(|p| p.0).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn resampled_mean(rng: &mut impl Rng, samples: &[f64]) -> f64 {
    let n = samples.len();
    (0..n).map(|_| samples[rng.random_range(0..n)]).sum::<f64>() / n as f64
}

/// Linear interpolation between order statistics.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Bootstrap of the mean reserve price plus the mean reservation price, both
/// applied to the plan's MW·h. Replicate `i` draws from its own substream.
pub fn epc_cost(
    plan: &RemedialPlan,
    params: &EpcCostParams,
    exec: Execution,
) -> Result<EpcCost, CostError> {
    expect(plan, Action::Epc)?;
    epc_cost_for_volume(ReservationMwH(plan.volume_mwh()), params, exec)
}

pub fn epc_cost_for_volume(
    volume: ReservationMwH,
    params: &EpcCostParams,
    exec: Execution,
) -> Result<EpcCost, CostError> {
    params.validate()?;
    let seed = params.seed.ok_or(CostError::MissingSeed)?;
    // Sorting makes the result independent of the order samples are listed in.
    let reserve = sorted(&params.reserve_price_samples);
    let rent = sorted(&params.reservation_price_samples);
    let n = params.bootstrap_n;
    let draws: Vec<(f64, f64)> = map_range(exec, n, |i| {
        let mut rng = substream(seed, BOOTSTRAP_STREAM, i as u64);
        let r = resampled_mean(&mut rng, &reserve);
        let c = resampled_mean(&mut rng, &rent);
        (r, c)
    });
    let mean_reserve = draws.iter().map(|d| d.0).sum::<f64>() / n as f64;
    let mean_rent = draws.iter().map(|d| d.1).sum::<f64>() / n as f64;
    let mut totals: Vec<f64> = draws.iter().map(|(r, c)| volume.0 * (r + c)).collect();
    let mean = totals.iter().sum::<f64>() / n as f64;
    totals.sort_by(f64::total_cmp);
    Ok(EpcCost {
        breakdown: CostBreakdown::new(
            Action::Epc,
            vec![
                ("reserve", volume * CapacityPrice(mean_reserve)),
                ("reservation", volume * CapacityPrice(mean_rent)),
            ],
        ),
        volume_mw_h: volume,
        replicates: n,
        mean_eur: Eur(mean),
        p5_eur: Eur(percentile(&totals, 0.05)),
        p95_eur: Eur(percentile(&totals, 0.95)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Saving {
    pub strategy: Action,
    pub versus: Action,
    /// `1 − cost/cost_versus` in percent; `None` when the reference costs nothing.
    pub pct: Option<f64>,
}

pub fn savings_pct(cost: Eur, versus: Eur) -> Option<f64> {
    (versus.0 != 0.0).then(|| 100.0 * (1.0 - cost.0 / versus.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub di: CostBreakdown,
    pub ffr: FfrCost,
    pub epc: EpcCost,
    pub savings: Vec<Saving>,
}

impl CostReport {
    pub fn total(&self, strategy: Action) -> Eur {
        match strategy {
            Action::DiReduction => self.di.total_eur,
            Action::Ffr => self.ffr.breakdown.total_eur,
            Action::Epc => self.epc.mean_eur,
        }
    }

    pub fn saving(&self, strategy: Action, versus: Action) -> Option<f64> {
        savings_pct(self.total(strategy), self.total(versus))
    }
}

pub fn compare_costs(di: CostBreakdown, ffr: FfrCost, epc: EpcCost) -> CostReport {
    let mut report = CostReport {
        di,
        ffr,
        epc,
        savings: Vec::new(),
    };
    use Action::*;
    for (a, b) in [(Epc, DiReduction), (Epc, Ffr), (Ffr, DiReduction)] {
        report.savings.push(Saving {
            strategy: a,
            versus: b,
            pct: report.saving(a, b),
        });
    }
    report
}
