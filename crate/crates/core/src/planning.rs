//! Turns an hourly kinetic-energy series into remedial plans.

use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::freq::{required_kinetic_energy, Action, FreqError, FreqStudy, SizingCurve};
use crate::model::HourlySeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerParams {
    /// Hours added before and after every deficit run.
    pub pad_h: usize,
    /// Events separated by at most this many hours are merged.
    pub merge_gap_h: usize,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            pad_h: 2,
            merge_gap_h: 6,
        }
    }
}

/// Inclusive hour range with a constant MW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanEvent {
    pub start_hour: usize,
    pub end_hour: usize,
    pub mw: f64,
}

impl PlanEvent {
    pub fn hours(&self) -> usize {
        self.end_hour - self.start_hour + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemedialPlan {
    pub strategy: Action,
    pub scenario: String,
    pub hourly_mw: Vec<f64>,
    pub events: Vec<PlanEvent>,
    /// Not meaningful for stepped reserves, which are bought hour by hour.
    pub occasions: Option<usize>,
    pub hours: usize,
    pub energy_gwh: f64,
    /// Deficit hours the action cannot secure; they carry 0 MW.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub infeasible_hours: Vec<usize>,
}

impl RemedialPlan {
    fn assemble(
        strategy: Action,
        scenario: &str,
        hourly_mw: Vec<f64>,
        events: Vec<PlanEvent>,
        occasions: Option<usize>,
        infeasible_hours: Vec<usize>,
    ) -> Self {
        let hours = hourly_mw.iter().filter(|&&mw| mw > 0.0).count();
        let energy_gwh = hourly_mw.iter().sum::<f64>() / 1000.0;
        Self {
            strategy,
            scenario: scenario.to_string(),
            hourly_mw,
            events,
            occasions,
            hours,
            energy_gwh,
            infeasible_hours,
        }
    }

    /// MW·h summed over the plan.
    pub fn volume_mwh(&self) -> f64 {
        self.hourly_mw.iter().sum()
    }

    /// Constant-MW plan made of explicit events, e.g. a historical limitation.
    pub fn from_events(
        strategy: Action,
        scenario: &str,
        horizon: usize,
        events: Vec<PlanEvent>,
    ) -> Self {
        let mut hourly = vec![0.0; horizon];
        for e in &events {
            let end = e.end_hour.min(horizon.saturating_sub(1));
            if let Some(span) = hourly.get_mut(e.start_hour..=end) {
                span.fill(e.mw);
            }
        }
        let occasions = (strategy == Action::DiReduction).then_some(events.len());
        Self::assemble(strategy, scenario, hourly, events, occasions, Vec::new())
    }
}

/// Hours strictly below `threshold_gws`.
pub fn deficit_hours(series: &[f64], threshold_gws: f64) -> Vec<usize> {
    series
        .iter()
        .enumerate()
        .filter(|(_, &v)| v < threshold_gws)
        .map(|(h, _)| h)
        .collect()
}

/// Maximal runs of consecutive hours, as inclusive ranges.
fn runs(hours: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &h in hours {
        match out.last_mut() {
            Some((_, end)) if *end + 1 == h => *end = h,
            _ => out.push((h, h)),
        }
    }
    out
}

/// Sizes every deficit hour; unreachable hours are collected separately.
fn size_deficits<E>(
    series: &[f64],
    deficits: &[usize],
    sizing: &mut impl FnMut(f64) -> Result<Option<f64>, E>,
) -> Result<(Vec<f64>, Vec<usize>), E> {
    let mut req = vec![0.0; series.len()];
    let mut infeasible = Vec::new();
    for &h in deficits {
        match sizing(series[h])? {
            Some(mw) => req[h] = mw,
            None => infeasible.push(h),
        }
    }
    Ok((req, infeasible))
}

/// DI reduction events: deficit runs padded by `pad_h`, merged across gaps of
/// at most `merge_gap_h`, each held at its peak requirement rounded up to
/// 50 MW blocks. `sizing` maps an hour's kinetic energy to MW, or `None` when
/// no reduction secures it.
pub fn plan_di_reduction<E>(
    series: &HourlySeries,
    threshold_gws: f64,
    mut sizing: impl FnMut(f64) -> Result<Option<f64>, E>,
    params: &PlannerParams,
) -> Result<RemedialPlan, E> {
    let values = &series.values;
    let horizon = values.len();
    let deficits = deficit_hours(values, threshold_gws);
    let (req, infeasible) = size_deficits(values, &deficits, &mut sizing)?;

    let mut merged: Vec<(usize, usize)> = Vec::new();
    for (s, e) in runs(&deficits) {
        let s = s.saturating_sub(params.pad_h);
        let e = (e + params.pad_h).min(horizon - 1);
        match merged.last_mut() {
            Some((_, end)) if s <= *end + params.merge_gap_h + 1 => *end = (*end).max(e),
            _ => merged.push((s, e)),
        }
    }

    let block = crate::freq::DI_BLOCK_MW;
    let mut hourly = vec![0.0; horizon];
    let events: Vec<PlanEvent> = merged
        .into_iter()
        .map(|(s, e)| {
            let peak = req[s..=e].iter().copied().fold(0.0, f64::max);
            let mw = (peak / block).ceil() * block;
            hourly[s..=e].iter_mut().for_each(|h| *h = mw);
            PlanEvent {
                start_hour: s,
                end_hour: e,
                mw,
            }
        })
        .collect();
    let occasions = Some(events.len());
    Ok(RemedialPlan::assemble(
        Action::DiReduction,
        &series.label,
        hourly,
        events,
        occasions,
        infeasible,
    ))
}

/// Hour-by-hour FFR or EPC reservation on deficit hours only.
pub fn plan_stepped<E>(
    series: &HourlySeries,
    threshold_gws: f64,
    mut sizing: impl FnMut(f64) -> Result<Option<f64>, E>,
    strategy: Action,
) -> Result<RemedialPlan, E> {
    debug_assert!(strategy != Action::DiReduction);
    let values = &series.values;
    let deficits = deficit_hours(values, threshold_gws);
    let (hourly, infeasible) = size_deficits(values, &deficits, &mut sizing)?;
    let active: Vec<usize> = deficits
        .iter()
        .copied()
        .filter(|&h| hourly[h] > 0.0)
        .collect();
    let events = runs(&active)
        .into_iter()
        .map(|(s, e)| PlanEvent {
            start_hour: s,
            end_hour: e,
            mw: hourly[s..=e].iter().copied().fold(0.0, f64::max),
        })
        .collect();
    Ok(RemedialPlan::assemble(
        strategy,
        &series.label,
        hourly,
        events,
        None,
        infeasible,
    ))
}

/// Spacing of the kinetic-energy grid on which requirements are precomputed.
pub const DEFAULT_GRID_STEP_GWS: f64 = 0.5;

/// The three strategies planned over one kinetic-energy series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSet {
    pub threshold_gws: f64,
    pub di: RemedialPlan,
    pub ffr: RemedialPlan,
    pub epc: RemedialPlan,
}

impl PlanSet {
    pub fn plans(&self) -> [&RemedialPlan; 3] {
        [&self.di, &self.ffr, &self.epc]
    }
}

/// Security threshold of `study`, then DI, FFR and EPC plans for `series`
/// with requirements looked up on a `grid_step_gws` sizing grid.
pub fn plan_all(
    study: &FreqStudy,
    series: &HourlySeries,
    params: &PlannerParams,
    grid_step_gws: f64,
    exec: Execution,
) -> Result<PlanSet, FreqError> {
    study.validate()?;
    let threshold_gws = required_kinetic_energy(
        &study.model,
        &study.disturbance,
        None,
        None,
        &study.sim,
    )?;
    let lowest = series
        .values
        .iter()
        .copied()
        .filter(|&v| v < threshold_gws)
        .fold(threshold_gws, f64::min);
    let curve = |a| SizingCurve::build(study, a, threshold_gws, lowest, grid_step_gws, exec);
    let (di, ffr, epc) = (
        curve(Action::DiReduction)?,
        curve(Action::Ffr)?,
        curve(Action::Epc)?,
    );
    Ok(PlanSet {
        threshold_gws,
        di: plan_di_reduction(series, threshold_gws, |e| di.lookup(e), params)?,
        ffr: plan_stepped(series, threshold_gws, |e| ffr.lookup(e), Action::Ffr)?,
        epc: plan_stepped(series, threshold_gws, |e| epc.lookup(e), Action::Epc)?,
    })
}

/// One row of a Table-1 style summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub scenario: String,
    pub strategy: Action,
    pub occasions: Option<usize>,
    pub hours: usize,
    pub energy_gwh: f64,
}

impl From<&RemedialPlan> for PlanSummary {
    fn from(p: &RemedialPlan) -> Self {
        Self {
            scenario: p.scenario.clone(),
            strategy: p.strategy,
            occasions: p.occasions,
            hours: p.hours,
            energy_gwh: p.energy_gwh,
        }
    }
}
