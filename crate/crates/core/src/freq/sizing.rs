use serde::{Deserialize, Serialize};

use super::sim::nadir;
use super::{Disturbance, FreqError, FreqStudy, FrequencyModel, SimConfig, SteppedReserve};
use crate::exec::{map_slice, Execution};

pub const EK_SEARCH_MIN_GWS: f64 = 1.0;
pub const EK_SEARCH_MAX_GWS: f64 = 1000.0;
pub const EK_RESOLUTION_GWS: f64 = 0.1;
pub const DI_BLOCK_MW: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    #[serde(rename = "di")]
    DiReduction,
    Ffr,
    Epc,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::DiReduction, Action::Ffr, Action::Epc];

    pub fn name(self) -> &'static str {
        match self {
            Action::DiReduction => "di",
            Action::Ffr => "ffr",
            Action::Epc => "epc",
        }
    }
}

impl std::str::FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "di" => Ok(Action::DiReduction),
            "ffr" => Ok(Action::Ffr),
            "epc" => Ok(Action::Epc),
            other => Err(format!("unknown action `{other}` (expected di, ffr or epc)")),
        }
    }
}

fn secure(
    model: &FrequencyModel,
    dist: &Disturbance,
    ffr: Option<&SteppedReserve>,
    epc: Option<&SteppedReserve>,
    sim: &SimConfig,
) -> Result<bool, FreqError> {
    let floor = model.nadir_floor_hz;
    Ok(nadir(model, dist, ffr, epc, sim, Some(floor))? >= floor)
}

/// Smallest kinetic energy (GWs, to 0.1 GWs) that keeps the nadir at or above
/// the floor. Monotonicity in `E_k` is checked on a sampled grid first.
pub fn required_kinetic_energy(
    model: &FrequencyModel,
    disturbance: &Disturbance,
    ffr: Option<&SteppedReserve>,
    epc: Option<&SteppedReserve>,
    sim: &SimConfig,
) -> Result<f64, FreqError> {
    model.validate()?;
    sim.validate()?;
    let at = |e: f64| model.with_kinetic_energy(e);

    let grid = [1.0, 10.0, 50.0, 100.0, 200.0, 400.0, 1000.0];
    let mut prev: Option<(f64, f64)> = None;
    for &e in &grid {
        let n = nadir(&at(e), disturbance, ffr, epc, sim, None)?;
        if let Some((pe, pn)) = prev {
            if n < pn - 1e-9 {
                return Err(FreqError::NonMonotone {
                    lower_gws: pe,
                    lower_hz: pn,
                    upper_gws: e,
                    upper_hz: n,
                });
            }
        }
        prev = Some((e, n));
    }

    let ok = |e: f64| secure(&at(e), disturbance, ffr, epc, sim);
    if !ok(EK_SEARCH_MAX_GWS)? {
        return Err(FreqError::Unreachable(format!(
            "nadir floor {} Hz not met even at {EK_SEARCH_MAX_GWS} GWs",
            model.nadir_floor_hz
        )));
    }
    if ok(EK_SEARCH_MIN_GWS)? {
        return Ok(EK_SEARCH_MIN_GWS);
    }
    let (mut lo, mut hi) = (EK_SEARCH_MIN_GWS, EK_SEARCH_MAX_GWS);
    while hi - lo > EK_RESOLUTION_GWS {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Smallest integer `n` in `(0, n_max]` with `ok(n)`, given `ok(n_max)`.
fn bisect_count(
    n_max: u64,
    mut ok: impl FnMut(u64) -> Result<bool, FreqError>,
) -> Result<u64, FreqError> {
    let (mut lo, mut hi) = (0u64, n_max);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// MW of `action` needed at `kinetic_energy_gws` for the study's disturbance:
/// DI reduction in 50 MW blocks, FFR/EPC blocks at 1 MW resolution placed at
/// the study's default trigger.
pub fn size_action(
    study: &FreqStudy,
    kinetic_energy_gws: f64,
    action: Action,
) -> Result<f64, FreqError> {
    let model = study.model.with_kinetic_energy(kinetic_energy_gws);
    model.validate()?;
    study.sim.validate()?;
    let dist = study.disturbance;
    let sim = &study.sim;
    if secure(&model, &dist, None, None, sim)? {
        return Ok(0.0);
    }
    let di = dist.lost_generation_mw;
    match action {
        Action::DiReduction => {
            let n_max = (di / DI_BLOCK_MW).ceil() as u64;
            let n = bisect_count(n_max, |n| {
                let reduced = Disturbance {
                    lost_generation_mw: (di - n as f64 * DI_BLOCK_MW).max(0.0),
                    ..dist
                };
                secure(&model, &reduced, None, None, sim)
            })?;
            Ok(n as f64 * DI_BLOCK_MW)
        }
        Action::Ffr | Action::Epc => {
            let template = if action == Action::Ffr { study.ffr } else { study.epc };
            let test = |mw: u64| {
                let r = template.with_block(mw as f64);
                if action == Action::Ffr {
                    secure(&model, &dist, Some(&r), None, sim)
                } else {
                    secure(&model, &dist, None, Some(&r), sim)
                }
            };
            let max = di.ceil().max(1.0) as u64;
            if !test(max)? {
                return Err(FreqError::Unreachable(format!(
                    "{} of {max} MW cannot hold the floor at {kinetic_energy_gws} GWs",
                    action.name()
                )));
            }
            Ok(bisect_count(max, test)? as f64)
        }
    }
}

/// Sizing precomputed on a kinetic-energy grid for long hourly series.
///
/// A lookup returns the requirement at the nearest grid point at or below the
/// queried value. Because the requirement never grows with `E_k`, this never
/// undersizes.
#[derive(Debug, Clone)]
pub struct SizingCurve {
    study: FreqStudy,
    action: Action,
    threshold_gws: f64,
    start_gws: f64,
    step_gws: f64,
    points: Vec<Option<f64>>,
}

impl SizingCurve {
    /// Grid covers `[lowest, threshold)` with spacing `step_gws`.
    pub fn build(
        study: &FreqStudy,
        action: Action,
        threshold_gws: f64,
        lowest_gws: f64,
        step_gws: f64,
        exec: Execution,
    ) -> Result<Self, FreqError> {
        if !(step_gws > 0.0) {
            return Err(FreqError::InvalidConfig("grid step must be positive".into()));
        }
        let start = (lowest_gws / step_gws).floor() * step_gws;
        let start = start.max(step_gws);
        let n = if threshold_gws > start {
            ((threshold_gws - start) / step_gws).ceil() as usize
        } else {
            0
        };
        let grid: Vec<f64> = (0..n).map(|i| start + i as f64 * step_gws).collect();
        let sized = map_slice(exec, &grid, |&e| match size_action(study, e, action) {
            Ok(mw) => Ok(Some(mw)),
            Err(FreqError::Unreachable(_)) => Ok(None),
            Err(e) => Err(e),
        });
        let points = sized.into_iter().collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            study: *study,
            action,
            threshold_gws,
            start_gws: start,
            step_gws,
            points,
        })
    }

    pub fn action(&self) -> Action {
        self.action
    }

    pub fn threshold_gws(&self) -> f64 {
        self.threshold_gws
    }

    /// `None` when the action cannot secure this hour.
    pub fn lookup(&self, kinetic_energy_gws: f64) -> Result<Option<f64>, FreqError> {
        if kinetic_energy_gws >= self.threshold_gws {
            return Ok(Some(0.0));
        }
        let idx = ((kinetic_energy_gws - self.start_gws) / self.step_gws).floor();
        let cached = if idx >= 0.0 {
            self.points.get(idx as usize).copied().flatten()
        } else {
            None
        };
        match cached {
            Some(mw) => Ok(Some(mw)),
            // Below the grid, or the grid point itself was unreachable.
            None => match size_action(&self.study, kinetic_energy_gws, self.action) {
                Ok(mw) => Ok(Some(mw)),
                Err(FreqError::Unreachable(_)) => Ok(None),
                Err(e) => Err(e),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub ek_gws: f64,
    pub di_reduction_mw: Option<f64>,
    pub ffr_mw: Option<f64>,
    pub epc_mw: Option<f64>,
}

/// Requirement of every action over a kinetic-energy grid.
pub fn sweep(study: &FreqStudy, grid: &[f64], exec: Execution) -> Result<Vec<SweepRow>, FreqError> {
    let rows = map_slice(exec, grid, |&e| {
        let size = |a| match size_action(study, e, a) {
            Ok(mw) => Ok(Some(mw)),
            Err(FreqError::Unreachable(_)) => Ok(None),
            Err(err) => Err(err),
        };
        Ok(SweepRow {
            ek_gws: e,
            di_reduction_mw: size(Action::DiReduction)?,
            ffr_mw: size(Action::Ffr)?,
            epc_mw: size(Action::Epc)?,
        })
    });
    rows.into_iter().collect()
}
