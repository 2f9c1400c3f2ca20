//! Single-machine-equivalent frequency response after a generation trip.
//!
//! The system is one rotating mass with kinetic energy `E_k`. After losing
//! `ΔP`, frequency falls at `f0·ΔP/(2·E_k)` until FCR-D (a first-order lag
//! toward a linear droop between 49.9 and 49.5 Hz) and optional stepped
//! reserves (FFR, HVDC emergency power control) arrest it.

mod sim;
mod sizing;

pub use sim::{nadir_ok, simulate, write_trajectory_csv, Activation, Sample, Trajectory};
pub use sizing::{
    required_kinetic_energy, size_action, sweep, Action, SizingCurve, SweepRow, DI_BLOCK_MW,
    EK_RESOLUTION_GWS, EK_SEARCH_MAX_GWS, EK_SEARCH_MIN_GWS,
};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FreqError {
    #[error("invalid frequency model: {0}")]
    InvalidModel(String),
    #[error("invalid reserve: {0}")]
    InvalidReserve(String),
    #[error("invalid simulation settings: {0}")]
    InvalidConfig(String),
    #[error("state became non-finite at t = {t_s} s")]
    NonFinite { t_s: f64 },
    #[error("{0}")]
    Unreachable(String),
    #[error("nadir is not monotone in kinetic energy ({lower_gws} GWs: {lower_hz} Hz, {upper_gws} GWs: {upper_hz} Hz)")]
    NonMonotone {
        lower_gws: f64,
        lower_hz: f64,
        upper_gws: f64,
        upper_hz: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrequencyModel {
    pub f0_hz: f64,
    pub kinetic_energy_gws: f64,
    pub fcr_d_mw: f64,
    /// `[upper, lower]`: FCR-D starts at `upper` and is fully active at `lower`.
    pub fcr_band_hz: [f64; 2],
    pub fcr_lag_s: f64,
    pub load_damping_mw_per_hz: f64,
    pub nadir_floor_hz: f64,
    pub load_shed_hz: f64,
}

impl Default for FrequencyModel {
    fn default() -> Self {
        Self {
            f0_hz: 50.0,
            kinetic_energy_gws: 120.0,
            fcr_d_mw: 2500.0,
            fcr_band_hz: [49.9, 49.5],
            fcr_lag_s: 7.2,
            load_damping_mw_per_hz: 0.0,
            nadir_floor_hz: 49.0,
            load_shed_hz: 48.8,
        }
    }
}

impl FrequencyModel {
    pub fn with_kinetic_energy(mut self, gws: f64) -> Self {
        self.kinetic_energy_gws = gws;
        self
    }

    pub fn validate(&self) -> Result<(), FreqError> {
        let bad = |m: &str| Err(FreqError::InvalidModel(m.into()));
        let all = [
            self.f0_hz,
            self.kinetic_energy_gws,
            self.fcr_d_mw,
            self.fcr_band_hz[0],
            self.fcr_band_hz[1],
            self.fcr_lag_s,
            self.load_damping_mw_per_hz,
            self.nadir_floor_hz,
            self.load_shed_hz,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("all parameters must be finite");
        }
        if self.kinetic_energy_gws <= 0.0 {
            return bad("kinetic energy must be positive");
        }
        if self.fcr_band_hz[0] <= self.fcr_band_hz[1] {
            return bad("FCR-D band upper edge must exceed the lower edge");
        }
        if !(self.load_shed_hz < self.nadir_floor_hz && self.nadir_floor_hz < self.f0_hz) {
            return bad("nadir floor must lie between the load-shedding level and f0");
        }
        if self.fcr_d_mw < 0.0 || self.load_damping_mw_per_hz < 0.0 {
            return bad("FCR-D and load damping must be non-negative");
        }
        if self.fcr_lag_s <= 0.0 {
            return bad("FCR-D time constant must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Disturbance {
    pub lost_generation_mw: f64,
    pub onset_s: f64,
}

impl Default for Disturbance {
    fn default() -> Self {
        Self {
            lost_generation_mw: 1450.0,
            onset_s: 0.0,
        }
    }
}

impl Disturbance {
    pub fn new(lost_generation_mw: f64) -> Self {
        Self {
            lost_generation_mw,
            onset_s: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trigger {
    pub threshold_hz: f64,
    pub block_mw: f64,
}

/// Power blocks injected when frequency crosses their thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteppedReserve {
    /// Strictly decreasing thresholds.
    pub triggers: Vec<Trigger>,
    pub activation_delay_s: f64,
    pub full_activation_s: f64,
    /// Held for the rest of the horizon; otherwise released once frequency
    /// is back above the threshold after full activation.
    pub sustain: bool,
}

impl SteppedReserve {
    pub fn total_mw(&self) -> f64 {
        self.triggers.iter().map(|t| t.block_mw).sum()
    }

    pub fn validate(&self, model: &FrequencyModel) -> Result<(), FreqError> {
        let bad = |m: String| Err(FreqError::InvalidReserve(m));
        if self.triggers.is_empty() {
            return bad("at least one trigger is required".into());
        }
        if !(self.activation_delay_s >= 0.0 && self.activation_delay_s.is_finite()) {
            return bad("activation delay must be non-negative".into());
        }
        if !(self.full_activation_s >= 0.0 && self.full_activation_s.is_finite()) {
            return bad("full activation time must be non-negative".into());
        }
        for (i, t) in self.triggers.iter().enumerate() {
            if !(t.block_mw > 0.0 && t.block_mw.is_finite()) {
                return bad(format!("trigger {i}: block must be positive"));
            }
            if !(t.threshold_hz > model.load_shed_hz && t.threshold_hz < model.f0_hz) {
                return bad(format!("trigger {i}: threshold {} Hz out of range", t.threshold_hz));
            }
            if i > 0 && t.threshold_hz >= self.triggers[i - 1].threshold_hz {
                return bad("thresholds must be strictly decreasing".into());
            }
        }
        Ok(())
    }
}

/// Trigger placement and timing of a reserve whose block size is sized later.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReserveTemplate {
    pub threshold_hz: f64,
    pub activation_delay_s: f64,
    pub full_activation_s: f64,
    pub sustain: bool,
}

impl ReserveTemplate {
    pub fn ffr() -> Self {
        Self {
            threshold_hz: 49.6,
            activation_delay_s: 1.0,
            full_activation_s: 0.3,
            sustain: true,
        }
    }

    pub fn epc() -> Self {
        Self {
            threshold_hz: 49.6,
            activation_delay_s: 0.25,
            full_activation_s: 0.25,
            sustain: true,
        }
    }

    /// Idealized reserve acting the instant the threshold is crossed.
    pub fn instant(threshold_hz: f64) -> Self {
        Self {
            threshold_hz,
            activation_delay_s: 0.0,
            full_activation_s: 0.0,
            sustain: true,
        }
    }

    pub fn with_block(&self, block_mw: f64) -> SteppedReserve {
        SteppedReserve {
            triggers: vec![Trigger {
                threshold_hz: self.threshold_hz,
                block_mw,
            }],
            activation_delay_s: self.activation_delay_s,
            full_activation_s: self.full_activation_s,
            sustain: self.sustain,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub horizon_s: f64,
    pub dt_s: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            horizon_s: 60.0,
            dt_s: 0.01,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), FreqError> {
        if !(self.dt_s > 0.0 && self.dt_s <= 0.05) {
            return Err(FreqError::InvalidConfig(format!(
                "dt must be in (0, 0.05] s, got {}",
                self.dt_s
            )));
        }
        if !(self.horizon_s >= 30.0 && self.horizon_s.is_finite()) {
            return Err(FreqError::InvalidConfig(format!(
                "horizon must be at least 30 s, got {}",
                self.horizon_s
            )));
        }
        Ok(())
    }
}

/// Everything needed to simulate or size remedial actions; the `model.json`
/// document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FreqStudy {
    pub model: FrequencyModel,
    pub disturbance: Disturbance,
    pub ffr: ReserveTemplate,
    pub epc: ReserveTemplate,
    pub sim: SimConfig,
}

impl Default for FreqStudy {
    fn default() -> Self {
        Self {
            model: FrequencyModel::default(),
            disturbance: Disturbance::default(),
            ffr: ReserveTemplate::ffr(),
            epc: ReserveTemplate::epc(),
            sim: SimConfig::default(),
        }
    }
}

impl FreqStudy {
    pub fn validate(&self) -> Result<(), FreqError> {
        self.model.validate()?;
        self.sim.validate()?;
        if !(self.disturbance.lost_generation_mw >= 0.0
            && self.disturbance.lost_generation_mw.is_finite())
        {
            return Err(FreqError::InvalidConfig(
                "lost generation must be non-negative".into(),
            ));
        }
        if !(self.disturbance.onset_s >= 0.0 && self.disturbance.onset_s < self.sim.horizon_s) {
            return Err(FreqError::InvalidConfig("onset must lie inside the horizon".into()));
        }
        self.ffr.with_block(1.0).validate(&self.model)?;
        self.epc.with_block(1.0).validate(&self.model)?;
        Ok(())
    }
}
