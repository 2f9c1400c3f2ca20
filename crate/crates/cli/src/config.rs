//! `study.toml`: input paths, market and planner settings, seed, output
//! directory and worker count. Relative paths resolve against the file's
//! directory; paths given on the command line resolve against the working
//! directory.

use std::path::{Path, PathBuf};

use hvdc_cba_core::market::LossMode;
use hvdc_cba_core::planning::{PlannerParams, DEFAULT_GRID_STEP_GWS};
use hvdc_cba_core::synth::SyntheticSpec;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    /// Seeds every stochastic step (synthetic data, bootstrap).
    pub seed: Option<u64>,
    /// 0 uses every available core.
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub inputs: Inputs,
    #[serde(default)]
    pub market: MarketSection,
    #[serde(default)]
    pub planner: PlannerSection,
    #[serde(default)]
    pub cost: CostSection,
    pub synth: Option<SyntheticSpec>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub network: Option<PathBuf>,
    pub bids: Option<PathBuf>,
    /// Hourly kinetic energy, GWs.
    pub ek: Option<PathBuf>,
    pub prices: Option<PathBuf>,
    /// Frequency study (`model.json`); built-in defaults when absent.
    pub model: Option<PathBuf>,
    /// Explicit DI-reduction events replacing the planned DI strategy.
    pub di_events: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarketSection {
    pub mode: String,
    pub segments: usize,
}

impl Default for MarketSection {
    fn default() -> Self {
        Self {
            mode: "pwl-all".into(),
            segments: hvdc_cba_core::loss::DEFAULT_SEGMENTS,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerSection {
    pub pad_h: usize,
    pub merge_gap_h: usize,
    pub grid_step_gws: f64,
}

impl Default for PlannerSection {
    fn default() -> Self {
        let p = PlannerParams::default();
        Self {
            pad_h: p.pad_h,
            merge_gap_h: p.merge_gap_h,
            grid_step_gws: DEFAULT_GRID_STEP_GWS,
        }
    }
}

impl PlannerSection {
    pub fn params(&self) -> PlannerParams {
        PlannerParams {
            pad_h: self.pad_h,
            merge_gap_h: self.merge_gap_h,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSection {
    /// Prices this FFR reservation volume instead of the planned one.
    pub ffr_volume_mw_h: Option<f64>,
    /// Prices this EPC reservation volume instead of the planned one.
    pub epc_volume_mw_h: Option<f64>,
    pub bootstrap_n: Option<usize>,
}

impl StudyConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut config: StudyConfig = toml::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.rebase(base);
        Ok(config)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(p) = p.as_mut() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        };
        let i = &mut self.inputs;
        for p in [
            &mut i.network,
            &mut i.bids,
            &mut i.ek,
            &mut i.prices,
            &mut i.model,
            &mut i.di_events,
            &mut self.out_dir,
        ] {
            fix(p);
        }
    }

    pub fn loss_mode(&self) -> Result<LossMode, CliError> {
        let m = &self.market;
        if m.segments == 0 {
            return Err(CliError::config("market.segments must be at least 1"));
        }
        LossMode::parse(&m.mode, m.segments).ok_or_else(|| {
            CliError::config(format!(
                "unknown loss mode '{}' (expected none, linear-hvdc, pwl-hvdc or pwl-all)",
                m.mode
            ))
        })
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.loss_mode()?;
        if !(self.planner.grid_step_gws > 0.0 && self.planner.grid_step_gws.is_finite()) {
            return Err(CliError::config("planner.grid_step_gws must be positive"));
        }
        for (key, v) in [
            ("ffr_volume_mw_h", self.cost.ffr_volume_mw_h),
            ("epc_volume_mw_h", self.cost.epc_volume_mw_h),
        ] {
            if v.is_some_and(|v| !(v >= 0.0 && v.is_finite())) {
                return Err(CliError::config(format!("cost.{key} must be non-negative")));
            }
        }
        Ok(())
    }
}

/// Resolves a required input path, failing with the config key to set.
pub fn require<'a>(path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, CliError> {
    let p = path.as_deref().ok_or_else(|| {
        let flag = match key {
            "ek" => " or pass --ek-series".to_string(),
            "di_events" => String::new(),
            k => format!(" or pass --{k}"),
        };
        CliError::config(format!("missing input '{key}': set inputs.{key} in the config{flag}"))
    })?;
    if !p.is_file() {
        return Err(CliError::config(format!("input '{key}' not found: {}", p.display())));
    }
    Ok(p)
}
