use serde::{Deserialize, Serialize};

/// Synchronous area a bidding zone belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SynchronousArea {
    Nordic,
    ContinentalEurope,
    Baltic,
}

/// A bidding zone. The network inside a zone is not represented.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Zone {
    pub id: String,
    pub name: String,
    #[serde(rename = "area")]
    pub synchronous_area: SynchronousArea,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InterconnectorKind {
    #[serde(rename = "AC")]
    Ac,
    #[serde(rename = "HVDC")]
    Hvdc,
}

impl std::fmt::Display for InterconnectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InterconnectorKind::Ac => f.write_str("AC"),
            InterconnectorKind::Hvdc => f.write_str("HVDC"),
        }
    }
}

/// True interconnector losses, `L(f) = a0 + b·|f| + c·f²` in MW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticLossModel {
    /// No-load loss, MW.
    #[serde(rename = "a0_mw")]
    pub a0: f64,
    /// Linear coefficient, MW per MW.
    pub b: f64,
    /// Quadratic coefficient, 1/MW.
    #[serde(rename = "c_per_mw")]
    pub c: f64,
    /// Rated flow, MW.
    #[serde(rename = "p_max_mw")]
    pub p_max: f64,
}

impl QuadraticLossModel {
    pub fn new(a0: f64, b: f64, c: f64, p_max: f64) -> Self {
        Self { a0, b, c, p_max }
    }

    pub fn lossless(p_max: f64) -> Self {
        Self::new(0.0, 0.0, 0.0, p_max)
    }

    /// Flow-dependent part of the loss, `b·|f| + c·f²`, without range checks.
    pub fn variable_loss(&self, flow: f64) -> f64 {
        let f = flow.abs();
        self.b * f + self.c * f * f
    }

    /// Full loss at rated flow.
    pub fn loss_at_rating(&self) -> f64 {
        self.a0 + self.variable_loss(self.p_max)
    }
}

/// A directed link between two zones. Positive flow runs `from_zone → to_zone`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interconnector {
    pub id: String,
    #[serde(rename = "from")]
    pub from_zone: String,
    #[serde(rename = "to")]
    pub to_zone: String,
    pub kind: InterconnectorKind,
    #[serde(rename = "atc_fwd_mw")]
    pub atc_forward: f64,
    #[serde(rename = "atc_rev_mw")]
    pub atc_reverse: f64,
    pub loss: QuadraticLossModel,
    /// Pinned exchange (signed MW). Pinned links are not cleared by the market.
    #[serde(rename = "fixed_flow_mw", default, skip_serializing_if = "Option::is_none")]
    pub fixed_flow: Option<f64>,
}

/// Per-hour replacement of an interconnector's ATC or pinned flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HourOverride {
    pub hour: usize,
    pub interconnector: String,
    #[serde(rename = "atc_fwd_mw", default, skip_serializing_if = "Option::is_none")]
    pub atc_forward: Option<f64>,
    #[serde(rename = "atc_rev_mw", default, skip_serializing_if = "Option::is_none")]
    pub atc_reverse: Option<f64>,
    #[serde(rename = "fixed_flow_mw", default, skip_serializing_if = "Option::is_none")]
    pub fixed_flow: Option<f64>,
}

/// Effective bounds of one interconnector in one hour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineState {
    pub atc_forward: f64,
    pub atc_reverse: f64,
    pub fixed_flow: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkModel {
    pub zones: Vec<Zone>,
    pub interconnectors: Vec<Interconnector>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<HourOverride>,
}

impl NetworkModel {
    pub fn zone_index(&self, id: &str) -> Option<usize> {
        self.zones.iter().position(|z| z.id == id)
    }

    pub fn interconnector_index(&self, id: &str) -> Option<usize> {
        self.interconnectors.iter().position(|l| l.id == id)
    }

    fn base_states(&self) -> Vec<LineState> {
        self.interconnectors
            .iter()
            .map(|l| LineState {
                atc_forward: l.atc_forward,
                atc_reverse: l.atc_reverse,
                fixed_flow: l.fixed_flow,
            })
            .collect()
    }

    /// Effective interconnector bounds for one hour. Scans every override, so
    /// use [`HourlyStates`] when iterating over a whole horizon.
    pub fn states_for_hour(&self, hour: usize) -> Vec<LineState> {
        let mut states = self.base_states();
        for o in self.overrides.iter().filter(|o| o.hour == hour) {
            if let Some(idx) = self.interconnector_index(&o.interconnector) {
                apply_override(&mut states[idx], o);
            }
        }
        states
    }
}

fn apply_override(state: &mut LineState, o: &HourOverride) {
    if let Some(v) = o.atc_forward {
        state.atc_forward = v;
    }
    if let Some(v) = o.atc_reverse {
        state.atc_reverse = v;
    }
    if let Some(v) = o.fixed_flow {
        state.fixed_flow = Some(v);
    }
}

/// Precomputed per-hour interconnector bounds over a horizon.
#[derive(Debug, Clone)]
pub struct HourlyStates {
    base: Vec<LineState>,
    by_hour: Vec<Option<Vec<LineState>>>,
}

impl HourlyStates {
    pub fn build(network: &NetworkModel, horizon: usize) -> Self {
        let base = network.base_states();
        let mut by_hour: Vec<Option<Vec<LineState>>> = vec![None; horizon];
        for o in &network.overrides {
            if o.hour >= horizon {
                continue;
            }
            let Some(idx) = network.interconnector_index(&o.interconnector) else {
                continue;
            };
            let states = by_hour[o.hour].get_or_insert_with(|| base.clone());
            apply_override(&mut states[idx], o);
        }
        Self { base, by_hour }
    }

    pub fn get(&self, hour: usize) -> &[LineState] {
        match self.by_hour.get(hour) {
            Some(Some(states)) => states,
            _ => &self.base,
        }
    }
}
