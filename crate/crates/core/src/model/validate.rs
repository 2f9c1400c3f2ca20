use std::collections::HashSet;

use serde::Serialize;

use super::network::{Interconnector, NetworkModel, QuadraticLossModel};

/// The invariant a [`Violation`] breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    DuplicateZone,
    DuplicateInterconnector,
    UnknownZone,
    SelfLoop,
    NegativeAtc,
    FixedFlowExceedsAtc,
    AtcExceedsRating,
    NegativeLossCoefficient,
    NonPositiveRating,
    LossAtRatingTooLarge,
    UnknownInterconnector,
    NonFinite,
    NonPositiveQuantity,
    BidOrder,
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Rule::DuplicateZone => "zone ids must be unique",
            Rule::DuplicateInterconnector => "interconnector ids must be unique",
            Rule::UnknownZone => "endpoint must name a declared zone",
            Rule::SelfLoop => "from and to zones must differ",
            Rule::NegativeAtc => "ATC must be non-negative",
            Rule::FixedFlowExceedsAtc => "fixed flow must lie within the ATC of its direction",
            Rule::AtcExceedsRating => "ATC must not exceed the loss model rating",
            Rule::NegativeLossCoefficient => "loss coefficients must be non-negative",
            Rule::NonPositiveRating => "rated flow must be positive",
            Rule::LossAtRatingTooLarge => "loss at rated flow must be below rated flow",
            Rule::UnknownInterconnector => "override must name a declared interconnector",
            Rule::NonFinite => "numeric field must be finite",
            Rule::NonPositiveQuantity => "bid quantity must be positive",
            Rule::BidOrder => "bid steps must be in merit order",
        };
        f.write_str(s)
    }
}

/// One broken invariant, naming the offending entity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub entity: String,
    pub rule: Rule,
    pub detail: String,
}

impl Violation {
    pub fn new(entity: impl Into<String>, rule: Rule, detail: impl Into<String>) -> Self {
        Self {
            entity: entity.into(),
            rule,
            detail: detail.into(),
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {} ({})", self.entity, self.rule, self.detail)
    }
}

pub fn validate_loss_model(entity: &str, m: &QuadraticLossModel) -> Vec<Violation> {
    let mut out = Vec::new();
    if ![m.a0, m.b, m.c, m.p_max].iter().all(|v| v.is_finite()) {
        out.push(Violation::new(entity, Rule::NonFinite, "loss model"));
        return out;
    }
    if m.a0 < 0.0 || m.b < 0.0 || m.c < 0.0 {
        out.push(Violation::new(
            entity,
            Rule::NegativeLossCoefficient,
            format!("a0={} b={} c={}", m.a0, m.b, m.c),
        ));
    }
    if m.p_max <= 0.0 {
        out.push(Violation::new(entity, Rule::NonPositiveRating, format!("p_max={}", m.p_max)));
    } else if m.loss_at_rating() >= m.p_max {
        out.push(Violation::new(
            entity,
            Rule::LossAtRatingTooLarge,
            format!("L(p_max)={} MW >= p_max={} MW", m.loss_at_rating(), m.p_max),
        ));
    }
    out
}

fn check_flow_bounds(
    entity: &str,
    atc_forward: f64,
    atc_reverse: f64,
    fixed_flow: Option<f64>,
    line: &Interconnector,
    out: &mut Vec<Violation>,
) {
    if !atc_forward.is_finite() || !atc_reverse.is_finite() || fixed_flow.is_some_and(|f| !f.is_finite()) {
        out.push(Violation::new(entity, Rule::NonFinite, "ATC or fixed flow"));
        return;
    }
    if atc_forward < 0.0 || atc_reverse < 0.0 {
        out.push(Violation::new(
            entity,
            Rule::NegativeAtc,
            format!("fwd={atc_forward} rev={atc_reverse}"),
        ));
    }
    if line.loss.p_max > 0.0 && (atc_forward > line.loss.p_max || atc_reverse > line.loss.p_max) {
        out.push(Violation::new(
            entity,
            Rule::AtcExceedsRating,
            format!("fwd={atc_forward} rev={atc_reverse} p_max={}", line.loss.p_max),
        ));
    }
    if let Some(f) = fixed_flow {
        let bound = if f >= 0.0 { atc_forward } else { atc_reverse };
        if f.abs() > bound {
            out.push(Violation::new(
                entity,
                Rule::FixedFlowExceedsAtc,
                format!("fixed={f} MW, ATC in that direction={bound} MW"),
            ));
        }
    }
}

/// Checks every network invariant. Returns an empty list for a well-formed model.
pub fn validate(network: &NetworkModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut zone_ids = HashSet::new();
    for z in &network.zones {
        if !zone_ids.insert(z.id.as_str()) {
            out.push(Violation::new(format!("zone '{}'", z.id), Rule::DuplicateZone, "repeated id"));
        }
    }
    let mut line_ids = HashSet::new();
    for line in &network.interconnectors {
        let entity = format!("interconnector '{}'", line.id);
        if !line_ids.insert(line.id.as_str()) {
            out.push(Violation::new(&entity, Rule::DuplicateInterconnector, "repeated id"));
        }
        for end in [&line.from_zone, &line.to_zone] {
            if !zone_ids.contains(end.as_str()) {
                out.push(Violation::new(&entity, Rule::UnknownZone, format!("'{end}'")));
            }
        }
        if line.from_zone == line.to_zone {
            out.push(Violation::new(&entity, Rule::SelfLoop, format!("'{}'", line.from_zone)));
        }
        out.extend(validate_loss_model(&entity, &line.loss));
        check_flow_bounds(&entity, line.atc_forward, line.atc_reverse, line.fixed_flow, line, &mut out);
    }
    for o in &network.overrides {
        let entity = format!("override hour {} '{}'", o.hour, o.interconnector);
        let Some(line) = network.interconnectors.iter().find(|l| l.id == o.interconnector) else {
            out.push(Violation::new(&entity, Rule::UnknownInterconnector, "no such interconnector"));
            continue;
        };
        // Effective values combine every override for this hour and line.
        let mut fwd = line.atc_forward;
        let mut rev = line.atc_reverse;
        let mut fixed = line.fixed_flow;
        for p in network
            .overrides
            .iter()
            .filter(|p| p.hour == o.hour && p.interconnector == o.interconnector)
        {
            fwd = p.atc_forward.unwrap_or(fwd);
            rev = p.atc_reverse.unwrap_or(rev);
            fixed = p.fixed_flow.or(fixed);
        }
        check_flow_bounds(&entity, fwd, rev, fixed, line, &mut out);
    }
    out
}
