//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls the LP. Zone welfare comes from merit-order integrals and
//! network welfare from enumerating every vertex of the flow arrangement.

#![allow(dead_code)]

use hvdc_cba_core::loss::{build_pwl, linearize_secant};
use hvdc_cba_core::market::LossMode;
use hvdc_cba_core::model::{
    BidStep, Interconnector, InterconnectorKind, NetworkModel, QuadraticLossModel,
    SynchronousArea, Zone, ZoneBids,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-9;

/// Merit-order view of one zone's curves.
#[derive(Debug, Clone)]
pub struct ZoneCurves {
    /// `(quantity, price)`, rising price.
    pub supply: Vec<(f64, f64)>,
    /// `(quantity, price)`, falling price.
    pub demand: Vec<(f64, f64)>,
}

impl ZoneCurves {
    pub fn from_bids(b: &ZoneBids) -> Self {
        let steps = |c: &Option<hvdc_cba_core::model::BidCurve>| -> Vec<(f64, f64)> {
            c.as_ref()
                .map(|c| c.steps.iter().map(|s| (s.quantity_mw, s.price_eur_mwh)).collect())
                .unwrap_or_default()
        };
        let mut supply = steps(&b.supply);
        let mut demand = steps(&b.demand);
        supply.sort_by(|a, b| a.1.total_cmp(&b.1));
        demand.sort_by(|a, b| b.1.total_cmp(&a.1));
        Self { supply, demand }
    }

    pub fn supply_total(&self) -> f64 {
        self.supply.iter().map(|s| s.0).sum()
    }

    pub fn demand_total(&self) -> f64 {
        self.demand.iter().map(|s| s.0).sum()
    }

    /// Area under a step curve from 0 to `x`.
    fn integral(steps: &[(f64, f64)], x: f64) -> f64 {
        let mut left = x;
        let mut total = 0.0;
        for &(q, p) in steps {
            if left <= 0.0 {
                break;
            }
            let take = left.min(q);
            total += take * p;
            left -= take;
        }
        total
    }

    fn cumulative(steps: &[(f64, f64)]) -> Vec<f64> {
        let mut out = vec![0.0];
        let mut acc = 0.0;
        for &(q, _) in steps {
            acc += q;
            out.push(acc);
        }
        out
    }

    /// Best welfare with net import `m` (delivered in minus sent out), or
    /// `None` when the zone cannot absorb or provide `m`.
    pub fn value(&self, m: f64) -> Option<f64> {
        let (st, dt) = (self.supply_total(), self.demand_total());
        let tol = 1e-7;
        if m < -st - tol || m > dt + tol {
            return None;
        }
        let lo = (-m).max(0.0);
        let hi = st.min(dt - m).max(lo);
        let mut cands = vec![lo, hi];
        cands.extend(Self::cumulative(&self.supply));
        cands.extend(Self::cumulative(&self.demand).into_iter().map(|d| d - m));
        cands
            .into_iter()
            .map(|s| s.clamp(lo, hi))
            .map(|s| Self::integral(&self.demand, (s + m).max(0.0)) - Self::integral(&self.supply, s))
            .max_by(f64::total_cmp)
    }

    /// Every net import at which the zone value can change slope.
    pub fn kinks(&self) -> Vec<f64> {
        let d = Self::cumulative(&self.demand);
        let s = Self::cumulative(&self.supply);
        let mut out = Vec::new();
        for &a in &d {
            for &b in &s {
                out.push(a - b);
            }
        }
        out
    }
}

/// Modeled transfer of one line in one direction under a loss mode.
#[derive(Debug, Clone)]
pub struct Transfer {
    /// `(upper bound of sent MW, slope)` pieces, contiguous from 0.
    pieces: Vec<(f64, f64)>,
}

impl Transfer {
    pub fn new(line: &Interconnector, atc: f64, mode: LossMode) -> Self {
        if !mode.internalizes(line.kind) {
            return Self { pieces: vec![(atc, 0.0)] };
        }
        match mode.segments() {
            None => {
                let g = linearize_secant(&line.loss).unwrap().gamma();
                Self { pieces: vec![(atc, g)] }
            }
            Some(n) => {
                let pwl = build_pwl(&line.loss, n).unwrap();
                let mut pieces = Vec::new();
                for (w, &s) in pwl.breakpoints().windows(2).zip(pwl.slopes()) {
                    if w[0] >= atc {
                        break;
                    }
                    pieces.push((w[1].min(atc), s));
                }
                if pieces.is_empty() {
                    pieces.push((atc, 0.0));
                }
                Self { pieces }
            }
        }
    }

    pub fn limit(&self) -> f64 {
        self.pieces.last().map_or(0.0, |p| p.0)
    }

    /// Delivered MW when sending `x`.
    pub fn delivered(&self, x: f64) -> f64 {
        let mut start = 0.0;
        let mut out = 0.0;
        for &(end, s) in &self.pieces {
            if x <= start {
                break;
            }
            out += (1.0 - s) * (x.min(end) - start);
            start = end;
        }
        out
    }

    /// Marginal loss slope at `x`, or `None` exactly at a piece boundary.
    pub fn slope_at(&self, x: f64) -> Option<f64> {
        let mut start = 0.0;
        for &(end, s) in &self.pieces {
            if (x - start).abs() < 1e-6 || (x - end).abs() < 1e-6 {
                return None;
            }
            if x > start && x < end {
                return Some(s);
            }
            start = end;
        }
        None
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v = vec![0.0];
        v.extend(self.pieces.iter().map(|p| p.0));
        v
    }
}

/// Both directions of one line.
#[derive(Debug, Clone)]
pub struct LineOracle {
    pub from: usize,
    pub to: usize,
    pub fwd: Transfer,
    pub rev: Transfer,
}

impl LineOracle {
    /// Net import contributions `(from zone, to zone)` of signed flow `f`.
    pub fn contributions(&self, f: f64) -> (f64, f64) {
        if f >= 0.0 {
            (-f, self.fwd.delivered(f))
        } else {
            (self.rev.delivered(-f), f)
        }
    }

    pub fn range(&self) -> (f64, f64) {
        (-self.rev.limit(), self.fwd.limit())
    }

    /// Flow values where the contributions change slope.
    pub fn kinks(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.fwd.breakpoints();
        v.extend(self.rev.breakpoints().into_iter().map(|b| -b));
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < EPS);
        v
    }
}

/// Solves `h(f) = target` for a piecewise-linear `h` whose kinks are `kinks`.
fn invert(h: impl Fn(f64) -> f64, kinks: &[f64], target: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for w in kinks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ha, hb) = (h(a), h(b));
        let (lo, hi) = if ha <= hb { (ha, hb) } else { (hb, ha) };
        if target < lo - EPS || target > hi + EPS {
            continue;
        }
        if (hb - ha).abs() < EPS {
            out.push(a);
            out.push(b);
        } else {
            out.push(a + (target - ha) * (b - a) / (hb - ha));
        }
    }
    out
}

pub struct NetworkOracle {
    pub zones: Vec<ZoneCurves>,
    pub lines: Vec<LineOracle>,
}

impl NetworkOracle {
    /// Supports one zone, or a tree of at most two unpinned lines.
    pub fn new(network: &NetworkModel, bids: &[ZoneBids], mode: LossMode) -> Self {
        let zones = network
            .zones
            .iter()
            .map(|z| ZoneCurves::from_bids(bids.iter().find(|b| b.zone == z.id).unwrap()))
            .collect();
        let lines: Vec<LineOracle> = network
            .interconnectors
            .iter()
            .map(|l| {
                assert!(l.fixed_flow.is_none());
                LineOracle {
                    from: network.zone_index(&l.from_zone).unwrap(),
                    to: network.zone_index(&l.to_zone).unwrap(),
                    fwd: Transfer::new(l, l.atc_forward, mode),
                    rev: Transfer::new(l, l.atc_reverse, mode),
                }
            })
            .collect();
        assert!(lines.len() <= 2);
        Self { zones, lines }
    }

    pub fn welfare(&self, flows: &[f64]) -> Option<f64> {
        let mut m = vec![0.0; self.zones.len()];
        for (l, &f) in self.lines.iter().zip(flows) {
            let (lo, hi) = l.range();
            if f < lo - 1e-7 || f > hi + 1e-7 {
                return None;
            }
            let (a, b) = l.contributions(f.clamp(lo, hi));
            m[l.from] += a;
            m[l.to] += b;
        }
        self.zones.iter().zip(&m).map(|(z, &m)| z.value(m)).sum()
    }

    fn contribution(&self, line: usize, zone: usize, f: f64) -> f64 {
        let l = &self.lines[line];
        let (a, b) = l.contributions(f);
        if l.from == zone {
            a
        } else {
            b
        }
    }

    /// Flow candidates of `line` from its own kinks and from every kink of
    /// `zone`, when the zone touches only this line.
    fn own_candidates(&self, line: usize, zone: usize) -> Vec<f64> {
        let k = self.lines[line].kinks();
        let mut out = k.clone();
        for t in self.zones[zone].kinks() {
            out.extend(invert(|f| self.contribution(line, zone, f), &k, t));
        }
        out
    }

    /// Maximum welfare and a maximizing flow vector.
    pub fn optimum(&self) -> (f64, Vec<f64>) {
        let mut cands: Vec<Vec<f64>> = Vec::new();
        match self.lines.len() {
            0 => cands.push(vec![]),
            1 => {
                let l = &self.lines[0];
                let mut c = self.own_candidates(0, l.from);
                c.extend(self.own_candidates(0, l.to));
                cands.extend(c.into_iter().map(|f| vec![f]));
            }
            2 => {
                let (l0, l1) = (&self.lines[0], &self.lines[1]);
                let ends0 = [l0.from, l0.to];
                let ends1 = [l1.from, l1.to];
                let shared = *ends0.iter().find(|z| ends1.contains(z)).expect("lines share a zone");
                let only0 = if l0.from == shared { l0.to } else { l0.from };
                let only1 = if l1.from == shared { l1.to } else { l1.from };
                let c0 = self.own_candidates(0, only0);
                let c1 = self.own_candidates(1, only1);
                for &a in &c0 {
                    for &b in &c1 {
                        cands.push(vec![a, b]);
                    }
                }
                let (k0, k1) = (l0.kinks(), l1.kinks());
                for t in self.zones[shared].kinks() {
                    for &a in &c0 {
                        let rest = t - self.contribution(0, shared, a);
                        for b in invert(|f| self.contribution(1, shared, f), &k1, rest) {
                            cands.push(vec![a, b]);
                        }
                    }
                    for &b in &c1 {
                        let rest = t - self.contribution(1, shared, b);
                        for a in invert(|f| self.contribution(0, shared, f), &k0, rest) {
                            cands.push(vec![a, b]);
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        cands
            .into_iter()
            .filter_map(|f| self.welfare(&f).map(|w| (w, f)))
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .expect("zero flow is always feasible")
    }
}

// Random instances: at most three zones in a chain, at most three steps per curve.

fn random_loss(rng: &mut ChaCha8Rng) -> QuadraticLossModel {
    let p_max = rng.random_range(200.0..1500.0f64).round();
    QuadraticLossModel::new(
        0.0,
        rng.random_range(0.0..0.02),
        rng.random_range(0.0..4e-5),
        p_max,
    )
}

fn random_steps(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Vec<BidStep> {
    (0..rng.random_range(1..=3))
        .map(|_| {
            BidStep::new(
                rng.random_range(10.0..600.0f64).round(),
                (rng.random_range(lo..hi) * 100.0f64).round() / 100.0,
            )
        })
        .collect()
}

pub fn zone(id: &str) -> Zone {
    Zone { id: id.into(), name: id.into(), synchronous_area: SynchronousArea::Nordic }
}

pub fn random_instance(rng: &mut ChaCha8Rng) -> (NetworkModel, Vec<ZoneBids>, LossMode) {
    let n = rng.random_range(1..=3);
    let ids = ["A", "B", "C"];
    let zones: Vec<Zone> = ids[..n].iter().map(|z| zone(z)).collect();
    let interconnectors = (1..n)
        .map(|i| {
            let loss = random_loss(rng);
            let (from, to) = if rng.random_bool(0.5) { (i - 1, i) } else { (i, i - 1) };
            Interconnector {
                id: format!("L{i}"),
                from_zone: ids[from].into(),
                to_zone: ids[to].into(),
                kind: if rng.random_bool(0.6) { InterconnectorKind::Hvdc } else { InterconnectorKind::Ac },
                atc_forward: (loss.p_max * rng.random_range(0.2..1.0f64)).round(),
                atc_reverse: (loss.p_max * rng.random_range(0.2..1.0f64)).round(),
                loss,
                fixed_flow: None,
            }
        })
        .collect();
    let bids = ids[..n]
        .iter()
        .map(|z| ZoneBids::new(*z, random_steps(rng, 0.0, 120.0), random_steps(rng, 5.0, 200.0)))
        .collect();
    let segments = rng.random_range(1..=5);
    let mode = LossMode::all(segments)[rng.random_range(0..4)];
    (NetworkModel { zones, interconnectors, overrides: vec![] }, bids, mode)
}

