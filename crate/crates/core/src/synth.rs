//! Seeded synthetic study data: a six-zone Nordic-style network, hourly
//! technology bids and a kinetic-energy series.
//!
//! The shapes are loosely realistic (hydro-dominated north, nuclear and CHP in
//! the middle, wind in the south, a continental zone behind a pinned AC
//! link), but every number is invented.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cost::{
    CapacityPrice, DiCostParams, EpcCostParams, FfrCostParams, PriceBook, DEFAULT_BOOTSTRAP_N,
};
use crate::exec::{map_range, Execution};
use crate::market::DEFAULT_PRICE_CAP;
use crate::model::{
    BidBook, BidStep, HourOverride, HourlySeries, Interconnector, InterconnectorKind,
    NetworkModel, QuadraticLossModel, SynchronousArea, Unit, Zone, ZoneBids,
};
use crate::rng::{substream, SYNTH_STREAM};

pub const MAX_ZONES: usize = 6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid synthetic spec: {0}")]
pub struct SynthError(pub String);

/// Kinetic-energy series shape: seasonal and diurnal cycles plus AR(1)
/// noise, all multiplied by a hydrological scaling (below 1 for dry years).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EkShape {
    pub base_gws: f64,
    pub seasonal_amplitude_gws: f64,
    pub diurnal_amplitude_gws: f64,
    pub weekend_drop_gws: f64,
    pub noise_sd_gws: f64,
    pub noise_ar: f64,
    pub dry_scaling: f64,
}

impl Default for EkShape {
    fn default() -> Self {
        Self {
            base_gws: 195.0,
            seasonal_amplitude_gws: 38.0,
            diurnal_amplitude_gws: 12.0,
            weekend_drop_gws: 6.0,
            noise_sd_gws: 7.0,
            noise_ar: 0.95,
            dry_scaling: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub scenario: String,
    pub zones: usize,
    pub horizon_hours: usize,
    /// Supply prices are clamped into this range.
    pub price_range_eur_mwh: [f64; 2],
    /// Range of the day-to-day random load multiplier.
    pub load_scale: [f64; 2],
    pub ek: EkShape,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            seed: 2025,
            scenario: "2025-synthetic".into(),
            zones: MAX_ZONES,
            horizon_hours: 8760,
            price_range_eur_mwh: [0.0, 250.0],
            load_scale: [0.92, 1.08],
            ek: EkShape::default(),
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError(m.into()));
        if self.zones == 0 || self.zones > MAX_ZONES {
            return bad("zone count must be between 1 and 6");
        }
        if self.horizon_hours == 0 {
            return bad("horizon must be at least one hour");
        }
        let [pl, ph] = self.price_range_eur_mwh;
        if !(pl >= 0.0 && ph > pl && ph <= DEFAULT_PRICE_CAP) {
            return bad("price range must be ordered, non-negative and below the price cap");
        }
        let [ll, lh] = self.load_scale;
        if !(ll > 0.0 && lh >= ll && lh.is_finite()) {
            return bad("load scale range must be positive and ordered");
        }
        let e = &self.ek;
        if !(e.base_gws > 0.0 && e.dry_scaling > 0.0) {
            return bad("kinetic energy base and dry scaling must be positive");
        }
        if !(e.seasonal_amplitude_gws >= 0.0
            && e.diurnal_amplitude_gws >= 0.0
            && e.weekend_drop_gws >= 0.0
            && e.noise_sd_gws >= 0.0)
        {
            return bad("kinetic energy amplitudes must be non-negative");
        }
        if !(0.0..1.0).contains(&e.noise_ar) {
            return bad("noise autocorrelation must be in [0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub network: NetworkModel,
    pub bids: BidBook,
    pub ek: HourlySeries,
    pub prices: PriceBook,
}

enum Tech {
    /// Marginal cost with a small spread across two steps.
    Thermal(f64),
    /// Priced against the seasonal water value.
    Hydro,
}

struct ZoneTemplate {
    id: &'static str,
    name: &'static str,
    area: SynchronousArea,
    load_mw: f64,
    wind_mw: f64,
    techs: &'static [(Tech, f64)],
}

// Order matters: any prefix is a connected network.
const ZONES: [ZoneTemplate; MAX_ZONES] = [
    ZoneTemplate {
        id: "NO",
        name: "Norway",
        area: SynchronousArea::Nordic,
        load_mw: 15000.0,
        wind_mw: 1500.0,
        techs: &[(Tech::Hydro, 23000.0)],
    },
    ZoneTemplate {
        id: "SE3",
        name: "Sweden central",
        area: SynchronousArea::Nordic,
        load_mw: 10000.0,
        wind_mw: 3000.0,
        techs: &[
            (Tech::Thermal(9.0), 6500.0),
            (Tech::Hydro, 1500.0),
            (Tech::Thermal(42.0), 1500.0),
            (Tech::Thermal(110.0), 1200.0),
        ],
    },
    ZoneTemplate {
        id: "FI",
        name: "Finland",
        area: SynchronousArea::Nordic,
        load_mw: 9500.0,
        wind_mw: 2000.0,
        techs: &[
            (Tech::Thermal(9.5), 4400.0),
            (Tech::Thermal(38.0), 3000.0),
            (Tech::Hydro, 2000.0),
            (Tech::Thermal(140.0), 1500.0),
        ],
    },
    ZoneTemplate {
        id: "SE1",
        name: "Sweden north",
        area: SynchronousArea::Nordic,
        load_mw: 1300.0,
        wind_mw: 1000.0,
        techs: &[(Tech::Hydro, 5000.0)],
    },
    ZoneTemplate {
        id: "DK1",
        name: "Denmark west",
        area: SynchronousArea::ContinentalEurope,
        load_mw: 2400.0,
        wind_mw: 4200.0,
        techs: &[(Tech::Thermal(48.0), 2200.0), (Tech::Thermal(95.0), 600.0)],
    },
    ZoneTemplate {
        id: "DE",
        name: "Germany",
        area: SynchronousArea::ContinentalEurope,
        load_mw: 6000.0,
        wind_mw: 3000.0,
        techs: &[
            (Tech::Thermal(28.0), 3000.0),
            (Tech::Thermal(46.0), 2500.0),
            (Tech::Thermal(72.0), 2500.0),
            (Tech::Thermal(160.0), 1500.0),
        ],
    },
];

/// id, from, to, kind, rating MW, (a0, b, c)
type LineTemplate = (&'static str, &'static str, &'static str, InterconnectorKind, f64, [f64; 3]);

// HVDC first so index-ordered tie-breaking is reproducible.
const LINES: [LineTemplate; 7] = [
    ("SK", "DK1", "NO", InterconnectorKind::Hvdc, 1600.0, [3.0, 0.005, 1.9e-5]),
    ("KS", "DK1", "SE3", InterconnectorKind::Hvdc, 700.0, [2.0, 0.005, 3.6e-5]),
    ("FS", "SE3", "FI", InterconnectorKind::Hvdc, 1200.0, [2.0, 0.005, 1.67e-5]),
    ("NO-SE3", "NO", "SE3", InterconnectorKind::Ac, 2000.0, [0.0, 0.0, 1.0e-5]),
    ("SE3-SE1", "SE3", "SE1", InterconnectorKind::Ac, 2500.0, [0.0, 0.0, 1.2e-5]),
    ("SE1-FI", "SE1", "FI", InterconnectorKind::Ac, 1500.0, [0.0, 0.0, 1.33e-5]),
    ("DK1-DE", "DK1", "DE", InterconnectorKind::Ac, 1500.0, [0.0, 0.0, 1.0e-5]),
];

const PINNED_LINE: &str = "DK1-DE";
const PINNED_MAX_MW: f64 = 600.0;

// Substream indices above any hour index.
const EK_STREAM_INDEX: u64 = 1 << 40;
const WIND_STREAM_INDEX: u64 = (1 << 40) + 1;
const PINNED_STREAM_INDEX: u64 = (1 << 40) + 100;
const PRICE_STREAM_INDEX: u64 = (1 << 40) + 200;

/// Weekly samples in each placeholder EPC price list.
pub const PRICE_SAMPLES: usize = 52;

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn season(hour: usize) -> f64 {
    // 1 in mid-January, -1 in mid-July.
    (TAU * (hour as f64 / 24.0 - 15.0) / 365.0).cos()
}

fn ar_series(rng: &mut ChaCha8Rng, n: usize, phi: f64) -> Vec<f64> {
    let scale = (1.0 - phi * phi).sqrt();
    let mut x = normal(rng);
    (0..n)
        .map(|_| {
            let v = x;
            x = phi * x + scale * normal(rng);
            v
        })
        .collect()
}

pub fn generate_network(spec: &SyntheticSpec) -> Result<NetworkModel, SynthError> {
    spec.validate()?;
    let zones: Vec<Zone> = ZONES[..spec.zones]
        .iter()
        .map(|z| Zone {
            id: z.id.into(),
            name: z.name.into(),
            synchronous_area: z.area,
        })
        .collect();
    let present = |id: &str| zones.iter().any(|z| z.id == id);
    let interconnectors: Vec<Interconnector> = LINES
        .iter()
        .filter(|(_, from, to, ..)| present(from) && present(to))
        .map(|&(id, from, to, kind, rating, [a0, b, c])| Interconnector {
            id: id.into(),
            from_zone: from.into(),
            to_zone: to.into(),
            kind,
            atc_forward: rating,
            atc_reverse: rating,
            loss: QuadraticLossModel::new(a0, b, c, rating),
            fixed_flow: (id == PINNED_LINE).then_some(0.0),
        })
        .collect();
    let overrides = if interconnectors.iter().any(|l| l.id == PINNED_LINE) {
        let mut rng = substream(spec.seed, SYNTH_STREAM, PINNED_STREAM_INDEX);
        let noise = ar_series(&mut rng, spec.horizon_hours, 0.8);
        (0..spec.horizon_hours)
            .map(|h| {
                let daily = (TAU * (h % 24) as f64 / 24.0).sin();
                let flow = (350.0 * daily + 200.0 * noise[h]).clamp(-PINNED_MAX_MW, PINNED_MAX_MW);
                HourOverride {
                    hour: h,
                    interconnector: PINNED_LINE.into(),
                    atc_forward: None,
                    atc_reverse: None,
                    fixed_flow: Some((flow * 10.0).round() / 10.0),
                }
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(NetworkModel {
        zones,
        interconnectors,
        overrides,
    })
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn zone_bids(
    spec: &SyntheticSpec,
    z: &ZoneTemplate,
    hour: usize,
    wind_cf: f64,
    rng: &mut ChaCha8Rng,
) -> ZoneBids {
    let [pmin, pmax] = spec.price_range_eur_mwh;
    let price = |p: f64, rng: &mut ChaCha8Rng| {
        round2((p * (1.0 + rng.random_range(-0.03..0.03))).clamp(pmin, pmax))
    };
    let availability = |rng: &mut ChaCha8Rng| rng.random_range(0.9..1.0);
    let s = season(hour);
    let water_value = 24.0 + 8.0 * s + 2.0 * normal(rng);

    let mut supply = Vec::new();
    if z.wind_mw > 0.0 && wind_cf > 0.0 {
        supply.push(BidStep::new(round2(z.wind_mw * wind_cf).max(0.01), price(0.5, rng)));
    }
    for (tech, cap) in z.techs {
        let cap = cap * availability(rng);
        match tech {
            Tech::Thermal(p) => {
                supply.push(BidStep::new(round2(0.6 * cap), price(*p, rng)));
                supply.push(BidStep::new(round2(0.4 * cap), price(1.12 * p, rng)));
            }
            Tech::Hydro => {
                for (share, k) in [(0.25, 0.45), (0.25, 0.8), (0.2, 1.0), (0.15, 1.3), (0.15, 1.9)] {
                    supply.push(BidStep::new(round2(share * cap), price(k * water_value, rng)));
                }
            }
        }
    }

    let hod = (hour % 24) as f64;
    let day_shape = 1.0 + 0.12 * (TAU * (hod - 8.0) / 24.0).sin();
    let daily = rng.random_range(spec.load_scale[0]..=spec.load_scale[1]);
    let load = z.load_mw * (1.0 + 0.2 * s) * day_shape * daily;
    let demand = vec![
        BidStep::new(round2(0.9 * load), DEFAULT_PRICE_CAP),
        BidStep::new(round2(0.05 * load), price(65.0, rng)),
        BidStep::new(round2(0.05 * load), price(30.0, rng)),
    ];
    ZoneBids::new(z.id, supply, demand)
}

pub fn generate_bids(spec: &SyntheticSpec, exec: Execution) -> Result<BidBook, SynthError> {
    spec.validate()?;
    let zones = &ZONES[..spec.zones];
    let wind: Vec<Vec<f64>> = zones
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let mut rng = substream(spec.seed, SYNTH_STREAM, WIND_STREAM_INDEX + i as u64);
            ar_series(&mut rng, spec.horizon_hours, 0.97)
                .into_iter()
                .map(|x| (0.35 + 0.25 * x).clamp(0.0, 1.0))
                .collect()
        })
        .collect();
    let hours = map_range(exec, spec.horizon_hours, |h| {
        let mut rng = substream(spec.seed, SYNTH_STREAM, h as u64);
        zones
            .iter()
            .enumerate()
            .map(|(i, z)| zone_bids(spec, z, h, wind[i][h], &mut rng))
            .collect()
    });
    Ok(BidBook { hours })
}

pub fn generate_kinetic_energy(spec: &SyntheticSpec) -> Result<HourlySeries, SynthError> {
    spec.validate()?;
    let e = &spec.ek;
    let mut rng = substream(spec.seed, SYNTH_STREAM, EK_STREAM_INDEX);
    let noise = ar_series(&mut rng, spec.horizon_hours, e.noise_ar);
    let values = (0..spec.horizon_hours)
        .map(|h| {
            let hod = (h % 24) as f64;
            let weekend = matches!((h / 24) % 7, 5 | 6);
            let v = e.base_gws + e.seasonal_amplitude_gws * season(h)
                + e.diurnal_amplitude_gws * (TAU * (hod - 9.0) / 24.0).sin()
                - if weekend { e.weekend_drop_gws } else { 0.0 }
                + e.noise_sd_gws * noise[h];
            let v = (e.dry_scaling * v).max(1.0);
            (v * 100.0).round() / 100.0
        })
        .collect();
    Ok(HourlySeries::new(spec.scenario.clone(), Unit::Gws, values))
}

/// Default DI and FFR prices plus placeholder EPC samples: weekly average
/// primary-reserve prices (log-normal around 17 €/MW/h) and congestion rents
/// (log-normal around 7 €/MW/h, a quarter of the weeks uncongested). The
/// bootstrap seed is the generator seed.
pub fn generate_price_book(spec: &SyntheticSpec) -> Result<PriceBook, SynthError> {
    spec.validate()?;
    let mut rng = substream(spec.seed, SYNTH_STREAM, PRICE_STREAM_INDEX);
    let round = |v: f64| (v * 100.0).round() / 100.0;
    let mut reserve = Vec::with_capacity(PRICE_SAMPLES);
    let mut rent = Vec::with_capacity(PRICE_SAMPLES);
    for _ in 0..PRICE_SAMPLES {
        let z: f64 = rng.sample(StandardNormal);
        reserve.push(CapacityPrice(round(16.0 * (0.35 * z).exp())));
        let z: f64 = rng.sample(StandardNormal);
        let congested = rng.random_bool(0.75);
        rent.push(CapacityPrice(if congested {
            round(8.5 * (0.6 * z).exp())
        } else {
            0.0
        }));
    }
    Ok(PriceBook {
        di: DiCostParams::default(),
        ffr: FfrCostParams::default(),
        epc: EpcCostParams {
            reserve_price_samples: reserve,
            reservation_price_samples: rent,
            bootstrap_n: DEFAULT_BOOTSTRAP_N,
            seed: Some(spec.seed),
        },
    })
}

pub fn generate(spec: &SyntheticSpec, exec: Execution) -> Result<SyntheticData, SynthError> {
    Ok(SyntheticData {
        network: generate_network(spec)?,
        bids: generate_bids(spec, exec)?,
        ek: generate_kinetic_energy(spec)?,
        prices: generate_price_book(spec)?,
    })
}
