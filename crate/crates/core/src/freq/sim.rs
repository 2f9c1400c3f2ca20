use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{Disturbance, FreqError, FrequencyModel, SimConfig, SteppedReserve};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t_s: f64,
    /// Reported frequency, floored at the load-shedding level.
    pub f_hz: f64,
    pub p_fcr_mw: f64,
    pub p_ffr_mw: f64,
    pub p_epc_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Activation {
    /// `"ffr"` or `"epc"`.
    pub reserve: String,
    pub trigger: usize,
    pub threshold_hz: f64,
    pub crossed_s: f64,
    pub active_from_s: f64,
    pub full_s: f64,
    pub released_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub nadir_hz: f64,
    pub nadir_time_s: f64,
    pub load_shed: bool,
    pub activations: Vec<Activation>,
}

/// Closed comparison: a nadir exactly at the floor is acceptable.
pub fn nadir_ok(trajectory: &Trajectory, floor_hz: f64) -> bool {
    trajectory.nadir_hz >= floor_hz
}

#[derive(Clone, Copy)]
struct Active {
    crossed: f64,
    log: usize,
}

struct Reserve<'a> {
    name: &'static str,
    spec: &'a SteppedReserve,
    state: Vec<Option<Active>>,
}

impl Reserve<'_> {
    fn power(&self, t: f64) -> f64 {
        let r = self.spec;
        self.spec
            .triggers
            .iter()
            .zip(&self.state)
            .filter_map(|(trig, st)| st.map(|a| (trig, a)))
            .map(|(trig, a)| {
                let x = t - a.crossed - r.activation_delay_s;
                let share = if x <= 0.0 {
                    0.0
                } else if r.full_activation_s <= 0.0 {
                    1.0
                } else {
                    (x / r.full_activation_s).min(1.0)
                };
                trig.block_mw * share
            })
            .sum()
    }

    fn kinks(&self, out: &mut Vec<f64>) {
        for a in self.state.iter().flatten() {
            let start = a.crossed + self.spec.activation_delay_s;
            out.push(start);
            out.push(start + self.spec.full_activation_s);
        }
    }
}

struct System<'a> {
    model: &'a FrequencyModel,
    dist: &'a Disturbance,
    reserves: Vec<Reserve<'a>>,
    /// MWs
    two_h: f64,
}

impl System<'_> {
    fn fcr_target(&self, f: f64) -> f64 {
        let [upper, lower] = self.model.fcr_band_hz;
        self.model.fcr_d_mw * ((upper - f) / (upper - lower)).clamp(0.0, 1.0)
    }

    fn reserve_power(&self, t: f64) -> f64 {
        self.reserves.iter().map(|r| r.power(t)).sum()
    }

    /// `disturbed` is decided once per piece so the step in `ΔP` never
    /// falls inside an RK4 stage.
    fn derivative(&self, t: f64, disturbed: bool, df: f64, p_fcr: f64) -> (f64, f64) {
        let m = self.model;
        let lost = if disturbed { self.dist.lost_generation_mw } else { 0.0 };
        let accel = p_fcr + self.reserve_power(t) - lost - m.load_damping_mw_per_hz * df;
        let d_df = m.f0_hz * accel / self.two_h;
        let d_fcr = (self.fcr_target(m.f0_hz + df) - p_fcr) / m.fcr_lag_s;
        (d_df, d_fcr)
    }

    fn rk4(&self, a: f64, b: f64, (df, p): (f64, f64)) -> (f64, f64) {
        let h = b - a;
        let disturbed = 0.5 * (a + b) >= self.dist.onset_s;
        let k1 = self.derivative(a, disturbed, df, p);
        let k2 = self.derivative(a + h / 2.0, disturbed, df + h / 2.0 * k1.0, p + h / 2.0 * k1.1);
        let k3 = self.derivative(a + h / 2.0, disturbed, df + h / 2.0 * k2.0, p + h / 2.0 * k2.1);
        let k4 = self.derivative(b, disturbed, df + h * k3.0, p + h * k3.1);
        (
            df + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            p + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        )
    }

    /// Integrates over `[a, b]`, splitting at every point where the
    /// injected power has a kink.
    fn advance(&self, a: f64, b: f64, state: (f64, f64), kinks: &mut Vec<f64>) -> (f64, f64) {
        kinks.clear();
        kinks.push(self.dist.onset_s);
        for r in &self.reserves {
            r.kinks(kinks);
        }
        let eps = 1e-12 * b.abs().max(1.0);
        kinks.retain(|&k| k > a + eps && k < b - eps);
        kinks.sort_by(f64::total_cmp);
        let mut s = state;
        let mut t = a;
        for &k in kinks.iter() {
            s = self.rk4(t, k, s);
            t = k;
        }
        self.rk4(t, b, s)
    }
}

/// Fixed-step RK4 integration of the swing equation. Threshold crossings are
/// located by linear interpolation inside the step and the step is redone
/// when the resulting activation starts before its end.
pub fn simulate(
    model: &FrequencyModel,
    disturbance: &Disturbance,
    ffr: Option<&SteppedReserve>,
    epc: Option<&SteppedReserve>,
    sim: &SimConfig,
) -> Result<Trajectory, FreqError> {
    model.validate()?;
    sim.validate()?;
    let mut samples = Vec::with_capacity((sim.horizon_s / sim.dt_s).round() as usize + 1);
    let mut activations = Vec::new();
    integrate(model, disturbance, ffr, epc, sim, None, &mut |s| samples.push(*s), &mut activations)?;
    let shed = samples.iter().any(|s| s.f_hz <= model.load_shed_hz);
    let (mut nadir_hz, mut nadir_time_s) = (f64::INFINITY, 0.0);
    for s in &samples {
        if s.f_hz < nadir_hz {
            nadir_hz = s.f_hz;
            nadir_time_s = s.t_s;
        }
    }
    Ok(Trajectory {
        samples,
        nadir_hz,
        nadir_time_s,
        load_shed: shed,
        activations,
    })
}

/// Nadir only. With `stop_below`, returns as soon as frequency falls below it.
pub(crate) fn nadir(
    model: &FrequencyModel,
    disturbance: &Disturbance,
    ffr: Option<&SteppedReserve>,
    epc: Option<&SteppedReserve>,
    sim: &SimConfig,
    stop_below: Option<f64>,
) -> Result<f64, FreqError> {
    let mut min = f64::INFINITY;
    let mut log = Vec::new();
    integrate(model, disturbance, ffr, epc, sim, stop_below, &mut |s| min = min.min(s.f_hz), &mut log)?;
    Ok(min)
}

#[allow(clippy::too_many_arguments)]
fn integrate(
    model: &FrequencyModel,
    disturbance: &Disturbance,
    ffr: Option<&SteppedReserve>,
    epc: Option<&SteppedReserve>,
    sim: &SimConfig,
    stop_below: Option<f64>,
    sink: &mut dyn FnMut(&Sample),
    log: &mut Vec<Activation>,
) -> Result<(), FreqError> {
    for r in ffr.iter().chain(epc.iter()) {
        r.validate(model)?;
    }
    let mut reserves = Vec::new();
    for (name, spec) in [("ffr", ffr), ("epc", epc)] {
        if let Some(spec) = spec {
            reserves.push(Reserve {
                name,
                spec,
                state: vec![None; spec.triggers.len()],
            });
        }
    }
    let mut sys = System {
        model,
        dist: disturbance,
        reserves,
        two_h: 2.0 * model.kinetic_energy_gws * 1000.0,
    };
    let f0 = model.f0_hz;
    let shed = model.load_shed_hz;
    let sample = |sys: &System, t: f64, (df, p): (f64, f64)| {
        let mut s = Sample {
            t_s: t,
            f_hz: (f0 + df).max(shed),
            p_fcr_mw: p,
            p_ffr_mw: 0.0,
            p_epc_mw: 0.0,
        };
        for r in &sys.reserves {
            let p = r.power(t);
            match r.name {
                "ffr" => s.p_ffr_mw = p,
                _ => s.p_epc_mw = p,
            }
        }
        s
    };

    let steps = (sim.horizon_s / sim.dt_s).round() as usize;
    let mut state = (0.0, 0.0);
    sink(&sample(&sys, 0.0, state));
    let mut kinks = Vec::new();
    for k in 1..=steps {
        let t0 = (k - 1) as f64 * sim.dt_s;
        let t1 = k as f64 * sim.dt_s;
        let f_old = f0 + state.0;
        let mut next = sys.advance(t0, t1, state, &mut kinks);
        // A crossing whose activation begins inside this step changes the
        // step itself; redo it with the new kink. At most once per trigger.
        loop {
            let f_new = f0 + next.0;
            let mut redo = false;
            for r in sys.reserves.iter_mut() {
                for (i, trig) in r.spec.triggers.iter().enumerate() {
                    if r.state[i].is_some() || !(f_old >= trig.threshold_hz && f_new < trig.threshold_hz) {
                        continue;
                    }
                    let crossed = t0 + (t1 - t0) * (f_old - trig.threshold_hz) / (f_old - f_new);
                    let active_from = crossed + r.spec.activation_delay_s;
                    r.state[i] = Some(Active {
                        crossed,
                        log: log.len(),
                    });
                    log.push(Activation {
                        reserve: r.name.to_string(),
                        trigger: i,
                        threshold_hz: trig.threshold_hz,
                        crossed_s: crossed,
                        active_from_s: active_from,
                        full_s: active_from + r.spec.full_activation_s,
                        released_s: None,
                    });
                    redo |= active_from < t1;
                }
            }
            if !redo {
                break;
            }
            next = sys.advance(t0, t1, state, &mut kinks);
        }
        state = next;
        if !(state.0.is_finite() && state.1.is_finite()) {
            return Err(FreqError::NonFinite { t_s: t1 });
        }
        let f = f0 + state.0;
        for r in sys.reserves.iter_mut().filter(|r| !r.spec.sustain) {
            for (i, trig) in r.spec.triggers.iter().enumerate() {
                if let Some(a) = r.state[i] {
                    let full = a.crossed + r.spec.activation_delay_s + r.spec.full_activation_s;
                    if f > trig.threshold_hz && t1 >= full {
                        log[a.log].released_s = Some(t1);
                        r.state[i] = None;
                    }
                }
            }
        }
        sink(&sample(&sys, t1, state));
        if stop_below.is_some_and(|floor| f < floor) {
            break;
        }
    }
    Ok(())
}

/// Writes `t_s,f_hz,p_fcr_mw,p_ffr_mw,p_epc_mw`.
pub fn write_trajectory_csv<W: Write>(trajectory: &Trajectory, writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for s in &trajectory.samples {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}
