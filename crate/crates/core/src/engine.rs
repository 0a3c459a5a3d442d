//! Closed-loop discrete-time simulation.
//!
//! Each step of length `dt` runs, in order:
//!
//! 1. controller samples SoC at the start of the step and picks masks;
//! 2. the load bank turns masks into demand;
//! 3. the arrays' mean output over the step is computed;
//! 4. surplus is offered to the battery, the remainder curtailed; or
//! 5. the deficit is requested from the battery, the remainder unserved.
//!
//! Rows record the state at the start of the step together with the flows
//! during it.

use serde::Serialize;

use crate::battery::{self, BatteryConfig, BatteryState};
use crate::controller::{self, ControllerConfig, Tier};
use crate::error::{Error, Result};
use crate::loadbank::{builtin_iss_table, LoadTable, CHANNEL_COUNT};
use crate::powerplant::{self, GenerationConfig, GenerationSchedule, OrbitConfig, Phase};

/// Relative slack used when checking that `dt` divides the horizon.
const GRID_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub orbit: OrbitConfig,
    pub gen: GenerationConfig,
    pub battery: BatteryConfig,
    pub controller: ControllerConfig,
    pub table: LoadTable,
    pub schedule: GenerationSchedule,
    pub duration_min: f64,
    pub dt_min: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        let table = builtin_iss_table();
        SimConfig {
            orbit: OrbitConfig::default(),
            gen: GenerationConfig::default(),
            battery: BatteryConfig::default(),
            controller: ControllerConfig::for_table(&table).expect("builtin table has MID loads"),
            table,
            schedule: powerplant::builtin_schedule("ideal").expect("builtin"),
            duration_min: 2000.0,
            dt_min: 1.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.orbit.validate()?;
        self.gen.validate()?;
        self.battery.validate()?;
        self.controller.validate()?;
        if !(self.duration_min.is_finite() && self.duration_min > 0.0) {
            return Err(Error::range("sim.duration_min", "must be > 0"));
        }
        if !(self.dt_min.is_finite() && self.dt_min > 0.0 && self.dt_min <= self.duration_min) {
            return Err(Error::range(
                "sim.dt_min",
                "must be in (0, sim.duration_min]",
            ));
        }
        let n = (self.duration_min / self.dt_min).round();
        if (n * self.dt_min - self.duration_min).abs() > GRID_EPS * self.duration_min {
            return Err(Error::range(
                "sim.dt_min",
                format!("must divide sim.duration_min ({})", self.duration_min),
            ));
        }
        Ok(())
    }

    pub fn step_count(&self) -> usize {
        (self.duration_min / self.dt_min).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState {
    pub step: usize,
    pub battery: BatteryState,
}

impl SimState {
    pub fn initial(cfg: &SimConfig) -> Self {
        SimState {
            step: 0,
            battery: cfg.battery.initial_state(),
        }
    }

    pub fn t_min(&self, dt_min: f64) -> f64 {
        self.step as f64 * dt_min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub t_min: f64,
    pub phase: Phase,
    pub scale: f64,
    pub available_kw: f64,
    pub delivered_kw: f64,
    pub curtailed_kw: f64,
    pub pv_voltage_v: f64,
    pub pv_current_a: f64,
    pub tier: Tier,
    pub masks: [u8; CHANNEL_COUNT],
    pub load_kw: f64,
    pub channel_kw: [f64; CHANNEL_COUNT],
    /// Positive while charging.
    pub batt_flow_kw: f64,
    pub soc_percent: f64,
    pub unserved_kw: f64,
}

impl TraceRow {
    /// `available - (delivered + curtailed)`.
    pub fn generation_residual(&self) -> f64 {
        self.available_kw - (self.delivered_kw + self.curtailed_kw)
    }

    /// PV delivered minus battery charging equals the load actually served.
    pub fn load_residual(&self) -> f64 {
        (self.delivered_kw - self.batt_flow_kw) - (self.load_kw - self.unserved_kw)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub dt_min: f64,
    pub orbit_period_min: f64,
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn duration_min(&self) -> f64 {
        self.rows.len() as f64 * self.dt_min
    }

    /// Mean SoC of every orbit that lies completely inside the run.
    pub fn orbit_means(&self) -> Vec<f64> {
        let complete = ((self.duration_min() / self.orbit_period_min) + GRID_EPS).floor() as usize;
        let mut sums = vec![(0.0, 0usize); complete];
        for row in &self.rows {
            let k = ((row.t_min / self.orbit_period_min) + GRID_EPS).floor() as usize;
            if let Some(slot) = sums.get_mut(k) {
                slot.0 += row.soc_percent;
                slot.1 += 1;
            }
        }
        sums.into_iter()
            .map(|(s, n)| if n == 0 { f64::NAN } else { s / n as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct TierMinutes {
    pub full: f64,
    pub mid: f64,
    pub low: f64,
}

impl TierMinutes {
    pub fn get(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Full => self.full,
            Tier::Mid => self.mid,
            Tier::Low => self.low,
        }
    }

    fn add(&mut self, tier: Tier, minutes: f64) {
        match tier {
            Tier::Full => self.full += minutes,
            Tier::Mid => self.mid += minutes,
            Tier::Low => self.low += minutes,
        }
    }

    pub fn total(&self) -> f64 {
        self.full + self.mid + self.low
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub time_to_full_min: Option<f64>,
    pub min_soc: f64,
    pub final_soc: f64,
    pub tier_minutes: TierMinutes,
    pub tier_transitions: usize,
    pub unserved_kwh: f64,
    pub curtailed_kwh: f64,
    /// No unserved energy, and SoC is full or not trending down over the
    /// last two complete orbits.
    pub sustainable: bool,
}

/// Advances one step and returns the next state with the row describing it.
pub fn step(state: SimState, cfg: &SimConfig) -> Result<(SimState, TraceRow)> {
    let dt = cfg.dt_min;
    let t = state.t_min(dt);
    let soc = state.battery.soc;

    let (tier, masks) = controller::control(soc, &cfg.controller)?;
    let channel_kw = cfg.table.channel_powers(&masks);
    let load_kw: f64 = channel_kw.iter().sum();

    let available_kw = powerplant::step_available_power(t, dt, &cfg.orbit, &cfg.gen, &cfg.schedule);
    let phase = if powerplant::sunlit_minutes(t, t + dt, &cfg.orbit) > 0.0 {
        Phase::Insolation
    } else {
        Phase::Eclipse
    };

    let (next_battery, delivered_kw, curtailed_kw, batt_flow_kw, unserved_kw);
    if available_kw >= load_kw {
        let (b, accepted) =
            battery::charge(state.battery, available_kw - load_kw, dt, &cfg.battery)?;
        next_battery = b;
        delivered_kw = load_kw + accepted;
        curtailed_kw = available_kw - delivered_kw;
        batt_flow_kw = accepted;
        unserved_kw = 0.0;
    } else {
        let d = battery::discharge(state.battery, load_kw - available_kw, dt, &cfg.battery)?;
        next_battery = d.state;
        delivered_kw = available_kw;
        curtailed_kw = 0.0;
        batt_flow_kw = -d.delivered_kw;
        unserved_kw = d.shortfall_kw;
    }

    let pv = powerplant::pv_electricals(delivered_kw, phase, &cfg.gen);
    let row = TraceRow {
        t_min: t,
        phase,
        scale: powerplant::scenario_scale(t, &cfg.schedule),
        available_kw,
        delivered_kw,
        curtailed_kw,
        pv_voltage_v: pv.voltage_v,
        pv_current_a: pv.current_a,
        tier,
        masks: masks.values(),
        load_kw,
        channel_kw,
        batt_flow_kw,
        soc_percent: soc,
        unserved_kw,
    };
    let next = SimState {
        step: state.step + 1,
        battery: next_battery,
    };
    Ok((next, row))
}

pub fn simulate(cfg: &SimConfig) -> Result<Trace> {
    cfg.validate()?;
    let n = cfg.step_count();
    let mut rows = Vec::with_capacity(n);
    let mut state = SimState::initial(cfg);
    for _ in 0..n {
        let (next, row) = step(state, cfg)?;
        rows.push(row);
        state = next;
    }
    Ok(Trace {
        dt_min: cfg.dt_min,
        orbit_period_min: cfg.orbit.period_min,
        rows,
    })
}

pub fn run(cfg: &SimConfig) -> Result<(Trace, Summary)> {
    let trace = simulate(cfg)?;
    let summary = summarize(&trace)?;
    Ok((trace, summary))
}

pub fn summarize(trace: &Trace) -> Result<Summary> {
    let rows = &trace.rows;
    let (first, last) = match (rows.first(), rows.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::Input("cannot summarize an empty trace".into())),
    };
    let dt = trace.dt_min;
    let hours = dt / 60.0;

    let mut tier_minutes = TierMinutes::default();
    let mut unserved_kwh = 0.0;
    let mut curtailed_kwh = 0.0;
    let mut min_soc = f64::INFINITY;
    for r in rows {
        tier_minutes.add(r.tier, dt);
        unserved_kwh += r.unserved_kw * hours;
        curtailed_kwh += r.curtailed_kw * hours;
        min_soc = min_soc.min(r.soc_percent);
    }
    let tier_transitions = rows.windows(2).filter(|w| w[0].tier != w[1].tier).count();
    let time_to_full_min = rows
        .iter()
        .find(|r| r.soc_percent >= 100.0)
        .map(|r| r.t_min);

    let final_soc = last.soc_percent;
    let means = trace.orbit_means();
    let holding = match means.as_slice() {
        [.., prev, last_orbit] => last_orbit >= prev,
        _ => final_soc >= first.soc_percent,
    };
    let sustainable = unserved_kwh == 0.0 && (final_soc >= 100.0 || holding);

    Ok(Summary {
        time_to_full_min,
        min_soc,
        final_soc,
        tier_minutes,
        tier_transitions,
        unserved_kwh,
        curtailed_kwh,
        sustainable,
    })
}
