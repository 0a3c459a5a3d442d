//! Closed-form prediction of the base case: ideal generation, controller
//! off, every load on.
//!
//! Within an orbit the battery charges at a constant rate for the whole
//! insolation window and drains at a constant rate through eclipse, so it
//! can only first reach full charge during an insolation window. The
//! prediction walks orbit by orbit with those two constant rates and solves
//! for the crossing inside the first window that reaches capacity.

use serde::Serialize;

use crate::engine::SimConfig;
use crate::loadbank::MaskSet;

/// Reference base-case time-to-full.
pub const REFERENCE_TIME_TO_FULL_MIN: f64 = 830.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub full_load_kw: f64,
    pub insolation_min: f64,
    pub eclipse_min: f64,
    /// Energy stored over one insolation window (negative if it drains).
    pub insolation_gain_kwh: f64,
    pub eclipse_drain_kwh: f64,
    pub per_orbit_net_kwh: f64,
    pub predicted_time_to_full_min: Option<f64>,
    pub reference_time_to_full_min: f64,
}

impl CalibrationReport {
    pub fn deviation_min(&self) -> Option<f64> {
        self.predicted_time_to_full_min
            .map(|t| t - self.reference_time_to_full_min)
    }

    pub fn deviation_pct(&self) -> Option<f64> {
        self.deviation_min()
            .map(|d| d / self.reference_time_to_full_min * 100.0)
    }
}

pub fn calibrate(cfg: &SimConfig) -> CalibrationReport {
    let load = cfg.table.total_power(&MaskSet::ALL_ON);
    let lit = cfg.orbit.insolation_min();
    let dark = cfg.orbit.eclipse_min();
    let surplus = cfg.gen.insolation_power_kw - load;
    let bat = &cfg.battery;

    // signed battery power during insolation, + = charging
    let lit_kw = if surplus >= 0.0 {
        bat.max_charge_kw.map_or(surplus, |m| surplus.min(m))
    } else {
        -bat.max_discharge_kw.map_or(-surplus, |m| (-surplus).min(m))
    };
    let dark_kw = bat.max_discharge_kw.map_or(load, |m| load.min(m));

    let insolation_gain_kwh = lit_kw * lit / 60.0;
    let eclipse_drain_kwh = dark_kw * dark / 60.0;

    CalibrationReport {
        full_load_kw: load,
        insolation_min: lit,
        eclipse_min: dark,
        insolation_gain_kwh,
        eclipse_drain_kwh,
        per_orbit_net_kwh: insolation_gain_kwh - eclipse_drain_kwh,
        predicted_time_to_full_min: predict_time_to_full(
            cfg,
            lit_kw,
            insolation_gain_kwh,
            eclipse_drain_kwh,
        ),
        reference_time_to_full_min: REFERENCE_TIME_TO_FULL_MIN,
    }
}

fn predict_time_to_full(
    cfg: &SimConfig,
    lit_kw: f64,
    gain_kwh: f64,
    drain_kwh: f64,
) -> Option<f64> {
    let cap = cfg.battery.capacity_kwh;
    let mut stored = cfg.battery.initial_soc / 100.0 * cap;
    if stored >= cap {
        return Some(0.0);
    }
    let mut orbit = 0.0;
    loop {
        let start = stored;
        if lit_kw > 0.0 && stored + gain_kwh >= cap {
            return Some(orbit * cfg.orbit.period_min + (cap - stored) / lit_kw * 60.0);
        }
        stored = (stored + gain_kwh).max(0.0);
        stored = (stored - drain_kwh).max(0.0);
        // the orbit map is monotone: no progress now means none later
        if stored <= start {
            return None;
        }
        orbit += 1.0;
    }
}
