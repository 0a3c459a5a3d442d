//! Lossless battery integrated with explicit Euler steps.
//!
//! SoC is kept in percent of `capacity_kwh`. Charging stops exactly at 100 %
//! and discharging exactly at 0 %; the power that does not fit is handed back
//! to the caller (curtailment or unserved load).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryConfig {
    pub capacity_kwh: f64,
    pub initial_soc: f64,
    pub max_charge_kw: Option<f64>,
    pub max_discharge_kw: Option<f64>,
}

impl Default for BatteryConfig {
    /// Capacity and initial SoC are calibrated so the ideal, uncontrolled
    /// run first reaches full charge inside the ninth orbit.
    fn default() -> Self {
        BatteryConfig {
            capacity_kwh: 256.0,
            initial_soc: 55.0,
            max_charge_kw: None,
            max_discharge_kw: None,
        }
    }
}

impl BatteryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.capacity_kwh.is_finite() && self.capacity_kwh > 0.0) {
            return Err(Error::range("battery.capacity_kwh", "must be > 0"));
        }
        if !(0.0..=100.0).contains(&self.initial_soc) {
            return Err(Error::range("battery.initial_soc", "must be in 0..=100"));
        }
        for (key, lim) in [
            ("battery.max_charge_kw", self.max_charge_kw),
            ("battery.max_discharge_kw", self.max_discharge_kw),
        ] {
            if let Some(v) = lim {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::range(key, "must be > 0 when set"));
                }
            }
        }
        Ok(())
    }

    /// kWh per SoC percentage point.
    fn kwh_per_percent(&self) -> f64 {
        self.capacity_kwh / 100.0
    }

    pub fn initial_state(&self) -> BatteryState {
        BatteryState {
            soc: self.initial_soc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryState {
    pub soc: f64,
}

impl BatteryState {
    pub fn energy_kwh(&self, cfg: &BatteryConfig) -> f64 {
        self.soc * cfg.kwh_per_percent()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discharge {
    pub state: BatteryState,
    pub delivered_kw: f64,
    pub shortfall_kw: f64,
}

fn check_step(power_kw: f64, dt_min: f64, what: &str) -> Result<()> {
    if !(power_kw.is_finite() && power_kw >= 0.0) {
        return Err(Error::Input(format!(
            "{what} power {power_kw} kW must be >= 0"
        )));
    }
    if !(dt_min.is_finite() && dt_min > 0.0) {
        return Err(Error::Input(format!("time step {dt_min} min must be > 0")));
    }
    Ok(())
}

/// Returns the new state and the accepted charging power.
pub fn charge(
    state: BatteryState,
    offered_kw: f64,
    dt_min: f64,
    cfg: &BatteryConfig,
) -> Result<(BatteryState, f64)> {
    check_step(offered_kw, dt_min, "offered")?;
    let hours = dt_min / 60.0;
    let headroom_kw = (100.0 - state.soc) * cfg.kwh_per_percent() / hours;
    let limit = cfg.max_charge_kw.map_or(offered_kw, |m| offered_kw.min(m));
    if limit >= headroom_kw {
        return Ok((BatteryState { soc: 100.0 }, headroom_kw.max(0.0)));
    }
    let soc = state.soc + limit * hours / cfg.kwh_per_percent();
    Ok((
        BatteryState {
            soc: soc.min(100.0),
        },
        limit,
    ))
}

pub fn discharge(
    state: BatteryState,
    requested_kw: f64,
    dt_min: f64,
    cfg: &BatteryConfig,
) -> Result<Discharge> {
    check_step(requested_kw, dt_min, "requested")?;
    let hours = dt_min / 60.0;
    let stored_kw = state.soc * cfg.kwh_per_percent() / hours;
    let limit = cfg
        .max_discharge_kw
        .map_or(requested_kw, |m| requested_kw.min(m));
    let (soc, delivered_kw) = if limit >= stored_kw {
        (0.0, stored_kw.max(0.0))
    } else {
        let soc = state.soc - limit * hours / cfg.kwh_per_percent();
        (soc.max(0.0), limit)
    };
    Ok(Discharge {
        state: BatteryState { soc },
        delivered_kw,
        shortfall_kw: requested_kw - delivered_kw,
    })
}
