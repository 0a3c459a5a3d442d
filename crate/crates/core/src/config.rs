//! Line-oriented `key = value` configuration.
//!
//! ```text
//! # comments run to end of line
//! battery.capacity_kwh = 256
//! controller.mid_masks = 12,12,100,72
//! ```
//!
//! Unknown and repeated keys are rejected; absent keys keep their defaults.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::controller::{default_tier_masks, TierMasks};
use crate::engine::SimConfig;
use crate::error::{Error, Result};
use crate::loadbank::{builtin_iss_table, LoadTable, MaskSet};

pub const KEYS: [&str; 15] = [
    "orbit.period_min",
    "orbit.insolation_fraction",
    "generation.insolation_power_kw",
    "generation.bus_voltage_v",
    "battery.capacity_kwh",
    "battery.initial_soc",
    "battery.max_charge_kw",
    "battery.max_discharge_kw",
    "controller.low_threshold",
    "controller.high_threshold",
    "controller.mid_masks",
    "controller.enabled",
    "sim.duration_min",
    "sim.dt_min",
    "loadbank.table",
];

/// Parses config text; a `loadbank.table` path is resolved against the
/// current directory.
pub fn parse_config(text: &str) -> Result<SimConfig> {
    parse_config_in(text, Path::new("."))
}

/// Parses config text, resolving relative `loadbank.table` paths against
/// `base_dir`.
pub fn parse_config_in(text: &str, base_dir: &Path) -> Result<SimConfig> {
    let mut cfg = SimConfig::default();
    let mut seen = HashSet::new();
    let mut table_path: Option<PathBuf> = None;
    let mut mid_masks: Option<MaskSet> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Syntax {
            line: line_no,
            msg: format!("expected `key = value`, found `{line}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(Error::Syntax {
                line: line_no,
                msg: "empty key or value".into(),
            });
        }
        if !KEYS.contains(&key) {
            return Err(Error::UnknownKey(key.to_string()));
        }
        if !seen.insert(key.to_string()) {
            return Err(Error::Syntax {
                line: line_no,
                msg: format!("`{key}` is set more than once"),
            });
        }

        let num = || -> Result<f64> {
            value.parse::<f64>().map_err(|_| Error::Syntax {
                line: line_no,
                msg: format!("`{key}` expects a number, found `{value}`"),
            })
        };
        match key {
            "orbit.period_min" => cfg.orbit.period_min = num()?,
            "orbit.insolation_fraction" => cfg.orbit.insolation_fraction = num()?,
            "generation.insolation_power_kw" => cfg.gen.insolation_power_kw = num()?,
            "generation.bus_voltage_v" => cfg.gen.bus_voltage_v = num()?,
            "battery.capacity_kwh" => cfg.battery.capacity_kwh = num()?,
            "battery.initial_soc" => cfg.battery.initial_soc = num()?,
            "battery.max_charge_kw" => cfg.battery.max_charge_kw = Some(num()?),
            "battery.max_discharge_kw" => cfg.battery.max_discharge_kw = Some(num()?),
            "controller.low_threshold" => cfg.controller.low_threshold = num()?,
            "controller.high_threshold" => cfg.controller.high_threshold = num()?,
            "controller.mid_masks" => {
                mid_masks = Some(value.parse().map_err(|msg| Error::Syntax {
                    line: line_no,
                    msg: format!("`{key}`: {msg}"),
                })?)
            }
            "controller.enabled" => {
                cfg.controller.enabled = parse_switch(value).ok_or_else(|| Error::Syntax {
                    line: line_no,
                    msg: format!("`{key}` expects on/off or true/false, found `{value}`"),
                })?
            }
            "sim.duration_min" => cfg.duration_min = num()?,
            "sim.dt_min" => cfg.dt_min = num()?,
            "loadbank.table" => table_path = Some(base_dir.join(value)),
            _ => unreachable!("key list checked above"),
        }
    }

    if let Some(path) = table_path {
        cfg.table = LoadTable::from_csv_path(&path)?;
    }
    cfg.controller.tier_masks = match mid_masks {
        Some(mid) => TierMasks::with_mid(mid),
        None if cfg.table == builtin_iss_table() => cfg.controller.tier_masks,
        None => default_tier_masks(&cfg.table)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_switch(value: &str) -> Option<bool> {
    match value {
        "on" | "true" => Some(true),
        "off" | "false" => Some(false),
        _ => None,
    }
}
