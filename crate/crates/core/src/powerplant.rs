//! Solar-array generation over insolation/eclipse phases with scripted
//! degradation, plus derived PV bus telemetry.

use std::fmt;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitConfig {
    pub period_min: f64,
    pub insolation_fraction: f64,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        OrbitConfig {
            period_min: 92.0,
            insolation_fraction: 0.70,
        }
    }
}

impl OrbitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.period_min.is_finite() && self.period_min > 0.0) {
            return Err(Error::range("orbit.period_min", "must be > 0"));
        }
        let f = self.insolation_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::range(
                "orbit.insolation_fraction",
                "must be in (0, 1)",
            ));
        }
        Ok(())
    }

    pub fn insolation_min(&self) -> f64 {
        self.insolation_fraction * self.period_min
    }

    pub fn eclipse_min(&self) -> f64 {
        self.period_min - self.insolation_min()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationConfig {
    pub insolation_power_kw: f64,
    pub bus_voltage_v: f64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            insolation_power_kw: 120.0,
            bus_voltage_v: 160.0,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.insolation_power_kw.is_finite() && self.insolation_power_kw > 0.0) {
            return Err(Error::range(
                "generation.insolation_power_kw",
                "must be > 0",
            ));
        }
        if !(self.bus_voltage_v.is_finite() && self.bus_voltage_v > 0.0) {
            return Err(Error::range("generation.bus_voltage_v", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Insolation,
    Eclipse,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Insolation => "insolation",
            Phase::Eclipse => "eclipse",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "insolation" => Ok(Phase::Insolation),
            "eclipse" => Ok(Phase::Eclipse),
            other => Err(format!("unknown phase `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub start_min: f64,
    pub scale: f64,
}

/// Right-continuous step function of time; the last step holds forever.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationSchedule {
    steps: Vec<ScheduleStep>,
}

impl GenerationSchedule {
    pub fn new(steps: Vec<ScheduleStep>) -> Result<Self> {
        let first = steps
            .first()
            .ok_or_else(|| Error::Config("generation schedule is empty".into()))?;
        if first.start_min != 0.0 {
            return Err(Error::Config(format!(
                "generation schedule must start at 0, starts at {}",
                first.start_min
            )));
        }
        for (i, s) in steps.iter().enumerate() {
            if !(0.0..=1.0).contains(&s.scale) {
                return Err(Error::Config(format!(
                    "schedule step {}: scale {} is outside [0, 1]",
                    i + 1,
                    s.scale
                )));
            }
            if !s.start_min.is_finite() {
                return Err(Error::Config(format!(
                    "schedule step {}: start is not finite",
                    i + 1
                )));
            }
        }
        if let Some(w) = steps.windows(2).find(|w| w[1].start_min <= w[0].start_min) {
            return Err(Error::Config(format!(
                "schedule start times must be strictly increasing ({} then {})",
                w[0].start_min, w[1].start_min
            )));
        }
        Ok(GenerationSchedule { steps })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(start_min, scale)| ScheduleStep { start_min, scale })
                .collect(),
        )
    }

    pub fn steps(&self) -> &[ScheduleStep] {
        &self.steps
    }

    /// Reads the `start_min,scale` CSV format.
    pub fn from_csv_reader<R: io::Read>(reader: R) -> std::result::Result<Self, String> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
        if headers.iter().ne(["start_min", "scale"]) {
            return Err(format!(
                "expected header `start_min,scale`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ));
        }
        let steps = rdr
            .deserialize::<ScheduleStep>()
            .enumerate()
            .map(|(i, r)| r.map_err(|e| format!("row {}: {e}", i + 1)))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        GenerationSchedule::new(steps).map_err(|e| e.to_string())
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        GenerationSchedule::from_csv_reader(file).map_err(|msg| Error::Parse {
            path: path.to_path_buf(),
            msg,
        })
    }

    /// Index of the step in force at `t`.
    fn index_at(&self, t: f64) -> usize {
        self.steps
            .partition_point(|s| s.start_min <= t)
            .saturating_sub(1)
    }
}

pub fn orbit_phase(t: f64, orbit: &OrbitConfig) -> Phase {
    if t.rem_euclid(orbit.period_min) < orbit.insolation_min() {
        Phase::Insolation
    } else {
        Phase::Eclipse
    }
}

pub fn scenario_scale(t: f64, schedule: &GenerationSchedule) -> f64 {
    schedule.steps[schedule.index_at(t)].scale
}

/// Instantaneous array output at `t`.
pub fn available_power(
    t: f64,
    orbit: &OrbitConfig,
    gen: &GenerationConfig,
    schedule: &GenerationSchedule,
) -> f64 {
    match orbit_phase(t, orbit) {
        Phase::Insolation => gen.insolation_power_kw * scenario_scale(t, schedule),
        Phase::Eclipse => 0.0,
    }
}

/// Sunlit minutes in `[0, t)`.
fn cumulative_sunlit(t: f64, orbit: &OrbitConfig) -> f64 {
    let orbits = (t / orbit.period_min).floor();
    let into = t - orbits * orbit.period_min;
    orbits * orbit.insolation_min() + into.min(orbit.insolation_min())
}

/// Sunlit minutes in `[t0, t1)`.
pub fn sunlit_minutes(t0: f64, t1: f64, orbit: &OrbitConfig) -> f64 {
    if t1 <= t0 {
        return 0.0;
    }
    let base = (t0 / orbit.period_min).floor() * orbit.period_min;
    let (a, b) = (t0 - base, t1 - base);
    if b <= orbit.period_min {
        // both ends inside one orbit
        let lit = orbit.insolation_min();
        return if b <= lit {
            t1 - t0
        } else if a >= lit {
            0.0
        } else {
            lit - a
        };
    }
    (cumulative_sunlit(t1, orbit) - cumulative_sunlit(t0, orbit)).max(0.0)
}

/// Mean array output over `[t, t + dt)`, integrating phase changes and
/// schedule breakpoints that fall inside the step. Equals
/// [`available_power`] when the step lies within one phase and one
/// schedule step.
pub fn step_available_power(
    t: f64,
    dt: f64,
    orbit: &OrbitConfig,
    gen: &GenerationConfig,
    schedule: &GenerationSchedule,
) -> f64 {
    let end = t + dt;
    let steps = schedule.steps();
    let mut weighted = 0.0;
    for i in schedule.index_at(t)..steps.len() {
        let a = steps[i].start_min.max(t);
        if a >= end {
            break;
        }
        let b = steps.get(i + 1).map_or(end, |n| n.start_min.min(end));
        weighted += steps[i].scale * sunlit_minutes(a, b, orbit);
    }
    let mean = gen.insolation_power_kw * weighted / dt;
    mean.clamp(0.0, gen.insolation_power_kw)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvElectricals {
    pub power_kw: f64,
    pub voltage_v: f64,
    pub current_a: f64,
}

/// Bus voltage is nominal while illuminated and zero in eclipse; only the
/// current follows delivered power.
pub fn pv_electricals(delivered_kw: f64, phase: Phase, gen: &GenerationConfig) -> PvElectricals {
    let voltage_v = match phase {
        Phase::Insolation => gen.bus_voltage_v,
        Phase::Eclipse => 0.0,
    };
    let current_a = if voltage_v > 0.0 {
        delivered_kw * 1000.0 / voltage_v
    } else {
        0.0
    };
    PvElectricals {
        power_kw: delivered_kw,
        voltage_v,
        current_a,
    }
}

pub const BUILTIN_SCENARIOS: [&str; 3] = ["ideal", "catastrophic", "breaking-point"];

const CATASTROPHIC: [(f64, f64); 6] = [
    (0.0, 1.0),
    (200.0, 0.9),
    (400.0, 0.8),
    (600.0, 0.7),
    (800.0, 0.6),
    (1000.0, 0.5),
];

pub fn builtin_schedule(name: &str) -> Result<GenerationSchedule> {
    let pairs: Vec<(f64, f64)> = match name {
        "ideal" => vec![(0.0, 1.0)],
        "catastrophic" => CATASTROPHIC.to_vec(),
        "breaking-point" => {
            let mut v = CATASTROPHIC.to_vec();
            v.push((1200.0, 0.3));
            v
        }
        other => return Err(Error::UnknownScenario(other.to_string())),
    };
    Ok(GenerationSchedule::from_pairs(&pairs).expect("builtin schedules are valid"))
}

pub fn builtin_schedules() -> Vec<(&'static str, GenerationSchedule)> {
    BUILTIN_SCENARIOS
        .iter()
        .map(|&n| (n, builtin_schedule(n).expect("builtin")))
        .collect()
}
