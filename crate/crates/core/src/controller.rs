//! Tiered state-of-charge load controller.
//!
//! The controller is a pure threshold function of battery SoC, evaluated
//! once per step with no memory of the previous tier:
//!
//! | SoC band                 | tier | masks             |
//! |--------------------------|------|-------------------|
//! | `soc < low`              | LOW  | 255,255,255,255   |
//! | `low <= soc < high`      | MID  | configurable      |
//! | `soc >= high`            | FULL | 0,0,0,0           |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loadbank::{ChannelMask, LoadTable, MaskSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Tier {
    Full,
    Mid,
    Low,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::Full, Tier::Mid, Tier::Low];

    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Full => "FULL",
            Tier::Mid => "MID",
            Tier::Low => "LOW",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Tier {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "FULL" => Ok(Tier::Full),
            "MID" => Ok(Tier::Mid),
            "LOW" => Ok(Tier::Low),
            other => Err(format!("unknown tier `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TierMasks {
    pub full: MaskSet,
    pub mid: MaskSet,
    pub low: MaskSet,
}

impl TierMasks {
    /// FULL and LOW are fixed; only the MID set varies between load tables.
    pub fn with_mid(mid: MaskSet) -> Self {
        TierMasks {
            full: MaskSet::ALL_ON,
            mid,
            low: MaskSet::ALL_OFF,
        }
    }

    pub fn get(&self, tier: Tier) -> MaskSet {
        match tier {
            Tier::Full => self.full,
            Tier::Mid => self.mid,
            Tier::Low => self.low,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    pub low_threshold: f64,
    pub high_threshold: f64,
    pub tier_masks: TierMasks,
    pub enabled: bool,
}

impl ControllerConfig {
    pub const DEFAULT_LOW: f64 = 40.0;
    pub const DEFAULT_HIGH: f64 = 80.0;

    /// Default thresholds with MID masks derived from `table`.
    pub fn for_table(table: &LoadTable) -> Result<Self> {
        Ok(ControllerConfig {
            low_threshold: Self::DEFAULT_LOW,
            high_threshold: Self::DEFAULT_HIGH,
            tier_masks: default_tier_masks(table)?,
            enabled: true,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = (self.low_threshold, self.high_threshold);
        if !(lo.is_finite() && lo > 0.0) {
            return Err(Error::range("controller.low_threshold", "must be > 0"));
        }
        if !(hi.is_finite() && hi <= 100.0) {
            return Err(Error::range("controller.high_threshold", "must be <= 100"));
        }
        if lo >= hi {
            return Err(Error::range(
                "controller.high_threshold",
                format!("must exceed controller.low_threshold ({lo})"),
            ));
        }
        if self.tier_masks.full != MaskSet::ALL_ON || self.tier_masks.low != MaskSet::ALL_OFF {
            return Err(Error::Config(
                "FULL tier masks must be 0,0,0,0 and LOW tier masks 255,255,255,255".into(),
            ));
        }
        Ok(())
    }
}

fn check_soc(soc: f64) -> Result<()> {
    if (0.0..=100.0).contains(&soc) {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "state of charge {soc} is outside 0..=100"
        )))
    }
}

pub fn tier_of(soc: f64, cfg: &ControllerConfig) -> Result<Tier> {
    check_soc(soc)?;
    Ok(if soc < cfg.low_threshold {
        Tier::Low
    } else if soc < cfg.high_threshold {
        Tier::Mid
    } else {
        Tier::Full
    })
}

pub fn control(soc: f64, cfg: &ControllerConfig) -> Result<(Tier, MaskSet)> {
    if !cfg.enabled {
        check_soc(soc)?;
        return Ok((Tier::Full, MaskSet::ALL_ON));
    }
    let tier = tier_of(soc, cfg)?;
    Ok((tier, cfg.tier_masks.get(tier)))
}

/// Loads shed in the MID tier, per channel.
pub const MID_SHED_SET: [&[&str]; 4] = [
    &["Robotic Workstation", "Robotic Arm"],
    &["Robotic Workstation", "Robotic Arm"],
    &[
        "Experiment U.S. 1",
        "Experiment Russian 3",
        "Experiment Japan 1",
    ],
    &["Experiment U.S. 4", "Experiment Japan 3"],
];

pub fn default_tier_masks(table: &LoadTable) -> Result<TierMasks> {
    let mut mid = [ChannelMask::ALL_ON; 4];
    for ((slot, ch), names) in mid.iter_mut().zip(table.channels()).zip(MID_SHED_SET) {
        let mut bits = Vec::with_capacity(names.len());
        for name in names {
            let bit = ch.bit_of(name).ok_or_else(|| {
                Error::Config(format!(
                    "channel {} has no switchable load `{name}`; set controller.mid_masks explicitly",
                    ch.id()
                ))
            })?;
            bits.push(bit);
        }
        *slot = ChannelMask::from_bits(bits);
    }
    Ok(TierMasks::with_mid(MaskSet(mid)))
}
