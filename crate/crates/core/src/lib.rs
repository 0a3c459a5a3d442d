//! Discrete-time simulator of the ISS U.S.-segment electrical power system.
//!
//! Solar arrays feed a four-channel switched load bank and a battery. A
//! state-of-charge driven controller sheds nonessential loads in three tiers
//! while scripted generation-failure scenarios degrade the arrays. Runs emit
//! per-step traces and end-of-run sustainability metrics.
//!
//! Each step is ordered as: sense SoC, pick masks, compute load, split the
//! available generation between load and battery, integrate the battery.

pub mod battery;
pub mod calibration;
pub mod cli;
pub mod config;
pub mod controller;
pub mod engine;
pub mod error;
pub mod loadbank;
pub mod output;
pub mod powerplant;

pub use error::{Error, Result};
