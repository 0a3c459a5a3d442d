#![allow(dead_code)]

use simiss::engine::{run, SimConfig, Summary, Trace};
use simiss::powerplant::builtin_schedule;

pub const TOL: f64 = 1e-9;

pub fn scenario(name: &str, controller: bool) -> SimConfig {
    let mut cfg = SimConfig {
        schedule: builtin_schedule(name).unwrap(),
        ..SimConfig::default()
    };
    cfg.controller.enabled = controller;
    cfg
}

pub fn run_scenario(name: &str, controller: bool) -> (Trace, Summary) {
    run(&scenario(name, controller)).unwrap()
}

/// The four runs the acceptance criteria refer to.
pub fn all_runs() -> Vec<(&'static str, SimConfig)> {
    vec![
        ("ideal/off", scenario("ideal", false)),
        ("catastrophic/off", scenario("catastrophic", false)),
        ("catastrophic/on", scenario("catastrophic", true)),
        ("breaking-point/on", scenario("breaking-point", true)),
    ]
}

/// Prints the verdict line and fails the test when `ok` is false.
pub fn report(n: u32, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {n}: {verdict}  {detail}");
    assert!(ok, "criterion {n} failed: {detail}");
}
