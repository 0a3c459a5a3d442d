//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line;
//! run with `--nocapture` to see them.

mod common;

use std::time::{Duration, Instant};

use common::{all_runs, report, run_scenario, scenario, TOL};
use simiss::controller::Tier;
use simiss::engine::{run, simulate};
use simiss::loadbank::{builtin_iss_table, ChannelMask, MaskSet};
use simiss::output::trace_csv_bytes;

// Table I in watts, in table order; `true` marks an essential load.
const CH12: [(i64, bool); 11] = [
    (6645, true),
    (1605, false),
    (1200, true),
    (575, true),
    (820, true),
    (470, true),
    (1080, false),
    (385, true),
    (895, false),
    (3210, false),
    (1150, true),
];
const CH3: [(i64, bool); 8] = [
    (6645, true),
    (535, false),
    (720, false),
    (4250, false),
    (2275, false),
    (2715, false),
    (1845, false),
    (1985, false),
];
const CH4: [(i64, bool); 8] = [
    (6645, true),
    (1070, false),
    (360, false),
    (3005, false),
    (2260, false),
    (3200, false),
    (920, false),
    (3460, false),
];

fn table_watts() -> [&'static [(i64, bool)]; 4] {
    [&CH12, &CH12, &CH3, &CH4]
}

/// Brute force over the raw table: the k-th switchable row is on iff bit k
/// of the mask is clear.
fn oracle_watts(rows: &[(i64, bool)], mask: u8) -> i64 {
    let mut k = 0;
    let mut sum = 0;
    for &(w, essential) in rows {
        if essential {
            sum += w;
        } else {
            if mask & (1 << k) == 0 {
                sum += w;
            }
            k += 1;
        }
    }
    sum
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}

#[test]
fn criterion_1_equation_suite() {
    let start = Instant::now();
    let table = builtin_iss_table();
    let ch = table.channels();
    let mid = scenario("ideal", true).controller.tier_masks.mid;

    let checks = [
        (
            "essential ch1+ch2",
            ch[0].essential_kw() + ch[1].essential_kw(),
            22.49,
        ),
        (
            "essential ch3+ch4",
            ch[2].essential_kw() + ch[3].essential_kw(),
            13.290,
        ),
        ("essential total", table.essential_kw(), 35.78),
        ("all loads off", table.total_power(&MaskSet::ALL_OFF), 35.78),
        ("all loads on", table.total_power(&MaskSet::ALL_ON), 77.96),
        (
            "MID shed",
            table.total_kw() - table.total_power(&mid),
            22.010,
        ),
        ("MID total", table.total_power(&mid), 55.95),
    ];
    let elapsed = start.elapsed();
    let bad: Vec<String> = checks
        .iter()
        .filter(|(_, got, want)| !close(*got, *want))
        .map(|(name, got, want)| format!("{name}={got} want {want}"))
        .collect();
    let ok = bad.is_empty() && elapsed < Duration::from_secs(1);
    report(
        1,
        ok,
        &format!(
            "{} equations, {} off, {:?}",
            checks.len(),
            bad.len(),
            elapsed
        ),
    );
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn criterion_2_mask_oracle() {
    let table = builtin_iss_table();
    let mut cases = 0;
    let mut mismatches = Vec::new();
    for (spec, rows) in table.channels().iter().zip(table_watts()) {
        for m in 0..=255u8 {
            cases += 1;
            let got = spec.power(ChannelMask(m));
            let want = oracle_watts(rows, m) as f64 / 1000.0;
            if !close(got, want) {
                mismatches.push((spec.id(), m, got, want));
            }
        }
    }
    report(
        2,
        cases == 1024 && mismatches.is_empty(),
        &format!("{cases} cases, {} mismatches", mismatches.len()),
    );
}

#[test]
fn criterion_3_base_case_calibration() {
    let cfg = scenario("ideal", false);
    let start = Instant::now();
    let (trace, summary) = run(&cfg).unwrap();
    let elapsed = start.elapsed();

    let ttf = summary.time_to_full_min;
    let in_band = ttf.is_some_and(|t| (830.0 * 0.95..=830.0 * 1.05).contains(&t));
    let t_full = ttf.unwrap_or(f64::INFINITY);
    let later = trace.rows.iter().filter(|r| r.t_min >= t_full);
    let mut charged_at_full = 0;
    let mut overfull = 0;
    for r in later {
        if r.soc_percent == 100.0 && r.batt_flow_kw > 0.0 {
            charged_at_full += 1;
        }
        if r.soc_percent > 100.0 {
            overfull += 1;
        }
    }
    let ok = in_band && charged_at_full == 0 && overfull == 0 && elapsed < Duration::from_secs(1);
    report(
        3,
        ok,
        &format!(
            "time_to_full={ttf:?} (830 +/- 5%), charging-at-full rows={charged_at_full}, \
             rows above 100={overfull}, {} rows in {elapsed:?}",
            trace.rows.len()
        ),
    );
}

#[test]
fn criterion_4_catastrophic_without_controller() {
    let (trace, summary) = run_scenario("catastrophic", false);
    let means = trace.orbit_means();
    let period = trace.orbit_period_min;

    let peak = means
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let rising = means[..=peak].windows(2).all(|w| w[1] > w[0]);
    let raw_peak_t = trace
        .rows
        .iter()
        .max_by(|a, b| a.soc_percent.total_cmp(&b.soc_percent))
        .unwrap()
        .t_min;
    let empty_at = trace
        .rows
        .iter()
        .find(|r| r.soc_percent == 0.0)
        .map(|r| r.t_min);
    let last = empty_at.map_or(means.len() - 1, |t| {
        ((t / period).floor() as usize).min(means.len() - 1)
    });
    let falling = last > peak && means[peak..=last].windows(2).all(|w| w[1] < w[0]);

    let ok = rising
        && (peak as f64) * period < 400.0
        && raw_peak_t < 400.0
        && falling
        && empty_at.is_some_and(|t| t < 2000.0)
        && !summary.sustainable;
    report(
        4,
        ok,
        &format!(
            "peak orbit {peak} (raw max at {raw_peak_t} min), means falling through orbit {last}: {falling}, \
             empty at {empty_at:?}, sustainable={}",
            summary.sustainable
        ),
    );
}

#[test]
fn criterion_5_catastrophic_with_controller() {
    let (trace, summary) = run_scenario("catastrophic", true);
    let late: Vec<_> = trace.rows.iter().filter(|r| r.t_min >= 1000.0).collect();
    let lo = late
        .iter()
        .map(|r| r.soc_percent)
        .fold(f64::INFINITY, f64::min);
    let hi = late
        .iter()
        .map(|r| r.soc_percent)
        .fold(f64::NEG_INFINITY, f64::max);
    let in_band = (35.0..=45.0).contains(&lo) && (35.0..=45.0).contains(&hi);
    let alternations = late
        .windows(2)
        .filter(|w| {
            matches!(
                (w[0].tier, w[1].tier),
                (Tier::Low, Tier::Mid) | (Tier::Mid, Tier::Low)
            )
        })
        .count();
    let ok = in_band && alternations >= 3 && summary.unserved_kwh == 0.0;
    report(
        5,
        ok,
        &format!(
            "SoC after 1000 min in [{lo:.3}, {hi:.3}] (band 35..45: {in_band}), \
             LOW<->MID alternations={alternations}, unserved={} kWh",
            summary.unserved_kwh
        ),
    );
}

#[test]
fn criterion_6_breaking_point() {
    let (trace, summary) = run_scenario("breaking-point", true);
    let not_low = trace
        .rows
        .iter()
        .filter(|r| r.t_min >= 1400.0 && r.tier != Tier::Low)
        .count();
    let means = trace.orbit_means();
    let first = (1400.0 / trace.orbit_period_min).floor() as usize;
    let falling = first + 1 < means.len() && means[first..].windows(2).all(|w| w[1] < w[0]);
    let ok = not_low == 0 && falling && !summary.sustainable;
    report(
        6,
        ok,
        &format!(
            "non-LOW rows after 1400 min={not_low}, orbit means {first}..{} strictly falling: {falling}, \
             sustainable={}",
            means.len() - 1,
            summary.sustainable
        ),
    );
}

#[test]
fn criterion_7_conservation() {
    let mut worst_gen: f64 = 0.0;
    let mut worst_load: f64 = 0.0;
    let mut soc_out = 0;
    let mut rows = 0;
    for (_, cfg) in all_runs() {
        let trace = simulate(&cfg).unwrap();
        for r in &trace.rows {
            rows += 1;
            worst_gen = worst_gen.max(r.generation_residual().abs());
            worst_load = worst_load.max(r.load_residual().abs());
            if !(0.0..=100.0).contains(&r.soc_percent) {
                soc_out += 1;
            }
        }
    }
    let ok = worst_gen <= TOL && worst_load <= TOL && soc_out == 0;
    report(
        7,
        ok,
        &format!(
            "{rows} rows, max generation residual {worst_gen:e}, max load residual {worst_load:e}, \
             SoC out of range {soc_out}"
        ),
    );
}

#[test]
fn criterion_8_determinism_and_dt_refinement() {
    let mut identical = 0;
    let runs = all_runs();
    for (_, cfg) in &runs {
        let a = trace_csv_bytes(&simulate(cfg).unwrap().rows);
        let b = trace_csv_bytes(&simulate(cfg).unwrap().rows);
        if a == b {
            identical += 1;
        }
    }

    let mut coarse = scenario("ideal", false);
    coarse.dt_min = 1.0;
    let mut fine = coarse.clone();
    fine.dt_min = 0.5;
    let t1 = run(&coarse).unwrap().1.time_to_full_min;
    let t2 = run(&fine).unwrap().1.time_to_full_min;
    let shift = match (t1, t2) {
        (Some(a), Some(b)) => (a - b).abs(),
        _ => f64::INFINITY,
    };
    let ok = identical == runs.len() && shift < 92.0;
    report(
        8,
        ok,
        &format!(
            "{identical}/{} byte-identical reruns, time_to_full dt=1 {t1:?} vs dt=0.5 {t2:?} (shift {shift})",
            runs.len()
        ),
    );
}
