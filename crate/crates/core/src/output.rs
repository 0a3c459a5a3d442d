//! Trace CSV and summary JSON.
//!
//! Floats are written with Rust's shortest round-trip formatting, so parsing
//! a trace back yields bit-identical values.

use std::io;

use crate::engine::{Summary, TraceRow};

pub const TRACE_COLUMNS: [&str; 21] = [
    "t_min",
    "phase",
    "scale",
    "available_kw",
    "delivered_kw",
    "curtailed_kw",
    "pv_voltage_v",
    "pv_current_a",
    "tier",
    "mask_ch1",
    "mask_ch2",
    "mask_ch3",
    "mask_ch4",
    "load_kw",
    "ch1_kw",
    "ch2_kw",
    "ch3_kw",
    "ch4_kw",
    "batt_flow_kw",
    "soc_percent",
    "unserved_kw",
];

fn record(r: &TraceRow) -> Vec<String> {
    let mut v = Vec::with_capacity(TRACE_COLUMNS.len());
    v.push(r.t_min.to_string());
    v.push(r.phase.to_string());
    for x in [
        r.scale,
        r.available_kw,
        r.delivered_kw,
        r.curtailed_kw,
        r.pv_voltage_v,
        r.pv_current_a,
    ] {
        v.push(x.to_string());
    }
    v.push(r.tier.to_string());
    v.extend(r.masks.iter().map(u8::to_string));
    v.push(r.load_kw.to_string());
    v.extend(r.channel_kw.iter().map(f64::to_string));
    for x in [r.batt_flow_kw, r.soc_percent, r.unserved_kw] {
        v.push(x.to_string());
    }
    v
}

pub fn write_trace_csv<W: io::Write>(rows: &[TraceRow], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TRACE_COLUMNS)?;
    for r in rows {
        w.write_record(record(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn trace_csv_bytes(rows: &[TraceRow]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_trace_csv(rows, &mut buf).expect("writing to memory cannot fail");
    buf
}

pub fn read_trace_csv<R: io::Read>(reader: R) -> Result<Vec<TraceRow>, String> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().ne(TRACE_COLUMNS) {
        return Err("trace header does not match the expected column order".into());
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let line = i + 2;
        let f = |j: usize| -> Result<f64, String> {
            rec[j]
                .parse::<f64>()
                .map_err(|_| format!("line {line}: `{}` is not a number", &rec[j]))
        };
        let m = |j: usize| -> Result<u8, String> {
            rec[j]
                .parse::<u8>()
                .map_err(|_| format!("line {line}: `{}` is not a mask", &rec[j]))
        };
        rows.push(TraceRow {
            t_min: f(0)?,
            phase: rec[1].parse().map_err(|e| format!("line {line}: {e}"))?,
            scale: f(2)?,
            available_kw: f(3)?,
            delivered_kw: f(4)?,
            curtailed_kw: f(5)?,
            pv_voltage_v: f(6)?,
            pv_current_a: f(7)?,
            tier: rec[8].parse().map_err(|e| format!("line {line}: {e}"))?,
            masks: [m(9)?, m(10)?, m(11)?, m(12)?],
            load_kw: f(13)?,
            channel_kw: [f(14)?, f(15)?, f(16)?, f(17)?],
            batt_flow_kw: f(18)?,
            soc_percent: f(19)?,
            unserved_kw: f(20)?,
        });
    }
    Ok(rows)
}

pub fn summary_json(summary: &Summary) -> String {
    serde_json::to_string_pretty(summary).expect("summary serializes")
}

/// Human-readable summary table.
pub fn summary_table(s: &Summary) -> String {
    let ttf = s
        .time_to_full_min
        .map_or_else(|| "never".to_string(), |t| format!("{t:.1} min"));
    let mut out = String::new();
    let mut line = |k: &str, v: String| out.push_str(&format!("{k:<20} {v}\n"));
    line("time to full", ttf);
    line("min SoC", format!("{:.3} %", s.min_soc));
    line("final SoC", format!("{:.3} %", s.final_soc));
    line("FULL tier", format!("{:.1} min", s.tier_minutes.full));
    line("MID tier", format!("{:.1} min", s.tier_minutes.mid));
    line("LOW tier", format!("{:.1} min", s.tier_minutes.low));
    line("tier transitions", s.tier_transitions.to_string());
    line("unserved energy", format!("{:.3} kWh", s.unserved_kwh));
    line("curtailed energy", format!("{:.3} kWh", s.curtailed_kwh));
    line(
        "sustainable",
        if s.sustainable { "yes" } else { "no" }.to_string(),
    );
    out
}
