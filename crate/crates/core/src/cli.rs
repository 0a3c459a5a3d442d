//! `simiss` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or scenario error, 3 unsustainable
//! run with `--fail-on-unsustainable`, 4 I/O failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::calibration::calibrate;
use crate::config::parse_config_in;
use crate::engine::{self, SimConfig};
use crate::error::{Error, Result};
use crate::loadbank::{builtin_iss_table, LoadTable, MaskSet};
use crate::output;
use crate::powerplant::{builtin_schedule, GenerationSchedule};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_UNSUSTAINABLE: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "simiss",
    version,
    about = "Space-station power system simulator with tiered load shedding"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a closed-loop simulation and write the trace.
    Run(RunArgs),
    /// Print per-channel and total load for a mask set.
    Loads(LoadsArgs),
    /// Print the closed-form base-case charge prediction.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// ideal, catastrophic, breaking-point, or file:<path> to a start_min,scale CSV
    #[arg(long)]
    pub scenario: String,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub controller: Option<Switch>,
    #[arg(long)]
    pub duration_min: Option<f64>,
    #[arg(long)]
    pub dt_min: Option<f64>,
    /// Trace CSV destination.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub summary_json: Option<PathBuf>,
    /// Exit with status 3 when the run is not sustainable.
    #[arg(long)]
    pub fail_on_unsustainable: bool,
}

#[derive(Debug, clap::Args)]
pub struct LoadsArgs {
    #[arg(long, default_value = "0,0,0,0")]
    pub masks: MaskSet,
    /// Load-table CSV (channel,name,power_kw,essential); defaults to the ISS table.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn exit_code(err: &Error) -> i32 {
    if err.is_io() {
        EXIT_IO
    } else {
        EXIT_CONFIG
    }
}

fn load_config(path: Option<&Path>) -> Result<SimConfig> {
    match path {
        None => Ok(SimConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            let base = p.parent().unwrap_or(Path::new("."));
            parse_config_in(&text, base)
        }
    }
}

pub fn resolve_scenario(spec: &str) -> Result<GenerationSchedule> {
    match spec.strip_prefix("file:") {
        Some(path) => GenerationSchedule::from_csv_path(Path::new(path)),
        None => builtin_schedule(spec),
    }
}

fn build_run_config(args: &RunArgs) -> Result<SimConfig> {
    let mut cfg = load_config(args.config.as_deref())?;
    cfg.schedule = resolve_scenario(&args.scenario)?;
    if let Some(sw) = args.controller {
        cfg.controller.enabled = sw == Switch::On;
    }
    if let Some(d) = args.duration_min {
        cfg.duration_min = d;
    }
    if let Some(dt) = args.dt_min {
        cfg.dt_min = dt;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_sim(args: &RunArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = build_run_config(args)?;
    let (trace, summary) = engine::run(&cfg)?;

    let file = fs::File::create(&args.out).map_err(|e| Error::io(&args.out, e))?;
    output::write_trace_csv(&trace.rows, std::io::BufWriter::new(file))
        .map_err(|e| Error::io(&args.out, std::io::Error::other(e.to_string())))?;
    if let Some(path) = &args.summary_json {
        fs::write(path, output::summary_json(&summary)).map_err(|e| Error::io(path, e))?;
    }

    let _ = write!(out, "{}", output::summary_table(&summary));
    if args.fail_on_unsustainable && !summary.sustainable {
        return Ok(EXIT_UNSUSTAINABLE);
    }
    Ok(EXIT_OK)
}

fn run_loads(args: &LoadsArgs, out: &mut dyn Write) -> Result<i32> {
    let table = match &args.table {
        Some(p) => LoadTable::from_csv_path(p)?,
        None => builtin_iss_table(),
    };
    let powers = table.channel_powers(&args.masks);
    let _ = writeln!(out, "{:<10} {:>5} {:>10}", "channel", "mask", "power_kw");
    for (ch, (p, m)) in table
        .channels()
        .iter()
        .zip(powers.iter().zip(args.masks.values()))
    {
        let _ = writeln!(out, "{:<10} {:>5} {:>10.3}", ch.id(), m, p);
    }
    let _ = writeln!(
        out,
        "{:<10} {:>5} {:>10.3}",
        "total",
        "",
        table.total_power(&args.masks)
    );
    let _ = writeln!(
        out,
        "{:<10} {:>5} {:>10.3}",
        "essential",
        "",
        table.essential_kw()
    );
    let _ = writeln!(
        out,
        "{:<10} {:>5} {:>10.3}",
        "shed",
        "",
        table.total_kw() - table.total_power(&args.masks)
    );
    Ok(EXIT_OK)
}

fn run_calibrate(args: &CalibrateArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = load_config(args.config.as_deref())?;
    let r = calibrate(&cfg);
    let _ = writeln!(out, "full load            {:.3} kW", r.full_load_kw);
    let _ = writeln!(
        out,
        "orbit                {:.1} min lit / {:.1} min eclipse",
        r.insolation_min, r.eclipse_min
    );
    let _ = writeln!(
        out,
        "insolation gain      {:+.3} kWh",
        r.insolation_gain_kwh
    );
    let _ = writeln!(out, "eclipse drain        {:.3} kWh", r.eclipse_drain_kwh);
    let _ = writeln!(out, "net per orbit        {:+.3} kWh", r.per_orbit_net_kwh);
    match (
        r.predicted_time_to_full_min,
        r.deviation_min(),
        r.deviation_pct(),
    ) {
        (Some(t), Some(d), Some(p)) => {
            let _ = writeln!(
                out,
                "predicted full at    {t:.1} min ({:.2} orbits)",
                t / cfg.orbit.period_min
            );
            let _ = writeln!(
                out,
                "vs reference         {:.0} min: {d:+.1} min ({p:+.2} %)",
                r.reference_time_to_full_min
            );
        }
        _ => {
            let _ = writeln!(out, "predicted full at    never reaches full");
        }
    }
    Ok(EXIT_OK)
}

/// Executes a parsed invocation; errors are reported on `err`.
pub fn run_command(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let res = match &cli.command {
        Command::Run(a) => run_sim(a, out),
        Command::Loads(a) => run_loads(a, out),
        Command::Calibrate(a) => run_calibrate(a, out),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Parses `args` (including the program name) and executes them.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run_command(&cli, out, err),
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_CONFIG
                }
            }
        }
    }
}
