//! Command layer behind the `quadctl` binary.
//!
//! Commands write their results to files or to the supplied writers and
//! return a process exit code: [`EXIT_OK`], [`EXIT_CONFIG`] for bad input
//! (nothing is written) and [`EXIT_DIVERGED`] when the simulation leaves
//! the valid state region.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde_json::{json, Map, Value};

use crate::config::{parse_config, RunConfig};
use crate::linearize;
use crate::riccati;
use crate::sim::{self, Controller, LqrController, Metrics, SimError, Trajectory};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const METRICS_FILE: &str = "metrics.json";
pub const COMPARISON_FILE: &str = "comparison.json";

pub const TRAJECTORY_HEADER: &str = "t,x,y,z,phi,theta,psi,xdot,ydot,zdot,p,q,r,u1,u2,u3,u4";

#[derive(Debug, Parser)]
#[command(name = "quadctl", version, about = "Quadrotor PID and LQR simulation toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one controller and write trajectory.csv and metrics.json.
    Run {
        /// JSON configuration; defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        controller: ControllerKind,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Simulate both controllers on the same scenario and write comparison.json.
    Compare {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print the hover A and B matrices as CSV, separated by a blank line.
    Linearize {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the 4x12 LQR gain as CSV.
    Gain {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ControllerKind {
    Pid,
    Lqr,
}

/// Parses `args` (program name first) and dispatches.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let config_path = match &cli.command {
        Command::Run { config, .. }
        | Command::Compare { config, .. }
        | Command::Linearize { config }
        | Command::Gain { config } => config.clone(),
    };
    let config = match load_config(config_path.as_deref()) {
        Ok(c) => c,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            return EXIT_CONFIG;
        }
    };
    match cli.command {
        Command::Run { controller, out: dir, .. } => cmd_run(&config, controller, &dir, err),
        Command::Compare { out: dir, .. } => cmd_compare(&config, &dir, err),
        Command::Linearize { .. } => cmd_linearize(&config, out, err),
        Command::Gain { .. } => cmd_gain(&config, out, err),
    }
}

/// Reads and validates a configuration file; `None` gives the defaults.
pub fn load_config(path: Option<&Path>) -> Result<RunConfig, String> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?,
        None => "{}".to_string(),
    };
    parse_config(&text).map_err(|e| e.to_string())
}

/// C `%.17g` formatting, with negative zero printed as `0`.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    const SIG: i32 = 17;
    let sci = format!("{:.*e}", (SIG - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..SIG).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        trim_fraction(&format!("{:.*}", (SIG - 1 - exp) as usize, v)).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_row(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(format_number).collect::<Vec<_>>().join(",")
}

pub fn write_trajectory_csv(w: &mut dyn Write, traj: &Trajectory) -> io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for ((t, x), u) in traj.times.iter().zip(&traj.states).zip(&traj.controls) {
        let row = std::iter::once(*t).chain(x.to_array()).chain(u.to_array());
        writeln!(w, "{}", csv_row(row))?;
    }
    Ok(())
}

pub fn write_matrix_csv(w: &mut dyn Write, m: &DMatrix<f64>) -> io::Result<()> {
    for row in m.row_iter() {
        writeln!(w, "{}", csv_row(row.iter().copied()))?;
    }
    Ok(())
}

/// Per-channel metrics keyed by channel name, in state order.
pub fn metrics_json(metrics: &[Metrics]) -> Value {
    let map: Map<String, Value> = metrics
        .iter()
        .map(|m| (m.channel.name().to_string(), serde_json::to_value(m).expect("metrics serialize")))
        .collect();
    Value::Object(map)
}

/// `b - a` for settling time, overshoot and peak count, per channel.
pub fn metric_deltas(a: &[Metrics], b: &[Metrics]) -> Value {
    let map: Map<String, Value> = a
        .iter()
        .zip(b)
        .map(|(a, b)| {
            debug_assert_eq!(a.channel, b.channel);
            let delta = json!({
                "settling_time": b.settling_time - a.settling_time,
                "overshoot": b.overshoot - a.overshoot,
                "peak_count": b.overshoot_peak_count as i64 - a.overshoot_peak_count as i64,
            });
            (a.channel.name().to_string(), delta)
        })
        .collect();
    Value::Object(map)
}

fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serialize");
    s.push('\n');
    s
}

fn build_controller(config: &RunConfig, kind: ControllerKind) -> Result<Controller, String> {
    match kind {
        ControllerKind::Pid => Ok(Controller::Pid(config.pid)),
        ControllerKind::Lqr => LqrController::design(&config.params, &config.lqr)
            .map(|(lqr, _)| Controller::Lqr(lqr))
            .map_err(|e| format!("LQR design failed: {e}")),
    }
}

fn simulate(config: &RunConfig, controller: &Controller) -> Result<(Trajectory, Vec<Metrics>), SimError> {
    let traj = sim::run_closed_loop(&config.scenario, controller, &config.params)?;
    let metrics = sim::scenario_metrics(&traj, &config.scenario.references, sim::DEFAULT_BAND)?;
    Ok((traj, metrics))
}

fn sim_exit_code(e: &SimError) -> i32 {
    match e {
        SimError::NonFiniteState { .. } | SimError::ThetaOutOfRange { .. } => EXIT_DIVERGED,
        _ => EXIT_CONFIG,
    }
}

fn write_file(path: &Path, contents: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    contents(&mut w)?;
    w.flush()
}

/// Simulates the configured scenario with one controller.
pub fn cmd_run(config: &RunConfig, kind: ControllerKind, out_dir: &Path, err: &mut dyn Write) -> i32 {
    match build_controller(config, kind) {
        Ok(controller) => cmd_run_with(config, &controller, out_dir, err),
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_CONFIG
        }
    }
}

/// [`cmd_run`] with an explicit controller, for hand-built gains.
pub fn cmd_run_with(config: &RunConfig, controller: &Controller, out_dir: &Path, err: &mut dyn Write) -> i32 {
    let (traj, metrics) = match simulate(config, controller) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {} simulation failed: {e}", controller.name());
            return sim_exit_code(&e);
        }
    };
    let result = fs::create_dir_all(out_dir)
        .and_then(|_| write_file(&out_dir.join(TRAJECTORY_FILE), |w| write_trajectory_csv(w, &traj)))
        .and_then(|_| {
            write_file(&out_dir.join(METRICS_FILE), |w| w.write_all(to_pretty(&metrics_json(&metrics)).as_bytes()))
        });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: cannot write to {}: {e}", out_dir.display());
            EXIT_CONFIG
        }
    }
}

/// Runs PID and LQR on the configured scenario concurrently and writes
/// both metric sets plus `lqr - pid` deltas.
pub fn cmd_compare(config: &RunConfig, out_dir: &Path, err: &mut dyn Write) -> i32 {
    let controllers = match (build_controller(config, ControllerKind::Pid), build_controller(config, ControllerKind::Lqr)) {
        (Ok(p), Ok(l)) => [p, l],
        (Err(m), _) | (_, Err(m)) => {
            let _ = writeln!(err, "error: {m}");
            return EXIT_CONFIG;
        }
    };
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = controllers.iter().map(|c| s.spawn(move || simulate(config, c))).collect();
        handles.into_iter().map(|h| h.join().expect("simulation thread panicked")).collect()
    });
    let mut metrics = Vec::with_capacity(2);
    for (controller, result) in controllers.iter().zip(results) {
        match result {
            Ok((_, m)) => metrics.push(m),
            Err(e) => {
                let _ = writeln!(err, "error: {} simulation failed: {e}", controller.name());
                return sim_exit_code(&e);
            }
        }
    }
    let doc = json!({
        "case": config.scenario.case_id,
        "pid": metrics_json(&metrics[0]),
        "lqr": metrics_json(&metrics[1]),
        "delta": metric_deltas(&metrics[0], &metrics[1]),
    });
    let result = fs::create_dir_all(out_dir)
        .and_then(|_| write_file(&out_dir.join(COMPARISON_FILE), |w| w.write_all(to_pretty(&doc).as_bytes())));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: cannot write to {}: {e}", out_dir.display());
            EXIT_CONFIG
        }
    }
}

pub fn cmd_linearize(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let ss = linearize::hover_jacobians(&config.params);
    let result = write_matrix_csv(out, &ss.a_dyn())
        .and_then(|_| writeln!(out))
        .and_then(|_| write_matrix_csv(out, &ss.b_dyn()));
    io_exit(result, err)
}

pub fn cmd_gain(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let ss = linearize::hover_jacobians(&config.params);
    match riccati::lqr_gain(&ss.a_dyn(), &ss.b_dyn(), &config.lqr) {
        Ok(gain) => io_exit(write_matrix_csv(out, &gain.k), err),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONFIG
        }
    }
}

fn io_exit(result: io::Result<()>, err: &mut dyn Write) -> i32 {
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONFIG
        }
    }
}
