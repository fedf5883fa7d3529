//! Scenario-driven command line for the tank-liquid stabilization
//! toolkit: parses a TOML scenario, dispatches the requested pipeline,
//! and writes CSV/JSON artifacts.
//!
//! Exit codes: 0 ok, 2 configuration error, 3 constraint violation,
//! 4 numeric blow-up, 5 certificate failure.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{Mode, RhsBlock, Scenario};
use tanklab_core::clf;
use tanklab_core::control;
use tanklab_core::error::Error as CoreError;
use tanklab_core::fit::DecayFit;
use tanklab_core::linear::{
    iss_check, resolvent_solve, run_linear, spectrum_discrete, IssConfig, LinearControl,
    LinearInitial, LinearOperatorAssembly, LinearRunConfig,
};
use tanklab_core::model::Grid;
use tanklab_core::nonlinear::{
    initial_state, run_closed_loop, ControlMode, InitialPerturbation, NonlinearRunConfig,
    RunOutcome, Signal, Violation,
};
use tanklab_core::sweep;

const SCHEMA_VERSION: u32 = 1;

const EXIT_CONFIG: u8 = 2;
const EXIT_VIOLATION: u8 = 3;
const EXIT_BLOWUP: u8 = 4;
const EXIT_CERTIFICATE: u8 = 5;

#[derive(Parser)]
#[command(
    name = "tanklab",
    about = "Tank-liquid stabilization laboratory",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more scenario files (mode taken from each file).
    Run {
        /// Scenario files; several run concurrently.
        scenarios: Vec<PathBuf>,
        /// Output directory (defaults to the working directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for the randomized sweeps.
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Evaluate the gain certificate of a scenario.
    CheckGains {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the analytic/discrete spectrum of a scenario.
    Spectrum {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run {
            scenarios,
            out,
            seed,
        } => {
            if scenarios.is_empty() {
                eprintln!("error: no scenario files given");
                EXIT_CONFIG
            } else {
                run_many(&scenarios, out.as_deref(), seed)
            }
        }
        Command::CheckGains { scenario, out } => {
            run_one(&scenario, out.as_deref(), 0, Some(Mode::GainsCheck))
        }
        Command::Spectrum { scenario, out } => {
            run_one(&scenario, out.as_deref(), 0, Some(Mode::Spectrum))
        }
    };
    ExitCode::from(code)
}

fn run_many(paths: &[PathBuf], out: Option<&Path>, seed: u64) -> u8 {
    let codes: Vec<u8> = {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            paths
                .par_iter()
                .map(|p| run_one(p, out, seed, None))
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            paths.iter().map(|p| run_one(p, out, seed, None)).collect()
        }
    };
    codes.into_iter().max().unwrap_or(0)
}

fn run_one(path: &Path, out: Option<&Path>, seed: u64, force_mode: Option<Mode>) -> u8 {
    let out_dir = out.unwrap_or_else(|| Path::new("."));
    if let Err(e) = std::fs::create_dir_all(out_dir) {
        eprintln!(
            "error: cannot create output directory {}: {e}",
            out_dir.display()
        );
        return EXIT_CONFIG;
    }
    let mut scenario = match config::parse_scenario(path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error [{}]: {e:#}", path.display());
            return EXIT_CONFIG;
        }
    };
    if let Some(mode) = force_mode {
        scenario.mode = mode;
    }
    match dispatch(&scenario, out_dir, seed) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error [{}]: {e:#}", scenario.name);
            // Map blow-ups reported as errors onto their exit code.
            if e.chain().any(|c| {
                c.downcast_ref::<CoreError>()
                    .map(|ce| matches!(ce, CoreError::Blowup { .. }))
                    .unwrap_or(false)
            }) {
                EXIT_BLOWUP
            } else {
                EXIT_CONFIG
            }
        }
    }
}

#[derive(Serialize)]
struct FitSummary {
    rate: f64,
    amplitude: f64,
    r2: f64,
}

impl From<DecayFit> for FitSummary {
    fn from(f: DecayFit) -> Self {
        FitSummary {
            rate: f.rate,
            amplitude: f.amplitude,
            r2: f.r2,
        }
    }
}

#[derive(Serialize)]
struct SimulationSummary {
    schema_version: u32,
    name: String,
    mode: String,
    steps: usize,
    dt: f64,
    outcome: String,
    violations: Vec<Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decay_norm: Option<FitSummary>,
    #[serde(rename = "decay_V", skip_serializing_if = "Option::is_none")]
    decay_v: Option<FitSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decay_vx: Option<FitSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decay_combined: Option<FitSummary>,
    final_t: f64,
    final_xi: f64,
    final_w: f64,
}

fn dispatch(scenario: &Scenario, out_dir: &Path, seed: u64) -> Result<u8> {
    match scenario.mode {
        Mode::SimulateNonlinear => simulate_nonlinear(scenario, out_dir),
        Mode::SimulateLinear => simulate_linear(scenario, out_dir),
        Mode::Spectrum => spectrum(scenario, out_dir),
        Mode::GainsCheck => gains_check(scenario, out_dir),
        Mode::SafeRadius => safe_radius(scenario, out_dir),
        Mode::LyapunovEval => lyapunov_eval(scenario, out_dir, seed),
        Mode::IssCheck => iss_mode(scenario, out_dir),
        Mode::ResolventCheck => resolvent_mode(scenario, out_dir),
    }
}

fn artifact(out_dir: &Path, name: &str, suffix: &str) -> PathBuf {
    out_dir.join(format!("{name}_{suffix}"))
}

fn simulate_nonlinear(scenario: &Scenario, out_dir: &Path) -> Result<u8> {
    let run = scenario.run.as_ref().unwrap();
    let ic = scenario.ic.clone().unwrap_or_default();
    let control = match run.control.as_str() {
        "closed-loop" => ControlMode::ClosedLoop,
        "open-loop-zero" => ControlMode::OpenLoopZero,
        "prescribed" => {
            let sig = run
                .signal
                .as_ref()
                .ok_or_else(|| anyhow!("prescribed control needs a [run.signal] block"))?;
            ControlMode::Prescribed(Signal::from(sig))
        }
        other => {
            return Err(anyhow!(
                "unknown control mode '{other}' for the nonlinear run"
            ))
        }
    };
    let cfg = NonlinearRunConfig {
        params: scenario.physical_params()?,
        gains: scenario.nonlinear_gains()?,
        n_cells: scenario.grid.n_cells,
        t_end: run.t_end,
        cfl_safety: run.cfl_safety,
        ic: InitialPerturbation {
            h_modes: ic.h_modes.clone(),
            v_modes: ic.v_modes.clone(),
            xi0: ic.xi0,
            w0: ic.w0,
        },
        control,
        cadence: run.cadence,
        mass_rtol: 1e-10,
        v_slack_factor: 10.0,
    };
    let res = run_closed_loop(&cfg)?;
    output::write_nonlinear_csv(
        &artifact(out_dir, &scenario.name, "timeseries.csv"),
        &res.records,
    )?;
    let (outcome, code) = match &res.outcome {
        RunOutcome::Completed if res.violations.is_empty() => ("completed".to_string(), 0),
        RunOutcome::Completed => ("completed-with-violations".to_string(), EXIT_VIOLATION),
        RunOutcome::Aborted { t, reason } => (format!("aborted at t={t}: {reason}"), EXIT_BLOWUP),
    };
    let summary = SimulationSummary {
        schema_version: SCHEMA_VERSION,
        name: scenario.name.clone(),
        mode: "simulate-nonlinear".into(),
        steps: res.steps,
        dt: res.dt,
        outcome,
        violations: res.violations.clone(),
        decay_norm: res.decay_norm.map(Into::into),
        decay_v: res.decay_v.map(Into::into),
        decay_vx: res.decay_vx.map(Into::into),
        decay_combined: None,
        final_t: res.final_state.t,
        final_xi: res.final_state.xi,
        final_w: res.final_state.w,
    };
    output::write_json(&artifact(out_dir, &scenario.name, "summary.json"), &summary)?;
    Ok(code)
}

fn simulate_linear(scenario: &Scenario, out_dir: &Path) -> Result<u8> {
    let run = scenario.run.as_ref().unwrap();
    let ic = scenario.ic.clone().unwrap_or_default();
    let control = match run.control.as_str() {
        "closed-loop" => LinearControl::ClosedLoop(scenario.linear_gains()?),
        "pd" => LinearControl::Pd(scenario.pd_gains()?),
        "prescribed" => {
            let sig = run
                .signal
                .as_ref()
                .ok_or_else(|| anyhow!("prescribed control needs a [run.signal] block"))?;
            LinearControl::Prescribed(Signal::from(sig))
        }
        "zero" => LinearControl::Zero,
        other => return Err(anyhow!("unknown control mode '{other}' for the linear run")),
    };
    let cfg = LinearRunConfig {
        params: scenario.physical_params()?,
        n_cells: scenario.grid.n_cells,
        t_end: run.t_end,
        cfl_safety: run.cfl_safety,
        cadence: run.cadence,
        control,
        ic: LinearInitial {
            phi_modes: ic.phi_modes.clone(),
            phit_modes: ic.phit_modes.clone(),
            xi0: ic.xi0,
            w0: ic.w0,
        },
        store_states: false,
    };
    let res = run_linear(&cfg)?;
    output::write_linear_csv(
        &artifact(out_dir, &scenario.name, "timeseries.csv"),
        &res.records,
    )?;
    let (outcome, code) = match &res.outcome {
        RunOutcome::Completed if res.violations.is_empty() => ("completed".to_string(), 0),
        RunOutcome::Completed => ("completed-with-violations".to_string(), EXIT_VIOLATION),
        RunOutcome::Aborted { t, reason } => (format!("aborted at t={t}: {reason}"), EXIT_BLOWUP),
    };
    let summary = SimulationSummary {
        schema_version: SCHEMA_VERSION,
        name: scenario.name.clone(),
        mode: "simulate-linear".into(),
        steps: res.steps,
        dt: res.dt,
        outcome,
        violations: res.violations.clone(),
        decay_norm: None,
        decay_v: None,
        decay_vx: None,
        decay_combined: res.decay_combined.map(Into::into),
        final_t: res.final_state.t,
        final_xi: res.final_state.xi,
        final_w: res.final_state.w,
    };
    output::write_json(&artifact(out_dir, &scenario.name, "summary.json"), &summary)?;
    Ok(code)
}

#[derive(Serialize)]
struct SpectrumReport {
    schema_version: u32,
    name: String,
    n_nodes: usize,
    modes: Vec<tanklab_core::linear::SpectrumMode>,
}

fn spectrum(scenario: &Scenario, out_dir: &Path) -> Result<u8> {
    let params = scenario.physical_params()?;
    let n_modes = scenario.spectrum.as_ref().map(|s| s.n_modes).unwrap_or(5);
    let grid = Grid::new(params.length, scenario.grid.n_cells)?;
    let op = LinearOperatorAssembly::new(&params, &grid)?;
    let result = spectrum_discrete(&op, &params, n_modes)?;
    let report = SpectrumReport {
        schema_version: SCHEMA_VERSION,
        name: scenario.name.clone(),
        n_nodes: result.n_nodes,
        modes: result.modes,
    };
    output::write_json(&artifact(out_dir, &scenario.name, "spectrum.json"), &report)?;
    Ok(0)
}

#[derive(Serialize)]
struct CertificateReport {
    schema_version: u32,
    name: String,
    certificate: control::GainCertificate,
}

fn gains_check(scenario: &Scenario, out_dir: &Path) -> Result<u8> {
    let block = scenario
        .gains_check
        .as_ref()
        .ok_or_else(|| anyhow!("gains-check needs a [gains_check] block"))?;
    let params = scenario.physical_params()?;
    let certificate = match block.law.as_str() {
        "level-bounded-friction" => {
            let friction = params.friction.clone();
            control::check_level_bounded_friction_gains(&scenario.nonlinear_gains()?, &params, &friction, block.r)?
        }
        "general-friction" => {
            let friction = params.friction.clone();
            control::check_general_friction_gains(&scenario.nonlinear_gains()?, &params, &friction, block.r)?
        }
        "surface-tension" => control::check_surface_tension_gains(&scenario.nonlinear_gains()?, &params, block.r)?,
        "linear" => control::check_linear_gain_inequality(&scenario.linear_gains()?, &params),
        other => return Err(anyhow!("unknown certificate law '{other}'")),
    };
    let passed = certificate.passed;
    let report = CertificateReport {
        schema_version: SCHEMA_VERSION,
        name: scenario.name.clone(),
        certificate,
    };
    output::write_json(
        &artifact(out_dir, &scenario.name, "certificate.json"),
        &report,
    )?;
    Ok(if passed { 0 } else { EXIT_CERTIFICATE })
}

#[derive(Serialize)]
struct SafeRegionReport {
    schema_version: u32,
    name: String,
    #[serde(rename = "Q")]
    q: f64,
    #[serde(rename = "R")]
    r: f64,
    zeta1: f64,
    zeta2: f64,
    /// Squeeze bounds verified on a dense grid of [0, 0.999R].
    bounds_hold: bool,
}

fn safe_radius(scenario: &Scenario, out_dir: &Path) -> Result<u8> {
    let params = scenario.physical_params()?;
    let gains = scenario.nonlinear_gains()?;
    let region = clf::safe_radius(&gains, &params)?;
    let bounds_hold = region.bounds_hold_below_r(1000);
    let report = SafeRegionReport {
        schema_version: SCHEMA_VERSION,
        name: scenario.name.clone(),
        q: region.q_const,
        r: region.r,
        zeta1: region.zeta1,
        zeta2: region.zeta2,
        bounds_hold,
    };
    output::write_json(
        &artifact(out_dir, &scenario.name, "safe_region.json"),
        &report,
    )?;
    Ok(if bounds_hold { 0 } else { EXIT_CERTIFICATE })
}

#[derive(Serialize)]
struct LyapunovReport {
    schema_version: u32,
    name: String,
    #[serde(rename = "V")]
    v: f64,
    #[serde(rename = "E")]
    e: f64,
    #[serde(rename = "W")]
    w: f64,
    #[serde(rename = "V_tilde", skip_serializing_if = "Option::is_none")]
    v_tilde: Option<f64>,
    norm_x: f64,
    #[serde(rename = "p1_of_V")]
    p1_of_v: f64,
    #[serde(rename = "p2_of_V")]
    p2_of_v: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    squeeze_sweep: Option<sweep::SweepReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    upper_bound_sweep: Option<sweep::SweepReport>,
}

fn lyapunov_eval(scenario: &Scenario, out_dir: &Path, seed: u64) -> Result<u8> {
    let params = scenario.physical_params()?;
    let gains = scenario.nonlinear_gains()?;
    let grid = Grid::new(params.length, scenario.grid.n_cells)?;
    let ic = scenario.ic.clone().unwrap_or_default();
    let cfg = NonlinearRunConfig {
        params: params.clone(),
        gains: gains.clone(),
        n_cells: scenario.grid.n_cells,
        t_end: 1.0,
        cfl_safety: 0.4,
        ic: InitialPerturbation {
            h_modes: ic.h_modes.clone(),
            v_modes: ic.v_modes.clone(),
            xi0: ic.xi0,
            w0: ic.w0,
        },
        control: ControlMode::OpenLoopZero,
        cadence: 1,
        mass_rtol: 1e-10,
        v_slack_factor: 10.0,
    };
    let state = initial_state(&cfg, &grid)?;
    let v = clf::clf_v(&state, &gains, &params, &grid)?;
    let e = clf::energy_e(&state, &params, &grid)?;
    let w = clf::energy_w(&state, &params, &grid)?;
    let v_tilde = if gains.v_tilde_extras.is_some() {
        Some(clf::clf_v_tilde(&state, &gains, &params, &grid)?)
    } else {
        None
    };
    let (p1, p2) = clf::p_bounds(v, &gains, &params);

    let (squeeze, upper) = match &scenario.lyapunov {
        Some(b) if b.sweep_states > 0 => {
            let sq = sweep::squeeze_sweep(
                &gains,
                &params,
                &grid,
                b.sweep_states,
                seed,
                b.sweep_amplitude,
            )?;
            let eps =
                0.01 * params.h_star.min(params.wall_height - params.h_star) / params.length.sqrt();
            let ub =
                sweep::upper_bound_sweep(&gains, &params, &grid, b.sweep_states, seed ^ 0x5eed, eps)?;
            (Some(sq), Some(ub))
        }
        _ => (None, None),
    };
    let violations = squeeze.as_ref().map(|s| s.violations).unwrap_or(0)
        + upper.as_ref().map(|s| s.violations).unwrap_or(0);

    let report = LyapunovReport {
        schema_version: SCHEMA_VERSION,
        name: scenario.name.clone(),
        v,
        e,
        w,
        v_tilde,
        norm_x: tanklab_core::model::state_norm_x(&state, &params, &grid),
        p1_of_v: p1,
        p2_of_v: p2,
        squeeze_sweep: squeeze,
        upper_bound_sweep: upper,
    };
    output::write_json(&artifact(out_dir, &scenario.name, "lyapunov.json"), &report)?;
    Ok(if violations == 0 { 0 } else { EXIT_VIOLATION })
}

#[derive(Serialize)]
struct IssReportWrapper {
    schema_version: u32,
    name: String,
    report: tanklab_core::linear::IssReport,
}

fn iss_mode(scenario: &Scenario, out_dir: &Path) -> Result<u8> {
    let block = scenario.iss.as_ref().unwrap();
    let params = scenario.physical_params()?;
    let ics = block
        .ic_modes
        .iter()
        .map(|&n| LinearInitial {
            phi_modes: vec![(n, block.ic_amplitude / n as f64)],
            ..Default::default()
        })
        .collect();
    let cfg = IssConfig {
        params,
        n_cells: scenario.grid.n_cells,
        t_end: block.t_end,
        cfl_safety: block.cfl_safety,
        cadence: block.cadence,
        ics,
        signals: vec![
            Signal::Zero,
            Signal::Step {
                amplitude: block.step_amplitude,
                t_on: 0.0,
            },
            Signal::Sine {
                amplitude: block.sine_amplitude,
                omega: block.sine_omega,
            },
        ],
    };
    let report = iss_check(&cfg)?;
    let passed = report.passed;
    let wrapper = IssReportWrapper {
        schema_version: SCHEMA_VERSION,
        name: scenario.name.clone(),
        report,
    };
    output::write_json(&artifact(out_dir, &scenario.name, "iss.json"), &wrapper)?;
    Ok(if passed { 0 } else { EXIT_CERTIFICATE })
}

#[derive(Serialize)]
struct ResolventReport {
    schema_version: u32,
    name: String,
    q_bar: f64,
    n_terms: usize,
    residual: f64,
    mean_term: f64,
    passed: bool,
}

fn resolvent_mode(scenario: &Scenario, out_dir: &Path) -> Result<u8> {
    let block = scenario.resolvent.as_ref().unwrap();
    let params = scenario.physical_params()?;
    let l = params.length;
    let rhs: Box<dyn Fn(f64) -> f64> = match &block.rhs {
        RhsBlock::Constant { value } => {
            let v = *value;
            Box::new(move |_| v)
        }
        RhsBlock::Cosine { mode, amplitude } => {
            let (m, a) = (*mode as f64, *amplitude);
            Box::new(move |x| a * (m * std::f64::consts::PI * x / l).cos())
        }
        RhsBlock::ExpCos { amplitude } => {
            let a = *amplitude;
            Box::new(move |x| a * ((std::f64::consts::PI * x / l).cos()).exp())
        }
    };
    let sol = resolvent_solve(rhs, block.q_bar, &params, block.n_terms)?;
    let passed = sol.residual < block.residual_tolerance;
    let report = ResolventReport {
        schema_version: SCHEMA_VERSION,
        name: scenario.name.clone(),
        q_bar: block.q_bar,
        n_terms: block.n_terms,
        residual: sol.residual,
        mean_term: sol.mean_term,
        passed,
    };
    output::write_json(
        &artifact(out_dir, &scenario.name, "resolvent.json"),
        &report,
    )?;
    Ok(if passed { 0 } else { EXIT_CERTIFICATE })
}
