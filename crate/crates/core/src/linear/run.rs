//! RK4 method-of-lines integrator for the linearized closed loop.

use crate::clf;
use crate::control::{self, LinearGains, PdGains};
use crate::error::{Error, Result};
use crate::fit::{self, DecayFit};
use crate::model::{p_norm, Grid, LinearState, PhysicalParams, TimeSeriesRecord};
use crate::nonlinear::{RunOutcome, Signal, Violation, ViolationKind};
use crate::quad;

use super::operator::LinearOperatorAssembly;

/// Control law selection for a linear run.
#[derive(Debug, Clone)]
pub enum LinearControl {
    /// Liquid-aware boundary feedback.
    ClosedLoop(LinearGains),
    /// Liquid-blind PD law.
    Pd(PdGains),
    /// Prescribed open-loop signal.
    Prescribed(Signal),
    /// f ≡ 0.
    Zero,
}

/// Cosine-mode initial data (keeps the zero-mean constraints exact).
#[derive(Debug, Clone, Default)]
pub struct LinearInitial {
    /// (n, a): φ = Σ a·cos(nπx/L).
    pub phi_modes: Vec<(u32, f64)>,
    /// (n, b): φ_t = Σ b·cos(nπx/L).
    pub phit_modes: Vec<(u32, f64)>,
    pub xi0: f64,
    pub w0: f64,
}

#[derive(Debug, Clone)]
pub struct LinearRunConfig {
    pub params: PhysicalParams,
    pub n_cells: usize,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub cadence: usize,
    pub control: LinearControl,
    pub ic: LinearInitial,
    /// Keep full state snapshots at record times (identity validators).
    pub store_states: bool,
}

#[derive(Debug, Clone)]
pub struct LinearRunResult {
    pub records: Vec<TimeSeriesRecord>,
    /// Snapshots at record cadence when requested.
    pub states: Vec<LinearState>,
    /// Control values matching `states`.
    pub controls: Vec<f64>,
    /// Fit of √(ξ² + w² + P²) on the trailing half.
    pub decay_combined: Option<DecayFit>,
    /// Fit of P alone on the trailing half.
    pub decay_p: Option<DecayFit>,
    pub violations: Vec<Violation>,
    pub final_state: LinearState,
    pub outcome: RunOutcome,
    pub dt: f64,
    pub steps: usize,
}

fn control_value(
    control: &LinearControl,
    state: &LinearState,
    params: &PhysicalParams,
    grid: &Grid,
    t: f64,
) -> f64 {
    match control {
        LinearControl::ClosedLoop(g) => control::linear_feedback(state, g, params, grid),
        LinearControl::Pd(g) => control::pd_feedback(state.xi, state.w, g),
        LinearControl::Prescribed(sig) => sig.eval(t),
        LinearControl::Zero => 0.0,
    }
}

/// Builds the initial state from the configured cosine modes.
pub fn linear_initial_state(config: &LinearRunConfig, grid: &Grid) -> LinearState {
    let l = config.params.length;
    let mut phi = vec![0.0; grid.n_nodes()];
    let mut phi_t = vec![0.0; grid.n_nodes()];
    for &(n, a) in &config.ic.phi_modes {
        for (k, &x) in grid.faces().iter().enumerate() {
            phi[k] += a * (n as f64 * std::f64::consts::PI * x / l).cos();
        }
    }
    for &(n, b) in &config.ic.phit_modes {
        for (k, &x) in grid.faces().iter().enumerate() {
            phi_t[k] += b * (n as f64 * std::f64::consts::PI * x / l).cos();
        }
    }
    LinearState {
        t: 0.0,
        xi: config.ic.xi0,
        w: config.ic.w0,
        phi,
        phi_t,
    }
}

struct LinDeriv {
    dxi: f64,
    dw: f64,
    dphi: Vec<f64>,
    dphit: Vec<f64>,
}

fn eval_rhs(
    op: &LinearOperatorAssembly,
    control: &LinearControl,
    params: &PhysicalParams,
    grid: &Grid,
    state: &LinearState,
    t: f64,
) -> LinDeriv {
    let f = control_value(control, state, params, grid, t);
    LinDeriv {
        dxi: state.w,
        dw: -f,
        dphi: state.phi_t.clone(),
        dphit: op.acceleration(&state.phi, &state.phi_t, f),
    }
}

fn advance(state: &LinearState, d: &LinDeriv, dt: f64) -> LinearState {
    let mut out = state.clone();
    out.t += dt;
    out.xi += dt * d.dxi;
    out.w += dt * d.dw;
    for (p, dp) in out.phi.iter_mut().zip(&d.dphi) {
        *p += dt * dp;
    }
    for (p, dp) in out.phi_t.iter_mut().zip(&d.dphit) {
        *p += dt * dp;
    }
    out
}

/// Stability-limited step Δt = cfl·min(Δx²/(2μ), Δx⁴/(8σh*), Δx/c).
pub fn linear_stable_dt(params: &PhysicalParams, grid: &Grid, cfl_safety: f64) -> Result<f64> {
    if !(cfl_safety > 0.0 && cfl_safety <= 1.0) {
        return Err(Error::Config(format!(
            "cfl_safety must lie in (0, 1], got {cfl_safety}"
        )));
    }
    let dx = grid.dx();
    let c = params.wave_speed();
    let mut dt = (dx * dx / (2.0 * params.mu)).min(dx / c);
    let sh = params.sigma * params.h_star;
    if sh > 0.0 {
        dt = dt.min(dx.powi(4) / (8.0 * sh));
    }
    Ok(cfl_safety * dt)
}

/// Integrates the linear closed loop, recording P, W̃ and the zero-mean
/// monitors.
pub fn run_linear(config: &LinearRunConfig) -> Result<LinearRunResult> {
    if !(config.t_end > 0.0) {
        return Err(Error::Config("t_end must be positive".into()));
    }
    if config.cadence == 0 {
        return Err(Error::Config("cadence must be >= 1".into()));
    }
    let grid = Grid::new(config.params.length, config.n_cells)?;
    let op = LinearOperatorAssembly::new(&config.params, &grid)?;
    let p = &config.params;
    let dt = linear_stable_dt(p, &grid, config.cfl_safety)?;
    // Round up to a whole number of cadences so records stay uniform.
    let steps = ((config.t_end / dt).ceil() as usize).div_ceil(config.cadence) * config.cadence;
    let mut state = linear_initial_state(config, &grid);

    let phi_scale0 = quad::l2_norm_nodes(&state.phi, grid.dx()).max(1e-12);
    let mut records = Vec::new();
    let mut states = Vec::new();
    let mut controls = Vec::new();
    let mut violations: Vec<Violation> = Vec::new();
    let mut outcome = RunOutcome::Completed;

    let mut record = |state: &LinearState, violations: &mut Vec<Violation>| {
        let f = control_value(&config.control, state, p, &grid, state.t);
        let (phi_mean, phit_mean) = state.means(&grid);
        let w_tilde = match &config.control {
            LinearControl::ClosedLoop(g) => Some(clf::linear_clf_w_tilde(state, g, p, &grid)),
            _ => None,
        };
        let pn = p_norm(state, &grid);
        let scale = quad::l2_norm_nodes(&state.phi, grid.dx()).max(phi_scale0);
        if phi_mean.abs() * p.length > 1e-10 * scale * p.length
            || phit_mean.abs() * p.length > 1e-10 * scale.max(1e-9) * p.length
        {
            violations.push(Violation {
                t: state.t,
                kind: ViolationKind::MeanDrift,
                detail: format!("means drifted to ({phi_mean}, {phit_mean})"),
            });
        }
        records.push(TimeSeriesRecord {
            t: state.t,
            xi: state.xi,
            w: state.w,
            f,
            v_lyap: None,
            e_energy: None,
            w_energy: None,
            v_tilde: None,
            w_tilde,
            p_norm: Some(pn),
            h_min: None,
            h_max: None,
            mass: None,
            norm_x: None,
            vx_norm: None,
            phi_mean: Some(phi_mean),
            phit_mean: Some(phit_mean),
        });
        if config.store_states {
            states.push(state.clone());
            controls.push(f);
        }
    };

    record(&state, &mut violations);
    for k in 0..steps {
        let t = state.t;
        let k1 = eval_rhs(&op, &config.control, p, &grid, &state, t);
        let s2 = advance(&state, &k1, 0.5 * dt);
        let k2 = eval_rhs(&op, &config.control, p, &grid, &s2, t + 0.5 * dt);
        let s3 = advance(&state, &k2, 0.5 * dt);
        let k3 = eval_rhs(&op, &config.control, p, &grid, &s3, t + 0.5 * dt);
        let s4 = advance(&state, &k3, dt);
        let k4 = eval_rhs(&op, &config.control, p, &grid, &s4, t + dt);
        state.t = t + dt;
        state.xi += dt / 6.0 * (k1.dxi + 2.0 * k2.dxi + 2.0 * k3.dxi + k4.dxi);
        state.w += dt / 6.0 * (k1.dw + 2.0 * k2.dw + 2.0 * k3.dw + k4.dw);
        for i in 0..state.phi.len() {
            state.phi[i] +=
                dt / 6.0 * (k1.dphi[i] + 2.0 * k2.dphi[i] + 2.0 * k3.dphi[i] + k4.dphi[i]);
            state.phi_t[i] +=
                dt / 6.0 * (k1.dphit[i] + 2.0 * k2.dphit[i] + 2.0 * k3.dphit[i] + k4.dphit[i]);
        }
        if !state.xi.is_finite() || state.phi.iter().any(|v| !v.is_finite()) {
            outcome = RunOutcome::Aborted {
                t: state.t,
                reason: "non-finite state in linear run".into(),
            };
            break;
        }
        if (k + 1) % config.cadence == 0 || k + 1 == steps {
            record(&state, &mut violations);
        }
    }

    let ts: Vec<f64> = records.iter().map(|r| r.t).collect();
    let combined: Vec<f64> = records
        .iter()
        .map(|r| (r.xi * r.xi + r.w * r.w + r.p_norm.unwrap() * r.p_norm.unwrap()).sqrt())
        .collect();
    let ps: Vec<f64> = records.iter().map(|r| r.p_norm.unwrap()).collect();
    let decay_combined = fit::fit_decay_rate(&ts, &combined, 0.5).ok();
    let decay_p = fit::fit_decay_rate(&ts, &ps, 0.5).ok();

    Ok(LinearRunResult {
        records,
        states,
        controls,
        decay_combined,
        decay_p,
        violations,
        final_state: state,
        outcome,
        dt,
        steps,
    })
}
