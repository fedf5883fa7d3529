//! Method-of-lines integrator for the closed-loop nonlinear viscous
//! shallow-water tank-liquid system.
//!
//! Space discretization: conservative flux form for the level on the
//! staggered grid (face flux h̄·v with arithmetic face averages, so the
//! discrete mass telescopes exactly), velocity form for the momentum
//! balance at interior faces,
//!
//! ```text
//! v_t = −v v_x − g h_x + σ ∂x[h_xx (1+h_x²)^{−3/2}] + (μ/h)(h v_x)_x − κ(h,v)v/h + f
//! ```
//!
//! with wall ghost cells enforcing the zero-slope contact condition when
//! surface tension is present. Time integration: classical RK4 with a
//! stability-limited fixed step; the feedback is re-evaluated from the
//! stage state at every stage.

use serde::Serialize;

use crate::clf::{self, NonlinearGains};
use crate::control;
use crate::error::{Error, Result};
use crate::fit::{self, DecayFit};
use crate::friction;
use crate::model::{mass, state_norm_x, Grid, NonlinearState, PhysicalParams, TimeSeriesRecord};
use crate::quad;

/// Prescribed control signal for open-loop experiments.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub enum Signal {
    Zero,
    /// f(t) = amplitude for t ≥ t_on, 0 before.
    Step {
        amplitude: f64,
        t_on: f64,
    },
    /// f(t) = amplitude·sin(omega t).
    Sine {
        amplitude: f64,
        omega: f64,
    },
}

impl Signal {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Signal::Zero => 0.0,
            Signal::Step { amplitude, t_on } => {
                if t >= t_on {
                    amplitude
                } else {
                    0.0
                }
            }
            Signal::Sine { amplitude, omega } => amplitude * (omega * t).sin(),
        }
    }
}

/// How the control input is produced during a nonlinear run.
#[derive(Debug, Clone)]
pub enum ControlMode {
    /// Momentum+level feedback law.
    ClosedLoop,
    /// f ≡ 0.
    OpenLoopZero,
    /// Caller-prescribed f(t).
    Prescribed(Signal),
}

/// Cosine/sine mode amplitudes building the initial perturbation.
#[derive(Debug, Clone, Default)]
pub struct InitialPerturbation {
    /// (n, a): h(x) = h* + Σ a·cos(nπx/L) at cell centers.
    pub h_modes: Vec<(u32, f64)>,
    /// (n, b): v(x) = Σ b·sin(nπx/L) at faces (walls forced to 0).
    pub v_modes: Vec<(u32, f64)>,
    pub xi0: f64,
    pub w0: f64,
}

#[derive(Debug, Clone)]
pub struct NonlinearRunConfig {
    pub params: PhysicalParams,
    pub gains: NonlinearGains,
    pub n_cells: usize,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub ic: InitialPerturbation,
    pub control: ControlMode,
    /// Record every this many steps.
    pub cadence: usize,
    /// Relative mass-drift monitor tolerance.
    pub mass_rtol: f64,
    /// Lyapunov slack factor s in slack = s·Δx²·V(0).
    pub v_slack_factor: f64,
}

impl NonlinearRunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0) {
            return Err(Error::Config("t_end must be positive".into()));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::Config("cfl_safety must lie in (0, 1]".into()));
        }
        if self.cadence == 0 {
            return Err(Error::Config("cadence must be >= 1".into()));
        }
        Ok(())
    }
}

/// Constraint violations are recorded, not fatal; blow-ups abort.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub t: f64,
    pub kind: ViolationKind,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    MassDrift,
    Spill,
    LyapunovIncrease,
    LevelSetExit,
    MeanDrift,
}

#[derive(Debug, Clone, Serialize)]
pub enum RunOutcome {
    Completed,
    Aborted { t: f64, reason: String },
}

#[derive(Debug, Clone)]
pub struct NonlinearRunResult {
    pub records: Vec<TimeSeriesRecord>,
    pub decay_norm: Option<DecayFit>,
    pub decay_v: Option<DecayFit>,
    pub decay_vx: Option<DecayFit>,
    pub violations: Vec<Violation>,
    pub final_state: NonlinearState,
    pub outcome: RunOutcome,
    pub dt: f64,
    pub steps: usize,
}

/// Time derivative of the full PDE-ODE state for a given control value.
#[derive(Debug, Clone)]
pub struct StateDeriv {
    pub dxi: f64,
    pub dw: f64,
    pub dh: Vec<f64>,
    pub dv: Vec<f64>,
}

/// Spatially discrete right-hand side. Errors with a blow-up diagnostic
/// when the level loses positivity.
pub fn rhs_nonlinear(
    state: &NonlinearState,
    f: f64,
    params: &PhysicalParams,
    grid: &Grid,
) -> Result<StateDeriv> {
    let n = grid.n_cells();
    let dx = grid.dx();
    let h = &state.h;
    let v = &state.v;
    if let Some(bad) = h.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::Blowup {
            t: state.t,
            reason: format!("liquid level reached {bad}"),
        });
    }

    // Face flux F = h̄ v, zero at the walls.
    let mut dh = vec![0.0; n];
    {
        let flux = |j: usize| -> f64 {
            if j == 0 || j == n {
                0.0
            } else {
                0.5 * (h[j - 1] + h[j]) * v[j]
            }
        };
        for (i, dhi) in dh.iter_mut().enumerate() {
            *dhi = -(flux(i + 1) - flux(i)) / dx;
        }
    }

    // Viscous stress h v_x at cell centers.
    let hvx: Vec<f64> = (0..n).map(|i| h[i] * (v[i + 1] - v[i]) / dx).collect();

    // Curvature K = h_xx (1 + h_x²)^{−3/2} at centers, with even-reflection
    // ghosts imposing the zero-slope wall condition.
    let curvature: Option<Vec<f64>> = if params.sigma > 0.0 {
        let ext = |i: isize| -> f64 {
            if i < 0 {
                h[(-i - 1) as usize]
            } else if i as usize >= n {
                h[2 * n - 1 - i as usize]
            } else {
                h[i as usize]
            }
        };
        Some(
            (0..n as isize)
                .map(|i| {
                    let hx = (ext(i + 1) - ext(i - 1)) / (2.0 * dx);
                    let hxx = (ext(i + 1) - 2.0 * ext(i) + ext(i - 1)) / (dx * dx);
                    hxx / (1.0 + hx * hx).powf(1.5)
                })
                .collect(),
        )
    } else {
        None
    };

    let mut dv = vec![0.0; n + 1];
    for j in 1..n {
        let h_face = 0.5 * (h[j - 1] + h[j]);
        let advection = v[j] * (v[j + 1] - v[j - 1]) / (2.0 * dx);
        let pressure = params.g * (h[j] - h[j - 1]) / dx;
        let tension = match &curvature {
            Some(k) => params.sigma * (k[j] - k[j - 1]) / dx,
            None => 0.0,
        };
        let viscous = (hvx[j] - hvx[j - 1]) / dx * params.mu / h_face;
        let kappa = friction::kappa_eval(&params.friction, h_face, v[j], params.mu)?;
        dv[j] = -advection - pressure + tension + viscous - kappa * v[j] / h_face + f;
    }

    Ok(StateDeriv {
        dxi: state.w,
        dw: -f,
        dh,
        dv,
    })
}

/// Stability-limited step
/// Δt = cfl·min(Δx/max(|v|+√(gh)), Δx²/(2μ), Δx⁴/(8σ·max h)).
pub fn stable_dt(
    state: &NonlinearState,
    params: &PhysicalParams,
    grid: &Grid,
    cfl_safety: f64,
) -> Result<f64> {
    if !(cfl_safety > 0.0 && cfl_safety <= 1.0) {
        return Err(Error::Config(format!(
            "cfl_safety must lie in (0, 1], got {cfl_safety}"
        )));
    }
    if state.h.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Domain("stable_dt needs h > 0".into()));
    }
    let dx = grid.dx();
    let n = grid.n_cells();
    let mut speed: f64 = 0.0;
    for (j, &vj) in state.v.iter().enumerate() {
        let h_face = if j == 0 {
            state.h[0]
        } else if j == n {
            state.h[n - 1]
        } else {
            0.5 * (state.h[j - 1] + state.h[j])
        };
        speed = speed.max(vj.abs() + (params.g * h_face).sqrt());
    }
    let mut dt = (dx / speed).min(dx * dx / (2.0 * params.mu));
    if params.sigma > 0.0 {
        let h_max = state.h.iter().cloned().fold(f64::MIN, f64::max);
        dt = dt.min(dx.powi(4) / (8.0 * params.sigma * h_max));
    }
    Ok(cfl_safety * dt)
}

fn control_value(
    mode: &ControlMode,
    state: &NonlinearState,
    gains: &NonlinearGains,
    mu: f64,
    grid: &Grid,
    t: f64,
) -> f64 {
    match mode {
        ControlMode::ClosedLoop => control::nonlinear_feedback(state, gains, mu, grid),
        ControlMode::OpenLoopZero => 0.0,
        ControlMode::Prescribed(sig) => sig.eval(t),
    }
}

fn advance(state: &NonlinearState, d: &StateDeriv, dt: f64) -> NonlinearState {
    let mut out = state.clone();
    out.t = state.t + dt;
    out.xi = state.xi + dt * d.dxi;
    out.w = state.w + dt * d.dw;
    for (hi, di) in out.h.iter_mut().zip(&d.dh) {
        *hi += dt * di;
    }
    for (vi, di) in out.v.iter_mut().zip(&d.dv) {
        *vi += dt * di;
    }
    out
}

/// One classical RK4 step; the control is re-evaluated from the stage
/// state at every stage.
pub fn step_rk4(
    state: &NonlinearState,
    dt: f64,
    config: &NonlinearRunConfig,
    grid: &Grid,
) -> Result<NonlinearState> {
    let p = &config.params;
    let eval = |s: &NonlinearState, t: f64| -> Result<StateDeriv> {
        let f = control_value(&config.control, s, &config.gains, p.mu, grid, t);
        rhs_nonlinear(s, f, p, grid)
    };
    let t = state.t;
    let k1 = eval(state, t)?;
    let s2 = advance(state, &k1, 0.5 * dt);
    let k2 = eval(&s2, t + 0.5 * dt)?;
    let s3 = advance(state, &k2, 0.5 * dt);
    let k3 = eval(&s3, t + 0.5 * dt)?;
    let s4 = advance(state, &k3, dt);
    let k4 = eval(&s4, t + dt)?;

    let mut out = state.clone();
    out.t = t + dt;
    out.xi += dt / 6.0 * (k1.dxi + 2.0 * k2.dxi + 2.0 * k3.dxi + k4.dxi);
    out.w += dt / 6.0 * (k1.dw + 2.0 * k2.dw + 2.0 * k3.dw + k4.dw);
    for i in 0..out.h.len() {
        out.h[i] += dt / 6.0 * (k1.dh[i] + 2.0 * k2.dh[i] + 2.0 * k3.dh[i] + k4.dh[i]);
    }
    for j in 0..out.v.len() {
        out.v[j] += dt / 6.0 * (k1.dv[j] + 2.0 * k2.dv[j] + 2.0 * k3.dv[j] + k4.dv[j]);
    }
    Ok(out)
}

/// Builds the perturbed initial state from the configured modes.
pub fn initial_state(config: &NonlinearRunConfig, grid: &Grid) -> Result<NonlinearState> {
    let p = &config.params;
    let l = p.length;
    let mut h = vec![p.h_star; grid.n_cells()];
    for &(n, a) in &config.ic.h_modes {
        for (i, &x) in grid.cell_centers().iter().enumerate() {
            h[i] += a * (n as f64 * std::f64::consts::PI * x / l).cos();
        }
    }
    let mut v = vec![0.0; grid.n_nodes()];
    for &(n, b) in &config.ic.v_modes {
        for (j, &x) in grid.faces().iter().enumerate() {
            v[j] += b * (n as f64 * std::f64::consts::PI * x / l).sin();
        }
    }
    v[0] = 0.0;
    *v.last_mut().unwrap() = 0.0;
    if h.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Config(
            "initial perturbation drives the level non-positive".into(),
        ));
    }
    NonlinearState::new(0.0, config.ic.xi0, config.ic.w0, h, v, grid)
}

/// Integrates the configured run and monitors every state constraint.
pub fn run_closed_loop(config: &NonlinearRunConfig) -> Result<NonlinearRunResult> {
    config.validate()?;
    let grid = Grid::new(config.params.length, config.n_cells)?;
    let mut state = initial_state(config, &grid)?;
    let p = &config.params;
    let dt = stable_dt(&state, p, &grid, config.cfl_safety)?;
    // Round up to a whole number of cadences so records stay uniform.
    let steps = ((config.t_end / dt).ceil() as usize).div_ceil(config.cadence) * config.cadence;

    let mass0 = mass(&state, &grid);
    let v0 = clf::clf_v(&state, &config.gains, p, &grid)?;
    let v_slack = config.v_slack_factor * grid.dx() * grid.dx() * v0;

    let mut records = Vec::with_capacity(steps / config.cadence + 2);
    let mut violations = Vec::new();
    let mut prev_v = v0;
    let mut outcome = RunOutcome::Completed;

    let mut record =
        |state: &NonlinearState, violations: &mut Vec<Violation>, prev_v: &mut f64| -> Result<()> {
            let f = control_value(&config.control, state, &config.gains, p.mu, &grid, state.t);
            let v_lyap = clf::clf_v(state, &config.gains, p, &grid)?;
            let e = clf::energy_e(state, p, &grid)?;
            let w_en = clf::energy_w(state, p, &grid)?;
            let v_tilde = if config.gains.v_tilde_extras.is_some() {
                Some(clf::clf_v_tilde(state, &config.gains, p, &grid)?)
            } else {
                None
            };
            let m = mass(state, &grid);
            let h_min = state.h.iter().cloned().fold(f64::MAX, f64::min);
            let h_max = state.h.iter().cloned().fold(f64::MIN, f64::max);

            if (m - mass0).abs() > config.mass_rtol * mass0 {
                violations.push(Violation {
                    t: state.t,
                    kind: ViolationKind::MassDrift,
                    detail: format!("mass drifted to {m} from {mass0}"),
                });
            }
            if h_max >= p.wall_height {
                violations.push(Violation {
                    t: state.t,
                    kind: ViolationKind::Spill,
                    detail: format!("h_max = {h_max} reached the wall height {}", p.wall_height),
                });
            }
            if v_lyap > *prev_v + v_slack {
                violations.push(Violation {
                    t: state.t,
                    kind: ViolationKind::LyapunovIncrease,
                    detail: format!("V rose from {prev_v} to {v_lyap} (slack {v_slack})"),
                });
            }
            if v_lyap > v0 + v_slack {
                violations.push(Violation {
                    t: state.t,
                    kind: ViolationKind::LevelSetExit,
                    detail: format!("V = {v_lyap} exceeded V(0) = {v0} (slack {v_slack})"),
                });
            }
            *prev_v = v_lyap;

            records.push(TimeSeriesRecord {
                t: state.t,
                xi: state.xi,
                w: state.w,
                f,
                v_lyap: Some(v_lyap),
                e_energy: Some(e),
                w_energy: Some(w_en),
                v_tilde,
                w_tilde: None,
                p_norm: None,
                h_min: Some(h_min),
                h_max: Some(h_max),
                mass: Some(m),
                norm_x: Some(state_norm_x(state, p, &grid)),
                vx_norm: Some(vx_norm(state, &grid)),
                phi_mean: None,
                phit_mean: None,
            });
            Ok(())
        };

    record(&state, &mut violations, &mut prev_v)?;
    for k in 0..steps {
        match step_rk4(&state, dt, config, &grid) {
            Ok(next) => state = next,
            Err(Error::Blowup { t, reason }) => {
                outcome = RunOutcome::Aborted { t, reason };
                break;
            }
            Err(e) => return Err(e),
        }
        if (k + 1) % config.cadence == 0 || k + 1 == steps {
            record(&state, &mut violations, &mut prev_v)?;
        }
    }

    let ts: Vec<f64> = records.iter().map(|r| r.t).collect();
    let norms: Vec<f64> = records.iter().map(|r| r.norm_x.unwrap()).collect();
    let vs: Vec<f64> = records.iter().map(|r| r.v_lyap.unwrap()).collect();
    let decay_norm = fit::fit_decay_rate(&ts, &norms, 0.5).ok();
    let decay_v = fit::fit_decay_rate(&ts, &vs, 0.5).ok();
    let vxs: Vec<f64> = records.iter().map(|r| r.vx_norm.unwrap()).collect();
    let decay_vx = fit::fit_decay_rate(&ts, &vxs, 0.5).ok();

    Ok(NonlinearRunResult {
        records,
        decay_norm,
        decay_v,
        decay_vx,
        violations,
        final_state: state,
        outcome,
        dt,
        steps,
    })
}

/// Discrete ‖v_x‖₂ of a state (face differences on cells).
pub fn vx_norm(state: &NonlinearState, grid: &Grid) -> f64 {
    let dx = grid.dx();
    let vx: Vec<f64> = state.v.windows(2).map(|w| (w[1] - w[0]) / dx).collect();
    quad::l2_norm_cells(&vx, dx)
}

pub use crate::fit::fit_decay_rate;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::friction::FrictionModel;
    use crate::model::equilibrium_state;
    use approx::assert_relative_eq;

    fn params() -> PhysicalParams {
        PhysicalParams::new(1.0, 0.02, 0.0, 1.0, 1.0, 2.0, 1.0, 0.0, FrictionModel::Zero).unwrap()
    }

    fn config(control: ControlMode) -> NonlinearRunConfig {
        NonlinearRunConfig {
            params: params(),
            gains: NonlinearGains::new(10.0, 0.15, 50.0, 1.0).unwrap(),
            n_cells: 64,
            t_end: 0.5,
            cfl_safety: 0.5,
            ic: InitialPerturbation::default(),
            control,
            cadence: 10,
            mass_rtol: 1e-10,
            v_slack_factor: 10.0,
        }
    }

    #[test]
    fn equilibrium_is_exact_fixed_point() {
        let cfg = config(ControlMode::ClosedLoop);
        let grid = Grid::new(1.0, 64).unwrap();
        let eq = equilibrium_state(&cfg.params, &grid);
        let d = rhs_nonlinear(&eq, 0.0, &cfg.params, &grid).unwrap();
        assert!(d.dh.iter().all(|&x| x == 0.0));
        assert!(d.dv.iter().all(|&x| x == 0.0));
        // Feedback evaluates to exactly zero there, so RK4 is bit-exact.
        let next = step_rk4(&eq, 1e-3, &cfg, &grid).unwrap();
        assert_eq!(next.h, eq.h);
        assert_eq!(next.v, eq.v);
        assert_eq!(next.xi, 0.0);
        assert_eq!(next.w, 0.0);
    }

    #[test]
    fn uniform_forcing_accelerates_fluid_and_tank_oppositely() {
        let p = params();
        let grid = Grid::new(1.0, 32).unwrap();
        let eq = equilibrium_state(&p, &grid);
        let f0 = 0.7;
        let d = rhs_nonlinear(&eq, f0, &p, &grid).unwrap();
        assert_eq!(d.dw, -f0);
        assert!(d.dh.iter().all(|&x| x == 0.0));
        for j in 1..32 {
            assert_relative_eq!(d.dv[j], f0, epsilon = 1e-14);
        }
        assert_eq!(d.dv[0], 0.0);
        assert_eq!(d.dv[32], 0.0);
    }

    #[test]
    fn discrete_mass_flux_telescopes() {
        let p = params();
        let grid = Grid::new(1.0, 48).unwrap();
        let mut s = equilibrium_state(&p, &grid);
        for (j, &x) in grid.faces().iter().enumerate().take(48).skip(1) {
            s.v[j] = 0.1 * (std::f64::consts::PI * x).sin();
        }
        for (i, &x) in grid.cell_centers().iter().enumerate() {
            s.h[i] += 0.05 * (2.0 * std::f64::consts::PI * x).cos();
        }
        let d = rhs_nonlinear(&s, 0.3, &p, &grid).unwrap();
        let total: f64 = d.dh.iter().sum();
        assert!(total.abs() < 1e-13, "mass flux residual {total}");
    }

    #[test]
    fn rhs_blows_up_on_nonpositive_level() {
        let p = params();
        let grid = Grid::new(1.0, 16).unwrap();
        let mut s = equilibrium_state(&p, &grid);
        s.h[3] = -0.1;
        assert!(matches!(
            rhs_nonlinear(&s, 0.0, &p, &grid),
            Err(Error::Blowup { .. })
        ));
    }

    #[test]
    fn stable_dt_formula_and_preconditions() {
        let p = params();
        let grid = Grid::new(1.0, 64).unwrap();
        let eq = equilibrium_state(&p, &grid);
        let dx = grid.dx();
        let expect = 0.5 * (dx / (p.g * p.h_star).sqrt()).min(dx * dx / (2.0 * p.mu));
        assert_relative_eq!(
            stable_dt(&eq, &p, &grid, 0.5).unwrap(),
            expect,
            epsilon = 1e-14
        );
        assert!(stable_dt(&eq, &p, &grid, 0.0).is_err());
        assert!(stable_dt(&eq, &p, &grid, 1.5).is_err());

        // Quartic restriction dominates under refinement with σ > 0.
        let ps = PhysicalParams::new(
            1.0,
            0.02,
            0.01,
            1.0,
            1.0,
            2.0,
            1.0,
            0.0,
            FrictionModel::Zero,
        )
        .unwrap();
        let g1 = Grid::new(1.0, 64).unwrap();
        let g2 = Grid::new(1.0, 128).unwrap();
        let e1 = equilibrium_state(&ps, &g1);
        let e2 = equilibrium_state(&ps, &g2);
        let dt1 = stable_dt(&e1, &ps, &g1, 0.5).unwrap();
        let dt2 = stable_dt(&e2, &ps, &g2, 0.5).unwrap();
        assert!(dt1 / dt2 >= 15.9, "ratio {}", dt1 / dt2);
    }

    #[test]
    fn rk4_local_order_via_richardson() {
        let cfg = config(ControlMode::ClosedLoop);
        let grid = Grid::new(1.0, 32).unwrap();
        let mut cfg = cfg;
        cfg.ic.h_modes = vec![(1, 0.01)];
        cfg.ic.xi0 = 0.01;
        let s0 = initial_state(&cfg, &grid).unwrap();

        let err_at = |dt: f64| -> f64 {
            let one = step_rk4(&s0, dt, &cfg, &grid).unwrap();
            let half = step_rk4(&s0, 0.5 * dt, &cfg, &grid).unwrap();
            let two = step_rk4(&half, 0.5 * dt, &cfg, &grid).unwrap();
            let mut err: f64 = 0.0;
            for i in 0..one.h.len() {
                err = err.max((one.h[i] - two.h[i]).abs());
            }
            for j in 0..one.v.len() {
                err = err.max((one.v[j] - two.v[j]).abs());
            }
            err.max((one.xi - two.xi).abs()).max((one.w - two.w).abs())
        };
        let dt = 1e-3;
        let ratio = err_at(dt) / err_at(0.5 * dt);
        assert!(
            (16.0..64.0).contains(&ratio),
            "local Richardson ratio {ratio} not consistent with a 4th-order step"
        );
    }

    #[test]
    fn mass_drift_per_step_is_rounding_level() {
        let mut cfg = config(ControlMode::ClosedLoop);
        cfg.ic.h_modes = vec![(2, 0.005)];
        cfg.ic.xi0 = 0.015;
        let grid = Grid::new(1.0, cfg.n_cells).unwrap();
        let s0 = initial_state(&cfg, &grid).unwrap();
        let dt = stable_dt(&s0, &cfg.params, &grid, cfg.cfl_safety).unwrap();
        let m0 = mass(&s0, &grid);
        let mut s = s0;
        for _ in 0..200 {
            s = step_rk4(&s, dt, &cfg, &grid).unwrap();
        }
        assert!((mass(&s, &grid) - m0).abs() <= 200.0 * 1e-13 * m0);
    }

    #[test]
    fn open_loop_tank_position_is_not_restored() {
        let mut cfg = config(ControlMode::OpenLoopZero);
        cfg.ic.xi0 = 0.5;
        cfg.t_end = 0.5;
        let res = run_closed_loop(&cfg).unwrap();
        let last = res.records.last().unwrap();
        // No restoring force on the tank position: ξ stays put.
        assert_relative_eq!(last.xi, 0.5, epsilon = 1e-9);
        assert!(matches!(res.outcome, RunOutcome::Completed));
    }

    #[test]
    fn closed_loop_drives_tank_home_and_v_decays() {
        let mut cfg = config(ControlMode::ClosedLoop);
        cfg.ic.xi0 = 0.015;
        cfg.ic.h_modes = vec![(2, 0.002)];
        cfg.t_end = 6.0;
        cfg.cfl_safety = 0.7;
        let res = run_closed_loop(&cfg).unwrap();
        assert!(matches!(res.outcome, RunOutcome::Completed));
        assert!(
            res.violations.is_empty(),
            "violations: {:?}",
            res.violations
        );
        let first = res.records.first().unwrap();
        let last = res.records.last().unwrap();
        assert!(last.xi.abs() < 0.5 * first.xi.abs());
        assert!(last.v_lyap.unwrap() < first.v_lyap.unwrap());
        let fit = res.decay_norm.expect("norm decay fit");
        assert!(fit.rate > 0.0, "fitted rate {}", fit.rate);
    }

    #[test]
    fn signals_evaluate_correctly() {
        assert_eq!(Signal::Zero.eval(3.0), 0.0);
        assert_eq!(
            Signal::Step {
                amplitude: 2.0,
                t_on: 1.0
            }
            .eval(0.5),
            0.0
        );
        assert_eq!(
            Signal::Step {
                amplitude: 2.0,
                t_on: 1.0
            }
            .eval(1.0),
            2.0
        );
        assert_relative_eq!(
            Signal::Sine {
                amplitude: 2.0,
                omega: 3.0
            }
            .eval(0.4),
            2.0 * (1.2f64).sin(),
            epsilon = 1e-15
        );
    }
}
