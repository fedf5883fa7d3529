//! Physical parameters, grids, states, norms and the moving-frame
//! transformation shared by every other module.
//!
//! The nonlinear liquid state lives on a staggered grid: the level h at
//! cell centers and the relative velocity v at faces, so the wall
//! conditions v(0) = v(L) = 0 are imposed exactly and the discrete mass
//! flux telescopes. The linear state (φ, φ_t) lives on the node grid
//! (the faces array, walls included).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::friction::FrictionModel;
use crate::quad;

/// All physical constants of the tank-liquid system.
#[derive(Debug, Clone)]
pub struct PhysicalParams {
    /// Gravity acceleration (m/s²).
    pub g: f64,
    /// Kinematic viscosity μ (m²/s).
    pub mu: f64,
    /// Surface-tension / density ratio σ ≥ 0 (m³/s²).
    pub sigma: f64,
    /// Tank length L (m).
    pub length: f64,
    /// Liquid mass divided by density·width (m²).
    pub liquid_mass: f64,
    /// Equilibrium level h* = m/L (m); stored, not recomputed.
    pub h_star: f64,
    /// Wall height H_max (m).
    pub wall_height: f64,
    /// Tank mass divided by density·width (m²).
    pub tank_mass: f64,
    /// Linear friction coefficient κ̄ ≥ 0 (1/s).
    pub kappa_bar: f64,
    /// Wall-friction closure for the nonlinear model.
    pub friction: FrictionModel,
}

impl PhysicalParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        g: f64,
        mu: f64,
        sigma: f64,
        length: f64,
        liquid_mass: f64,
        wall_height: f64,
        tank_mass: f64,
        kappa_bar: f64,
        friction: FrictionModel,
    ) -> Result<Self> {
        if !(g > 0.0 && mu > 0.0 && length > 0.0 && liquid_mass > 0.0 && tank_mass > 0.0) {
            return Err(Error::Config(
                "g, mu, L, m, tank mass must all be strictly positive".into(),
            ));
        }
        if !(sigma >= 0.0 && kappa_bar >= 0.0) {
            return Err(Error::Config("sigma and kappa_bar must be >= 0".into()));
        }
        let h_star = liquid_mass / length;
        if !(h_star < wall_height) {
            return Err(Error::Config(format!(
                "equilibrium level h* = {h_star} must be below the wall height {wall_height}"
            )));
        }
        Ok(PhysicalParams {
            g,
            mu,
            sigma,
            length,
            liquid_mass,
            h_star,
            wall_height,
            tank_mass,
            kappa_bar,
            friction,
        })
    }

    /// Wave speed c = √(g h*).
    pub fn wave_speed(&self) -> f64 {
        (self.g * self.h_star).sqrt()
    }
}

/// Uniform staggered grid on [0, L].
#[derive(Debug, Clone)]
pub struct Grid {
    n_cells: usize,
    dx: f64,
    length: f64,
    cell_centers: Vec<f64>,
    faces: Vec<f64>,
}

impl Grid {
    pub fn new(length: f64, n_cells: usize) -> Result<Self> {
        if n_cells < 4 {
            return Err(Error::Config(format!(
                "grid needs >= 4 cells, got {n_cells}"
            )));
        }
        if !(length > 0.0) {
            return Err(Error::Config("grid length must be positive".into()));
        }
        let dx = length / n_cells as f64;
        let cell_centers = (0..n_cells).map(|i| (i as f64 + 0.5) * dx).collect();
        let mut faces: Vec<f64> = (0..=n_cells).map(|j| j as f64 * dx).collect();
        faces[n_cells] = length;
        Ok(Grid {
            n_cells,
            dx,
            length,
            cell_centers,
            faces,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Node count of the wall-inclusive grid (= faces).
    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cell_centers(&self) -> &[f64] {
        &self.cell_centers
    }

    pub fn faces(&self) -> &[f64] {
        &self.faces
    }
}

/// Moving-frame state of the nonlinear system: tank position error ξ,
/// tank velocity w, level h at cell centers, relative velocity v at faces.
#[derive(Debug, Clone)]
pub struct NonlinearState {
    pub t: f64,
    pub xi: f64,
    pub w: f64,
    pub h: Vec<f64>,
    pub v: Vec<f64>,
}

impl NonlinearState {
    /// Validating constructor: shapes must match the grid, h must be
    /// positive and v must vanish at both walls.
    pub fn new(t: f64, xi: f64, w: f64, h: Vec<f64>, v: Vec<f64>, grid: &Grid) -> Result<Self> {
        if h.len() != grid.n_cells() || v.len() != grid.n_nodes() {
            return Err(Error::Config(format!(
                "state shape mismatch: h has {} cells (grid {}), v has {} faces (grid {})",
                h.len(),
                grid.n_cells(),
                v.len(),
                grid.n_nodes()
            )));
        }
        if h.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::Domain(
                "liquid level must be positive everywhere".into(),
            ));
        }
        if v[0] != 0.0 || v[v.len() - 1] != 0.0 {
            return Err(Error::Domain(
                "relative velocity must vanish at both walls".into(),
            ));
        }
        Ok(NonlinearState { t, xi, w, h, v })
    }

    /// Test-only escape hatch: no shape or boundary checks.
    pub fn new_unchecked(t: f64, xi: f64, w: f64, h: Vec<f64>, v: Vec<f64>) -> Self {
        NonlinearState { t, xi, w, h, v }
    }
}

/// State of the linearized system: φ = h − h*χ and φ_t on the node grid.
#[derive(Debug, Clone)]
pub struct LinearState {
    pub t: f64,
    pub xi: f64,
    pub w: f64,
    pub phi: Vec<f64>,
    pub phi_t: Vec<f64>,
}

impl LinearState {
    pub fn new(
        t: f64,
        xi: f64,
        w: f64,
        phi: Vec<f64>,
        phi_t: Vec<f64>,
        grid: &Grid,
    ) -> Result<Self> {
        if phi.len() != grid.n_nodes() || phi_t.len() != grid.n_nodes() {
            return Err(Error::Config(format!(
                "linear state needs {} nodes, got phi: {}, phi_t: {}",
                grid.n_nodes(),
                phi.len(),
                phi_t.len()
            )));
        }
        Ok(LinearState {
            t,
            xi,
            w,
            phi,
            phi_t,
        })
    }

    pub fn zero(grid: &Grid) -> Self {
        LinearState {
            t: 0.0,
            xi: 0.0,
            w: 0.0,
            phi: vec![0.0; grid.n_nodes()],
            phi_t: vec![0.0; grid.n_nodes()],
        }
    }

    /// Trapezoid means of φ and φ_t (both must stay ≈ 0 along solutions).
    pub fn means(&self, grid: &Grid) -> (f64, f64) {
        let l = grid.length();
        (
            quad::trapezoid(&self.phi, grid.dx()) / l,
            quad::trapezoid(&self.phi_t, grid.dx()) / l,
        )
    }
}

/// One diagnostics row of a simulation run.
#[derive(Debug, Clone, Serialize)]
pub struct TimeSeriesRecord {
    pub t: f64,
    pub xi: f64,
    pub w: f64,
    /// Applied control (m/s²).
    pub f: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_lyap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_tilde: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_tilde: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vx_norm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phit_mean: Option<f64>,
}

/// Equilibrium: h ≡ h*, v ≡ 0, ξ = w = 0.
pub fn equilibrium_state(params: &PhysicalParams, grid: &Grid) -> NonlinearState {
    NonlinearState {
        t: 0.0,
        xi: 0.0,
        w: 0.0,
        h: vec![params.h_star; grid.n_cells()],
        v: vec![0.0; grid.n_nodes()],
    }
}

/// State-space norm (ξ² + w² + ‖h−h*χ‖₂² + ‖h′‖₂² + ‖v‖₂²)^{1/2}.
pub fn state_norm_x(state: &NonlinearState, params: &PhysicalParams, grid: &Grid) -> f64 {
    let dx = grid.dx();
    let dev: Vec<f64> = state.h.iter().map(|&h| h - params.h_star).collect();
    let h_prime = quad::deriv_cells(&state.h, dx);
    let dev_sq = quad::l2_norm_cells(&dev, dx).powi(2);
    let hp_sq = quad::l2_norm_cells(&h_prime, dx).powi(2);
    let v_sq = quad::l2_norm_nodes(&state.v, dx).powi(2);
    (state.xi * state.xi + state.w * state.w + dev_sq + hp_sq + v_sq).sqrt()
}

/// Linear-model state norm (‖φ‖₂² + ‖φ_x‖₂² + ‖φ_xx‖₂² + ‖φ_t‖₂²)^{1/2}.
pub fn p_norm(state: &LinearState, grid: &Grid) -> f64 {
    let dx = grid.dx();
    let phi_x = quad::deriv_nodes(&state.phi, dx);
    let phi_xx = quad::second_deriv_nodes(&state.phi, dx);
    (quad::l2_norm_nodes(&state.phi, dx).powi(2)
        + quad::l2_norm_nodes(&phi_x, dx).powi(2)
        + quad::l2_norm_nodes(&phi_xx, dx).powi(2)
        + quad::l2_norm_nodes(&state.phi_t, dx).powi(2))
    .sqrt()
}

/// Total liquid mass ∫h dx on the cell grid.
pub fn mass(state: &NonlinearState, grid: &Grid) -> f64 {
    quad::midpoint(&state.h, grid.dx())
}

/// Lab-frame reconstruction: a = ξ + a*, H(x) = h(x), v̄(x) = v(x) + w.
pub fn to_lab_frame(state: &NonlinearState, a_star: f64) -> (f64, Vec<f64>, Vec<f64>) {
    let a = state.xi + a_star;
    let h_lab = state.h.clone();
    let v_bar = state.v.iter().map(|&v| v + state.w).collect();
    (a, h_lab, v_bar)
}
