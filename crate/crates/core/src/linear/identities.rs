//! Numeric validators for the three energy identities of the linear
//! model:
//!
//! ```text
//! d/dt[½‖φ_t‖² + (c²/2)‖φ_x‖² + (σh*/2)‖φ_xx‖²] = −μ‖φ_tx‖² − κ̄‖φ_t‖² + h*⟨φ_tx, χ⟩f
//! d/dt[½‖θ‖² + (c²/2)‖φ‖² + (σh*/2)‖φ_x‖²]      = −κ̄‖θ‖² − μ‖φ_t‖² − h*⟨θ, χ⟩f
//! d/dt[½‖θ−μφ_x‖² + ((c²+κ̄μ)/2)‖φ‖² + (σh*/2)‖φ_x‖²]
//!     = −μc²‖φ_x‖² − μσh*‖φ_xx‖² − κ̄‖θ‖² − h*⟨θ−μφ_x, χ⟩f
//! ```
//!
//! The time derivative is a centered difference over the record cadence;
//! the first identity uses the staggered/weighted discrete norms under
//! which the spatial summation-by-parts is exact, so its residual is
//! pure O(Δt²). The θ-identities keep an O(Δx²) floor from the
//! collocated primitive.

use serde::Serialize;

use crate::clf::theta_primitive;
use crate::error::{Error, Result};
use crate::model::{Grid, LinearState, PhysicalParams};
use crate::quad;

use super::operator::LinearOperatorAssembly;

/// Max-over-slice residuals of the three identities.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyIdentityResiduals {
    pub beam: f64,
    pub mechanical: f64,
    pub modified: f64,
}

fn staggered_sq(u: &[f64], dx: f64) -> f64 {
    u.windows(2)
        .map(|w| ((w[1] - w[0]) / dx).powi(2))
        .sum::<f64>()
        * dx
}

fn nodes_sq(u: &[f64], dx: f64) -> f64 {
    quad::l2_norm_nodes(u, dx).powi(2)
}

/// Validates the identities along a uniformly sampled trajectory slice.
/// `controls[k]` is the control value at `states[k]`.
pub fn energy_identity_check(
    states: &[LinearState],
    controls: &[f64],
    params: &PhysicalParams,
    grid: &Grid,
) -> Result<EnergyIdentityResiduals> {
    if states.len() < 9 || controls.len() != states.len() {
        return Err(Error::Precondition(format!(
            "need >= 9 uniformly spaced snapshots with controls, got {} / {}",
            states.len(),
            controls.len()
        )));
    }
    let dt = states[1].t - states[0].t;
    for w in states.windows(2) {
        let step = w[1].t - w[0].t;
        if ((step - dt) / dt).abs() > 1e-9 {
            return Err(Error::Precondition(
                "trajectory slice is not uniformly sampled".into(),
            ));
        }
    }
    let dx = grid.dx();
    let c2 = params.g * params.h_star;
    let sh = params.sigma * params.h_star;
    let (mu, kb, hs) = (params.mu, params.kappa_bar, params.h_star);
    let op = LinearOperatorAssembly::new(params, grid)?;

    let n = states.len();
    let mut lhs = vec![[0.0f64; 3]; n];
    let mut rhs = vec![[0.0f64; 3]; n];
    for (k, s) in states.iter().enumerate() {
        let f = controls[k];
        let theta = theta_primitive(&s.phi_t, grid);
        let phi_x = quad::deriv_nodes(&s.phi, dx);
        let phi_xx = quad::second_deriv_nodes(&s.phi, dx);
        let d2phi = op.d2(&s.phi);

        // Identity 1 with the summation-by-parts-exact discrete norms.
        lhs[k][0] = 0.5 * nodes_sq(&s.phi_t, dx)
            + 0.5 * c2 * staggered_sq(&s.phi, dx)
            + 0.5 * sh * nodes_sq(&d2phi, dx);
        let nn = s.phi_t.len();
        rhs[k][0] = -mu * staggered_sq(&s.phi_t, dx) - kb * nodes_sq(&s.phi_t, dx)
            + hs * (s.phi_t[nn - 1] - s.phi_t[0]) * f;

        // Identity 2.
        lhs[k][1] = 0.5 * nodes_sq(&theta, dx)
            + 0.5 * c2 * nodes_sq(&s.phi, dx)
            + 0.5 * sh * nodes_sq(&phi_x, dx);
        rhs[k][1] = -kb * nodes_sq(&theta, dx)
            - mu * nodes_sq(&s.phi_t, dx)
            - hs * quad::trapezoid(&theta, dx) * f;

        // Identity 3.
        let shifted: Vec<f64> = theta
            .iter()
            .zip(&phi_x)
            .map(|(&t, &p)| t - mu * p)
            .collect();
        lhs[k][2] = 0.5 * nodes_sq(&shifted, dx)
            + 0.5 * (c2 + kb * mu) * nodes_sq(&s.phi, dx)
            + 0.5 * sh * nodes_sq(&phi_x, dx);
        rhs[k][2] = -mu * c2 * nodes_sq(&phi_x, dx)
            - mu * sh * nodes_sq(&phi_xx, dx)
            - kb * nodes_sq(&theta, dx)
            - hs * quad::trapezoid(&shifted, dx) * f;
    }

    let mut res = [0.0f64; 3];
    for k in 1..n - 1 {
        for i in 0..3 {
            let dt_lhs = (lhs[k + 1][i] - lhs[k - 1][i]) / (2.0 * dt);
            res[i] = res[i].max((dt_lhs - rhs[k][i]).abs());
        }
    }
    Ok(EnergyIdentityResiduals {
        beam: res[0],
        mechanical: res[1],
        modified: res[2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::friction::FrictionModel;
    use crate::linear::run::{run_linear, LinearControl, LinearInitial, LinearRunConfig};

    fn params() -> PhysicalParams {
        PhysicalParams::new(1.0, 0.2, 5e-4, 1.0, 1.0, 2.0, 1.0, 0.0, FrictionModel::Zero).unwrap()
    }

    fn traj(cfl: f64, cadence: usize) -> (Vec<LinearState>, Vec<f64>, Grid) {
        let cfg = LinearRunConfig {
            params: params(),
            n_cells: 96,
            t_end: 2.5,
            cfl_safety: cfl,
            cadence,
            control: LinearControl::Zero,
            ic: LinearInitial {
                phi_modes: vec![(1, 0.01)],
                ..Default::default()
            },
            store_states: true,
        };
        let grid = Grid::new(cfg.params.length, cfg.n_cells).unwrap();
        let res = run_linear(&cfg).unwrap();
        (res.states, res.controls, grid)
    }

    #[test]
    fn zero_trajectory_has_zero_residuals() {
        let grid = Grid::new(1.0, 32).unwrap();
        let states: Vec<LinearState> = (0..12)
            .map(|k| LinearState {
                t: k as f64 * 0.1,
                ..LinearState::zero(&grid)
            })
            .collect();
        let res = energy_identity_check(&states, &[0.0; 12], &params(), &grid).unwrap();
        assert_eq!(res.beam, 0.0);
        assert_eq!(res.mechanical, 0.0);
        assert_eq!(res.modified, 0.0);
    }

    #[test]
    fn dissipation_makes_beam_energy_monotone_without_input() {
        let (states, _, grid) = traj(0.9, 8000);
        let p = params();
        let dx = grid.dx();
        let mut prev = f64::INFINITY;
        for s in &states {
            let d2 = LinearOperatorAssembly::new(&p, &grid).unwrap().d2(&s.phi);
            let e = 0.5 * nodes_sq(&s.phi_t, dx)
                + 0.5 * p.g * p.h_star * staggered_sq(&s.phi, dx)
                + 0.5 * p.sigma * p.h_star * nodes_sq(&d2, dx);
            assert!(e <= prev * (1.0 + 1e-12), "beam energy rose: {e} > {prev}");
            prev = e;
        }
    }

    #[test]
    fn residuals_shrink_fourfold_under_dt_halving() {
        // Same cadence, half the step: the record spacing halves with it
        // and the centered-difference error is O(Δt²).
        let (sa, ca, grid) = traj(0.8, 8000);
        let (sb, cb, _) = traj(0.4, 8000);
        let p = params();
        let ra = energy_identity_check(&sa, &ca, &p, &grid).unwrap();
        let rb = energy_identity_check(&sb, &cb, &p, &grid).unwrap();
        for (a, b, name) in [
            (ra.beam, rb.beam, "beam"),
            (ra.mechanical, rb.mechanical, "mechanical"),
            (ra.modified, rb.modified, "modified"),
        ] {
            let ratio = a / b;
            assert!(
                ratio > 3.3 && ratio < 4.8,
                "{name}: ratio {ratio} (coarse {a}, fine {b})"
            );
        }
    }

    #[test]
    fn precondition_rejects_sparse_or_mismatched_slices() {
        let grid = Grid::new(1.0, 32).unwrap();
        let states: Vec<LinearState> = (0..5)
            .map(|k| LinearState {
                t: k as f64,
                ..LinearState::zero(&grid)
            })
            .collect();
        assert!(energy_identity_check(&states, &[0.0; 5], &params(), &grid).is_err());
    }
}
