//! Randomized verification sweeps over admissible states.
//!
//! States are built from low cosine/sine modes, so the mass constraint
//! and wall conditions hold exactly; each state index derives its own
//! RNG stream, which keeps the sweeps deterministic under any execution
//! order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clf::{self, NonlinearGains};
use crate::error::Result;
use crate::model::{state_norm_x, Grid, NonlinearState, PhysicalParams};
use crate::par::{self, Exec};

/// Outcome of a property sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub n_states: usize,
    pub violations: usize,
    /// Most negative slack-adjusted margin seen (>= 0 means clean).
    pub worst_margin: f64,
}

/// Random admissible state: positive level with exact mass, wall-pinned
/// velocity, bounded tank offsets. `amplitude` scales all perturbations.
pub fn random_admissible_state(
    params: &PhysicalParams,
    grid: &Grid,
    seed: u64,
    amplitude: f64,
) -> NonlinearState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = params.length;
    let head = (params.wall_height - params.h_star).min(params.h_star);
    // Keep the level strictly inside (0, H_max): total cosine amplitude
    // below half the available headroom.
    let budget = 0.5 * head * amplitude.min(1.0);
    let n_modes = 4;
    let mut h = vec![params.h_star; grid.n_cells()];
    for n in 1..=n_modes {
        let a = budget / n_modes as f64 * rng.gen_range(-1.0..1.0);
        for (i, &x) in grid.cell_centers().iter().enumerate() {
            h[i] += a * (n as f64 * std::f64::consts::PI * x / l).cos();
        }
    }
    let mut v = vec![0.0; grid.n_nodes()];
    for n in 1..=n_modes {
        let b = amplitude * rng.gen_range(-0.5..0.5);
        for (j, &x) in grid.faces().iter().enumerate() {
            v[j] += b * (n as f64 * std::f64::consts::PI * x / l).sin();
        }
    }
    v[0] = 0.0;
    *v.last_mut().unwrap() = 0.0;
    let xi = amplitude * rng.gen_range(-0.5..0.5);
    let w = amplitude * rng.gen_range(-0.5..0.5);
    NonlinearState {
        t: 0.0,
        xi,
        w,
        h,
        v,
    }
}

/// Squeeze-bound sweep: p₁(V) ≤ min h ≤ max h ≤ p₂(V) on random states,
/// with additive slack for the quadrature in V.
pub fn squeeze_sweep(
    gains: &NonlinearGains,
    params: &PhysicalParams,
    grid: &Grid,
    n_states: usize,
    seed: u64,
    amplitude: f64,
) -> Result<SweepReport> {
    squeeze_sweep_exec(Exec::Par, gains, params, grid, n_states, seed, amplitude)
}

/// [`squeeze_sweep`] with an explicit execution strategy (benchmarks).
pub fn squeeze_sweep_exec(
    exec: Exec,
    gains: &NonlinearGains,
    params: &PhysicalParams,
    grid: &Grid,
    n_states: usize,
    seed: u64,
    amplitude: f64,
) -> Result<SweepReport> {
    let slack = 10.0 * grid.dx() * grid.dx();
    let margins = par::map_indexed(exec, n_states, |i| {
        let state = random_admissible_state(params, grid, seed.wrapping_add(i as u64), amplitude);
        let v = clf::clf_v(&state, gains, params, grid).expect("admissible state");
        let (p1, p2) = clf::p_bounds(v, gains, params);
        let h_min = state.h.iter().cloned().fold(f64::MAX, f64::min);
        let h_max = state.h.iter().cloned().fold(f64::MIN, f64::max);
        (h_min - (p1 - slack)).min((p2 + slack) - h_max)
    });
    summarize(&margins)
}

/// Small-state upper-bound sweep: V ≤ RHS within slack, on states whose
/// ξ-free deviation norm is rescaled below ε.
pub fn upper_bound_sweep(
    gains: &NonlinearGains,
    params: &PhysicalParams,
    grid: &Grid,
    n_states: usize,
    seed: u64,
    eps: f64,
) -> Result<SweepReport> {
    let slack = 10.0 * grid.dx() * grid.dx();
    let margins = par::map_indexed(Exec::Par, n_states, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37 + i as u64));
        let mut state = random_admissible_state(params, grid, seed.wrapping_add(i as u64), 0.05);
        // Rescale the deviation so the ξ-free norm sits below ε.
        let full = state_norm_x(&state, params, grid);
        let no_xi = (full * full - state.xi * state.xi).max(1e-300).sqrt();
        let target = eps * rng.gen_range(0.2..0.9);
        let scale = target / no_xi;
        for h in state.h.iter_mut() {
            *h = params.h_star + (*h - params.h_star) * scale;
        }
        for v in state.v.iter_mut() {
            *v *= scale;
        }
        state.w *= scale;
        state.xi *= scale;
        let v_val = clf::clf_v(&state, gains, params, grid).expect("admissible state");
        let rhs = clf::small_state_upper_bound(&state, gains, params, grid, eps)
            .expect("precondition holds by construction");
        rhs + slack * (1.0 + v_val) - v_val
    });
    summarize(&margins)
}

fn summarize(margins: &[f64]) -> Result<SweepReport> {
    let violations = margins.iter().filter(|&&m| m < 0.0).count();
    let worst = margins.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(SweepReport {
        n_states: margins.len(),
        violations,
        worst_margin: worst,
    })
}
