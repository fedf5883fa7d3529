//! Property tests for the structural invariants: norm axioms, friction
//! nonnegativity, monotonicity of the squeeze machinery, level-set
//! inclusion, and mass invariance.

use proptest::prelude::*;

use tanklab_core::clf::{self, LevelSetKind, NonlinearGains, VTildeExtras};
use tanklab_core::friction::{self, FrictionModel};
use tanklab_core::model::{self, Grid, NonlinearState, PhysicalParams};
use tanklab_core::sweep::random_admissible_state;

fn params(sigma: f64) -> PhysicalParams {
    PhysicalParams::new(
        1.0,
        0.8,
        sigma,
        1.0,
        1.0,
        2.0,
        1.0,
        0.0,
        FrictionModel::Zero,
    )
    .unwrap()
}

fn grid() -> Grid {
    Grid::new(1.0, 64).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn state_norm_is_homogeneous_and_subadditive(seed_a in 0u64..5000, seed_b in 5000u64..10000, lambda in 0.0f64..3.0) {
        let p = params(0.0);
        let g = grid();
        let a = random_admissible_state(&p, &g, seed_a, 0.4);
        let b = random_admissible_state(&p, &g, seed_b, 0.4);

        // Work on deviations: the norm measures h − h*χ.
        let scale = |s: &NonlinearState, l: f64| -> NonlinearState {
            let mut out = s.clone();
            out.xi *= l;
            out.w *= l;
            for h in out.h.iter_mut() { *h = p.h_star + (*h - p.h_star) * l; }
            for v in out.v.iter_mut() { *v *= l; }
            out
        };
        let add = |x: &NonlinearState, y: &NonlinearState| -> NonlinearState {
            let mut out = x.clone();
            out.xi += y.xi;
            out.w += y.w;
            for (h, hy) in out.h.iter_mut().zip(&y.h) { *h += hy - p.h_star; }
            for (v, vy) in out.v.iter_mut().zip(&y.v) { *v += vy; }
            out
        };

        let na = model::state_norm_x(&a, &p, &g);
        prop_assert!((model::state_norm_x(&scale(&a, lambda), &p, &g) - lambda * na).abs() <= 1e-10 * (1.0 + na));
        let nb = model::state_norm_x(&b, &p, &g);
        let nab = model::state_norm_x(&add(&a, &b), &p, &g);
        prop_assert!(nab <= na + nb + 1e-10);
    }

    #[test]
    fn p_norm_is_homogeneous_and_subadditive(amp1 in -0.5f64..0.5, amp2 in -0.5f64..0.5, lambda in 0.0f64..3.0) {
        let g = grid();
        let mk = |a1: f64, a2: f64| {
            let mut s = model::LinearState::zero(&g);
            for (k, &x) in g.faces().iter().enumerate() {
                s.phi[k] = a1 * (std::f64::consts::PI * x).cos();
                s.phi_t[k] = a2 * (2.0 * std::f64::consts::PI * x).cos();
            }
            s
        };
        let a = mk(amp1, amp2);
        let b = mk(amp2, -amp1);
        let mut scaled = a.clone();
        for v in scaled.phi.iter_mut() { *v *= lambda; }
        for v in scaled.phi_t.iter_mut() { *v *= lambda; }
        let na = model::p_norm(&a, &g);
        prop_assert!((model::p_norm(&scaled, &g) - lambda * na).abs() <= 1e-9 * (1.0 + na));
        let mut sum = a.clone();
        for (v, w) in sum.phi.iter_mut().zip(&b.phi) { *v += w; }
        for (v, w) in sum.phi_t.iter_mut().zip(&b.phi_t) { *v += w; }
        prop_assert!(model::p_norm(&sum, &g) <= na + model::p_norm(&b, &g) + 1e-9);
    }

    #[test]
    fn friction_is_nonnegative_everywhere(h in 1e-3f64..5.0, v in -10.0f64..10.0) {
        let models = [
            FrictionModel::Zero,
            FrictionModel::CfAbsV { c_f: 0.7 },
            FrictionModel::LinearPlusHv { r0: 0.3, r1: 0.9 },
            FrictionModel::DosSantos { r2: 0.5, b2: 0.2 },
            FrictionModel::GerbeauPerthame { b3: 1.1 },
            FrictionModel::bounded_const(2.0),
        ];
        for m in &models {
            prop_assert!(friction::kappa_eval(m, h, v, 0.4).unwrap() >= 0.0);
        }
    }

    #[test]
    fn level_bound_dominates_on_its_box(omega_frac in 0.05f64..1.0, h_frac in 0.0f64..1.0, v in -20.0f64..20.0) {
        let p = params(0.0);
        let model = FrictionModel::GerbeauPerthame { b3: 2.0 };
        let omega = omega_frac * p.h_star;
        let bound = friction::h_bar_bound(&model, omega, p.h_star, p.mu).unwrap();
        let h = omega + h_frac * (p.wall_height - omega);
        let ratio = friction::kappa_eval(&model, h, v, p.mu).unwrap() / (h * h);
        prop_assert!(ratio <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn g_is_strictly_increasing_and_inverts(h1 in -2.0f64..4.0, h2 in -2.0f64..4.0, h_star in 0.2f64..2.0) {
        prop_assume!((h1 - h2).abs() > 1e-9);
        let (lo, hi) = if h1 < h2 { (h1, h2) } else { (h2, h1) };
        prop_assert!(clf::g_eval(lo, h_star) < clf::g_eval(hi, h_star));
        // Round trip away from the flat point.
        if (h1 - h_star).abs() > 1e-3 {
            let s = clf::g_eval(h1, h_star);
            prop_assert!((clf::g_eval(clf::g_inverse(s, h_star), h_star) - s).abs() <= 1e-11);
        }
    }

    #[test]
    fn tilde_level_set_is_contained_in_plain_one(seed in 0u64..4000, r in 0.0f64..0.5) {
        let p = params(0.0);
        let g = grid();
        let gains = NonlinearGains::new(1.0, 0.5, 1.0, 1.0)
            .unwrap()
            .with_v_tilde_extras(VTildeExtras { omega1: 0.5, omega2: 5.0, beta: 0.8, gamma: 0.6 });
        let state = random_admissible_state(&p, &g, seed, 0.2);
        let in_tilde = clf::level_set_member(&state, &gains, &p, &g, r, LevelSetKind::VTilde).unwrap();
        if in_tilde {
            prop_assert!(clf::level_set_member(&state, &gains, &p, &g, r, LevelSetKind::V).unwrap());
        }
    }

    #[test]
    fn mass_is_invariant_under_zero_mean_perturbations(seed in 0u64..4000, mode in 1u32..6, amp in -0.2f64..0.2) {
        let p = params(0.0);
        let g = grid();
        let mut state = random_admissible_state(&p, &g, seed, 0.2);
        let m0 = model::mass(&state, &g);
        for (i, &x) in g.cell_centers().iter().enumerate() {
            state.h[i] += amp * (mode as f64 * 2.0 * std::f64::consts::PI * x / p.length).cos();
        }
        prop_assert!((model::mass(&state, &g) - m0).abs() <= 1e-12 * p.liquid_mass);
    }

    #[test]
    fn squeeze_bounds_bracket_h_star(s in 0.0f64..2.0, delta in 0.2f64..3.0, sigma in 0.0f64..0.5) {
        let p = params(sigma);
        let gains = NonlinearGains::new(1.0, 0.5, 1.0, delta).unwrap();
        let (p1, p2) = clf::p_bounds(s, &gains, &p);
        prop_assert!(p1 <= p.h_star && p.h_star <= p2);
    }

    #[test]
    fn clf_is_positive_on_nonzero_states(seed in 0u64..4000) {
        let p = params(0.2);
        let g = grid();
        let gains = NonlinearGains::new(1.0, 0.5, 1.0, 1.0).unwrap();
        let state = random_admissible_state(&p, &g, seed, 0.3);
        let v = clf::clf_v(&state, &gains, &p, &g).unwrap();
        prop_assert!(v >= 0.0);
        let deviation = model::state_norm_x(&state, &p, &g);
        if deviation > 1e-6 {
            prop_assert!(v > 0.0, "V vanished on a state with deviation {deviation}");
        }
    }
}

/// Two-sided equivalence of the linear Lyapunov functional with the
/// squared combined state norm: fitted sandwich constants
/// 0 < c₃ ≤ W̃/(P² + ξ² + w²) ≤ c₄ over a random state family.
#[test]
fn w_tilde_is_sandwiched_by_the_state_norm() {
    use tanklab_core::control::LinearGains;

    let p = params(0.2);
    let g = grid();
    let lg = LinearGains::new(2.0, 0.3, 0.4, 0.8).unwrap();
    let mut c3 = f64::INFINITY;
    let mut c4: f64 = 0.0;
    for seed in 0..400u64 {
        let mut rng_state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
        let mut next = || {
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut s = model::LinearState::zero(&g);
        s.xi = next();
        s.w = next();
        for n in 1..=4u32 {
            let (a, b) = (0.2 * next(), 0.2 * next());
            for (k, &x) in g.faces().iter().enumerate() {
                let c = (n as f64 * std::f64::consts::PI * x).cos();
                s.phi[k] += a * c;
                s.phi_t[k] += b * c;
            }
        }
        let w_tilde = clf::linear_clf_w_tilde(&s, &lg, &p, &g);
        let pn = model::p_norm(&s, &g);
        let denom = pn * pn + s.xi * s.xi + s.w * s.w;
        if denom < 1e-14 {
            continue;
        }
        assert!(w_tilde > 0.0, "W-tilde must be positive definite");
        let ratio = w_tilde / denom;
        c3 = c3.min(ratio);
        c4 = c4.max(ratio);
    }
    assert!(
        c3 > 0.0 && c3 <= c4 && c4.is_finite(),
        "sandwich constants degenerate: c3 = {c3}, c4 = {c4}"
    );
    println!("fitted sandwich constants: c3 = {c3:.4}, c4 = {c4:.4}");
}

/// Discrete Poincaré-type inequalities on their hypothesis classes, with
/// O(Δx²) slack: zero-mean functions, wall-pinned primitives, and
/// zero-slope walls respectively.
#[test]
fn wirtinger_inequalities_hold_on_admissible_states() {
    use tanklab_core::clf::theta_primitive;
    use tanklab_core::quad;

    let g = grid();
    let l = 1.0f64;
    let dx = g.dx();
    let slack = 1.0 + 10.0 * dx * dx;
    let factor = l / std::f64::consts::PI;

    let mut rng_state = 0xABCDu64;
    let mut next = || {
        rng_state ^= rng_state << 13;
        rng_state ^= rng_state >> 7;
        rng_state ^= rng_state << 17;
        (rng_state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };

    for _case in 0..200 {
        // Zero-mean, zero-slope-at-walls test function from cosine modes.
        let mut phi = vec![0.0; g.n_nodes()];
        let mut phi_t = vec![0.0; g.n_nodes()];
        for n in 1..=5u32 {
            let (a, b) = (next(), next());
            for (k, &x) in g.faces().iter().enumerate() {
                let c = (n as f64 * std::f64::consts::PI * x / l).cos();
                phi[k] += a * c;
                phi_t[k] += b * c;
            }
        }
        let phi_x = quad::deriv_nodes(&phi, dx);
        let phi_xx = quad::second_deriv_nodes(&phi, dx);
        let theta = theta_primitive(&phi_t, &g);
        let nn = |v: &[f64]| quad::l2_norm_nodes(v, dx);

        // ‖φ‖ ≤ (L/π)‖φ_x‖ for zero-mean φ.
        assert!(nn(&phi) <= factor * nn(&phi_x) * slack);
        // ‖θ‖ ≤ (L/π)‖φ_t‖ for the wall-pinned primitive.
        assert!(nn(&theta) <= factor * nn(&phi_t) * slack);
        // ‖φ_x‖ ≤ (L/π)‖φ_xx‖ for zero-slope walls.
        assert!(nn(&phi_x) <= factor * nn(&phi_xx) * slack);
    }

    // Sharpness on the first mode: equality within discretization error.
    let mut phi = vec![0.0; g.n_nodes()];
    for (k, &x) in g.faces().iter().enumerate() {
        phi[k] = (std::f64::consts::PI * x / l).cos();
    }
    let phi_x = quad::deriv_nodes(&phi, dx);
    let ratio = quad::l2_norm_nodes(&phi, dx) / (factor * quad::l2_norm_nodes(&phi_x, dx));
    assert!(
        (ratio - 1.0).abs() < 1e-3,
        "mode-1 ratio {ratio} should be ≈ 1"
    );
}
