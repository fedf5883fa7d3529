//! Lyapunov functionals for the tank-liquid system and the safe-region
//! bound machinery built on them.
//!
//! The nonlinear functionals are
//!
//! ```text
//! E(h,v) = ½∫hv² + (g/2)‖h−h*χ‖₂² + σ∫(√(1+h'²) − 1)
//! W(h,v) = ½∫h⁻¹(hv + μh')² + (g/2)‖h−h*χ‖₂² + σ∫(√(1+h'²) − 1)
//! V      = δE + W + (qk²/2)ξ² + (q/2)(w + kξ)²
//! Ṽ      = V + (½‖v'‖₂² + γV)·exp(βV)
//! ```
//!
//! and the level function h is squeezed between p₁(V) and p₂(V), built
//! from the increasing bijection G and its inverse. The safe radius R
//! is the largest level-set height for which those bounds keep h inside
//! (0, H_max), which is exactly the no-spill certificate.

use crate::control::LinearGains;
use crate::error::{Error, Result};
use crate::model::{Grid, LinearState, NonlinearState, PhysicalParams};
use crate::quad;

/// Controller gains for the nonlinear feedback law and its certificates.
#[derive(Debug, Clone)]
pub struct NonlinearGains {
    pub zeta: f64,
    pub k: f64,
    pub q: f64,
    pub delta: f64,
    /// Level floor ω ∈ (0, h*] for the level-bounded-friction certificate.
    pub omega: Option<f64>,
    /// Extras for the general-friction certificate.
    pub v_tilde_extras: Option<VTildeExtras>,
}

/// (ω₁, ω₂, β, γ) of the general-friction certificate.
#[derive(Debug, Clone, Copy)]
pub struct VTildeExtras {
    pub omega1: f64,
    pub omega2: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl NonlinearGains {
    pub fn new(zeta: f64, k: f64, q: f64, delta: f64) -> Result<Self> {
        if !(zeta > 0.0 && k > 0.0 && q > 0.0 && delta > 0.0) {
            return Err(Error::Config(
                "gains zeta, k, q, delta must be positive".into(),
            ));
        }
        Ok(NonlinearGains {
            zeta,
            k,
            q,
            delta,
            omega: None,
            v_tilde_extras: None,
        })
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = Some(omega);
        self
    }

    pub fn with_v_tilde_extras(mut self, extras: VTildeExtras) -> Self {
        self.v_tilde_extras = Some(extras);
        self
    }
}

fn check_positive_level(state: &NonlinearState) -> Result<()> {
    if state.h.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::Domain(
            "energy functionals need h > 0 pointwise".into(),
        ));
    }
    Ok(())
}

/// Surface-tension excess arc length σ∫(√(1+h'²) − 1).
fn surface_term(h_prime: &[f64], sigma: f64, dx: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    sigma
        * quad::midpoint(
            &h_prime
                .iter()
                .map(|&p| (1.0 + p * p).sqrt() - 1.0)
                .collect::<Vec<_>>(),
            dx,
        )
}

/// Mechanical energy E of the liquid.
pub fn energy_e(state: &NonlinearState, params: &PhysicalParams, grid: &Grid) -> Result<f64> {
    check_positive_level(state)?;
    let dx = grid.dx();
    let v_c = quad::faces_to_cells(&state.v);
    let kinetic: f64 = 0.5
        * quad::midpoint(
            &state
                .h
                .iter()
                .zip(&v_c)
                .map(|(&h, &v)| h * v * v)
                .collect::<Vec<_>>(),
            dx,
        );
    let dev: Vec<f64> = state.h.iter().map(|&h| h - params.h_star).collect();
    let potential = 0.5 * params.g * quad::l2_norm_cells(&dev, dx).powi(2);
    let h_prime = quad::deriv_cells(&state.h, dx);
    Ok(kinetic + potential + surface_term(&h_prime, params.sigma, dx))
}

/// Modified mechanical energy W with the (hv + μh')² momentum density.
pub fn energy_w(state: &NonlinearState, params: &PhysicalParams, grid: &Grid) -> Result<f64> {
    check_positive_level(state)?;
    let dx = grid.dx();
    let v_c = quad::faces_to_cells(&state.v);
    let h_prime = quad::deriv_cells(&state.h, dx);
    let momentum: f64 = 0.5
        * quad::midpoint(
            &state
                .h
                .iter()
                .zip(&v_c)
                .zip(&h_prime)
                .map(|((&h, &v), &hp)| {
                    let m = h * v + params.mu * hp;
                    m * m / h
                })
                .collect::<Vec<_>>(),
            dx,
        );
    let dev: Vec<f64> = state.h.iter().map(|&h| h - params.h_star).collect();
    let potential = 0.5 * params.g * quad::l2_norm_cells(&dev, dx).powi(2);
    Ok(momentum + potential + surface_term(&h_prime, params.sigma, dx))
}

/// Control Lyapunov functional V = δE + W + (qk²/2)ξ² + (q/2)(w + kξ)².
pub fn clf_v(
    state: &NonlinearState,
    gains: &NonlinearGains,
    params: &PhysicalParams,
    grid: &Grid,
) -> Result<f64> {
    let e = energy_e(state, params, grid)?;
    let w = energy_w(state, params, grid)?;
    let tank = 0.5 * gains.q * gains.k * gains.k * state.xi * state.xi
        + 0.5 * gains.q * (state.w + gains.k * state.xi).powi(2);
    Ok(gains.delta * e + w + tank)
}

/// Augmented functional Ṽ = V + (½‖v'‖₂² + γV)·exp(βV).
pub fn clf_v_tilde(
    state: &NonlinearState,
    gains: &NonlinearGains,
    params: &PhysicalParams,
    grid: &Grid,
) -> Result<f64> {
    let extras = gains.v_tilde_extras.ok_or_else(|| {
        Error::Config("V-tilde needs the (omega1, omega2, beta, gamma) extras".into())
    })?;
    let v = clf_v(state, gains, params, grid)?;
    let dx = grid.dx();
    let v_prime: Vec<f64> = state.v.windows(2).map(|w| (w[1] - w[0]) / dx).collect();
    let vp_sq = quad::l2_norm_cells(&v_prime, dx).powi(2);
    Ok(v + (0.5 * vp_sq + extras.gamma * v) * (extras.beta * v).exp())
}

/// The strictly increasing bijection G: ℝ → ℝ used by the level bounds.
pub fn g_eval(h: f64, h_star: f64) -> f64 {
    let base = (4.0 / 3.0) * h_star * h_star.sqrt();
    if h > 0.0 {
        let psi = (2.0 / 3.0) * h * h.sqrt() - 2.0 * h_star * h.sqrt() + base;
        if h > h_star {
            psi
        } else if h < h_star {
            -psi
        } else {
            0.0
        }
    } else {
        -base + h
    }
}

/// Inverse of [`g_eval`]: closed form on the linear branch, bisection
/// with bracket doubling elsewhere. |G(x) − s| ≤ 1e-12 at desk scale.
/// G is critically flat at h* (G'(h*) = 0), so for s near 0 the residual
/// contract resolves the abscissa only to ~√ε; s = 0 returns h* exactly.
pub fn g_inverse(s: f64, h_star: f64) -> f64 {
    if s == 0.0 {
        return h_star;
    }
    let base = (4.0 / 3.0) * h_star * h_star.sqrt();
    if s <= -base {
        return s + base;
    }
    // Bracket [0, hi] with G(0) = -base < s.
    let mut hi = (2.0 * h_star).max(1.0);
    while g_eval(hi, h_star) < s {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if g_eval(mid, h_star) < s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Safe-region data: the level-set radius R, the constant Q and the
/// squeeze functions p₁, p₂.
#[derive(Debug, Clone)]
pub struct SafeRegion {
    /// Q = 1/(μ√(δg)).
    pub q_const: f64,
    /// Level-set radius R guaranteeing 0 < p₁ ≤ p₂ < H_max below it.
    pub r: f64,
    pub zeta1: f64,
    pub zeta2: f64,
    h_star: f64,
    sigma: f64,
    delta: f64,
    liquid_mass: f64,
    mu: f64,
    length: f64,
    wall_height: f64,
}

impl SafeRegion {
    /// Lower squeeze bound p₁(s); non-increasing, p₁(0) = h*.
    pub fn p1(&self, s: f64) -> f64 {
        self.p_bounds(s).0
    }

    /// Upper squeeze bound p₂(s); non-decreasing, p₂(0) = h*.
    pub fn p2(&self, s: f64) -> f64 {
        self.p_bounds(s).1
    }

    /// Both bounds; the σ-dependent third branch participates only when
    /// surface tension is present.
    pub fn p_bounds(&self, s: f64) -> (f64, f64) {
        let s = s.max(0.0);
        let t1_lo = g_inverse(-self.q_const * s, self.h_star);
        let t1_hi = g_inverse(self.q_const * s, self.h_star);
        let spread = (2.0 * self.liquid_mass * (1.0 + self.delta) * s
            / (self.delta * self.mu * self.mu))
            .sqrt();
        let mut lo = t1_lo.max(self.h_star - spread);
        let mut hi = t1_hi.min(self.h_star + spread);
        if self.sigma > 0.0 {
            let a = s / (self.sigma * (self.delta + 1.0)) + self.length;
            let t3 = (a * a - self.length * self.length).max(0.0).sqrt();
            lo = lo.max(self.h_star - t3);
            hi = hi.min(self.h_star + t3);
        }
        // p₁ ≤ h* ≤ p₂ holds analytically; the clamp shields the squeeze
        // from the flat-point noise of the G-inverse.
        (lo.min(self.h_star), hi.max(self.h_star))
    }

    /// Checks 0 < p₁(s) ≤ p₂(s) < H_max on a dense grid of [0, 0.999R].
    pub fn bounds_hold_below_r(&self, n_samples: usize) -> bool {
        (0..n_samples).all(|i| {
            let s = 0.999 * self.r * i as f64 / (n_samples.max(2) - 1) as f64;
            let (p1, p2) = self.p_bounds(s);
            0.0 < p1 && p1 <= p2 && p2 < self.wall_height
        })
    }
}

/// Evaluates p₁, p₂ at level s for the given gains and parameters.
pub fn p_bounds(s: f64, gains: &NonlinearGains, params: &PhysicalParams) -> (f64, f64) {
    safe_region_unvalidated(gains, params).p_bounds(s)
}

fn safe_region_unvalidated(gains: &NonlinearGains, params: &PhysicalParams) -> SafeRegion {
    let h_star = params.h_star;
    let hw = params.wall_height;
    let (g, mu, sigma, l, m, delta) = (
        params.g,
        params.mu,
        params.sigma,
        params.length,
        params.liquid_mass,
        gains.delta,
    );
    let gh = (g * h_star).sqrt();
    let head = hw - h_star;

    let zeta1 = {
        let t1 = (hw / h_star).sqrt() - 2.0 * h_star.sqrt() / (hw.sqrt() + h_star.sqrt());
        let t2 = 3.0 * mu * delta.sqrt() * head / (4.0 * m * (1.0 + delta) * gh);
        let t3 = if sigma > 0.0 {
            3.0 * sigma * (delta + 1.0) * ((l * l + head * head).sqrt() - l)
                / (2.0 * mu * (delta * g * h_star).sqrt() * head)
        } else {
            0.0
        };
        t1.max(t2).max(t3)
    };
    let zeta2 = {
        let t2 = 3.0 * mu * delta.sqrt() / (4.0 * l * gh * (1.0 + delta));
        let t3 = if sigma > 0.0 {
            3.0 * sigma * (delta + 1.0) * h_star.sqrt()
                / (2.0 * mu * (delta * g).sqrt() * ((h_star * h_star + l * l).sqrt() + l))
        } else {
            0.0
        };
        (h_star / head) * 2.0f64.max(t2).max(t3)
    };
    let r = (2.0 * mu * (delta * g * h_star).sqrt() / 3.0) * head * zeta1.min(zeta2);

    SafeRegion {
        q_const: 1.0 / (mu * (delta * g).sqrt()),
        r,
        zeta1,
        zeta2,
        h_star,
        sigma,
        delta,
        liquid_mass: m,
        mu,
        length: l,
        wall_height: hw,
    }
}

/// Builds the safe region (Q, R, ζ₁, ζ₂ and the squeeze bounds).
pub fn safe_radius(gains: &NonlinearGains, params: &PhysicalParams) -> Result<SafeRegion> {
    if !(params.h_star < params.wall_height) {
        return Err(Error::Domain("safe radius needs h* < H_max".into()));
    }
    Ok(safe_region_unvalidated(gains, params))
}

/// Which level-set family to test membership in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelSetKind {
    V,
    VTilde,
}

/// Membership in X_V(r) (V ≤ r) or X_Ṽ(r) (Ṽ ≤ r + γr·exp(βr)).
pub fn level_set_member(
    state: &NonlinearState,
    gains: &NonlinearGains,
    params: &PhysicalParams,
    grid: &Grid,
    r: f64,
    kind: LevelSetKind,
) -> Result<bool> {
    if r < 0.0 {
        return Err(Error::Domain("level-set radius must be nonnegative".into()));
    }
    match kind {
        LevelSetKind::V => Ok(clf_v(state, gains, params, grid)? <= r),
        LevelSetKind::VTilde => {
            let extras = gains
                .v_tilde_extras
                .ok_or_else(|| Error::Config("V-tilde membership needs beta and gamma".into()))?;
            let vt = clf_v_tilde(state, gains, params, grid)?;
            Ok(vt <= r + extras.gamma * r * (extras.beta * r).exp())
        }
    }
}

/// Small-state upper bound for V: returns the right-hand side
/// σ(δ+1)√L·‖z‖_X + max(μ²(h*−ε√L)⁻¹, (δ+1)g/2, (δ+2)H_max/2, q, 3qk²/2)·‖z‖_X²
/// where z = (ξ, w, h−h*χ, v). The caller-supplied ε must bound the
/// ξ-free part of the norm and satisfy ε < min(h*, H_max−h*)/√L.
pub fn small_state_upper_bound(
    state: &NonlinearState,
    gains: &NonlinearGains,
    params: &PhysicalParams,
    grid: &Grid,
    eps: f64,
) -> Result<f64> {
    let sqrt_l = params.length.sqrt();
    let limit = params.h_star.min(params.wall_height - params.h_star) / sqrt_l;
    if !(eps > 0.0 && eps < limit) {
        return Err(Error::Precondition(format!(
            "eps must lie in (0, {limit}), got {eps}"
        )));
    }
    let full = crate::model::state_norm_x(state, params, grid);
    let no_xi = (full * full - state.xi * state.xi).max(0.0).sqrt();
    if no_xi > eps {
        return Err(Error::Precondition(format!(
            "state deviation {no_xi} exceeds eps = {eps}"
        )));
    }
    let (q, k, delta) = (gains.q, gains.k, gains.delta);
    let cmax = (params.mu * params.mu / (params.h_star - eps * sqrt_l))
        .max(0.5 * (delta + 1.0) * params.g)
        .max(0.5 * (delta + 2.0) * params.wall_height)
        .max(q)
        .max(1.5 * q * k * k);
    Ok(params.sigma * (delta + 1.0) * sqrt_l * full + cmax * full * full)
}

/// Cumulative primitive θ(x) = ∫₀ˣ φ_t(s) ds on the node grid.
///
/// θ(0) = 0 exactly and θ(L) ≈ 0 whenever φ_t has zero mean.
pub fn theta_primitive(phi_t: &[f64], grid: &Grid) -> Vec<f64> {
    quad::cumtrapz(phi_t, grid.dx())
}

/// Lyapunov functional of the linearized closed loop:
///
/// ```text
/// W̃ = ½ξ² + (k₅²/2)(w + k₅⁻¹ξ)²
///   + μ/(K h*² L) · (½‖φ_t‖² + (c²/2)‖φ'‖² + (σh*/2)‖φ''‖²)
///   + k₄ · (½‖θ‖² + (c²/2)‖φ‖² + (σh*/2)‖φ'‖²)
///   + k₃ · (½‖θ − μφ'‖² + ((c²+κ̄μ)/2)‖φ‖² + (σh*/2)‖φ'‖²)
/// ```
pub fn linear_clf_w_tilde(
    state: &LinearState,
    gains: &LinearGains,
    params: &PhysicalParams,
    grid: &Grid,
) -> f64 {
    let dx = grid.dx();
    let c2 = params.g * params.h_star;
    let sh = params.sigma * params.h_star;
    let phi_x = quad::deriv_nodes(&state.phi, dx);
    let phi_xx = quad::second_deriv_nodes(&state.phi, dx);
    let theta = theta_primitive(&state.phi_t, grid);

    let tank = 0.5 * state.xi * state.xi
        + 0.5 * gains.k5 * gains.k5 * (state.w + state.xi / gains.k5).powi(2);

    let beam = 0.5 * quad::l2_norm_nodes(&state.phi_t, dx).powi(2)
        + 0.5 * c2 * quad::l2_norm_nodes(&phi_x, dx).powi(2)
        + 0.5 * sh * quad::l2_norm_nodes(&phi_xx, dx).powi(2);
    let beam_scale = params.mu / (gains.big_k * params.h_star * params.h_star * params.length);

    let mech = 0.5 * quad::l2_norm_nodes(&theta, dx).powi(2)
        + 0.5 * c2 * quad::l2_norm_nodes(&state.phi, dx).powi(2)
        + 0.5 * sh * quad::l2_norm_nodes(&phi_x, dx).powi(2);

    let shifted: Vec<f64> = theta
        .iter()
        .zip(&phi_x)
        .map(|(&t, &p)| t - params.mu * p)
        .collect();
    let mech_mod = 0.5 * quad::l2_norm_nodes(&shifted, dx).powi(2)
        + 0.5 * (c2 + params.kappa_bar * params.mu) * quad::l2_norm_nodes(&state.phi, dx).powi(2)
        + 0.5 * sh * quad::l2_norm_nodes(&phi_x, dx).powi(2);

    tank + beam_scale * beam + gains.k4 * mech + gains.k3 * mech_mod
}
