//! Empirical wall-friction models and the bound functions the gain
//! certificates need.
//!
//! Each named model reproduces one of the friction closures used in the
//! shallow-water literature. Certificates consume them through two
//! quantities: the level-wise bound `K̄(ω)` with `κ(h,v)/h² ≤ K̄(ω)` on
//! `[ω, H_max] × ℝ` (only level-bounded models admit one), and the box
//! maximum `K̃ = max κ(h,v)/h²` over `[ω₁, H_max] × [−ω₂, ω₂]`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::par::{self, Exec};

/// Friction coefficient κ(h, v) ≥ 0.
#[derive(Clone)]
pub enum FrictionModel {
    /// Frictionless liquid, κ ≡ 0.
    Zero,
    /// κ(h, v) = c_f |v|.
    CfAbsV { c_f: f64 },
    /// κ(h, v) = r₀ + r₁ h |v|.
    LinearPlusHv { r0: f64, r1: f64 },
    /// κ(h, v) = r₂ h^{-1/3} (b₂ + 2h)^{4/3} |v|.
    DosSantos { r2: f64, b2: f64 },
    /// Velocity-independent κ(h) = 3μb₃ / (3μ + 4b₃h).
    GerbeauPerthame { b3: f64 },
    /// Arbitrary bounded coefficient: κ(h, v) ≤ κ_max everywhere.
    BoundedCustom {
        kappa_max: f64,
        eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for FrictionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrictionModel::Zero => write!(f, "Zero"),
            FrictionModel::CfAbsV { c_f } => write!(f, "CfAbsV {{ c_f: {c_f} }}"),
            FrictionModel::LinearPlusHv { r0, r1 } => {
                write!(f, "LinearPlusHv {{ r0: {r0}, r1: {r1} }}")
            }
            FrictionModel::DosSantos { r2, b2 } => {
                write!(f, "DosSantos {{ r2: {r2}, b2: {b2} }}")
            }
            FrictionModel::GerbeauPerthame { b3 } => {
                write!(f, "GerbeauPerthame {{ b3: {b3} }}")
            }
            FrictionModel::BoundedCustom { kappa_max, .. } => {
                write!(f, "BoundedCustom {{ kappa_max: {kappa_max}, .. }}")
            }
        }
    }
}

impl FrictionModel {
    /// A bounded model with a constant coefficient κ(h, v) = κ_max.
    pub fn bounded_const(kappa_max: f64) -> Self {
        FrictionModel::BoundedCustom {
            kappa_max,
            eval: Arc::new(move |_, _| kappa_max),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, FrictionModel::Zero)
    }
}

/// Evaluates κ(h, v) for the chosen model. `mu` is the kinematic
/// viscosity (only the Gerbeau-Perthame closure reads it).
pub fn kappa_eval(model: &FrictionModel, h: f64, v: f64, mu: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Domain(format!(
            "friction coefficient needs h > 0, got h = {h}"
        )));
    }
    Ok(match model {
        FrictionModel::Zero => 0.0,
        FrictionModel::CfAbsV { c_f } => c_f * v.abs(),
        FrictionModel::LinearPlusHv { r0, r1 } => r0 + r1 * h * v.abs(),
        FrictionModel::DosSantos { r2, b2 } => {
            r2 * h.powf(-1.0 / 3.0) * (b2 + 2.0 * h).powf(4.0 / 3.0) * v.abs()
        }
        FrictionModel::GerbeauPerthame { b3 } => 3.0 * mu * b3 / (3.0 * mu + 4.0 * b3 * h),
        FrictionModel::BoundedCustom { eval, .. } => eval(h, v),
    })
}

/// Level-wise friction bound K̄(ω) with h⁻²κ(h, v) ≤ K̄(ω) for all
/// (h, v) ∈ [ω, H_max] × ℝ.
///
/// Only velocity-independent or uniformly bounded models admit one; the
/// |v|-unbounded closures return [`Error::NotHCompliant`], signalling
/// that the box-maximum machinery must be used instead.
pub fn h_bar_bound(model: &FrictionModel, omega: f64, h_star: f64, mu: f64) -> Result<f64> {
    if !(omega > 0.0 && omega <= h_star) {
        return Err(Error::Domain(format!(
            "level bound needs omega in (0, h*], got omega = {omega}, h* = {h_star}"
        )));
    }
    match model {
        FrictionModel::Zero => Ok(0.0),
        FrictionModel::GerbeauPerthame { b3 } => {
            Ok(3.0 * mu * b3 / (omega * omega * (3.0 * mu + 4.0 * b3 * omega)))
        }
        FrictionModel::BoundedCustom { kappa_max, .. } => Ok(kappa_max / (omega * omega)),
        other => Err(Error::NotHCompliant(format!("{other:?}"))),
    }
}

/// Number of scan points per axis for [`k_tilde_max`].
const SCAN_POINTS: usize = 512;

/// Box maximum K̃ of h⁻²κ(h, v) over [ω₁, H_max] × [−ω₂, ω₂].
///
/// Deterministic dense scan (512×512) followed by coordinate-wise
/// golden-section refinement around the best cell; the refinement never
/// decreases the scan estimate.
pub fn k_tilde_max(
    model: &FrictionModel,
    omega1: f64,
    omega2: f64,
    h_max_wall: f64,
    mu: f64,
) -> Result<f64> {
    k_tilde_max_exec(Exec::Par, model, omega1, omega2, h_max_wall, mu)
}

/// [`k_tilde_max`] with an explicit execution strategy (benchmarks use
/// this to compare the sequential and parallel scans).
pub fn k_tilde_max_exec(
    exec: Exec,
    model: &FrictionModel,
    omega1: f64,
    omega2: f64,
    h_max_wall: f64,
    mu: f64,
) -> Result<f64> {
    if !(omega1 > 0.0 && omega1 <= h_max_wall && omega2 > 0.0) {
        return Err(Error::Domain(format!(
            "invalid box [{omega1}, {h_max_wall}] x [-{omega2}, {omega2}]"
        )));
    }
    let phi = |h: f64, v: f64| -> f64 {
        kappa_eval(model, h, v, mu)
            .map(|k| k / (h * h))
            .unwrap_or(f64::NEG_INFINITY)
    };

    let nh = if h_max_wall > omega1 { SCAN_POINTS } else { 1 };
    let nv = SCAN_POINTS;
    let dh = if nh > 1 {
        (h_max_wall - omega1) / (nh - 1) as f64
    } else {
        0.0
    };
    let dv = 2.0 * omega2 / (nv - 1) as f64;
    let h_at = |i: usize| omega1 + i as f64 * dh;
    let v_at = |j: usize| -omega2 + j as f64 * dv;

    // Row-wise scan: rows in parallel, deterministic argmax per row.
    let rows: Vec<(f64, usize)> = par::map_indexed(exec, nh, |i| {
        let h = h_at(i);
        let mut best = (f64::NEG_INFINITY, 0usize);
        for j in 0..nv {
            let val = phi(h, v_at(j));
            if val > best.0 {
                best = (val, j);
            }
        }
        best
    });
    let (mut best_val, mut best_i, mut best_j) = (f64::NEG_INFINITY, 0usize, 0usize);
    for (i, &(val, j)) in rows.iter().enumerate() {
        if val > best_val {
            best_val = val;
            best_i = i;
            best_j = j;
        }
    }

    // Local refinement, alternating axes inside the +-1-cell neighbourhood.
    let mut h = h_at(best_i);
    let mut v = v_at(best_j);
    let mut refined = best_val;
    for _ in 0..3 {
        if nh > 1 {
            let lo = (h - dh).max(omega1);
            let hi = (h + dh).min(h_max_wall);
            let (hx, val) = golden_max(|x| phi(x, v), lo, hi);
            if val > refined {
                refined = val;
                h = hx;
            }
        }
        let lo = (v - dv).max(-omega2);
        let hi = (v + dv).min(omega2);
        let (vx, val) = golden_max(|x| phi(h, x), lo, hi);
        if val > refined {
            refined = val;
            v = vx;
        }
    }
    Ok(refined.max(best_val).max(0.0))
}

/// Golden-section maximization of a unimodal-ish slice; returns (x, f(x)).
fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..48 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
