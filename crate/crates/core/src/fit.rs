//! Exponential decay-rate fitting for recorded diagnostics.

use serde::Serialize;

use crate::error::{Error, Result};

/// Least-squares fit of y ≈ M·exp(−λt) on a trailing window.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayFit {
    /// Fitted amplitude M.
    pub amplitude: f64,
    /// Fitted rate λ (positive means decay).
    pub rate: f64,
    /// Goodness of the log-linear fit.
    pub r2: f64,
}

/// Fits M, λ by linear regression on log-values over
/// [t₀ + frac·(t_end − t₀), t_end].
pub fn fit_decay_rate(ts: &[f64], ys: &[f64], t_start_fraction: f64) -> Result<DecayFit> {
    if ts.len() != ys.len() || ts.len() < 3 {
        return Err(Error::Fit(format!(
            "need matching series with >= 3 samples, got {} / {}",
            ts.len(),
            ys.len()
        )));
    }
    if !(0.0..1.0).contains(&t_start_fraction) {
        return Err(Error::Fit(format!(
            "t_start_fraction must lie in [0, 1), got {t_start_fraction}"
        )));
    }
    let t0 = ts[0];
    let t_end = ts[ts.len() - 1];
    let t_cut = t0 + t_start_fraction * (t_end - t0);
    let mut xs = Vec::new();
    let mut ls = Vec::new();
    for (&t, &y) in ts.iter().zip(ys) {
        if t >= t_cut {
            if !(y > 0.0) {
                return Err(Error::Fit(format!(
                    "non-positive sample y = {y} at t = {t}"
                )));
            }
            xs.push(t);
            ls.push(y.ln());
        }
    }
    if xs.len() < 3 {
        return Err(Error::Fit(
            "fit window contains fewer than 3 samples".into(),
        ));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_l = ls.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxl = 0.0;
    for (&x, &l) in xs.iter().zip(&ls) {
        sxx += (x - mean_x) * (x - mean_x);
        sxl += (x - mean_x) * (l - mean_l);
    }
    if sxx == 0.0 {
        return Err(Error::Fit("degenerate time axis in fit window".into()));
    }
    let slope = sxl / sxx;
    let intercept = mean_l - slope * mean_x;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (&x, &l) in xs.iter().zip(&ls) {
        let pred = intercept + slope * x;
        ss_res += (l - pred) * (l - pred);
        ss_tot += (l - mean_l) * (l - mean_l);
    }
    // Constant series accumulate only rounding noise in ss_tot; report a
    // perfect fit rather than 0/0 garbage.
    let degenerate = ss_tot <= 1e-24 * n * (1.0 + mean_l * mean_l);
    let r2 = if degenerate {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(DecayFit {
        amplitude: intercept.exp(),
        rate: -slope,
        r2,
    })
}
