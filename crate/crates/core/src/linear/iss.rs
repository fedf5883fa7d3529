//! Input-to-state stability estimate fitting for the distributed
//! subsystem: finds constants (M̄, λ̄, Γ) such that
//!
//! ```text
//! P(t) ≤ M̄·exp(−λ̄t)·P(0) + Γ·max_{0≤s≤t} exp(−λ̄(t−s))|f(s)|
//! ```
//!
//! holds across a family of initial conditions and bounded inputs. λ̄ is
//! the slowest fitted decay of the zero-input runs; M̄ and Γ are the
//! smallest constants making the bound hold sample-wise, then verified
//! family-wide with a 5% margin.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::PhysicalParams;
use crate::nonlinear::Signal;
use crate::par::{self, Exec};

use super::run::{run_linear, LinearControl, LinearInitial, LinearRunConfig, LinearRunResult};

#[derive(Debug, Clone)]
pub struct IssConfig {
    pub params: PhysicalParams,
    pub n_cells: usize,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub cadence: usize,
    pub ics: Vec<LinearInitial>,
    pub signals: Vec<Signal>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IssReport {
    pub m_bar: f64,
    pub lambda_bar: f64,
    pub gamma: f64,
    pub passed: bool,
    /// Fitted zero-input decay rates, one per initial condition.
    pub zero_input_rates: Vec<f64>,
    pub diagnostics: String,
}

/// Runs the family and fits the ISS constants.
pub fn iss_check(config: &IssConfig) -> Result<IssReport> {
    if config.ics.len() < 5 {
        return Err(Error::Precondition(format!(
            "need >= 5 initial conditions, got {}",
            config.ics.len()
        )));
    }
    if config.signals.len() < 3 || !config.signals.iter().any(|s| matches!(s, Signal::Zero)) {
        return Err(Error::Precondition(
            "need >= 3 input signals including the zero signal".into(),
        ));
    }

    // All (ic, signal) combinations, independent runs.
    let combos: Vec<(usize, usize)> = (0..config.ics.len())
        .flat_map(|i| (0..config.signals.len()).map(move |j| (i, j)))
        .collect();
    let runs: Vec<Result<LinearRunResult>> = par::map_indexed(Exec::Par, combos.len(), |idx| {
        let (i, j) = combos[idx];
        let cfg = LinearRunConfig {
            params: config.params.clone(),
            n_cells: config.n_cells,
            t_end: config.t_end,
            cfl_safety: config.cfl_safety,
            cadence: config.cadence,
            control: LinearControl::Prescribed(config.signals[j]),
            ic: config.ics[i].clone(),
            store_states: false,
        };
        run_linear(&cfg)
    });
    let mut results = Vec::with_capacity(runs.len());
    for r in runs {
        results.push(r?);
    }

    // λ̄: slowest decay among the zero-input runs.
    let mut rates = Vec::new();
    for (idx, &(_, j)) in combos.iter().enumerate() {
        if matches!(config.signals[j], Signal::Zero) {
            match results[idx].decay_p {
                Some(fit) if fit.rate > 0.0 => rates.push(fit.rate),
                other => {
                    return Ok(IssReport {
                        m_bar: f64::NAN,
                        lambda_bar: f64::NAN,
                        gamma: f64::NAN,
                        passed: false,
                        zero_input_rates: rates,
                        diagnostics: format!(
                            "zero-input run {idx} does not decay (fit: {other:?})"
                        ),
                    })
                }
            }
        }
    }
    let lambda_bar = rates.iter().cloned().fold(f64::INFINITY, f64::min);

    // M̄ from the zero-input runs.
    let mut m_bar: f64 = 1.0;
    for (idx, &(_, j)) in combos.iter().enumerate() {
        if !matches!(config.signals[j], Signal::Zero) {
            continue;
        }
        let recs = &results[idx].records;
        let p0 = recs[0].p_norm.unwrap();
        if p0 <= 0.0 {
            continue;
        }
        for r in recs {
            m_bar = m_bar.max(r.p_norm.unwrap() * (lambda_bar * r.t).exp() / p0);
        }
    }

    // Γ from the forced runs, with the fading-memory input envelope
    // G(t_k) = max(G(t_{k-1})·e^{−λ̄Δt}, |f(t_k)|).
    let mut gamma: f64 = 0.0;
    for (idx, &(_, j)) in combos.iter().enumerate() {
        if matches!(config.signals[j], Signal::Zero) {
            continue;
        }
        let recs = &results[idx].records;
        let p0 = recs[0].p_norm.unwrap();
        let mut envelope: f64 = 0.0;
        let mut prev_t = recs[0].t;
        for r in recs {
            envelope = (envelope * (-lambda_bar * (r.t - prev_t)).exp()).max(r.f.abs());
            prev_t = r.t;
            if envelope > 1e-14 {
                let excess = r.p_norm.unwrap() - m_bar * (-lambda_bar * r.t).exp() * p0;
                if excess > 0.0 {
                    gamma = gamma.max(excess / envelope);
                }
            }
        }
    }

    // Family-wide verification with 5% margin.
    let mut passed = m_bar.is_finite() && gamma.is_finite() && lambda_bar > 0.0;
    let mut diagnostics = String::new();
    'outer: for (idx, _) in combos.iter().enumerate() {
        let recs = &results[idx].records;
        let p0 = recs[0].p_norm.unwrap();
        let mut envelope: f64 = 0.0;
        let mut prev_t = recs[0].t;
        for r in recs {
            envelope = (envelope * (-lambda_bar * (r.t - prev_t)).exp()).max(r.f.abs());
            prev_t = r.t;
            let bound = 1.05 * (m_bar * (-lambda_bar * r.t).exp() * p0 + gamma * envelope);
            if r.p_norm.unwrap() > bound {
                passed = false;
                diagnostics = format!(
                    "run {idx}: P = {} exceeds bound {bound} at t = {}",
                    r.p_norm.unwrap(),
                    r.t
                );
                break 'outer;
            }
        }
    }

    Ok(IssReport {
        m_bar,
        lambda_bar,
        gamma,
        passed,
        zero_input_rates: rates,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::friction::FrictionModel;

    fn config() -> IssConfig {
        let params = PhysicalParams::new(
            1.0,
            0.25,
            0.003,
            1.0,
            1.0,
            2.0,
            1.0,
            0.0,
            FrictionModel::Zero,
        )
        .unwrap();
        let ics: Vec<LinearInitial> = (1..=5)
            .map(|n| LinearInitial {
                phi_modes: vec![(n, 0.01 / n as f64)],
                ..Default::default()
            })
            .collect();
        IssConfig {
            params,
            n_cells: 40,
            t_end: 5.0,
            cfl_safety: 0.8,
            cadence: 200,
            ics,
            signals: vec![
                Signal::Zero,
                Signal::Step {
                    amplitude: 0.02,
                    t_on: 0.0,
                },
                Signal::Sine {
                    amplitude: 0.02,
                    omega: 2.0,
                },
            ],
        }
    }

    #[test]
    fn family_bound_holds_with_margin() {
        let report = iss_check(&config()).unwrap();
        assert!(report.passed, "diagnostics: {}", report.diagnostics);
        assert!(report.lambda_bar > 0.0);
        assert!(report.m_bar >= 1.0);
        assert!(report.gamma.is_finite());
    }

    #[test]
    fn doubling_the_input_doubles_the_plateau() {
        // Linearity: the forced steady response scales with the input.
        let base = config();
        let plateau = |amp: f64| -> f64 {
            let cfg = LinearRunConfig {
                params: base.params.clone(),
                n_cells: base.n_cells,
                t_end: base.t_end,
                cfl_safety: base.cfl_safety,
                cadence: base.cadence,
                control: LinearControl::Prescribed(Signal::Step {
                    amplitude: amp,
                    t_on: 0.0,
                }),
                ic: LinearInitial::default(),
                store_states: false,
            };
            let res = run_linear(&cfg).unwrap();
            res.records.last().unwrap().p_norm.unwrap()
        };
        let p1 = plateau(0.01);
        let p2 = plateau(0.02);
        assert!(p1 > 0.0);
        assert!((p2 / p1 - 2.0).abs() < 1e-6, "ratio {}", p2 / p1);
    }

    #[test]
    fn preconditions_are_enforced() {
        let mut cfg = config();
        cfg.ics.truncate(3);
        assert!(iss_check(&cfg).is_err());
        let mut cfg = config();
        cfg.signals = vec![
            Signal::Step {
                amplitude: 1.0,
                t_on: 0.0,
            },
            Signal::Sine {
                amplitude: 1.0,
                omega: 1.0,
            },
            Signal::Sine {
                amplitude: 2.0,
                omega: 2.0,
            },
        ];
        assert!(iss_check(&cfg).is_err());
    }
}
