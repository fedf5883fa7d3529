//! Scenario file schema (TOML) and conversion into core types.
//!
//! Parsing is strict: unknown keys are rejected with the list of valid
//! ones, and a redundant `h_star` must agree with liquid_mass/length.

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use tanklab_core::clf::{NonlinearGains, VTildeExtras};
use tanklab_core::control::{LinearGains, PdGains};
use tanklab_core::friction::FrictionModel;
use tanklab_core::model::PhysicalParams;
use tanklab_core::nonlinear::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    SimulateNonlinear,
    SimulateLinear,
    Spectrum,
    GainsCheck,
    SafeRadius,
    LyapunovEval,
    IssCheck,
    ResolventCheck,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub mode: Mode,
    pub params: ParamsBlock,
    pub grid: GridBlock,
    #[serde(default)]
    pub gains: Option<GainsBlock>,
    #[serde(default)]
    pub linear_gains: Option<LinearGainsBlock>,
    #[serde(default)]
    pub pd_gains: Option<PdGainsBlock>,
    #[serde(default)]
    pub run: Option<RunBlock>,
    #[serde(default)]
    pub ic: Option<IcBlock>,
    #[serde(default)]
    pub gains_check: Option<GainsCheckBlock>,
    #[serde(default)]
    pub spectrum: Option<SpectrumBlock>,
    #[serde(default)]
    pub iss: Option<IssBlock>,
    #[serde(default)]
    pub resolvent: Option<ResolventBlock>,
    #[serde(default)]
    pub lyapunov: Option<LyapunovBlock>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    pub g: f64,
    pub mu: f64,
    #[serde(default)]
    pub sigma: f64,
    pub length: f64,
    pub liquid_mass: f64,
    pub wall_height: f64,
    #[serde(default = "one")]
    pub tank_mass: f64,
    #[serde(default)]
    pub kappa_bar: f64,
    /// Optional redundant value; must equal liquid_mass / length.
    #[serde(default)]
    pub h_star: Option<f64>,
    #[serde(default)]
    pub friction: Option<FrictionBlock>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "model")]
pub enum FrictionBlock {
    Zero,
    CfAbsV { c_f: f64 },
    LinearPlusHv { r0: f64, r1: f64 },
    DosSantos { r2: f64, b2: f64 },
    GerbeauPerthame { b3: f64 },
    BoundedConst { kappa_max: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub n_cells: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsBlock {
    pub zeta: f64,
    pub k: f64,
    pub q: f64,
    pub delta: f64,
    #[serde(default)]
    pub omega: Option<f64>,
    #[serde(default)]
    pub v_tilde_extras: Option<VTildeBlock>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VTildeBlock {
    pub omega1: f64,
    pub omega2: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearGainsBlock {
    pub big_k: f64,
    pub k3: f64,
    pub k4: f64,
    pub k5: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdGainsBlock {
    pub k1: f64,
    pub k2: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    #[serde(default = "default_cadence")]
    pub cadence: usize,
    #[serde(default = "default_control")]
    pub control: String,
    #[serde(default)]
    pub signal: Option<SignalBlock>,
}

fn default_cfl() -> f64 {
    0.4
}

fn default_cadence() -> usize {
    10
}

fn default_control() -> String {
    "closed-loop".to_string()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "kind")]
pub enum SignalBlock {
    Zero,
    Step {
        amplitude: f64,
        #[serde(default)]
        t_on: f64,
    },
    Sine {
        amplitude: f64,
        omega: f64,
    },
}

impl From<&SignalBlock> for Signal {
    fn from(b: &SignalBlock) -> Signal {
        match *b {
            SignalBlock::Zero => Signal::Zero,
            SignalBlock::Step { amplitude, t_on } => Signal::Step { amplitude, t_on },
            SignalBlock::Sine { amplitude, omega } => Signal::Sine { amplitude, omega },
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcBlock {
    #[serde(default)]
    pub h_modes: Vec<(u32, f64)>,
    #[serde(default)]
    pub v_modes: Vec<(u32, f64)>,
    #[serde(default)]
    pub phi_modes: Vec<(u32, f64)>,
    #[serde(default)]
    pub phit_modes: Vec<(u32, f64)>,
    #[serde(default)]
    pub xi0: f64,
    #[serde(default)]
    pub w0: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsCheckBlock {
    /// One of "level-bounded-friction", "general-friction", "surface-tension", "linear".
    pub law: String,
    #[serde(default)]
    pub r: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumBlock {
    #[serde(default = "default_modes")]
    pub n_modes: usize,
}

fn default_modes() -> usize {
    5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IssBlock {
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    #[serde(default = "default_iss_cadence")]
    pub cadence: usize,
    #[serde(default = "default_ic_modes")]
    pub ic_modes: Vec<u32>,
    #[serde(default = "default_ic_amplitude")]
    pub ic_amplitude: f64,
    pub step_amplitude: f64,
    pub sine_amplitude: f64,
    pub sine_omega: f64,
}

fn default_iss_cadence() -> usize {
    200
}

fn default_ic_modes() -> Vec<u32> {
    vec![1, 2, 3, 4, 5]
}

fn default_ic_amplitude() -> f64 {
    0.01
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolventBlock {
    #[serde(default)]
    pub q_bar: f64,
    #[serde(default = "default_terms")]
    pub n_terms: usize,
    pub rhs: RhsBlock,
    #[serde(default = "default_rtol")]
    pub residual_tolerance: f64,
}

fn default_terms() -> usize {
    256
}

fn default_rtol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case", tag = "kind")]
pub enum RhsBlock {
    Constant { value: f64 },
    Cosine { mode: u32, amplitude: f64 },
    ExpCos { amplitude: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovBlock {
    /// Optional randomized squeeze/upper-bound sweeps of this size.
    #[serde(default)]
    pub sweep_states: usize,
    #[serde(default = "default_sweep_amplitude")]
    pub sweep_amplitude: f64,
}

fn default_sweep_amplitude() -> f64 {
    0.3
}

/// Parses and validates a scenario file.
pub fn parse_scenario(path: &std::path::Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read scenario file {}", path.display()))?;
    let scenario: Scenario = toml::from_str(&text)
        .with_context(|| format!("invalid scenario file {}", path.display()))?;
    scenario.validate()?;
    Ok(scenario)
}

impl Scenario {
    fn validate(&self) -> Result<()> {
        let p = &self.params;
        if let Some(h_star) = p.h_star {
            let derived = p.liquid_mass / p.length;
            if (h_star - derived).abs() > 1e-12 * derived.abs().max(1.0) {
                bail!(
                    "h_star = {h_star} contradicts liquid_mass/length = {derived}; \
                     drop the key or fix the masses"
                );
            }
        }
        if p.liquid_mass / p.length >= p.wall_height {
            bail!(
                "physically invalid: equilibrium level {} is not below the wall height {}",
                p.liquid_mass / p.length,
                p.wall_height
            );
        }
        match self.mode {
            Mode::SimulateNonlinear => {
                if self.run.is_none() {
                    bail!("mode simulate-nonlinear requires a [run] block");
                }
                if self.gains.is_none() {
                    bail!("mode simulate-nonlinear requires a [gains] block");
                }
            }
            Mode::SimulateLinear => {
                if self.run.is_none() {
                    bail!("mode simulate-linear requires a [run] block");
                }
            }
            Mode::GainsCheck => {
                if self.gains_check.is_none() {
                    bail!("mode gains-check requires a [gains_check] block");
                }
            }
            Mode::IssCheck => {
                if self.iss.is_none() {
                    bail!("mode iss-check requires an [iss] block");
                }
            }
            Mode::ResolventCheck => {
                if self.resolvent.is_none() {
                    bail!("mode resolvent-check requires a [resolvent] block");
                }
            }
            Mode::SafeRadius | Mode::LyapunovEval => {
                if self.gains.is_none() {
                    bail!("this mode requires a [gains] block");
                }
            }
            Mode::Spectrum => {}
        }
        Ok(())
    }

    pub fn physical_params(&self) -> Result<PhysicalParams> {
        let p = &self.params;
        let friction = match &p.friction {
            None | Some(FrictionBlock::Zero) => FrictionModel::Zero,
            Some(FrictionBlock::CfAbsV { c_f }) => FrictionModel::CfAbsV { c_f: *c_f },
            Some(FrictionBlock::LinearPlusHv { r0, r1 }) => {
                FrictionModel::LinearPlusHv { r0: *r0, r1: *r1 }
            }
            Some(FrictionBlock::DosSantos { r2, b2 }) => {
                FrictionModel::DosSantos { r2: *r2, b2: *b2 }
            }
            Some(FrictionBlock::GerbeauPerthame { b3 }) => {
                FrictionModel::GerbeauPerthame { b3: *b3 }
            }
            Some(FrictionBlock::BoundedConst { kappa_max }) => {
                FrictionModel::bounded_const(*kappa_max)
            }
        };
        PhysicalParams::new(
            p.g,
            p.mu,
            p.sigma,
            p.length,
            p.liquid_mass,
            p.wall_height,
            p.tank_mass,
            p.kappa_bar,
            friction,
        )
        .map_err(|e| anyhow!("{e}"))
    }

    pub fn nonlinear_gains(&self) -> Result<NonlinearGains> {
        let b = self
            .gains
            .as_ref()
            .ok_or_else(|| anyhow!("scenario needs a [gains] block"))?;
        let mut g = NonlinearGains::new(b.zeta, b.k, b.q, b.delta).map_err(|e| anyhow!("{e}"))?;
        if let Some(omega) = b.omega {
            g = g.with_omega(omega);
        }
        if let Some(t) = &b.v_tilde_extras {
            g = g.with_v_tilde_extras(VTildeExtras {
                omega1: t.omega1,
                omega2: t.omega2,
                beta: t.beta,
                gamma: t.gamma,
            });
        }
        Ok(g)
    }

    pub fn linear_gains(&self) -> Result<LinearGains> {
        let b = self
            .linear_gains
            .as_ref()
            .ok_or_else(|| anyhow!("scenario needs a [linear_gains] block"))?;
        LinearGains::new(b.big_k, b.k3, b.k4, b.k5).map_err(|e| anyhow!("{e}"))
    }

    pub fn pd_gains(&self) -> Result<PdGains> {
        let b = self
            .pd_gains
            .as_ref()
            .ok_or_else(|| anyhow!("scenario needs a [pd_gains] block"))?;
        PdGains::new(b.k1, b.k2).map_err(|e| anyhow!("{e}"))
    }
}
