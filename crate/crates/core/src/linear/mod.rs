//! Linearized tank-liquid model: a wave equation with Kelvin-Voigt
//! damping plus a fourth-order bending term,
//!
//! ```text
//! φ_tt = c²φ_xx − σh*φ_xxxx + μφ_txx − κ̄φ_t
//! φ_x(0) = φ_x(L) = 0,  φ_xxx(0) = φ_xxx(L) = −σ⁻¹f
//! ```
//!
//! with zero-mean φ and φ_t, together with its spectrum, closed-loop
//! integrator, energy-identity validators, ISS estimate fitting, the
//! lifting construction and the resolvent solve.

mod identities;
mod iss;
mod operator;
mod resolvent;
mod run;
mod spectrum;

pub use identities::{energy_identity_check, EnergyIdentityResiduals};
pub use iss::{iss_check, IssConfig, IssReport};
pub use operator::{lifting_function, LinearOperatorAssembly};
pub use resolvent::{resolvent_solve, ResolventSolution};
pub use run::{run_linear, LinearControl, LinearInitial, LinearRunConfig, LinearRunResult};
pub use spectrum::{analytic_eigenvalues, spectrum_discrete, SpectrumMode, SpectrumResult};
