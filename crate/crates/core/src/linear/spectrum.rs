//! Open-loop spectrum of the distributed subsystem.
//!
//! Analytic eigenvalues are the roots of
//!
//! ```text
//! s² + (μn²π²/L² + κ̄)s + (n²π²/L²)(c² + σh*n²π²/L²) = 0,  n = 1, 2, …
//! ```
//!
//! The discrete spectrum comes from the shared structure of the
//! finite-difference blocks: both c²D₂ − σh*D₄ and μD₂ are polynomials
//! in the single reflected Laplacian D₂ (D₄ = D₂² exactly), so the
//! first-order block system factorizes over the eigenbasis of D₂ and
//! each Laplacian eigenvalue −ν contributes the quadratic pair
//! s² + (μν + κ̄)s + (c²ν + σh*ν²) = 0. D₂ is symmetrized with the
//! trapezoid weights and solved densely; the constant mode (ν = 0) is
//! projected out, which is what the zero-mean constraint prescribes.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::PhysicalParams;

use super::operator::LinearOperatorAssembly;

/// Analytic/discrete eigenvalue pair for one mode.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectrumMode {
    pub n: usize,
    pub analytic_re: f64,
    pub analytic_im: f64,
    pub discrete_re: f64,
    pub discrete_im: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    pub modes: Vec<SpectrumMode>,
    pub n_nodes: usize,
}

/// Both roots of the mode-n dispersion quadratic, upper-half-plane
/// representative first.
pub fn analytic_eigenvalues(params: &PhysicalParams, n: usize) -> (Complex64, Complex64) {
    let l = params.length;
    let nu = (n as f64 * std::f64::consts::PI / l).powi(2);
    let c2 = params.g * params.h_star;
    quadratic_roots(
        params.mu * nu + params.kappa_bar,
        nu * (c2 + params.sigma * params.h_star * nu),
    )
}

/// Roots of s² + bs + c = 0 for real b, c.
fn quadratic_roots(b: f64, c: f64) -> (Complex64, Complex64) {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        // Stable form: avoid cancellation on the small root.
        let r1 = if b >= 0.0 {
            (-b - sq) / 2.0
        } else {
            (-b + sq) / 2.0
        };
        let r2 = c / r1;
        (
            Complex64::new(r1.max(r2), 0.0),
            Complex64::new(r1.min(r2), 0.0),
        )
    } else {
        let re = -b / 2.0;
        let im = (-disc).sqrt() / 2.0;
        (Complex64::new(re, im), Complex64::new(re, -im))
    }
}

/// Eigenvalues of the reflected Laplacian −D₂ (all ≥ 0), by a dense
/// symmetric eigensolve of the trapezoid-weight symmetrization.
fn laplacian_eigenvalues(assembly: &LinearOperatorAssembly) -> Result<Vec<f64>> {
    let n = assembly.n_nodes;
    let dx2 = assembly.dx * assembly.dx;
    // W^{1/2} D₂ W^{-1/2} with W = diag(trapezoid weights): symmetric.
    let mut m = DMatrix::<f64>::zeros(n, n);
    let w = |k: usize| -> f64 {
        if k == 0 || k == n - 1 {
            0.5
        } else {
            1.0
        }
    };
    for k in 0..n {
        m[(k, k)] = -2.0 / dx2;
        if k == 0 {
            m[(0, 1)] = 2.0 / dx2 * (w(0) / w(1)).sqrt();
        } else if k == n - 1 {
            m[(n - 1, n - 2)] = 2.0 / dx2 * (w(n - 1) / w(n - 2)).sqrt();
        } else {
            m[(k, k - 1)] = (w(k) / w(k - 1)).sqrt() / dx2;
            m[(k, k + 1)] = (w(k) / w(k + 1)).sqrt() / dx2;
        }
    }
    // Rows 0 and n-1 end up symmetric with their neighbours:
    // 2/dx² · √(1/2) = 1/dx² · √2 on both sides.
    let eig = m.symmetric_eigen();
    let mut nus: Vec<f64> = eig.eigenvalues.iter().map(|&l| -l).collect();
    nus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if nus.is_empty() {
        return Err(Error::Numeric("empty spectrum".into()));
    }
    Ok(nus)
}

/// Discrete eigenvalues of the first-order block system, matched to the
/// analytic roots by nearest-distance pairing.
pub fn spectrum_discrete(
    assembly: &LinearOperatorAssembly,
    params: &PhysicalParams,
    n_modes: usize,
) -> Result<SpectrumResult> {
    let mut nus = laplacian_eigenvalues(assembly)?;
    // Project out the constant mode: smallest |ν| is the neutral one.
    let idx_min = nus
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    nus.remove(idx_min);

    let c2 = params.g * params.h_star;
    let sh = params.sigma * params.h_star;
    let discrete: Vec<Complex64> = nus
        .iter()
        .flat_map(|&nu| {
            let (a, b) = quadratic_roots(params.mu * nu + params.kappa_bar, nu * (c2 + sh * nu));
            [a, b]
        })
        .collect();

    let mut modes = Vec::with_capacity(n_modes);
    for n in 1..=n_modes {
        let (ana, _) = analytic_eigenvalues(params, n);
        let best = discrete
            .iter()
            .min_by(|x, y| (*x - ana).norm().partial_cmp(&(*y - ana).norm()).unwrap())
            .copied()
            .ok_or_else(|| Error::Numeric("no discrete eigenvalues".into()))?;
        modes.push(SpectrumMode {
            n,
            analytic_re: ana.re,
            analytic_im: ana.im,
            discrete_re: best.re,
            discrete_im: best.im,
            rel_error: (best - ana).norm() / ana.norm(),
        });
    }
    Ok(SpectrumResult {
        modes,
        n_nodes: assembly.n_nodes,
    })
}
