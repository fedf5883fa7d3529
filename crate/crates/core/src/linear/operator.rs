//! Finite-difference assembly of the linear spatial operator with
//! ghost-node boundary closures.
//!
//! Ghost values come from the wall conditions: even reflection imposes
//! φ_x = 0, and the second ghost absorbs the inhomogeneous third-derivative
//! condition φ_xxx = ∓σ⁻¹f, which turns the boundary forcing into the
//! rank-two vector b with entries ∓2h*/Δx at the wall rows. With f = 0
//! the fourth-difference operator is exactly the square of the reflected
//! second-difference operator, which the spectrum path exploits.

use crate::error::{Error, Result};
use crate::model::{Grid, PhysicalParams};

/// Spatial operator data for φ_tt = c²D₂φ − σh*D₄φ + μD₂φ_t − κ̄φ_t + b·f.
#[derive(Debug, Clone)]
pub struct LinearOperatorAssembly {
    pub n_nodes: usize,
    pub dx: f64,
    pub c2: f64,
    /// σh*; zero drops the fourth-order block and the boundary forcing.
    pub sigma_h: f64,
    pub mu: f64,
    pub kappa_bar: f64,
    h_star: f64,
}

impl LinearOperatorAssembly {
    pub fn new(params: &PhysicalParams, grid: &Grid) -> Result<Self> {
        if grid.n_nodes() < 16 {
            return Err(Error::Config(format!(
                "linear operator needs >= 16 nodes, got {}",
                grid.n_nodes()
            )));
        }
        Ok(LinearOperatorAssembly {
            n_nodes: grid.n_nodes(),
            dx: grid.dx(),
            c2: params.g * params.h_star,
            sigma_h: params.sigma * params.h_star,
            mu: params.mu,
            kappa_bar: params.kappa_bar,
            h_star: params.h_star,
        })
    }

    /// Second difference with even-reflection (zero-slope) ghosts.
    pub fn d2(&self, u: &[f64]) -> Vec<f64> {
        let n = self.n_nodes;
        let dx2 = self.dx * self.dx;
        let mut out = vec![0.0; n];
        out[0] = 2.0 * (u[1] - u[0]) / dx2;
        for k in 1..n - 1 {
            out[k] = (u[k + 1] - 2.0 * u[k] + u[k - 1]) / dx2;
        }
        out[n - 1] = 2.0 * (u[n - 2] - u[n - 1]) / dx2;
        out
    }

    /// Homogeneous fourth difference (f = 0 ghosts); equals d2(d2(u)).
    pub fn d4(&self, u: &[f64]) -> Vec<f64> {
        let n = self.n_nodes;
        let dx4 = self.dx.powi(4);
        let mut out = vec![0.0; n];
        out[0] = (6.0 * u[0] - 8.0 * u[1] + 2.0 * u[2]) / dx4;
        out[1] = (-4.0 * u[0] + 7.0 * u[1] - 4.0 * u[2] + u[3]) / dx4;
        for k in 2..n - 2 {
            out[k] = (u[k - 2] - 4.0 * u[k - 1] + 6.0 * u[k] - 4.0 * u[k + 1] + u[k + 2]) / dx4;
        }
        out[n - 2] = (u[n - 4] - 4.0 * u[n - 3] + 7.0 * u[n - 2] - 4.0 * u[n - 1]) / dx4;
        out[n - 1] = (2.0 * u[n - 3] - 8.0 * u[n - 2] + 6.0 * u[n - 1]) / dx4;
        out
    }

    /// Boundary-forcing vector: the f-dependent part of −σh*·D₄ with the
    /// inhomogeneous ghost. Zero when surface tension is absent.
    pub fn boundary_forcing(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.n_nodes];
        if self.sigma_h > 0.0 {
            b[0] = -2.0 * self.h_star / self.dx;
            b[self.n_nodes - 1] = 2.0 * self.h_star / self.dx;
        }
        b
    }

    /// φ_tt for the state (φ, φ_t) under control value f.
    pub fn acceleration(&self, phi: &[f64], phi_t: &[f64], f: f64) -> Vec<f64> {
        let d2_phi = self.d2(phi);
        let d2_phit = self.d2(phi_t);
        let d4_phi = if self.sigma_h > 0.0 {
            Some(self.d4(phi))
        } else {
            None
        };
        let b = self.boundary_forcing();
        (0..self.n_nodes)
            .map(|k| {
                let mut a = self.c2 * d2_phi[k] + self.mu * d2_phit[k] - self.kappa_bar * phi_t[k]
                    + b[k] * f;
                if let Some(d4) = &d4_phi {
                    a -= self.sigma_h * d4[k];
                }
                a
            })
            .collect()
    }

    /// Ghost values (φ₋₁, φ₋₂, φ_{N+1}, φ_{N+2}) implied by the wall
    /// conditions for the given f. Used by the closure-accuracy tests.
    pub fn ghost_values(&self, phi: &[f64], f: f64) -> (f64, f64, f64, f64) {
        let n = self.n_nodes;
        let jump = if self.sigma_h > 0.0 {
            2.0 * self.dx.powi(3) * f * self.h_star / self.sigma_h
        } else {
            0.0
        };
        (phi[1], phi[2] + jump, phi[n - 2], phi[n - 3] - jump)
    }
}

/// Lifting profile r̄ = −ĝ/(6σ) with ĝ(x) = x³ − (3L/2)x² + L³/4:
/// zero mean, zero slope at both walls and r̄''' ≡ −σ⁻¹.
pub fn lifting_function(params: &PhysicalParams, grid: &Grid) -> Result<Vec<f64>> {
    if !(params.sigma > 0.0) {
        return Err(Error::Domain("lifting profile needs sigma > 0".into()));
    }
    let l = params.length;
    Ok(grid
        .faces()
        .iter()
        .map(|&x| -(x.powi(3) - 1.5 * l * x * x + l.powi(3) / 4.0) / (6.0 * params.sigma))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::friction::FrictionModel;
    use crate::quad;
    use approx::assert_relative_eq;

    fn params(sigma: f64) -> PhysicalParams {
        PhysicalParams::new(
            1.0,
            0.5,
            sigma,
            2.0,
            2.0,
            3.0,
            1.0,
            0.0,
            FrictionModel::Zero,
        )
        .unwrap()
    }

    #[test]
    fn operators_annihilate_constants() {
        let p = params(0.8);
        let grid = Grid::new(2.0, 40).unwrap();
        let op = LinearOperatorAssembly::new(&p, &grid).unwrap();
        let c = vec![3.7; grid.n_nodes()];
        // Constants cancel up to re-association rounding scaled by Δx⁻⁴.
        let tol = 1e-12 / grid.dx().powi(4);
        assert!(op.d2(&c).iter().all(|&x| x.abs() <= tol));
        assert!(op.d4(&c).iter().all(|&x| x.abs() <= tol));
        let acc = op.acceleration(&c, &c, 0.0);
        // κ̄ = 0 here, so a constant state is inert.
        assert!(acc.iter().all(|&x| x.abs() <= tol));
    }

    #[test]
    fn d4_is_exactly_d2_squared() {
        let p = params(0.8);
        let grid = Grid::new(2.0, 37).unwrap();
        let op = LinearOperatorAssembly::new(&p, &grid).unwrap();
        let u: Vec<f64> = grid
            .faces()
            .iter()
            .map(|&x| (1.3 * x).sin() + 0.4 * (2.7 * x).cos())
            .collect();
        let direct = op.d4(&u);
        let squared = op.d2(&op.d2(&u));
        for (a, b) in direct.iter().zip(&squared) {
            assert_relative_eq!(a, b, epsilon = 1e-7, max_relative = 1e-12);
        }
    }

    #[test]
    fn weighted_row_sums_vanish() {
        // Trapezoid-weighted column sums of D₂, D₄ and b are zero, so the
        // discrete dynamics preserve the zero-mean constraints exactly.
        let p = params(0.8);
        let grid = Grid::new(2.0, 32).unwrap();
        let op = LinearOperatorAssembly::new(&p, &grid).unwrap();
        let u: Vec<f64> = grid.faces().iter().map(|&x| (0.9 * x).cos() * x).collect();
        assert!(quad::trapezoid(&op.d2(&u), grid.dx()).abs() < 1e-11);
        assert!(quad::trapezoid(&op.d4(&u), grid.dx()).abs() < 1e-9);
        assert!(quad::trapezoid(&op.boundary_forcing(), grid.dx()).abs() < 1e-13);
        let acc = op.acceleration(&u, &u, 0.37);
        assert!(quad::trapezoid(&acc, grid.dx()).abs() < 1e-9);
    }

    #[test]
    fn symmetric_reflection_commutes_with_d2_and_d4() {
        let p = params(0.8);
        let grid = Grid::new(2.0, 32).unwrap();
        let op = LinearOperatorAssembly::new(&p, &grid).unwrap();
        let u: Vec<f64> = grid
            .faces()
            .iter()
            .map(|&x| (1.1 * x).sin() + 0.2 * x * x)
            .collect();
        let mirrored: Vec<f64> = u.iter().rev().copied().collect();
        for (a, b) in op.d2(&mirrored).iter().zip(op.d2(&u).iter().rev()) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
        for (a, b) in op.d4(&mirrored).iter().zip(op.d4(&u).iter().rev()) {
            assert_relative_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn cubic_ghosts_track_the_true_continuation() {
        // φ = ĝ satisfies φ_x(0) = φ_x(L) = 0 and φ''' ≡ 6, i.e. the wall
        // pattern for f = −6σ. The constructed ghosts then reproduce the
        // polynomial continuation to cubic order.
        let sigma = 0.8;
        let p = params(sigma);
        let l = p.length;
        let ghat = |x: f64| x.powi(3) - 1.5 * l * x * x + l.powi(3) / 4.0;
        for n_cells in [40usize, 80] {
            let grid = Grid::new(l, n_cells).unwrap();
            let op = LinearOperatorAssembly::new(&p, &grid).unwrap();
            let phi: Vec<f64> = grid.faces().iter().map(|&x| ghat(x)).collect();
            let f = -6.0 * sigma;
            let (g1, g2, g1r, g2r) = op.ghost_values(&phi, f);
            let dx = grid.dx();
            let c = 4.0 * dx.powi(3);
            assert!((g1 - ghat(-dx)).abs() <= c, "left first ghost");
            assert!((g2 - ghat(-2.0 * dx)).abs() <= 2.0 * c, "left second ghost");
            assert!((g1r - ghat(l + dx)).abs() <= c, "right first ghost");
            assert!(
                (g2r - ghat(l + 2.0 * dx)).abs() <= 2.0 * c,
                "right second ghost"
            );
        }
    }

    #[test]
    fn lifting_profile_satisfies_all_four_conditions() {
        let p = params(0.8);
        let grid = Grid::new(2.0, 256).unwrap();
        let r = lifting_function(&p, &grid).unwrap();
        let dx = grid.dx();
        // Zero mean (continuum-exact; trapezoid of a cubic is O(Δx²)).
        assert!(quad::trapezoid(&r, dx).abs() < 1e-4);
        // Zero slope at the walls (one-sided stencil on a cubic: O(Δx²)).
        let d = quad::deriv_nodes(&r, dx);
        assert!(d[0].abs() < 5e-4 && d[grid.n_cells()].abs() < 5e-4);
        // Constant third derivative −1/σ, exact for a cubic stencil.
        let n = r.len();
        for k in 2..n - 2 {
            let d3 = (r[k + 2] - 2.0 * r[k + 1] + 2.0 * r[k - 1] - r[k - 2]) / (2.0 * dx.powi(3));
            assert_relative_eq!(-d3, 1.0 / p.sigma, max_relative = 1e-6);
        }
        assert!(lifting_function(&params(0.0), &grid).is_err());
    }
}
