//! Quadrature rules and finite-difference stencils shared by every module.
//!
//! Two grid flavours appear throughout the crate:
//! * node grids (`n+1` points including both walls) used by the linear
//!   model — integrals by the trapezoid rule;
//! * cell grids (`n` midpoints) used by the liquid level of the nonlinear
//!   model — integrals by midpoint sums, which the conservative flux
//!   telescopes exactly.
//!
//! All derivative stencils are second order: centered in the interior,
//! one-sided three/four-point closures at the walls.

/// Trapezoid rule on a node grid (endpoints carry half weight).
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            dx * (0.5 * (values[0] + values[n - 1]) + inner)
        }
    }
}

/// Midpoint rule on a cell grid.
pub fn midpoint(values: &[f64], dx: f64) -> f64 {
    dx * values.iter().sum::<f64>()
}

/// Cumulative trapezoid antiderivative on a node grid; result[0] = 0.
pub fn cumtrapz(values: &[f64], dx: f64) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    for k in 1..values.len() {
        out[k] = out[k - 1] + 0.5 * dx * (values[k - 1] + values[k]);
    }
    out
}

/// L2 norm on a node grid (trapezoid quadrature of the square).
pub fn l2_norm_nodes(values: &[f64], dx: f64) -> f64 {
    let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
    trapezoid(&sq, dx).max(0.0).sqrt()
}

/// L2 norm on a cell grid (midpoint quadrature of the square).
pub fn l2_norm_cells(values: &[f64], dx: f64) -> f64 {
    (dx * values.iter().map(|v| v * v).sum::<f64>())
        .max(0.0)
        .sqrt()
}

/// Trapezoid inner product on a node grid.
pub fn inner_nodes(f: &[f64], g: &[f64], dx: f64) -> f64 {
    debug_assert_eq!(f.len(), g.len());
    let prod: Vec<f64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
    trapezoid(&prod, dx)
}

/// First derivative on a node grid: centered interior, second-order
/// one-sided at both walls.
pub fn deriv_nodes(values: &[f64], dx: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 3, "need at least 3 nodes for derivatives");
    let mut out = vec![0.0; n];
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dx);
    for k in 1..n - 1 {
        out[k] = (values[k + 1] - values[k - 1]) / (2.0 * dx);
    }
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * dx);
    out
}

/// Second derivative on a node grid: centered interior, second-order
/// four-point one-sided at both walls.
pub fn second_deriv_nodes(values: &[f64], dx: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 4, "need at least 4 nodes for second derivatives");
    let dx2 = dx * dx;
    let mut out = vec![0.0; n];
    out[0] = (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / dx2;
    for k in 1..n - 1 {
        out[k] = (values[k + 1] - 2.0 * values[k] + values[k - 1]) / dx2;
    }
    out[n - 1] =
        (2.0 * values[n - 1] - 5.0 * values[n - 2] + 4.0 * values[n - 3] - values[n - 4]) / dx2;
    out
}

/// First derivative of cell-centered data, evaluated at the cell centers.
pub fn deriv_cells(values: &[f64], dx: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 3, "need at least 3 cells for derivatives");
    let mut out = vec![0.0; n];
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dx);
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) / (2.0 * dx);
    }
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * dx);
    out
}

/// Quadratic extrapolation of cell-centered data to the left wall (x = 0).
///
/// Cell centers sit at Δx/2, 3Δx/2, 5Δx/2; exact for quadratics.
pub fn extrapolate_left_wall(values: &[f64]) -> f64 {
    assert!(values.len() >= 3);
    (15.0 * values[0] - 10.0 * values[1] + 3.0 * values[2]) / 8.0
}

/// Quadratic extrapolation of cell-centered data to the right wall (x = L).
pub fn extrapolate_right_wall(values: &[f64]) -> f64 {
    let n = values.len();
    assert!(n >= 3);
    (15.0 * values[n - 1] - 10.0 * values[n - 2] + 3.0 * values[n - 3]) / 8.0
}

/// Quadratic-fit derivative of cell-centered data at the left wall.
pub fn deriv_left_wall(values: &[f64], dx: f64) -> f64 {
    assert!(values.len() >= 3);
    (-2.0 * values[0] + 3.0 * values[1] - values[2]) / dx
}

/// Quadratic-fit derivative of cell-centered data at the right wall.
pub fn deriv_right_wall(values: &[f64], dx: f64) -> f64 {
    let n = values.len();
    assert!(n >= 3);
    (2.0 * values[n - 1] - 3.0 * values[n - 2] + values[n - 3]) / dx
}

/// Face values of cell-centered data by arithmetic averaging; the two
/// wall faces are filled by quadratic extrapolation.
pub fn cells_to_faces(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n + 1];
    out[0] = extrapolate_left_wall(values);
    for j in 1..n {
        out[j] = 0.5 * (values[j - 1] + values[j]);
    }
    out[n] = extrapolate_right_wall(values);
    out
}

/// Cell-center values of face data by arithmetic averaging.
pub fn faces_to_cells(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}
