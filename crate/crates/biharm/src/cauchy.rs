//! Cauchy-type integral of an algebra-valued density.
//!
//! For a real density pair `(g1, g3)` sampled on the quadrature grid, the
//! boundary density is `phi(theta) = g1*e1 + g3*e2` and
//!
//! ```text
//! Phi(zeta) = 1/(2 pi i) * integral of phi * (tilde_tau - zeta)^{-1} d tilde_tau
//! ```
//!
//! is monogenic inside and outside the domain. Interior/exterior values use
//! the plain periodic trapezoid rule (spectrally accurate away from the
//! boundary); boundary limits use the Sokhotski-Plemelj formulas with the
//! principal value computed by singularity subtraction at the nodes.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::algebra::{BElement, PlanePoint};
use crate::conformal::{BoundaryChart, QuadratureGrid};
use crate::error::{Error, Result};

/// Distance floor for off-boundary evaluation, as a fraction of the domain
/// diameter.
pub const DISTANCE_FLOOR_FRACTION: f64 = 1e-3;

/// Real density samples of the boundary density `g = g1*e1 + g3*e2`,
/// node-aligned with a quadrature grid (node 0 is the point at infinity).
#[derive(Clone, Debug)]
pub struct DensityPair {
    grid: QuadratureGrid,
    g1: Vec<f64>,
    g3: Vec<f64>,
}

impl DensityPair {
    pub fn new(grid: QuadratureGrid, g1: Vec<f64>, g3: Vec<f64>) -> Result<Self> {
        if g1.len() != grid.len() || g3.len() != grid.len() {
            return Err(Error::DataLengthMismatch {
                expected: grid.len(),
                got: if g1.len() != grid.len() { g1.len() } else { g3.len() },
            });
        }
        if !g1.iter().chain(g3.iter()).all(|v| v.is_finite()) {
            return Err(Error::ConfigInvalid("density samples must be finite".into()));
        }
        Ok(Self { grid, g1, g3 })
    }

    /// Density sampled from closures of the angle parameter.
    pub fn from_fn(
        grid: QuadratureGrid,
        f1: impl Fn(f64) -> f64,
        f3: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let g1 = grid.thetas().map(&f1).collect();
        let g3 = grid.thetas().map(&f3).collect();
        Self::new(grid, g1, g3)
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn g1(&self) -> &[f64] {
        &self.g1
    }

    pub fn g3(&self) -> &[f64] {
        &self.g3
    }

    /// `phi` at node `j`.
    pub fn phi(&self, j: usize) -> BElement {
        BElement::from_reals(self.g1[j], self.g3[j])
    }

    /// Angle derivative of the density at node `j` via the periodic
    /// spectral differentiation weights (exact for trigonometric
    /// polynomials of degree < n/2).
    pub fn spectral_derivative_at(&self, j: usize) -> BElement {
        let n = self.grid.len();
        let mut d1 = 0.0;
        let mut d3 = 0.0;
        for k in 0..n {
            if k == j {
                continue;
            }
            let delta = self.grid.theta(j) - self.grid.theta(k);
            let sign = if (j + n - k).is_multiple_of(2) { 1.0 } else { -1.0 };
            let w = sign * 0.5 * (0.5 * delta).cos() / (0.5 * delta).sin();
            d1 += w * self.g1[k];
            d3 += w * self.g3[k];
        }
        BElement::from_reals(d1, d3)
    }
}

fn check_distance(chart: &BoundaryChart, zeta: PlanePoint) -> Result<f64> {
    let dist = chart.distance_to_boundary(zeta);
    let floor = DISTANCE_FLOOR_FRACTION * chart.diameter();
    if dist < floor {
        return Err(Error::PointTooCloseToBoundary { dist, floor });
    }
    Ok(dist)
}

/// Trapezoid sum of the Cauchy integral at an off-boundary point; fixed
/// ascending-node order for bit-stable results.
fn cauchy_sum(chart: &BoundaryChart, density: &DensityPair, zeta: PlanePoint) -> Result<BElement> {
    let grid = density.grid();
    let mut acc = BElement::ZERO;
    for j in 0..grid.len() {
        let theta = grid.theta(j);
        let tau = chart.tau_theta(theta);
        let diff = BElement::from_reals(tau.re - zeta.x, tau.im - zeta.y);
        let term = density.phi(j) * diff.inv()? * chart.boundary_tangent(theta);
        acc = acc + term;
    }
    // 1/(2 pi i) * dtheta
    Ok(acc.scale(Complex64::new(0.0, -1.0) * (grid.dtheta() / (2.0 * PI))))
}

/// Value of the Cauchy-type integral at an interior point.
pub fn eval_interior(
    chart: &BoundaryChart,
    density: &DensityPair,
    zeta: PlanePoint,
) -> Result<BElement> {
    check_distance(chart, zeta)?;
    if !chart.contains(zeta) {
        return Err(Error::PointOutsideRequestedRegion);
    }
    cauchy_sum(chart, density, zeta)
}

/// Value of the Cauchy-type integral at an exterior point.
pub fn eval_exterior(
    chart: &BoundaryChart,
    density: &DensityPair,
    zeta: PlanePoint,
) -> Result<BElement> {
    check_distance(chart, zeta)?;
    if chart.contains(zeta) {
        return Err(Error::PointOutsideRequestedRegion);
    }
    cauchy_sum(chart, density, zeta)
}

/// Principal-value integral at node `j`: the singular term is subtracted
/// using the exact closed-contour value `e1/2` of the Cauchy kernel's
/// principal value, and the regularized integrand's removable value at the
/// node itself is the spectral density derivative.
pub fn principal_value_at_node(
    chart: &BoundaryChart,
    density: &DensityPair,
    j: usize,
) -> Result<BElement> {
    let grid = density.grid();
    let theta0 = grid.theta(j);
    let tau0 = chart.tau_theta(theta0);
    let phi0 = density.phi(j);
    let mut acc = BElement::ZERO;
    for k in 0..grid.len() {
        let term = if k == j {
            density.spectral_derivative_at(j)
        } else {
            let theta = grid.theta(k);
            let tau = chart.tau_theta(theta);
            let diff = BElement::from_reals(tau.re - tau0.re, tau.im - tau0.im);
            (density.phi(k) - phi0) * diff.inv()? * chart.boundary_tangent(theta)
        };
        acc = acc + term;
    }
    let reg = acc.scale(Complex64::new(0.0, -1.0) * (grid.dtheta() / (2.0 * PI)));
    Ok(reg + phi0 * 0.5)
}

/// Interior boundary limit `Phi^+ = phi/2 + PV` at node `j`.
pub fn eval_boundary_plus(
    chart: &BoundaryChart,
    density: &DensityPair,
    j: usize,
) -> Result<BElement> {
    Ok(principal_value_at_node(chart, density, j)? + density.phi(j) * 0.5)
}

/// Exterior boundary limit `Phi^- = -phi/2 + PV` at node `j`.
pub fn eval_boundary_minus(
    chart: &BoundaryChart,
    density: &DensityPair,
    j: usize,
) -> Result<BElement> {
    Ok(principal_value_at_node(chart, density, j)? - density.phi(j) * 0.5)
}

/// Boundary limit addressed by the compactified real-line parameter; `t`
/// must coincide with a grid node.
pub fn eval_boundary_plus_at(
    chart: &BoundaryChart,
    density: &DensityPair,
    t: f64,
) -> Result<BElement> {
    let j = node_index_of(density.grid(), t)?;
    eval_boundary_plus(chart, density, j)
}

fn node_index_of(grid: &QuadratureGrid, t: f64) -> Result<usize> {
    let theta = BoundaryChart::theta_of_t(t);
    let frac = theta / grid.dtheta();
    let j = frac.round() as usize % grid.len();
    if (frac - frac.round()).abs() > 1e-9 {
        return Err(Error::ConfigInvalid(format!(
            "boundary evaluation requires a grid node; t = {t} is off-node"
        )));
    }
    Ok(j)
}
