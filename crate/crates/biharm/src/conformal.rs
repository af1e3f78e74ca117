//! Conformal representation of the domain boundary.
//!
//! The domain `D` in the complex plane is the image of the unit disk under a
//! conformal map `sigma`. The boundary is reached through two charts:
//!
//! * the angle chart `theta in [0, 2pi)`, where the boundary point is
//!   `tau(theta) = sigma(exp(i*theta))` — everything is smooth and periodic
//!   here, which is where quadrature happens;
//! * the compactified real line `t in R united {inf}`, related by the Cayley
//!   transform `T = (t - i)/(t + i)`, i.e. `s = -cot(theta/2)` with
//!   `theta = 0` corresponding to `s = inf`.
//!
//! Only analytic map families are supported (disk and finite Taylor
//! polynomials with a validated nonvanishing boundary derivative); these
//! automatically have the boundary-derivative regularity the integral
//! formulation needs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::algebra::{BElement, PlanePoint};
use crate::error::{Error, Result};

/// Samples taken on the unit circle when validating a map.
const VALIDATION_SAMPLES: usize = 4096;
/// Fine boundary sampling used for distance / winding queries.
const GEOMETRY_SAMPLES: usize = 4096;
/// Minimum admissible |sigma'| on the unit circle.
const MIN_BOUNDARY_DERIV: f64 = 1e-6;

/// Serializable description of a conformal map of the unit disk.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MapSpec {
    /// `sigma(T) = center + radius * T`.
    Disk {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
    },
    /// `sigma(T) = sum_{m>=1} c_m T^m`; the coefficient list starts at `T^1`.
    Polynomial { coefficients: Vec<[f64; 2]> },
}

impl MapSpec {
    pub fn unit_disk() -> Self {
        MapSpec::Disk {
            center: [0.0, 0.0],
            radius: 1.0,
        }
    }

    /// The one-parameter family `sigma(T) = T + c * T^m`.
    pub fn perturbed_disk(c: Complex64, m: usize) -> Self {
        let mut coeffs = vec![[0.0, 0.0]; m];
        coeffs[0] = [1.0, 0.0];
        coeffs[m - 1] = [c.re, c.im];
        MapSpec::Polynomial {
            coefficients: coeffs,
        }
    }
}

/// Empirical bounds recorded while validating a map.
#[derive(Clone, Copy, Debug)]
pub struct MapBounds {
    /// min |sigma'| over the sampled circle.
    pub min_deriv: f64,
    /// Sampled lower bound of |sigma(S)-sigma(T)| / |S-T|.
    pub quotient_lower: f64,
    /// Sampled upper bound of the same quotient.
    pub quotient_upper: f64,
}

/// A validated conformal map of the unit disk onto the domain.
#[derive(Clone, Debug)]
pub struct ConformalMap {
    spec: MapSpec,
    bounds: MapBounds,
}

impl ConformalMap {
    /// Validate and construct a map. Fails if the boundary derivative
    /// vanishes on the sampled circle, if a `T + c*T^m` perturbation is too
    /// large (`|c|*m >= 1`), or if a disk radius is nonpositive.
    pub fn make(spec: MapSpec) -> Result<Self> {
        match &spec {
            MapSpec::Disk { radius, .. } => {
                if !radius.is_finite() || *radius <= 0.0 {
                    return Err(Error::MapInvalid(format!(
                        "disk radius must be positive, got {radius}"
                    )));
                }
            }
            MapSpec::Polynomial { coefficients } => {
                if coefficients.is_empty() {
                    return Err(Error::MapInvalid(
                        "polynomial map needs at least the T^1 coefficient".into(),
                    ));
                }
                // The T + c*T^m family has a sharp admissibility criterion.
                if let Some((c, m)) = single_perturbation(coefficients) {
                    if c.norm() * m as f64 >= 1.0 {
                        return Err(Error::MapInvalid(format!(
                            "|c|*m = {:.4} >= 1 for the T + c*T^{m} family",
                            c.norm() * m as f64
                        )));
                    }
                }
            }
        }

        let mut map = Self {
            spec,
            bounds: MapBounds {
                min_deriv: 0.0,
                quotient_lower: 0.0,
                quotient_upper: 0.0,
            },
        };
        map.bounds = map.sample_bounds()?;
        Ok(map)
    }

    pub fn spec(&self) -> &MapSpec {
        &self.spec
    }

    pub fn bounds(&self) -> MapBounds {
        self.bounds
    }

    /// Map value at `T` (valid for `|T| <= 1`).
    pub fn sigma(&self, t: Complex64) -> Complex64 {
        match &self.spec {
            MapSpec::Disk { center, radius } => {
                Complex64::new(center[0], center[1]) + *radius * t
            }
            MapSpec::Polynomial { coefficients } => {
                // Horner over c_1 T + ... + c_M T^M.
                let mut acc = Complex64::new(0.0, 0.0);
                for c in coefficients.iter().rev() {
                    acc = (acc + Complex64::new(c[0], c[1])) * t;
                }
                acc
            }
        }
    }

    pub fn sigma_d(&self, t: Complex64) -> Complex64 {
        match &self.spec {
            MapSpec::Disk { radius, .. } => Complex64::new(*radius, 0.0),
            MapSpec::Polynomial { coefficients } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (m, c) in coefficients.iter().enumerate().rev() {
                    let k = (m + 1) as f64;
                    acc = acc * t + k * Complex64::new(c[0], c[1]);
                }
                acc
            }
        }
    }

    pub fn sigma_dd(&self, t: Complex64) -> Complex64 {
        match &self.spec {
            MapSpec::Disk { .. } => Complex64::new(0.0, 0.0),
            MapSpec::Polynomial { coefficients } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (m, c) in coefficients.iter().enumerate().skip(1).rev() {
                    let k = ((m + 1) * m) as f64;
                    acc = acc * t + k * Complex64::new(c[0], c[1]);
                }
                acc
            }
        }
    }

    pub fn sigma_ddd(&self, t: Complex64) -> Complex64 {
        match &self.spec {
            MapSpec::Disk { .. } => Complex64::new(0.0, 0.0),
            MapSpec::Polynomial { coefficients } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (m, c) in coefficients.iter().enumerate().skip(2).rev() {
                    let k = ((m + 1) * m * (m - 1)) as f64;
                    acc = acc * t + k * Complex64::new(c[0], c[1]);
                }
                acc
            }
        }
    }

    /// Divided difference `(sigma(s) - sigma(t))/(s - t)`, computed without
    /// subtracting nearby map values; stable for `s` close to `t`.
    pub fn sigma_divided_difference(&self, s: Complex64, t: Complex64) -> Complex64 {
        match &self.spec {
            MapSpec::Disk { radius, .. } => Complex64::new(*radius, 0.0),
            MapSpec::Polynomial { coefficients } => {
                // (s^m - t^m)/(s - t) = sum_{j<m} s^j t^{m-1-j}, built up by
                // p_m = s^{m-1} + t * p_{m-1}.
                let mut acc = Complex64::new(0.0, 0.0);
                let mut p = Complex64::new(0.0, 0.0);
                let mut s_pow = Complex64::new(1.0, 0.0);
                for c in coefficients {
                    p = s_pow + t * p;
                    acc += Complex64::new(c[0], c[1]) * p;
                    s_pow *= s;
                }
                acc
            }
        }
    }

    fn sample_bounds(&self) -> Result<MapBounds> {
        let n = VALIDATION_SAMPLES;
        let mut min_deriv = f64::INFINITY;
        let points: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64))
            .collect();
        for &t in &points {
            min_deriv = min_deriv.min(self.sigma_d(t).norm());
        }
        if min_deriv < MIN_BOUNDARY_DERIV {
            return Err(Error::MapInvalid(format!(
                "|sigma'| drops to {min_deriv:.3e} on the sampled circle"
            )));
        }
        // Difference-quotient bounds over a spread of circle pairs; the
        // lower bound doubles as a sampled injectivity check.
        let mut lower = f64::INFINITY;
        let mut upper: f64 = 0.0;
        let strides = [1usize, 2, 5, 17, 101, 511, n / 2];
        for &k in &strides {
            for j in (0..n).step_by(7) {
                let s = points[j];
                let t = points[(j + k) % n];
                let dq = (self.sigma(s) - self.sigma(t)).norm() / (s - t).norm();
                lower = lower.min(dq);
                upper = upper.max(dq);
            }
        }
        if !lower.is_finite() || lower <= 0.0 {
            return Err(Error::MapInvalid(
                "sampled difference quotient reaches zero; map is not injective".into(),
            ));
        }
        Ok(MapBounds {
            min_deriv,
            quotient_lower: lower,
            quotient_upper: upper,
        })
    }
}

fn single_perturbation(coefficients: &[[f64; 2]]) -> Option<(Complex64, usize)> {
    if coefficients.len() < 2 || coefficients[0] != [1.0, 0.0] {
        return None;
    }
    let m = coefficients.len();
    for c in &coefficients[1..m - 1] {
        if *c != [0.0, 0.0] {
            return None;
        }
    }
    let c = coefficients[m - 1];
    Some((Complex64::new(c[0], c[1]), m))
}

/// Boundary values in the compactified real-line chart.
#[derive(Clone, Copy, Debug)]
pub struct TauValues {
    pub tau: Complex64,
    pub tau_d: Complex64,
    pub tau1: f64,
    pub tau2: f64,
    pub tau1_d: f64,
    pub tau2_d: f64,
}

/// Evaluators for the boundary parametrization induced by a conformal map.
#[derive(Clone, Debug)]
pub struct BoundaryChart {
    map: ConformalMap,
    perimeter: f64,
    diameter: f64,
    boundary_samples: Vec<Complex64>,
}

impl BoundaryChart {
    pub fn new(map: ConformalMap) -> Self {
        let n = GEOMETRY_SAMPLES;
        let boundary_samples: Vec<Complex64> = (0..n)
            .map(|j| map.sigma(Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64)))
            .collect();
        let mut perimeter = 0.0;
        let mut diameter: f64 = 0.0;
        for j in 0..n {
            perimeter += (boundary_samples[(j + 1) % n] - boundary_samples[j]).norm();
        }
        // Diameter from a coarse double loop; enough for distance floors.
        for j in (0..n).step_by(16) {
            for k in (j..n).step_by(16) {
                diameter = diameter.max((boundary_samples[j] - boundary_samples[k]).norm());
            }
        }
        Self {
            map,
            perimeter,
            diameter,
            boundary_samples,
        }
    }

    pub fn from_spec(spec: MapSpec) -> Result<Self> {
        Ok(Self::new(ConformalMap::make(spec)?))
    }

    pub fn map(&self) -> &ConformalMap {
        &self.map
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Cayley transform `T = (t - i)/(t + i)`; `t = inf` maps to `T = 1`.
    pub fn cayley(t: f64) -> Complex64 {
        if t.is_infinite() {
            Complex64::new(1.0, 0.0)
        } else {
            (Complex64::new(t, -1.0)) / (Complex64::new(t, 1.0))
        }
    }

    /// Angle of the Cayley image: `s = -cot(theta/2)`, `theta in [0, 2pi)`.
    pub fn theta_of_t(t: f64) -> f64 {
        if t.is_infinite() {
            0.0
        } else {
            2.0 * (1.0f64).atan2(-t)
        }
    }

    /// Inverse of [`Self::theta_of_t`]; `theta = 0` gives `inf`.
    pub fn s_of_theta(theta: f64) -> f64 {
        let half = 0.5 * theta;
        if half.sin() == 0.0 {
            f64::INFINITY
        } else {
            -half.cos() / half.sin()
        }
    }

    /// Boundary point in the angle chart: `tau(theta) = sigma(exp(i*theta))`.
    pub fn tau_theta(&self, theta: f64) -> Complex64 {
        self.map.sigma(Complex64::from_polar(1.0, theta))
    }

    /// `d tau / d theta = i * exp(i*theta) * sigma'(exp(i*theta))`.
    pub fn tau_theta_d(&self, theta: f64) -> Complex64 {
        let t = Complex64::from_polar(1.0, theta);
        Complex64::i() * t * self.map.sigma_d(t)
    }

    /// `d^2 tau / d theta^2 = -T * (sigma''(T) * T + sigma'(T))`.
    pub fn tau_theta_dd(&self, theta: f64) -> Complex64 {
        let t = Complex64::from_polar(1.0, theta);
        -t * (self.map.sigma_dd(t) * t + self.map.sigma_d(t))
    }

    /// `d^3 tau / d theta^3 = -i*(T^3 sigma''' + 3 T^2 sigma'' + T sigma')`.
    pub fn tau_theta_ddd(&self, theta: f64) -> Complex64 {
        let t = Complex64::from_polar(1.0, theta);
        -Complex64::i()
            * (t * t * t * self.map.sigma_ddd(t)
                + 3.0 * t * t * self.map.sigma_dd(t)
                + t * self.map.sigma_d(t))
    }

    /// Boundary point as an algebra element `tau1*e1 + tau2*e2`.
    pub fn boundary_element(&self, theta: f64) -> BElement {
        let tau = self.tau_theta(theta);
        BElement::from_reals(tau.re, tau.im)
    }

    /// Angle-chart boundary tangent as an algebra element.
    pub fn boundary_tangent(&self, theta: f64) -> BElement {
        let d = self.tau_theta_d(theta);
        BElement::from_reals(d.re, d.im)
    }

    /// Boundary values in the real-line chart. At `t = inf` the derivative
    /// limit is zero; use the angle chart when a nondegenerate tangent is
    /// needed there.
    pub fn tau_eval(&self, t: f64) -> TauValues {
        if t.is_infinite() {
            let tau = self.map.sigma(Complex64::new(1.0, 0.0));
            return TauValues {
                tau,
                tau_d: Complex64::new(0.0, 0.0),
                tau1: tau.re,
                tau2: tau.im,
                tau1_d: 0.0,
                tau2_d: 0.0,
            };
        }
        let cay = Self::cayley(t);
        let tau = self.map.sigma(cay);
        let denom = Complex64::new(t, 1.0);
        let tau_d = self.map.sigma_d(cay) * Complex64::new(0.0, 2.0) / (denom * denom);
        TauValues {
            tau,
            tau_d,
            tau1: tau.re,
            tau2: tau.im,
            tau1_d: tau_d.re,
            tau2_d: tau_d.im,
        }
    }

    /// Second derivative of `tau` with respect to `t` (finite `t` only).
    pub fn tau_dd(&self, t: f64) -> Complex64 {
        let cay = Self::cayley(t);
        let denom = Complex64::new(t, 1.0);
        let dcay = Complex64::new(0.0, 2.0) / (denom * denom);
        self.map.sigma_dd(cay) * dcay * dcay
            - self.map.sigma_d(cay) * Complex64::new(0.0, 4.0) / (denom * denom * denom)
    }

    /// Signed distance query: minimum distance from `p` to the sampled
    /// boundary. Sampling is fine enough for distance-floor checks.
    pub fn distance_to_boundary(&self, p: PlanePoint) -> f64 {
        let z = p.to_complex();
        self.boundary_samples
            .iter()
            .map(|b| (b - z).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether `p` lies inside the domain (winding number of the sampled
    /// boundary polygon).
    pub fn contains(&self, p: PlanePoint) -> bool {
        let z = p.to_complex();
        let n = self.boundary_samples.len();
        let mut winding = 0.0;
        for j in 0..n {
            let a = self.boundary_samples[j] - z;
            let b = self.boundary_samples[(j + 1) % n] - z;
            winding += (b / a).arg();
        }
        (winding / (2.0 * PI)).round() as i64 != 0
    }
}

/// Quadrature nodes on the compactified real line, generated from uniform
/// angles. Node `j = 0` is the point at infinity.
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    n: usize,
    s: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidNodeCount(n));
        }
        let s = (0..n)
            .map(|j| BoundaryChart::s_of_theta(2.0 * PI * j as f64 / n as f64))
            .collect();
        Ok(Self { n, s })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n as f64
    }

    pub fn thetas(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.theta(j))
    }

    /// Real-line parameter of node `j`; `inf` at `j = 0`.
    pub fn s(&self, j: usize) -> f64 {
        self.s[j]
    }

    /// Jacobian `ds/dtheta = (s^2 + 1)/2`; infinite at the infinity node.
    pub fn jacobian(&self, j: usize) -> f64 {
        if j == 0 {
            f64::INFINITY
        } else {
            0.5 * (self.s[j] * self.s[j] + 1.0)
        }
    }

    /// Trapezoidal weight for integrals in `ds` at a finite node.
    pub fn weight(&self, j: usize) -> f64 {
        self.jacobian(j) * self.dtheta()
    }

    /// Integrate `f(s) ds` over the real line. `inf_limit` must be the
    /// finite limit of `(s^2+1) * f(s) / 2` at infinity; it supplies the
    /// infinity node's contribution in the angle chart.
    pub fn integrate_s(&self, f: impl Fn(f64) -> f64, inf_limit: f64) -> f64 {
        let mut acc = inf_limit * self.dtheta();
        for j in 1..self.n {
            acc += f(self.s[j]) * self.weight(j);
        }
        acc
    }

    /// Integrate a function given directly in the angle chart.
    pub fn integrate_theta(&self, f: impl Fn(usize, f64) -> f64) -> f64 {
        (0..self.n).map(|j| f(j, self.theta(j))).sum::<f64>() * self.dtheta()
    }
}
