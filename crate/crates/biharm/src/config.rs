//! Job configuration schema and boundary-data conversion.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::conformal::{BoundaryChart, MapSpec, QuadratureGrid};
use crate::error::{Error, Result};
use crate::field::{LatticeSpec, Manufactured};

pub const MAX_NODES: usize = 2048;

/// One solver job, deserialized from JSON.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct JobConfig {
    pub map: MapSpec,
    pub boundary_data: BoundaryData,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default)]
    pub lattice: LatticeSpec,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn default_nodes() -> usize {
    128
}

/// Boundary data for the (1-3)-problem.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BoundaryData {
    /// Exact boundary values of a built-in monogenic solution.
    Manufactured { function: ManufacturedKind },
    /// Node-aligned samples of `u1`, `u3`.
    Samples { u1: Vec<f64>, u3: Vec<f64> },
    /// Principal-problem data: arc-length derivative of the boundary values
    /// and the outward normal derivative, node-aligned.
    Principal {
        omega1_prime: Vec<f64>,
        omega2: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ManufacturedKind {
    Zeta,
    Zeta2,
    Zeta3,
}

impl From<ManufacturedKind> for Manufactured {
    fn from(kind: ManufacturedKind) -> Self {
        match kind {
            ManufacturedKind::Zeta => Manufactured::Zeta,
            ManufacturedKind::Zeta2 => Manufactured::Zeta2,
            ManufacturedKind::Zeta3 => Manufactured::Zeta3,
        }
    }
}

impl JobConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: JobConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 8 || self.nodes > MAX_NODES || !self.nodes.is_multiple_of(2) {
            return Err(Error::ConfigInvalid(format!(
                "nodes must be even and within [8, {MAX_NODES}], got {}",
                self.nodes
            )));
        }
        match &self.boundary_data {
            BoundaryData::Samples { u1, u3 } => {
                check_samples("u1", u1, self.nodes)?;
                check_samples("u3", u3, self.nodes)?;
            }
            BoundaryData::Principal {
                omega1_prime,
                omega2,
            } => {
                check_samples("omega1_prime", omega1_prime, self.nodes)?;
                check_samples("omega2", omega2, self.nodes)?;
            }
            BoundaryData::Manufactured { .. } => {}
        }
        Ok(())
    }

    /// Resolve the boundary data to node samples `(u1, u3)`.
    pub fn boundary_samples(
        &self,
        chart: &BoundaryChart,
        grid: &QuadratureGrid,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        match &self.boundary_data {
            BoundaryData::Manufactured { function } => {
                let m: Manufactured = (*function).into();
                Ok(grid
                    .thetas()
                    .map(|theta| {
                        let tau = chart.tau_theta(theta);
                        m.boundary_data(tau.re, tau.im)
                    })
                    .unzip())
            }
            BoundaryData::Samples { u1, u3 } => Ok((u1.clone(), u3.clone())),
            BoundaryData::Principal {
                omega1_prime,
                omega2,
            } => {
                let principal = PrincipalData {
                    omega1_prime: omega1_prime.clone(),
                    omega2: omega2.clone(),
                };
                convert_principal_data(chart, &principal, grid)
            }
        }
    }
}

fn check_samples(name: &str, values: &[f64], n: usize) -> Result<()> {
    if values.len() != n {
        return Err(Error::DataLengthMismatch {
            expected: n,
            got: values.len(),
        });
    }
    if !values.iter().all(|v| v.is_finite()) {
        return Err(Error::ConfigInvalid(format!("{name} contains non-finite samples")));
    }
    Ok(())
}

/// Principal biharmonic problem data: `omega1'` (derivative of the boundary
/// values with respect to arc length) and `omega2` (outward normal
/// derivative), both node-aligned.
#[derive(Clone, Debug, PartialEq)]
pub struct PrincipalData {
    pub omega1_prime: Vec<f64>,
    pub omega2: Vec<f64>,
}

/// Convert principal-problem data into (1-3)-problem data:
/// `u1 = omega1' cos(s,x) + omega2 cos(n,x)` and likewise for `u3` with the
/// `y` direction cosines. The unit tangent comes from the angle-chart
/// derivative; the outward normal is the tangent rotated so that it points
/// out of the domain (verified against the map's interior).
pub fn convert_principal_data(
    chart: &BoundaryChart,
    principal: &PrincipalData,
    grid: &QuadratureGrid,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = grid.len();
    check_samples("omega1_prime", &principal.omega1_prime, n)?;
    check_samples("omega2", &principal.omega2, n)?;

    const TANGENT_FLOOR: f64 = 1e-10;
    let mut tangents = Vec::with_capacity(n);
    for (j, theta) in grid.thetas().enumerate() {
        let td = chart.tau_theta_d(theta);
        let norm = td.norm();
        if norm < TANGENT_FLOOR {
            return Err(Error::DegenerateTangent { node: j, norm });
        }
        tangents.push((td.re / norm, td.im / norm));
    }
    // Counterclockwise boundaries have outward normal (t2, -t1); probe one
    // node and flip if the map runs clockwise.
    let tau0 = chart.tau_theta(0.0);
    let (t1, t2) = tangents[0];
    let delta = 1e-3 * chart.diameter();
    let probe = crate::algebra::PlanePoint::new(tau0.re + delta * t2, tau0.im - delta * t1);
    let sign = if chart.contains(probe) { -1.0 } else { 1.0 };

    let mut u1 = Vec::with_capacity(n);
    let mut u3 = Vec::with_capacity(n);
    for (j, &(t1, t2)) in tangents.iter().enumerate() {
        let (n1, n2) = (sign * t2, -sign * t1);
        u1.push(principal.omega1_prime[j] * t1 + principal.omega2[j] * n1);
        u3.push(principal.omega1_prime[j] * t2 + principal.omega2[j] * n2);
    }
    Ok((u1, u3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn disk_chart() -> BoundaryChart {
        BoundaryChart::from_spec(MapSpec::unit_disk()).unwrap()
    }

    #[test]
    fn parses_minimal_config() {
        let text = r#"{
            "map": {"kind": "disk", "radius": 1.0},
            "boundary_data": {"kind": "manufactured", "function": "zeta2"}
        }"#;
        let config: JobConfig = serde_json::from_str(text).unwrap();
        config.validate().unwrap();
        assert_eq!(config.nodes, 128);
        assert_eq!(
            config.boundary_data,
            BoundaryData::Manufactured {
                function: ManufacturedKind::Zeta2
            }
        );
    }

    #[test]
    fn parses_polynomial_map_and_samples() {
        let text = r#"{
            "map": {"kind": "polynomial", "coefficients": [[1.0, 0.0], [0.0, 0.0], [0.1, 0.0]]},
            "boundary_data": {"kind": "samples", "u1": [0,0,0,0,0,0,0,0], "u3": [0,0,0,0,0,0,0,0]},
            "nodes": 8
        }"#;
        let config: JobConfig = serde_json::from_str(text).unwrap();
        config.validate().unwrap();
        assert_eq!(
            config.map,
            MapSpec::perturbed_disk(num_complex::Complex64::new(0.1, 0.0), 3)
        );
    }

    #[test]
    fn round_trips_through_json() {
        let config = JobConfig {
            map: MapSpec::unit_disk(),
            boundary_data: BoundaryData::Manufactured {
                function: ManufacturedKind::Zeta,
            },
            nodes: 64,
            lattice: LatticeSpec::default(),
            output_dir: None,
        };
        let text = serde_json::to_string(&config).unwrap();
        let back: JobConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn rejects_bad_node_counts_and_lengths() {
        let mut config = JobConfig {
            map: MapSpec::unit_disk(),
            boundary_data: BoundaryData::Samples {
                u1: vec![0.0; 16],
                u3: vec![0.0; 16],
            },
            nodes: 16,
            lattice: LatticeSpec::default(),
            output_dir: None,
        };
        config.validate().unwrap();
        config.nodes = 15;
        assert!(config.validate().is_err());
        config.nodes = 4096;
        assert!(config.validate().is_err());
        config.nodes = 32;
        assert!(matches!(
            config.validate(),
            Err(Error::DataLengthMismatch { .. })
        ));
    }

    #[test]
    fn principal_normal_data_on_unit_circle() {
        // omega1 constant, omega2 = 1: the converted data is the outward
        // normal, which on the unit circle is the boundary point itself.
        let chart = disk_chart();
        let grid = QuadratureGrid::new(32).unwrap();
        let principal = PrincipalData {
            omega1_prime: vec![0.0; 32],
            omega2: vec![1.0; 32],
        };
        let (u1, u3) = convert_principal_data(&chart, &principal, &grid).unwrap();
        for (j, theta) in grid.thetas().enumerate() {
            let tau = chart.tau_theta(theta);
            assert_abs_diff_eq!(u1[j], tau.re, epsilon = 1e-12);
            assert_abs_diff_eq!(u3[j], tau.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn principal_zero_data_converts_to_zero() {
        let chart = disk_chart();
        let grid = QuadratureGrid::new(16).unwrap();
        let principal = PrincipalData {
            omega1_prime: vec![0.0; 16],
            omega2: vec![0.0; 16],
        };
        let (u1, u3) = convert_principal_data(&chart, &principal, &grid).unwrap();
        assert!(u1.iter().chain(u3.iter()).all(|&v| v == 0.0));
    }

    #[test]
    fn principal_compatible_normal_data_is_solvable() {
        // omega2 = cos(theta) integrates to zero along the circle; the
        // converted data must satisfy the solvability condition.
        let chart = disk_chart();
        let grid = QuadratureGrid::new(64).unwrap();
        let principal = PrincipalData {
            omega1_prime: vec![0.0; 64],
            omega2: grid.thetas().map(|theta| theta.cos()).collect(),
        };
        let (u1, u3) = convert_principal_data(&chart, &principal, &grid).unwrap();
        let defect = crate::fredholm::solvability_defect(&chart, &grid, &u1, &u3).unwrap();
        assert!(defect.abs() <= 1e-10, "defect {defect}");
    }

    #[test]
    fn tangential_principal_data_is_tangent_field() {
        // omega1' = 1, omega2 = 0 on the unit circle: u = unit tangent.
        let chart = disk_chart();
        let grid = QuadratureGrid::new(32).unwrap();
        let principal = PrincipalData {
            omega1_prime: vec![1.0; 32],
            omega2: vec![0.0; 32],
        };
        let (u1, u3) = convert_principal_data(&chart, &principal, &grid).unwrap();
        for (j, theta) in grid.thetas().enumerate() {
            assert_abs_diff_eq!(u1[j], -theta.sin(), epsilon = 1e-12);
            assert_abs_diff_eq!(u3[j], theta.cos(), epsilon = 1e-12);
        }
    }
}
