//! Discretization and solution of the boundary integral system.
//!
//! The (1-3)-problem reduces to a system of two real Fredholm equations of
//! the second kind for the density pair `(g1, g3)`:
//!
//! ```text
//! g1/2 + (1/2pi) int g1 (Im k1 + 2 Re k2) ds - (1/pi) int g3 Im k2 ds = u1
//! g3/2 + (1/2pi) int g3 (Im k1 - 2 Re k2) ds - (1/pi) int g1 Im k2 ds = u3
//! ```
//!
//! Nystrom discretization happens in the angle chart, where the trapezoid
//! weight is the constant `dtheta` and the Jacobian `(s^2+1)/2` is absorbed
//! into the kernels (`kappa_j`), making the infinity node an ordinary row
//! and column. The operator has a one-dimensional null space (the
//! homogeneous solution `ik zeta + i(n1 e1 + n2 e2)` only perturbs the
//! second and fourth components), handled by truncated-SVD least squares.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::cauchy::DensityPair;
use crate::conformal::{BoundaryChart, QuadratureGrid};
use crate::error::{Error, Result};
use crate::kernels::{kappa1, kappa2, KernelValue};

/// Singular values below `NULLSPACE_TOL * n * sigma_max` are treated as
/// null directions and excluded from the pseudo-inverse.
const NULLSPACE_TOL: f64 = 1e-8;
/// If the second-smallest singular value falls below this fraction of
/// `sigma_max`, the assembly or the map is broken.
const ILL_CONDITIONED_RATIO: f64 = 1e-10;
/// Scale-aware solvability tolerance factor.
const SOLVABLE_TOL: f64 = 1e-8;

/// Assembled Nystrom system with its right-hand side.
#[derive(Clone, Debug)]
pub struct DiscreteSystem {
    chart: BoundaryChart,
    grid: QuadratureGrid,
    matrix: DMatrix<f64>,
    rhs: DVector<f64>,
}

/// Solve-time diagnostics, serialized to `diagnostics.json`.
#[derive(Clone, Debug, Serialize)]
pub struct SolveDiagnostics {
    pub solvability_defect: f64,
    pub sigma_min: f64,
    pub sigma_second: f64,
    pub nullspace_dim: usize,
    pub transpose_residual: f64,
    pub lsq_residual: f64,
    pub n: usize,
}

/// One pair of matrix rows (both block equations) for collocation node `j`.
fn row_pair(chart: &BoundaryChart, grid: &QuadratureGrid, j: usize) -> (Vec<f64>, Vec<f64>) {
    let n = grid.len();
    // dtheta / (2 pi) = 1/n
    let c = 1.0 / n as f64;
    let theta_t = grid.theta(j);
    let mut first = vec![0.0; 2 * n];
    let mut second = vec![0.0; 2 * n];
    for l in 0..n {
        let theta_s = grid.theta(l);
        let kv = KernelValue::new(
            kappa1(chart, theta_t, theta_s),
            kappa2(chart, theta_t, theta_s),
        );
        first[l] = c * kv.a11();
        first[n + l] = c * kv.a13();
        second[l] = c * kv.a31();
        second[n + l] = c * kv.a33();
    }
    first[j] += 0.5;
    second[n + j] += 0.5;
    (first, second)
}

fn matrix_from_rows(n: usize, rows: Vec<(Vec<f64>, Vec<f64>)>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for (j, (first, second)) in rows.into_iter().enumerate() {
        for l in 0..2 * n {
            m[(j, l)] = first[l];
            m[(n + j, l)] = second[l];
        }
    }
    m
}

fn assemble_matrix_sequential(chart: &BoundaryChart, grid: &QuadratureGrid) -> DMatrix<f64> {
    let rows = (0..grid.len()).map(|j| row_pair(chart, grid, j)).collect();
    matrix_from_rows(grid.len(), rows)
}

#[cfg(feature = "parallel")]
fn assemble_matrix(chart: &BoundaryChart, grid: &QuadratureGrid) -> DMatrix<f64> {
    // Rows are independent; per-row summation order stays fixed, so the
    // result is bit-identical to the sequential path.
    let rows = (0..grid.len())
        .into_par_iter()
        .map(|j| row_pair(chart, grid, j))
        .collect();
    matrix_from_rows(grid.len(), rows)
}

#[cfg(not(feature = "parallel"))]
fn assemble_matrix(chart: &BoundaryChart, grid: &QuadratureGrid) -> DMatrix<f64> {
    assemble_matrix_sequential(chart, grid)
}

impl DiscreteSystem {
    /// Assemble the Nystrom matrix (right-hand side left at zero).
    pub fn assemble(chart: &BoundaryChart, n: usize) -> Result<Self> {
        let grid = QuadratureGrid::new(n)?;
        let matrix = assemble_matrix(chart, &grid);
        Ok(Self {
            chart: chart.clone(),
            rhs: DVector::zeros(2 * n),
            grid,
            matrix,
        })
    }

    /// Sequential assembly; same result as [`Self::assemble`], kept as an
    /// explicit entry point for benchmarking and fallback.
    pub fn assemble_sequential(chart: &BoundaryChart, n: usize) -> Result<Self> {
        let grid = QuadratureGrid::new(n)?;
        let matrix = assemble_matrix_sequential(chart, &grid);
        Ok(Self {
            chart: chart.clone(),
            rhs: DVector::zeros(2 * n),
            grid,
            matrix,
        })
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn chart(&self) -> &BoundaryChart {
        &self.chart
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    /// Install boundary data samples `u1`, `u3` (node-aligned).
    pub fn set_rhs(&mut self, u1: &[f64], u3: &[f64]) -> Result<()> {
        self.rhs = build_rhs(&self.grid, u1, u3)?;
        Ok(())
    }

    /// Apply the discrete operator to a stacked density vector.
    pub fn apply(&self, g: &DVector<f64>) -> DVector<f64> {
        &self.matrix * g
    }

    /// Truncated-SVD minimal-norm least-squares solve.
    pub fn solve(&self) -> Result<(DensityPair, SolveDiagnostics)> {
        let n = self.grid.len();
        let svd = self.matrix.clone().svd(true, true);
        let sigma = &svd.singular_values;
        let mut sorted: Vec<f64> = sigma.iter().copied().collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let sigma_max = sorted[sorted.len() - 1];
        let sigma_min = sorted[0];
        let sigma_second = sorted[1];
        if sigma_second < ILL_CONDITIONED_RATIO * sigma_max {
            return Err(Error::IllConditioned {
                ratio: sigma_second / sigma_max,
            });
        }
        let threshold = NULLSPACE_TOL * n as f64 * sigma_max;
        let nullspace_dim = sorted.iter().filter(|&&s| s < threshold).count();

        let u = svd.u.as_ref().expect("svd computed with u");
        let v_t = svd.v_t.as_ref().expect("svd computed with v_t");
        let mut x = DVector::zeros(2 * n);
        for i in 0..sigma.len() {
            if sigma[i] < threshold {
                continue;
            }
            let coeff = u.column(i).dot(&self.rhs) / sigma[i];
            x += v_t.row(i).transpose() * coeff;
        }
        let lsq_residual = (self.apply(&x) - &self.rhs).norm();

        let u1: Vec<f64> = x.as_slice()[..n].to_vec();
        let u3: Vec<f64> = x.as_slice()[n..].to_vec();
        let density = DensityPair::new(self.grid.clone(), u1, u3)?;

        let data1 = &self.rhs.as_slice()[..n];
        let data3 = &self.rhs.as_slice()[n..];
        let diagnostics = SolveDiagnostics {
            solvability_defect: solvability_defect(&self.chart, &self.grid, data1, data3)?,
            sigma_min,
            sigma_second,
            nullspace_dim,
            transpose_residual: transpose_residual(&self.chart, &self.grid),
            lsq_residual,
            n,
        };
        Ok((density, diagnostics))
    }

    /// Scale-aware bound below which the solvability defect counts as zero.
    pub fn solvable_tolerance(&self) -> f64 {
        let rhs_inf = self.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        SOLVABLE_TOL * (1.0 + rhs_inf * self.chart.perimeter())
    }
}

/// Stack node samples into the right-hand-side vector `[u1; u3]`.
pub fn build_rhs(grid: &QuadratureGrid, u1: &[f64], u3: &[f64]) -> Result<DVector<f64>> {
    let n = grid.len();
    if u1.len() != n || u3.len() != n {
        return Err(Error::DataLengthMismatch {
            expected: n,
            got: if u1.len() != n { u1.len() } else { u3.len() },
        });
    }
    let mut rhs = DVector::zeros(2 * n);
    for l in 0..n {
        rhs[l] = u1[l];
        rhs[n + l] = u3[l];
    }
    Ok(rhs)
}

/// Discretized solvability functional: the contour integral
/// `oint u1 dx + u3 dy` over the boundary, which must vanish for the
/// system to be solvable.
pub fn solvability_defect(
    chart: &BoundaryChart,
    grid: &QuadratureGrid,
    u1: &[f64],
    u3: &[f64],
) -> Result<f64> {
    if u1.len() != grid.len() || u3.len() != grid.len() {
        return Err(Error::DataLengthMismatch {
            expected: grid.len(),
            got: if u1.len() != grid.len() { u1.len() } else { u3.len() },
        });
    }
    let mut acc = 0.0;
    for (l, theta) in grid.thetas().enumerate() {
        let td = chart.tau_theta_d(theta);
        acc += u1[l] * td.re + u3[l] * td.im;
    }
    Ok(acc * grid.dtheta())
}

/// Residual of the transposed homogeneous system on its known null vector
/// `(h1, h3) = (tau1', tau2')`. Evaluated directly from the transposed
/// equations with swapped kernel arguments (not by transposing the Nystrom
/// matrix, which would conflate quadrature weights with the adjoint).
/// Small values confirm the assembly; returns the max over finite nodes.
pub fn transpose_residual(chart: &BoundaryChart, grid: &QuadratureGrid) -> f64 {
    let n = grid.len();
    let c = 1.0 / n as f64; // dtheta / 2pi
    let td: Vec<_> = grid.thetas().map(|theta| chart.tau_theta_d(theta)).collect();
    let mut worst = 0.0f64;
    // Node 0 is t = inf where h vanishes and the residual is trivially 0.
    for j in 1..n {
        let theta_t = grid.theta(j);
        let jac = grid.jacobian(j);
        let mut acc1 = 0.5 * td[j].re;
        let mut acc3 = 0.5 * td[j].im;
        for (l, td_l) in td.iter().enumerate() {
            let theta_s = grid.theta(l);
            let kv = KernelValue::new(
                kappa1(chart, theta_s, theta_t),
                kappa2(chart, theta_s, theta_t),
            );
            // angle-chart h absorbs the integration Jacobian; the kappa
            // Jacobian attached to the second (collocation) argument is
            // divided out once at the end.
            acc1 += c * (td_l.re * kv.a11() + td_l.im * kv.a31());
            acc3 += c * (td_l.re * kv.a13() + td_l.im * kv.a33());
        }
        worst = worst.max(acc1.abs() / jac).max(acc3.abs() / jac);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{ConformalMap, MapSpec};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn disk_chart() -> BoundaryChart {
        BoundaryChart::from_spec(MapSpec::unit_disk()).unwrap()
    }

    fn poly_chart() -> BoundaryChart {
        BoundaryChart::new(
            ConformalMap::make(MapSpec::perturbed_disk(Complex64::new(0.1, 0.0), 3)).unwrap(),
        )
    }

    #[test]
    fn matrix_entry_reference_value() {
        // Identity map: the K11 entry coupling collocation t=0 with node
        // s=1 is (1/2pi) * [Im k1 + 2 Re k2](0,1) * w(1) = 0.125 at n=4
        // node spacing. The smallest admissible grid is n=8, so check the
        // entry formula directly with the n=4 weight w = J * dtheta.
        let chart = disk_chart();
        let kv = crate::kernels::kernel_value(&chart, 0.0, 1.0);
        let w = ((1.0f64 * 1.0 + 1.0) / 2.0) * (2.0 * PI / 4.0);
        assert_abs_diff_eq!(kv.a11() * w / (2.0 * PI), 0.125, epsilon = 1e-12);
    }

    #[test]
    fn off_diagonal_blocks_equal() {
        let chart = poly_chart();
        let sys = DiscreteSystem::assemble(&chart, 16).unwrap();
        let n = 16;
        for j in 0..n {
            for l in 0..n {
                assert_eq!(sys.matrix()[(j, n + l)], sys.matrix()[(n + j, l)]);
            }
        }
    }

    #[test]
    fn matrix_entries_finite() {
        let chart = poly_chart();
        let sys = DiscreteSystem::assemble(&chart, 32).unwrap();
        assert!(sys.matrix().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn parallel_and_sequential_assembly_agree() {
        let chart = poly_chart();
        let a = DiscreteSystem::assemble(&chart, 24).unwrap();
        let b = DiscreteSystem::assemble_sequential(&chart, 24).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn constant_density_application_converges() {
        // Applying the operator to g1 = 1, g3 = 0 approximates
        // 1/2 + (1/2pi) int (Im k1 + 2 Re k2) ds at each node; the value
        // must be refinement-stable on the identity map.
        let chart = disk_chart();
        let coarse = DiscreteSystem::assemble(&chart, 64).unwrap();
        let fine = DiscreteSystem::assemble(&chart, 128).unwrap();
        let gc = DVector::from_fn(128, |i, _| if i < 64 { 1.0 } else { 0.0 });
        let gf = DVector::from_fn(256, |i, _| if i < 128 { 1.0 } else { 0.0 });
        let vc = coarse.apply(&gc);
        let vf = fine.apply(&gf);
        // compare at shared nodes (coarse node j = fine node 2j)
        for j in 0..64 {
            assert!((vc[j] - vf[2 * j]).abs() <= 1e-10);
            assert!((vc[64 + j] - vf[128 + 2 * j]).abs() <= 1e-10);
        }
    }

    #[test]
    fn nullspace_is_one_dimensional() {
        for chart in [disk_chart(), poly_chart()] {
            let sys = DiscreteSystem::assemble(&chart, 64).unwrap();
            let (_, diag) = sys.solve().unwrap();
            assert_eq!(diag.nullspace_dim, 1);
            let svd = sys.matrix().clone().svd(false, false);
            let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
            s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let smax = s[s.len() - 1];
            assert!(s[0] <= 1e-6 * smax, "sigma_min/sigma_max = {}", s[0] / smax);
            assert!(s[1] >= 0.05 * smax, "sigma_second/sigma_max = {}", s[1] / smax);
        }
    }

    #[test]
    fn zero_rhs_gives_zero_projected_solution() {
        let chart = disk_chart();
        let sys = DiscreteSystem::assemble(&chart, 64).unwrap();
        let (density, diag) = sys.solve().unwrap();
        let norm: f64 = density
            .g1()
            .iter()
            .chain(density.g3().iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        assert!(norm < 1e-12);
        assert!(diag.sigma_min <= 1e-6 * diag.sigma_second / 0.05);
        assert_eq!(diag.nullspace_dim, 1);
        assert_eq!(diag.lsq_residual, 0.0);
    }

    #[test]
    fn solvability_defect_examples() {
        let chart = disk_chart();
        let grid = QuadratureGrid::new(64).unwrap();
        // exact differential d((x^2+y^2)/2): u1 = x, u3 = y
        let (u1, u3): (Vec<f64>, Vec<f64>) = grid
            .thetas()
            .map(|theta| {
                let tau = chart.tau_theta(theta);
                (tau.re, tau.im)
            })
            .unzip();
        let d = solvability_defect(&chart, &grid, &u1, &u3).unwrap();
        assert!(d.abs() < 1e-12);
        // rotational field: u1 = -y, u3 = x gives twice the enclosed area
        let (r1, r3): (Vec<f64>, Vec<f64>) = grid
            .thetas()
            .map(|theta| {
                let tau = chart.tau_theta(theta);
                (-tau.im, tau.re)
            })
            .unzip();
        let d = solvability_defect(&chart, &grid, &r1, &r3).unwrap();
        assert_abs_diff_eq!(d, 2.0 * PI, epsilon = 1e-10);
        // exact differential d(x^3/3 + x y^2): u1 = x^2+y^2, u3 = 2xy
        let (q1, q3): (Vec<f64>, Vec<f64>) = grid
            .thetas()
            .map(|theta| {
                let tau = chart.tau_theta(theta);
                (tau.re * tau.re + tau.im * tau.im, 2.0 * tau.re * tau.im)
            })
            .unzip();
        let d = solvability_defect(&chart, &grid, &q1, &q3).unwrap();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn incompatible_data_flags_residual() {
        let chart = disk_chart();
        let mut sys = DiscreteSystem::assemble(&chart, 64).unwrap();
        let grid = sys.grid().clone();
        let (u1, u3): (Vec<f64>, Vec<f64>) = grid
            .thetas()
            .map(|theta| {
                let tau = chart.tau_theta(theta);
                (-tau.im, tau.re)
            })
            .unzip();
        sys.set_rhs(&u1, &u3).unwrap();
        let (_, diag) = sys.solve().unwrap();
        assert!(diag.lsq_residual >= 0.01, "lsq {}", diag.lsq_residual);
        assert_abs_diff_eq!(diag.solvability_defect, 2.0 * PI, epsilon = 1e-10);
        assert!(diag.solvability_defect.abs() > sys.solvable_tolerance());
    }

    #[test]
    fn transpose_residual_small_and_decreasing() {
        for (chart, tol) in [(disk_chart(), 1e-6), (poly_chart(), 1e-5)] {
            let r128 = transpose_residual(&chart, &QuadratureGrid::new(128).unwrap());
            assert!(r128 <= tol, "residual {r128} at n=128");
            let r64 = transpose_residual(&chart, &QuadratureGrid::new(64).unwrap());
            // both sit at the rounding floor on analytic maps, so allow a
            // small absolute slack on top of the 2x factor
            assert!(r128 <= 2.0 * r64 + 1e-12);
        }
    }

    #[test]
    fn rhs_length_checked() {
        let chart = disk_chart();
        let mut sys = DiscreteSystem::assemble(&chart, 16).unwrap();
        assert!(matches!(
            sys.set_rhs(&[0.0; 15], &[0.0; 16]),
            Err(Error::DataLengthMismatch { .. })
        ));
    }
}
