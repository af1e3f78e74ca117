//! Field reconstruction and physics checks.
//!
//! Given a solved density, evaluates the four real components of the
//! monogenic function on an interior lattice, integrates the biharmonic
//! potential `V` (with `grad V = (U1, U3)`) along lattice paths, and runs
//! the physics checks: the Cauchy-Riemann analog of monogenicity, the
//! 13-point biharmonic stencil, lattice loop closure, and the conjugate
//! (2-4)-problem boundary consistency.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::algebra::{BElement, PlanePoint};
use crate::cauchy::{self, DensityPair, DISTANCE_FLOOR_FRACTION};
use crate::conformal::BoundaryChart;
use crate::error::{Error, Result};

/// Rectangular lattice request: point counts per axis and the distance
/// margin kept from the boundary.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LatticeSpec {
    pub nx: usize,
    pub ny: usize,
    pub margin: f64,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self {
            nx: 21,
            ny: 21,
            margin: 0.2,
        }
    }
}

/// Reconstructed fields on a rectangular lattice clipped to the domain.
/// Flat row-major storage: index `j * nx + i` holds the point
/// `(xs[i], ys[j])`. Masked-out entries keep zeros.
#[derive(Clone, Debug)]
pub struct FieldGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub u3: Vec<f64>,
    pub u4: Vec<f64>,
    pub v: Vec<f64>,
    pub mask: Vec<bool>,
    /// Max circulation of `(U1, U3)` around interior lattice cells,
    /// recorded by [`FieldGrid::potential`].
    pub loop_closure: f64,
}

impl FieldGrid {
    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn ny(&self) -> usize {
        self.ys.len()
    }

    pub fn point(&self, i: usize, j: usize) -> PlanePoint {
        PlanePoint::new(self.xs[i], self.ys[j])
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx() + i
    }

    fn hx(&self) -> f64 {
        self.xs[1] - self.xs[0]
    }

    fn hy(&self) -> f64 {
        self.ys[1] - self.ys[0]
    }

    /// Integrate `V` from the lattice node nearest to `base` along a fixed
    /// staircase layout: first the base column (the spine), then each row
    /// outward from the spine, trapezoid per edge. `V(base) = 0`. The
    /// layout keeps the integration error a smooth function of position,
    /// which the biharmonic stencil then annihilates; a breadth-first
    /// fallback covers nodes the spine-and-rows sweep cannot reach.
    /// Records the loop-closure residual. Fails if some interior node is
    /// unreachable from the base along interior edges.
    pub fn potential(&mut self, base: PlanePoint) -> Result<f64> {
        let (nx, ny) = (self.nx(), self.ny());
        let mut best: Option<(usize, f64)> = None;
        for j in 0..ny {
            for i in 0..nx {
                if !self.mask[self.idx(i, j)] {
                    continue;
                }
                let p = self.point(i, j);
                let d = (p.x - base.x).hypot(p.y - base.y);
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((self.idx(i, j), d));
                }
            }
        }
        let (start, _) = best.ok_or(Error::DisconnectedLattice)?;
        let (i0, j0) = (start % nx, start / nx);

        let (hx, hy) = (self.hx(), self.hy());
        let mut visited = vec![false; nx * ny];
        visited[start] = true;
        self.v[start] = 0.0;

        // spine: the base column, swept up and down while interior
        for j in j0 + 1..ny {
            let (cur, prev) = (self.idx(i0, j), self.idx(i0, j - 1));
            if !self.mask[cur] || !visited[prev] {
                break;
            }
            self.v[cur] = self.v[prev] + hy * 0.5 * (self.u3[prev] + self.u3[cur]);
            visited[cur] = true;
        }
        for j in (0..j0).rev() {
            let (cur, prev) = (self.idx(i0, j), self.idx(i0, j + 1));
            if !self.mask[cur] || !visited[prev] {
                break;
            }
            self.v[cur] = self.v[prev] - hy * 0.5 * (self.u3[prev] + self.u3[cur]);
            visited[cur] = true;
        }
        // rows: outward from the spine node of each row
        for j in 0..ny {
            if !visited[self.idx(i0, j)] {
                continue;
            }
            for i in i0 + 1..nx {
                let (cur, prev) = (self.idx(i, j), self.idx(i - 1, j));
                if !self.mask[cur] || !visited[prev] {
                    break;
                }
                self.v[cur] = self.v[prev] + hx * 0.5 * (self.u1[prev] + self.u1[cur]);
                visited[cur] = true;
            }
            for i in (0..i0).rev() {
                let (cur, prev) = (self.idx(i, j), self.idx(i + 1, j));
                if !self.mask[cur] || !visited[prev] {
                    break;
                }
                self.v[cur] = self.v[prev] - hx * 0.5 * (self.u1[prev] + self.u1[cur]);
                visited[cur] = true;
            }
        }
        // breadth-first fallback for anything the sweep missed
        let mut queue: VecDeque<usize> = (0..nx * ny).filter(|&k| visited[k]).collect();
        while let Some(cur) = queue.pop_front() {
            let (i, j) = (cur % nx, cur / nx);
            let neighbors: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
            for (di, dj) in neighbors {
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                if ni < 0 || nj < 0 || ni >= nx as i64 || nj >= ny as i64 {
                    continue;
                }
                let nxt = self.idx(ni as usize, nj as usize);
                if visited[nxt] || !self.mask[nxt] {
                    continue;
                }
                let dv = if dj == 0 {
                    di as f64 * hx * 0.5 * (self.u1[cur] + self.u1[nxt])
                } else {
                    dj as f64 * hy * 0.5 * (self.u3[cur] + self.u3[nxt])
                };
                self.v[nxt] = self.v[cur] + dv;
                visited[nxt] = true;
                queue.push_back(nxt);
            }
        }
        if (0..nx * ny).any(|k| self.mask[k] && !visited[k]) {
            return Err(Error::DisconnectedLattice);
        }

        // loop closure: trapezoid circulation around each interior cell
        let mut worst = 0.0f64;
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let a = self.idx(i, j);
                let b = self.idx(i + 1, j);
                let c = self.idx(i + 1, j + 1);
                let d = self.idx(i, j + 1);
                if !(self.mask[a] && self.mask[b] && self.mask[c] && self.mask[d]) {
                    continue;
                }
                let circ = 0.5 * hx * (self.u1[a] + self.u1[b])
                    + 0.5 * hy * (self.u3[b] + self.u3[c])
                    - 0.5 * hx * (self.u1[d] + self.u1[c])
                    - 0.5 * hy * (self.u3[a] + self.u3[d]);
                worst = worst.max(circ.abs());
            }
        }
        self.loop_closure = worst;
        Ok(worst)
    }

    /// Max `|laplacian^2 V|` over lattice points whose full 13-point
    /// neighborhood is interior. Uses the composite stencil
    /// `Vxxxx + 2 Vxxyy + Vyyyy`, which reduces to the classical 13-point
    /// stencil on a square lattice.
    pub fn verify_biharmonic(&self) -> f64 {
        let (nx, ny) = (self.nx(), self.ny());
        let (hx, hy) = (self.hx(), self.hy());
        let mut worst = 0.0f64;
        for j in 2..ny.saturating_sub(2) {
            for i in 2..nx.saturating_sub(2) {
                let ok = (-2i64..=2).all(|d| {
                    self.mask[self.idx((i as i64 + d) as usize, j)]
                        && self.mask[self.idx(i, (j as i64 + d) as usize)]
                }) && [(-1i64, -1i64), (-1, 1), (1, -1), (1, 1)]
                    .iter()
                    .all(|&(a, b)| self.mask[self.idx((i as i64 + a) as usize, (j as i64 + b) as usize)]);
                if !ok {
                    continue;
                }
                let v = |di: i64, dj: i64| {
                    self.v[self.idx((i as i64 + di) as usize, (j as i64 + dj) as usize)]
                };
                let vxxxx = (v(-2, 0) - 4.0 * v(-1, 0) + 6.0 * v(0, 0) - 4.0 * v(1, 0) + v(2, 0))
                    / hx.powi(4);
                let vyyyy = (v(0, -2) - 4.0 * v(0, -1) + 6.0 * v(0, 0) - 4.0 * v(0, 1) + v(0, 2))
                    / hy.powi(4);
                let vxxyy = (v(1, 1) + v(1, -1) + v(-1, 1) + v(-1, -1)
                    - 2.0 * (v(1, 0) + v(-1, 0) + v(0, 1) + v(0, -1))
                    + 4.0 * v(0, 0))
                    / (hx * hx * hy * hy);
                worst = worst.max((vxxxx + 2.0 * vxxyy + vyyyy).abs());
            }
        }
        worst
    }
}

/// Evaluate the four components of the Cauchy-type integral on a lattice.
pub fn reconstruct_fields(
    chart: &BoundaryChart,
    density: &DensityPair,
    spec: &LatticeSpec,
) -> Result<FieldGrid> {
    reconstruct_impl(chart, density, spec, false)
}

/// Same lattice evaluation, forced onto a single thread. Exists so the
/// bench suite can compare the two paths within one build.
pub fn reconstruct_fields_sequential(
    chart: &BoundaryChart,
    density: &DensityPair,
    spec: &LatticeSpec,
) -> Result<FieldGrid> {
    reconstruct_impl(chart, density, spec, true)
}

fn reconstruct_impl(
    chart: &BoundaryChart,
    density: &DensityPair,
    spec: &LatticeSpec,
    sequential: bool,
) -> Result<FieldGrid> {
    if spec.nx < 2 || spec.ny < 2 {
        return Err(Error::ConfigInvalid(
            "lattice needs at least 2 points per axis".into(),
        ));
    }
    // bounding box of the boundary, then clip by the margin
    let samples: Vec<_> = (0..256)
        .map(|k| chart.tau_theta(2.0 * std::f64::consts::PI * k as f64 / 256.0))
        .collect();
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for s in &samples {
        xmin = xmin.min(s.re);
        xmax = xmax.max(s.re);
        ymin = ymin.min(s.im);
        ymax = ymax.max(s.im);
    }
    let xs: Vec<f64> = (0..spec.nx)
        .map(|i| xmin + (xmax - xmin) * i as f64 / (spec.nx - 1) as f64)
        .collect();
    let ys: Vec<f64> = (0..spec.ny)
        .map(|j| ymin + (ymax - ymin) * j as f64 / (spec.ny - 1) as f64)
        .collect();
    let margin = spec.margin.max(DISTANCE_FLOOR_FRACTION * chart.diameter());

    let total = spec.nx * spec.ny;
    let points: Vec<PlanePoint> = (0..total)
        .map(|k| PlanePoint::new(xs[k % spec.nx], ys[k / spec.nx]))
        .collect();
    let mask: Vec<bool> = points
        .iter()
        .map(|&p| chart.contains(p) && chart.distance_to_boundary(p) >= margin)
        .collect();

    let eval = |k: usize| -> Result<[f64; 4]> {
        if !mask[k] {
            return Ok([0.0; 4]);
        }
        let phi = cauchy::eval_interior(chart, density, points[k])?;
        let c = phi.components();
        Ok([c.u1, c.u2, c.u3, c.u4])
    };
    #[cfg(feature = "parallel")]
    let values: Vec<Result<[f64; 4]>> = if sequential {
        (0..total).map(eval).collect()
    } else {
        (0..total).into_par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let values: Vec<Result<[f64; 4]>> = {
        let _ = sequential;
        (0..total).map(eval).collect()
    };

    let mut grid = FieldGrid {
        xs,
        ys,
        u1: vec![0.0; total],
        u2: vec![0.0; total],
        u3: vec![0.0; total],
        u4: vec![0.0; total],
        v: vec![0.0; total],
        mask,
        loop_closure: 0.0,
    };
    for (k, value) in values.into_iter().enumerate() {
        let [a, b, c, d] = value?;
        grid.u1[k] = a;
        grid.u2[k] = b;
        grid.u3[k] = c;
        grid.u4[k] = d;
    }
    Ok(grid)
}

/// Max residual of the Cauchy-Riemann analog `dPhi/dy = (dPhi/dx) e2`
/// over the probes, by central differences.
pub fn verify_monogenic(
    chart: &BoundaryChart,
    density: &DensityPair,
    probes: &[PlanePoint],
    h: f64,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for &p in probes {
        let fx1 = cauchy::eval_interior(chart, density, PlanePoint::new(p.x + h, p.y))?;
        let fx0 = cauchy::eval_interior(chart, density, PlanePoint::new(p.x - h, p.y))?;
        let fy1 = cauchy::eval_interior(chart, density, PlanePoint::new(p.x, p.y + h))?;
        let fy0 = cauchy::eval_interior(chart, density, PlanePoint::new(p.x, p.y - h))?;
        let dx = (fx1 - fx0) * (0.5 / h);
        let dy = (fy1 - fy0) * (0.5 / h);
        worst = worst.max((dy - dx * BElement::E2).norm());
    }
    Ok(worst)
}

/// Conjugate (2-4)-problem consistency: the Sokhotski-Plemelj jump
/// `Phi^+ - Phi^- = g1 e1 + g3 e2` has real coefficients, so the second
/// and fourth components of the two boundary limits must coincide.
/// Returns the max over nodes of the component mismatch.
pub fn check_conjugate_24(chart: &BoundaryChart, density: &DensityPair) -> Result<f64> {
    let mut worst = 0.0f64;
    for j in 0..density.grid().len() {
        let plus = cauchy::eval_boundary_plus(chart, density, j)?;
        let minus = cauchy::eval_boundary_minus(chart, density, j)?;
        let jump = (plus - minus).components();
        worst = worst.max(jump.u2.abs() + jump.u4.abs());
    }
    Ok(worst)
}

/// Least-squares fit of the homogeneous ambiguity `(k, n1, n2)`: the
/// one-parameter family `ik zeta + i(n1 e1 + n2 e2)` shifts the components
/// as `U2 += k x + n1`, `U4 += k y + n2` (with `U1`, `U3` untouched).
/// Given residuals `du2 = exact - numeric` (same for `du4`) at the points,
/// returns the best-fitting `(k, n1, n2)`.
pub fn fit_homogeneous(points: &[PlanePoint], du2: &[f64], du4: &[f64]) -> (f64, f64, f64) {
    assert_eq!(points.len(), du2.len());
    assert_eq!(points.len(), du4.len());
    let n = points.len() as f64;
    let (mut sxx, mut sx, mut sy) = (0.0, 0.0, 0.0);
    let (mut rk, mut r1, mut r2) = (0.0, 0.0, 0.0);
    for (i, p) in points.iter().enumerate() {
        sxx += p.x * p.x + p.y * p.y;
        sx += p.x;
        sy += p.y;
        rk += p.x * du2[i] + p.y * du4[i];
        r1 += du2[i];
        r2 += du4[i];
    }
    let m = nalgebra::Matrix3::new(sxx, sx, sy, sx, n, 0.0, sy, 0.0, n);
    let rhs = nalgebra::Vector3::new(rk, r1, r2);
    let sol = m.lu().solve(&rhs).unwrap_or_else(nalgebra::Vector3::zeros);
    (sol[0], sol[1], sol[2])
}

/// Manufactured monogenic test solutions `Phi = zeta^p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Manufactured {
    Zeta,
    Zeta2,
    Zeta3,
}

impl Manufactured {
    /// Exact component values at `(x, y)`.
    pub fn components(self, x: f64, y: f64) -> [f64; 4] {
        match self {
            Manufactured::Zeta => [x, 0.0, y, 0.0],
            Manufactured::Zeta2 => [x * x + y * y, 0.0, 2.0 * x * y, 2.0 * y * y],
            Manufactured::Zeta3 => [
                x * x * x + 3.0 * x * y * y,
                2.0 * y * y * y,
                3.0 * x * x * y - 3.0 * y * y * y,
                6.0 * x * y * y,
            ],
        }
    }

    /// Potential with `grad V = (U1, U3)`, normalized by `V(0,0) = 0`.
    pub fn potential(self, x: f64, y: f64) -> f64 {
        match self {
            Manufactured::Zeta => 0.5 * (x * x + y * y),
            Manufactured::Zeta2 => x * x * x / 3.0 + x * y * y,
            Manufactured::Zeta3 => {
                0.25 * x.powi(4) + 1.5 * x * x * y * y - 0.75 * y.powi(4)
            }
        }
    }

    /// Boundary data `(u1, u3)` for the (1-3)-problem at `(x, y)`.
    pub fn boundary_data(self, x: f64, y: f64) -> (f64, f64) {
        let c = self.components(x, y);
        (c[0], c[2])
    }
}
