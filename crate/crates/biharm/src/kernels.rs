//! Kernels of the boundary integral system.
//!
//! The algebra-valued Cauchy kernel splits as
//!
//! ```text
//! (tilde_tau(s) - tilde_tau(t))^{-1} tilde_tau'(s)
//!     = (1+st)/((s-t)(s^2+1)) * e1  +  k1(t,s) * e1  +  i*rho * k2(t,s)
//! ```
//!
//! where the first (singular) part is the plain scalar Cauchy kernel of the
//! real line and `k1`, `k2` are continuous on the compactified line. Both
//! are evaluated here in the angle chart, where the infinity node is an
//! ordinary point and the singular part becomes `cot((theta_s-theta_t)/2)/2`:
//!
//! ```text
//! kappa_j(theta_t, theta_s) = J(theta_s) * k_j(t, s),   J = (s^2+1)/2.
//! ```
//!
//! Diagonal values come from closed-form Taylor limits; near the diagonal
//! the evaluation switches to the limit plus a first-order correction since
//! both kernel terms are individually O(1/(s-t)).

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::algebra::BElement;
use crate::conformal::BoundaryChart;

/// Angle separation below which the Taylor form replaces direct evaluation.
const NEAR_DIAGONAL_THETA: f64 = 1e-5;

/// Both kernels at one `(t, s)` pair plus the real combinations that enter
/// the integral system.
#[derive(Clone, Copy, Debug)]
pub struct KernelValue {
    pub k1: Complex64,
    pub k2: Complex64,
}

impl KernelValue {
    pub fn new(k1: Complex64, k2: Complex64) -> Self {
        Self { k1, k2 }
    }

    /// `Im k1 + 2 Re k2` — diagonal block, first equation.
    pub fn a11(&self) -> f64 {
        self.k1.im + 2.0 * self.k2.re
    }

    /// `-2 Im k2` — off-diagonal block, first equation.
    pub fn a13(&self) -> f64 {
        -2.0 * self.k2.im
    }

    /// `-2 Im k2` — off-diagonal block, second equation.
    pub fn a31(&self) -> f64 {
        -2.0 * self.k2.im
    }

    /// `Im k1 - 2 Re k2` — diagonal block, second equation.
    pub fn a33(&self) -> f64 {
        self.k1.im - 2.0 * self.k2.re
    }

    /// Reassemble the algebra-valued kernel `k = k1*e1 + i*rho*k2`.
    pub fn reassemble(&self) -> BElement {
        BElement::E1.scale(self.k1) + BElement::RHO.scale(Complex64::i() * self.k2)
    }

    pub fn is_finite(&self) -> bool {
        self.k1.re.is_finite()
            && self.k1.im.is_finite()
            && self.k2.re.is_finite()
            && self.k2.im.is_finite()
    }
}

/// Derivative jets of the boundary parametrization at one angle.
struct Jets {
    f1: Complex64,
    f2: Complex64,
    f3: Complex64,
}

fn jets(chart: &BoundaryChart, theta: f64) -> Jets {
    Jets {
        f1: chart.tau_theta_d(theta),
        f2: chart.tau_theta_dd(theta),
        f3: chart.tau_theta_ddd(theta),
    }
}

fn wrap_angle(x: f64) -> f64 {
    let y = x - 2.0 * PI * (x / (2.0 * PI)).round();
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

/// Stable boundary increment: `tau(theta+h) - tau(theta)` factored as
/// `(S - T) * q(S, T)` with `S - T = 2i sin(h/2) exp(i(theta + h/2))` and
/// `q` the divided difference of the map. Avoids the O(eps/h) relative
/// error of naive subtraction.
struct Increment {
    /// `S = exp(i(theta+h))`.
    s_pt: Complex64,
    /// `S - T`, exact up to one rounding.
    d: Complex64,
    /// Divided difference `(sigma(S) - sigma(T))/(S - T)`.
    q: Complex64,
}

impl Increment {
    fn new(chart: &BoundaryChart, theta: f64, h: f64) -> Self {
        let s_pt = Complex64::from_polar(1.0, theta + h);
        let t_pt = Complex64::from_polar(1.0, theta);
        let d = Complex64::i()
            * (2.0 * (0.5 * h).sin())
            * Complex64::from_polar(1.0, theta + 0.5 * h);
        let q = chart.map().sigma_divided_difference(s_pt, t_pt);
        Self { s_pt, d, q }
    }

    fn dtau(&self) -> Complex64 {
        self.d * self.q
    }
}

/// Angle-chart kernel `kappa1(theta_t, theta_s) = J(theta_s) k1(t, s)`.
/// Finite and smooth everywhere, including the diagonal and `theta = 0`.
pub fn kappa1(chart: &BoundaryChart, theta_t: f64, theta_s: f64) -> Complex64 {
    let h = wrap_angle(theta_s - theta_t);
    if h.abs() <= NEAR_DIAGONAL_THETA {
        let j = jets(chart, theta_t);
        let diag = j.f2 / (2.0 * j.f1);
        let slope = j.f3 / (3.0 * j.f1) - j.f2 * j.f2 / (4.0 * j.f1 * j.f1)
            + Complex64::new(1.0 / 12.0, 0.0);
        return diag + slope * h;
    }
    // tau_theta'(theta_s)/dtau - cot(h/2)/2  collapses, with
    // r := sigma'(S)/q - 1 = O(h), to  i/2 + r exp(ih/2)/(2 sin(h/2)).
    let inc = Increment::new(chart, theta_t, h);
    let r = chart.map().sigma_d(inc.s_pt) / inc.q - 1.0;
    Complex64::new(0.0, 0.5)
        + r * Complex64::from_polar(1.0, 0.5 * h) / (2.0 * (0.5 * h).sin())
}

/// Angle-chart kernel `kappa2(theta_t, theta_s) = J(theta_s) k2(t, s)`.
pub fn kappa2(chart: &BoundaryChart, theta_t: f64, theta_s: f64) -> Complex64 {
    let h = wrap_angle(theta_s - theta_t);
    if h.abs() <= NEAR_DIAGONAL_THETA {
        let j = jets(chart, theta_t);
        let (g1, g2, g3) = (j.f1.im, j.f2.im, j.f3.im);
        let f1sq = j.f1 * j.f1;
        let diag = -g2 / (4.0 * j.f1) + j.f2 * g1 / (4.0 * f1sq);
        let slope = -g3 / (6.0 * j.f1) + j.f3 * g1 / (6.0 * f1sq)
            + j.f2 * g2 / (4.0 * f1sq)
            - j.f2 * j.f2 * g1 / (4.0 * f1sq * j.f1);
        return diag + slope * h;
    }
    let inc = Increment::new(chart, theta_t, h);
    let dtau = inc.dtau();
    let td = Complex64::i() * inc.s_pt * chart.map().sigma_d(inc.s_pt);
    td * dtau.im / (2.0 * dtau * dtau) - td.im / (2.0 * dtau)
}

/// `k1(t, s)` on the compactified line. At `s = inf` the kernel vanishes;
/// `t = inf` is the ordinary angle `theta = 0`.
pub fn k1_eval(chart: &BoundaryChart, t: f64, s: f64) -> Complex64 {
    if s.is_infinite() {
        return Complex64::new(0.0, 0.0);
    }
    let theta_t = BoundaryChart::theta_of_t(t);
    let theta_s = BoundaryChart::theta_of_t(s);
    kappa1(chart, theta_t, theta_s) / (0.5 * (s * s + 1.0))
}

/// `k2(t, s)` on the compactified line; conventions as in [`k1_eval`].
pub fn k2_eval(chart: &BoundaryChart, t: f64, s: f64) -> Complex64 {
    if s.is_infinite() {
        return Complex64::new(0.0, 0.0);
    }
    let theta_t = BoundaryChart::theta_of_t(t);
    let theta_s = BoundaryChart::theta_of_t(s);
    kappa2(chart, theta_t, theta_s) / (0.5 * (s * s + 1.0))
}

/// Both kernels at `(t, s)`.
pub fn kernel_value(chart: &BoundaryChart, t: f64, s: f64) -> KernelValue {
    KernelValue::new(k1_eval(chart, t, s), k2_eval(chart, t, s))
}

/// Finite limit of `(s^2+1) k1(t, s) / 2` as `s -> inf` — the infinity-node
/// column entry paired with the angle-chart Jacobian.
pub fn k1_scaled_at_inf(chart: &BoundaryChart, t: f64) -> Complex64 {
    kappa1(chart, BoundaryChart::theta_of_t(t), 0.0)
}

/// Finite limit of `(s^2+1) k2(t, s) / 2` as `s -> inf`.
pub fn k2_scaled_at_inf(chart: &BoundaryChart, t: f64) -> Complex64 {
    kappa2(chart, BoundaryChart::theta_of_t(t), 0.0)
}

/// Scalar Cauchy part of the kernel split, `(1+st)/((s-t)(s^2+1))`.
pub fn scalar_cauchy_part(t: f64, s: f64) -> f64 {
    (1.0 + s * t) / ((s - t) * (s * s + 1.0))
}
