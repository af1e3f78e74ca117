//! Arithmetic in the two-dimensional commutative algebra over the complex
//! numbers with basis `{e1, e2}`, where `e1` is the identity and
//! `e2 * e2 = e1 + 2i*e2`. The squared sum `(e1^2 + e2^2)^2` vanishes, which
//! is what makes the components of differentiable algebra-valued functions
//! biharmonic.
//!
//! Internally the algebra splits as complex dual numbers over the nilpotent
//! `rho = 2*e1 + 2i*e2` (`rho^2 = 0`): writing `a = alpha*e1 + beta*rho`
//! with `alpha = c1 + i*c2`, `beta = -(i/2)*c2`, multiplication acts
//! componentwise on `alpha` and first-order on `beta`. Inversion is done in
//! that form so the non-invertibility locus `alpha = 0` is explicit.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute floor (scaled by the element norm) below which the identity
/// component counts as zero and inversion fails.
pub const INVERTIBILITY_TOL: f64 = 1e-14;

/// An element `c1*e1 + c2*e2` of the algebra.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BElement {
    pub c1: Complex64,
    pub c2: Complex64,
}

/// A point of the Cartesian plane, embedded into the algebra as `x*e1 + y*e2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

/// The four real components of an algebra element with respect to
/// `{e1, i*e1, e2, i*e2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComponentQuad {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub u4: f64,
}

impl PlanePoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

impl BElement {
    pub const ZERO: Self = Self {
        c1: Complex64::new(0.0, 0.0),
        c2: Complex64::new(0.0, 0.0),
    };

    /// The identity element.
    pub const E1: Self = Self {
        c1: Complex64::new(1.0, 0.0),
        c2: Complex64::new(0.0, 0.0),
    };

    pub const E2: Self = Self {
        c1: Complex64::new(0.0, 0.0),
        c2: Complex64::new(1.0, 0.0),
    };

    /// The nilpotent `rho = 2*e1 + 2i*e2`, `rho * rho = 0`.
    pub const RHO: Self = Self {
        c1: Complex64::new(2.0, 0.0),
        c2: Complex64::new(0.0, 2.0),
    };

    pub fn new(c1: Complex64, c2: Complex64) -> Self {
        Self { c1, c2 }
    }

    pub fn from_reals(c1: f64, c2: f64) -> Self {
        Self {
            c1: Complex64::new(c1, 0.0),
            c2: Complex64::new(c2, 0.0),
        }
    }

    /// Embed a plane point as `x*e1 + y*e2`.
    pub fn embed_point(p: PlanePoint) -> Self {
        Self::from_reals(p.x, p.y)
    }

    /// Coefficient along the identity in the `{1, rho}` basis:
    /// `alpha = c1 + i*c2`.
    pub fn alpha(self) -> Complex64 {
        self.c1 + Complex64::i() * self.c2
    }

    /// Nilpotent coefficient in the `{1, rho}` basis: `beta = -(i/2)*c2`.
    pub fn beta(self) -> Complex64 {
        -Complex64::i() * 0.5 * self.c2
    }

    /// Reassemble from the dual-number form `alpha + beta*rho`.
    pub fn from_dual(alpha: Complex64, beta: Complex64) -> Self {
        Self {
            c1: alpha + 2.0 * beta,
            c2: Complex64::new(0.0, 2.0) * beta,
        }
    }

    /// Product per the multiplication table `e1^2 = e1`, `e2*e1 = e2`,
    /// `e2^2 = e1 + 2i*e2`. Commutative and associative.
    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, rhs: Self) -> Self {
        let two_i = Complex64::new(0.0, 2.0);
        Self {
            c1: self.c1 * rhs.c1 + self.c2 * rhs.c2,
            c2: self.c1 * rhs.c2 + self.c2 * rhs.c1 + two_i * self.c2 * rhs.c2,
        }
    }

    /// Multiplicative inverse with an explicit tolerance on the identity
    /// component.
    pub fn inv_with_tol(self, tol: f64) -> Result<Self> {
        let alpha = self.alpha();
        let floor = tol * self.norm().max(1.0);
        if alpha.norm() <= floor {
            return Err(Error::NotInvertible {
                alpha_abs: alpha.norm(),
            });
        }
        let ainv = alpha.inv();
        Ok(Self::from_dual(ainv, -self.beta() * ainv * ainv))
    }

    /// Multiplicative inverse; fails on (near-)nilpotent elements.
    pub fn inv(self) -> Result<Self> {
        self.inv_with_tol(INVERTIBILITY_TOL)
    }

    /// Real components with respect to `{e1, i*e1, e2, i*e2}`.
    pub fn components(self) -> ComponentQuad {
        ComponentQuad {
            u1: self.c1.re,
            u2: self.c1.im,
            u3: self.c2.re,
            u4: self.c2.im,
        }
    }

    /// Euclidean norm `sqrt(|c1|^2 + |c2|^2)`. Not multiplicative; the
    /// distortion of products is bounded (see tests).
    pub fn norm(self) -> f64 {
        (self.c1.norm_sqr() + self.c2.norm_sqr()).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.c1.re.is_finite()
            && self.c1.im.is_finite()
            && self.c2.re.is_finite()
            && self.c2.im.is_finite()
    }

    /// Scale by a complex number (same as multiplying by `z*e1`).
    pub fn scale(self, z: Complex64) -> Self {
        Self {
            c1: self.c1 * z,
            c2: self.c2 * z,
        }
    }
}

impl ComponentQuad {
    /// Reassemble `u1*e1 + u2*i*e1 + u3*e2 + u4*i*e2`; exact inverse of
    /// [`BElement::components`].
    pub fn reassemble(self) -> BElement {
        BElement {
            c1: Complex64::new(self.u1, self.u2),
            c2: Complex64::new(self.u3, self.u4),
        }
    }
}

impl std::ops::Add for BElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            c1: self.c1 + rhs.c1,
            c2: self.c2 + rhs.c2,
        }
    }
}

impl std::ops::Sub for BElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            c1: self.c1 - rhs.c1,
            c2: self.c2 - rhs.c2,
        }
    }
}

impl std::ops::Neg for BElement {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            c1: -self.c1,
            c2: -self.c2,
        }
    }
}

impl std::ops::Mul for BElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        BElement::mul(self, rhs)
    }
}

impl std::ops::Mul<f64> for BElement {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn assert_close(a: BElement, b: BElement, tol: f64) {
        assert_abs_diff_eq!(a.c1.re, b.c1.re, epsilon = tol);
        assert_abs_diff_eq!(a.c1.im, b.c1.im, epsilon = tol);
        assert_abs_diff_eq!(a.c2.re, b.c2.re, epsilon = tol);
        assert_abs_diff_eq!(a.c2.im, b.c2.im, epsilon = tol);
    }

    #[test]
    fn multiplication_table() {
        // e2 * e2 = e1 + 2i*e2
        let sq = BElement::E2 * BElement::E2;
        assert_eq!(sq.c1, Complex64::new(1.0, 0.0));
        assert_eq!(sq.c2, Complex64::new(0.0, 2.0));
        // e1 is the identity
        let a = BElement::new(Complex64::new(1.5, -0.25), Complex64::new(0.0, 3.0));
        assert_close(BElement::E1 * a, a, 0.0);
        assert_close(a * BElement::E1, a, 0.0);
    }

    #[test]
    fn rho_is_nilpotent() {
        let sq = BElement::RHO * BElement::RHO;
        assert_close(sq, BElement::ZERO, 1e-15);
        // (e1^2 + e2^2)^2 = 0 while e1^2 + e2^2 != 0
        let s = BElement::E1 * BElement::E1 + BElement::E2 * BElement::E2;
        assert!(s.norm() > 1.0);
        assert_close(s * s, BElement::ZERO, 1e-15);
    }

    #[test]
    fn hand_expanded_product() {
        // (e1+e2)(e1-e2) = e1^2 - e2^2 = e1 - (e1 + 2i e2) = -2i*e2
        let p = (BElement::E1 + BElement::E2) * (BElement::E1 - BElement::E2);
        assert_close(
            p,
            BElement::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, -2.0)),
            1e-15,
        );
    }

    #[test]
    fn inverse_of_basis_elements() {
        assert_close(BElement::E1.inv().unwrap(), BElement::E1, 0.0);
        // inv(e2) = -2i*e1 + e2
        let inv = BElement::E2.inv().unwrap();
        assert_close(
            inv,
            BElement::new(Complex64::new(0.0, -2.0), Complex64::new(1.0, 0.0)),
            1e-15,
        );
        assert_close(BElement::E2 * inv, BElement::E1, 1e-15);
    }

    #[test]
    fn nilpotent_is_not_invertible() {
        assert!(matches!(
            BElement::RHO.inv(),
            Err(Error::NotInvertible { .. })
        ));
    }

    #[test]
    fn plane_point_inverse_closed_form() {
        // For zeta = x*e1 + y*e2, z = x+iy != 0:
        // zeta^{-1} = (1/z + i*y/z^2) e1 - (y/z^2) e2
        let (x, y) = (0.8, -1.7);
        let zeta = BElement::embed_point(PlanePoint::new(x, y));
        let z = Complex64::new(x, y);
        let want = BElement::new(
            z.inv() + Complex64::i() * y / (z * z),
            -Complex64::new(y, 0.0) / (z * z),
        );
        assert_close(zeta.inv().unwrap(), want, 1e-15);
        assert_close(zeta * zeta.inv().unwrap(), BElement::E1, 1e-15);
    }

    #[test]
    fn component_extraction() {
        let a = BElement::new(Complex64::new(1.0, 2.0), Complex64::new(3.0, 4.0));
        let q = a.components();
        assert_eq!((q.u1, q.u2, q.u3, q.u4), (1.0, 2.0, 3.0, 4.0));
        assert_close(q.reassemble(), a, 0.0);

        let rho = BElement::RHO.components();
        assert_eq!((rho.u1, rho.u2, rho.u3, rho.u4), (2.0, 0.0, 0.0, 2.0));

        let p = BElement::embed_point(PlanePoint::new(2.0, -3.0)).components();
        assert_eq!((p.u1, p.u2, p.u3, p.u4), (2.0, 0.0, -3.0, 0.0));
    }

    fn arb_element() -> impl Strategy<Value = BElement> {
        (
            -1.0f64..1.0,
            -1.0f64..1.0,
            -1.0f64..1.0,
            -1.0f64..1.0,
        )
            .prop_map(|(a, b, c, d)| {
                BElement::new(Complex64::new(a, b), Complex64::new(c, d))
            })
    }

    proptest! {
        #[test]
        fn mul_commutes_and_associates(a in arb_element(), b in arb_element(), c in arb_element()) {
            let scale = (a.norm() * b.norm()).max(1.0);
            let ab = a * b;
            let ba = b * a;
            prop_assert!((ab - ba).norm() <= 1e-12 * scale);
            let abc = (a * b) * c;
            let abc2 = a * (b * c);
            prop_assert!((abc - abc2).norm() <= 1e-12 * (scale * c.norm()).max(1.0));
        }

        #[test]
        fn inv_roundtrip(a in arb_element()) {
            prop_assume!(a.alpha().norm() > 0.05);
            let inv = a.inv().unwrap();
            prop_assert!((a * inv - BElement::E1).norm() <= 1e-12);
            let back = inv.inv().unwrap();
            prop_assert!((back - a).norm() <= 1e-12 * a.norm().max(1.0));
        }

        #[test]
        fn norm_distortion_bounded(a in arb_element(), b in arb_element()) {
            // The Euclidean norm is submultiplicative only up to a constant.
            prop_assert!((a * b).norm() <= 4.0 * a.norm() * b.norm() + 1e-12);
        }
    }
}
