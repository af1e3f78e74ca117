//! Boundary-integral solver for the planar biharmonic problem.
//!
//! The solver works with monogenic functions taking values in a commutative
//! two-dimensional complex algebra. A biharmonic potential on a simply
//! connected domain corresponds to such a function; its boundary values are
//! recovered from a Cauchy-type integral whose density solves a Fredholm
//! system of the second kind on the compactified real line.
//!
//! Pipeline: [`conformal`] describes the domain, [`kernels`] evaluates the
//! integral kernels, [`fredholm`] assembles and solves the discrete system,
//! [`cauchy`] evaluates the resulting integral, and [`field`] reconstructs
//! the component fields and the potential on a lattice.

pub mod algebra;
pub mod cauchy;
pub mod config;
pub mod conformal;
pub mod error;
pub mod field;
pub mod fredholm;
pub mod kernels;
pub mod pipeline;

pub use algebra::{BElement, ComponentQuad, PlanePoint};
pub use error::{Error, Result};
