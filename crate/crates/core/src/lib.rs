//! Numerical laboratory for nonlocal liquid-drop energies
//! `F(E) = P_K(E) + V_1(E) - A R(E)`.
//!
//! Shapes are balls, voxel sets, halfspace clips of those, and unions. All
//! double integrals are evaluated over the space of lines, where the
//! intersection of a line with a shape is a finite union of intervals and the
//! remaining one-dimensional integrals have closed forms.

pub mod constants;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod quadrature;
pub mod energy;
pub mod thresholds;
pub mod slicing;
pub mod families;
pub mod isoperimetry;

pub use error::{Error, Result};
