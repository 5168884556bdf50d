//! Quasi-static XFEM solver for frictional contact on interfaces embedded
//! inside bilinear quadrilateral elements.
//!
//! Normal contact is handled by a truncated logarithmic barrier, so the gap
//! across the interface stays strictly positive in every converged state.
//! Friction uses a C¹ smoothing of the stick–slip transition instead of a
//! yield function. A classical penalty law is kept alongside as a comparator.
//!
//! The crate is organized bottom-up:
//!
//! - [`mesh`]: structured grids, level-set interfaces, cut classification and
//!   quadrature.
//! - [`xfem`]: shifted-Heaviside enrichment, DOF numbering, jumps and the
//!   averaged surface projection.
//! - [`contact`]: barrier, smoothed friction, traction update, parameter
//!   recipe and the penalty law.
//! - [`assembly`]: residual and Jacobian assembly, boundary conditions.
//! - [`solver`]: sparse LU and Newton's method with load stepping.

pub mod assembly;
pub mod contact;
mod error;
pub mod mesh;
pub mod solver;
pub mod xfem;

pub use error::{Error, Result};

/// 2D vector used for points, displacements and tractions.
pub type Vec2 = nalgebra::Vector2<f64>;
/// 2×2 matrix used for interface tangents.
pub type Mat2 = nalgebra::Matrix2<f64>;
