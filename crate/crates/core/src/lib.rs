//! Neural time stepping for periodic 1-D evolution equations `∂t u = f(u)`
//! that keeps chosen invariants fixed.
//!
//! A small MLP `û(θ, x)` represents the solution. Each step builds a
//! Runge-Kutta target (optionally relaxed so a quadratic invariant is exact),
//! fits the parameter increment by tangent-space least squares, and projects
//! the new parameters back onto the level set of the invariants.

pub mod ad;
pub mod ansatz;
pub mod driver;
pub mod error;
pub mod field;
pub mod integrators;
pub mod invariants;
pub mod network;
pub mod problems;
pub mod projection;
pub mod quadrature;
pub mod teng;

pub use ansatz::{Ansatz, FourierModel, Mode};
pub use error::{Error, Result};
pub use field::Field;
pub use network::{init_params, Activation, FlatParams, NetworkSpec};
pub use problems::{ProblemKind, ProblemSpec};
pub use quadrature::{make_grid, QuadratureGrid};
