//! Linear stability and Maslov-type indices for elliptic relative
//! equilibria of the planar n-body problem, including the collision
//! (blow-up) limit `e → 1`.

pub mod collision;
pub mod error;
pub mod flow;
pub mod maslov;
pub mod models;
pub mod properties;
pub mod stability;
pub mod symplectic;
pub mod verify;

pub use error::{Error, ErrorClass, Result};
pub use symplectic::{LagrangianFrame, Mat, SymplecticMatrix};
