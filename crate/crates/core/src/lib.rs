//! Lipschitz geometry of surface germs parametrized by polynomial maps
//! `(R^2,0) -> (R^4,0)`.
//!
//! The crate classifies 2-jets, computes the tangent cone of the image,
//! looks for normal-embedding obstructions (half-plane cones, the shear
//! order condition, polar height/width excess), estimates the inner metric
//! numerically, and analyses the knot cut out on a small sphere.

pub mod cli;
pub mod cone;
pub mod error;
pub mod germ;
pub mod knot;
pub mod linalg;
pub mod expr;
pub mod metric;
pub mod numeric;
pub mod polar;
pub mod puiseux;
pub mod verdict;

pub use error::{Error, Result};
pub use expr::{parse_germ_file, parse_map, Axis, MapGerm, Order, Poly2, Rational};
