//! Puiseux series, Newton-Puiseux branches of plane curves, and arcs in R^4.

mod arc;
mod newton;
mod series;

pub use arc::{outer_contact_order, planar_arc, reparametrize_by_distance, ArcGerm};
pub use newton::{
    curve_half_branches, newton_puiseux, ramification, residual, solve_dependent, BranchSet, Orientation, PuiseuxBranch,
};
pub use series::{Coeff, PuiseuxSeries, APPROX_ZERO};
