//! Problem data for the ball-constrained QP and its two-constraint linear
//! cousin, plus the lifting geometry every relaxation is built from.

mod geometry;
mod json;
mod model;

pub use geometry::{lift_balls, lift_linear, p_matrix, LiftedGeometry};
pub use model::{AffineMap, Ball, BallQpInstance, Instance, LinearTwoInstance, Provenance};
