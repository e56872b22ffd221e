//! Hand-entered reference instances with known relaxation values.

use crate::conic::SymMatrix;
use crate::instances::{Ball, BallQpInstance, LinearTwoInstance, Provenance};

/// Reference values for a catalogued instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    pub kron: f64,
    pub beta: f64,
    pub x_star: Vec<f64>,
}

/// Two-dimensional instance over `‖x‖ ≤ min(1, g₂ + h₂ᵀx)` on which Kron
/// is loose and Beta is exact.
///
/// Note `h₂₁ = −0.19`: with `+0.19` the reference point is not optimal and
/// neither reference bound is reproduced.
pub fn linear_example() -> (LinearTwoInstance<f64>, Reference) {
    let q_mat = SymMatrix::from_rows(&[vec![-0.67, 0.95], vec![0.95, -1.59]]).expect("symmetric literal");
    let inst = LinearTwoInstance::new(q_mat, vec![-0.89, -0.89], 1.52, vec![-0.19, -0.91])
        .expect("consistent dimensions")
        .with_provenance(Provenance::new("linear_ex", 0))
        .with_witness(vec![0.0, 0.0]);
    (inst, Reference { kron: -2.6363, beta: -2.4672, x_star: vec![0.978358, -0.206920] })
}

/// Two-ball instance on which Kron is loose and Beta is exact.
pub fn ball_example() -> (BallQpInstance<f64>, Reference) {
    let q_mat = SymMatrix::from_rows(&[vec![-0.12, 0.66], vec![0.66, -1.58]]).expect("symmetric literal");
    let inst = BallQpInstance::new(
        q_mat,
        vec![1.04, 0.10],
        vec![Ball::unit(2), Ball::new(vec![0.09, -0.34], 0.98)],
    )
    .expect("consistent dimensions")
    .with_provenance(Provenance::new("ball_ex", 0))
    .with_witness(vec![0.0, 0.0]);
    (inst, Reference { kron: -1.9206, beta: -1.8856, x_star: vec![-0.303464, -0.952843] })
}
