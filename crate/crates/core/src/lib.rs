//! Semidefinite relaxations of nonconvex quadratic programs over
//! intersections of balls: the Shor, Kron and Beta liftings, conic solver
//! back ends, instance generators and verification suites.

pub mod analysis;
pub mod bench;
pub mod catalog;
pub mod conic;
pub mod error;
pub mod generators;
pub mod instances;
pub mod relaxations;
pub mod rng;
pub mod scalar;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};

/// Double-precision instantiations of the generic types.
pub type SymMatrixF64 = conic::SymMatrix<f64>;
pub type MatF64 = conic::Mat<f64>;
pub type ConicProgramF64 = conic::ConicProgram<f64>;
pub type BallF64 = instances::Ball<f64>;
pub type BallQpInstanceF64 = instances::BallQpInstance<f64>;
pub type LinearTwoInstanceF64 = instances::LinearTwoInstance<f64>;
pub type InstanceF64 = instances::Instance<f64>;
pub type LiftedGeometryF64 = instances::LiftedGeometry<f64>;
pub type RelaxationF64 = relaxations::Relaxation<f64>;
