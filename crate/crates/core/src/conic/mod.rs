//! Lifting algebra and the canonical conic program every relaxation compiles
//! into: one PSD matrix variable `W`, `W₁₁ = 1`, and cone-tagged linear
//! images of `W`.

mod cone;
mod matrix;
mod ops;
mod program;

pub use cone::{cone_residual, smat, svec, svec_index, svec_len, svec_order, ConeTag};
pub use matrix::{Mat, SymMatrix};
pub use ops::{arrow, boxtimes, j_form, j_matrix, two, LiftOp};
pub(crate) use ops::boxtimes_coefficients;
pub use program::{ConicProgram, ConicSolution, LinearImageConstraint, SolveStatus, SolverStats};
