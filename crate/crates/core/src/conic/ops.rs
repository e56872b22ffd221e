//! The lifting operators: arrow, Two, their linearized Kronecker products
//! and the J form.

use crate::conic::matrix::{Mat, SymMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `Arr(v)`: `v₁` on the diagonal, `v₂..v_d` along the first row and column.
/// PSD exactly when `v` lies in the second-order cone.
pub fn arrow<T: Scalar>(v: &[T]) -> Result<SymMatrix<T>> {
    LiftOp::Arrow(v.len()).apply(v)
}

/// `Two(v) = [[v₁, v₃], [v₃, v₂]]`, PSD exactly when `v ∈ RSOC³`.
pub fn two<T: Scalar>(v: &[T]) -> Result<SymMatrix<T>> {
    LiftOp::Two.apply(v)
}

/// `J_d • M = M₁₁ − Σ_{j≥2} M_jj`.
pub fn j_form<T: Scalar>(m: &SymMatrix<T>) -> Result<T> {
    if m.dim() == 0 {
        return Err(Error::dimension("J form of an empty matrix"));
    }
    Ok((1..m.dim()).fold(m.get(0, 0), |acc, j| acc - m.get(j, j)))
}

/// `J_d = diag(1, −1, …, −1)`.
pub fn j_matrix<T: Scalar>(d: usize) -> SymMatrix<T> {
    let mut diag = vec![-T::one(); d];
    if let Some(first) = diag.first_mut() {
        *first = T::one();
    }
    SymMatrix::diag(&diag)
}

/// A linear map from a cone's coordinates to a matrix that is PSD exactly on
/// the cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftOp {
    /// Arrow map on `ℝ^d`.
    Arrow(usize),
    /// Two map on `ℝ³`.
    Two,
}

impl LiftOp {
    pub fn input_dim(self) -> usize {
        match self {
            LiftOp::Arrow(d) => d,
            LiftOp::Two => 3,
        }
    }

    pub fn output_dim(self) -> usize {
        match self {
            LiftOp::Arrow(d) => d,
            LiftOp::Two => 2,
        }
    }

    /// Input coordinate sitting at matrix entry `(r, c)`, if any. Both maps
    /// place each coordinate with coefficient one.
    #[inline]
    pub fn source(self, r: usize, c: usize) -> Option<usize> {
        match self {
            LiftOp::Arrow(_) => {
                if r == c {
                    Some(0)
                } else if r == 0 {
                    Some(c)
                } else if c == 0 {
                    Some(r)
                } else {
                    None
                }
            }
            LiftOp::Two => match (r, c) {
                (0, 0) => Some(0),
                (1, 1) => Some(1),
                (0, 1) | (1, 0) => Some(2),
                _ => None,
            },
        }
    }

    pub fn apply<T: Scalar>(self, v: &[T]) -> Result<SymMatrix<T>> {
        if self.input_dim() == 0 {
            return Err(Error::dimension("arrow operator needs dimension >= 1"));
        }
        if v.len() != self.input_dim() {
            return Err(Error::dimension(format!(
                "{self:?} expects {} coordinates, got {}",
                self.input_dim(),
                v.len()
            )));
        }
        Ok(SymMatrix::from_upper(self.output_dim(), |r, c| {
            self.source(r, c).map_or(T::zero(), |k| v[k])
        }))
    }
}

/// `(left ⊠ right)(Z)`: the linear operator that agrees with
/// `left(y) ⊗ right(z)` on rank-one `Z = z yᵀ`.
///
/// `z` has shape `right.input_dim() × left.input_dim()`. The result has
/// dimension `left.output_dim() · right.output_dim()`, indexed in Kronecker
/// order `(a, b) ↦ a·right.output_dim() + b`; each bilinear term `y_k z_l`
/// of the Kronecker product is replaced by `Z(l, k)`.
pub fn boxtimes<T: Scalar>(left: LiftOp, right: LiftOp, z: &Mat<T>) -> Result<SymMatrix<T>> {
    if z.shape() != (right.input_dim(), left.input_dim()) {
        return Err(Error::dimension(format!(
            "boxtimes({left:?}, {right:?}) needs a {}x{} argument, got {}x{}",
            right.input_dim(),
            left.input_dim(),
            z.rows(),
            z.cols()
        )));
    }
    let q = right.output_dim();
    let dim = left.output_dim() * q;
    let raw = Mat::from_fn(dim, dim, |row, col| {
        let (a1, b1) = (row / q, row % q);
        let (a2, b2) = (col / q, col % q);
        match (left.source(a1, a2), right.source(b1, b2)) {
            (Some(k), Some(l)) => z.get(l, k),
            _ => T::zero(),
        }
    });
    Ok(SymMatrix::symmetrize(&raw))
}

/// Coefficient matrices of `W ↦ (left ⊠ right)(Z_mapᵀ W Y_map)`, one per
/// entry of the output, addressed as `coeff(i, j)` for `i <= j`.
///
/// `y_map` sends the lifted variable to the left operator's argument
/// (`y = y_mapᵀ w`), `z_map` to the right one's.
pub(crate) fn boxtimes_coefficients<T: Scalar>(
    left: LiftOp,
    right: LiftOp,
    y_map: &Mat<T>,
    z_map: &Mat<T>,
) -> Vec<Vec<Option<SymMatrix<T>>>> {
    assert_eq!(y_map.cols(), left.input_dim());
    assert_eq!(z_map.cols(), right.input_dim());
    let y_cols: Vec<Vec<T>> = (0..y_map.cols()).map(|k| y_map.column(k)).collect();
    let z_cols: Vec<Vec<T>> = (0..z_map.cols()).map(|l| z_map.column(l)).collect();
    let q = right.output_dim();
    let dim = left.output_dim() * q;
    let term = |row: usize, col: usize| -> Option<SymMatrix<T>> {
        let (a1, b1) = (row / q, row % q);
        let (a2, b2) = (col / q, col % q);
        match (left.source(a1, a2), right.source(b1, b2)) {
            (Some(k), Some(l)) => Some(SymMatrix::sym_outer(&z_cols[l], &y_cols[k])),
            _ => None,
        }
    };
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    if j < i {
                        return None;
                    }
                    // symmetrized entry: average of (i, j) and (j, i) terms
                    match (term(i, j), term(j, i)) {
                        (Some(a), Some(b)) => {
                            let mut s = a;
                            s.add_assign_scaled(T::one(), &b);
                            Some(s.scaled(T::one().half()))
                        }
                        (Some(a), None) | (None, Some(a)) => Some(a.scaled(T::one().half())),
                        (None, None) => None,
                    }
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn kron<T: Scalar>(a: &SymMatrix<T>, b: &SymMatrix<T>) -> SymMatrix<T> {
        let q = b.dim();
        SymMatrix::from_upper(a.dim() * q, |r, c| a.get(r / q, c / q) * b.get(r % q, c % q))
    }

    #[test]
    fn arrow_of_e1_is_identity() {
        assert_eq!(arrow(&[1.0, 0.0, 0.0]).unwrap(), SymMatrix::identity(3));
    }

    #[test]
    fn arrow_boundary_case() {
        let a = arrow(&[1.0f64, 1.0]).unwrap();
        assert_eq!(a.rows_vec(), vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(a.min_eigenvalue().abs() < 1e-15);
    }

    #[test]
    fn arrow_interior_min_eigenvalue() {
        // λ_min(Arr(2,1,1)) = 2 − ‖(1,1)‖
        let a = arrow(&[2.0, 1.0, 1.0]).unwrap();
        assert!((a.min_eigenvalue() - (2.0 - 2f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn arrow_rejects_empty() {
        assert!(arrow::<f64>(&[]).is_err());
    }

    #[test]
    fn two_examples() {
        assert_eq!(two(&[1.0, 1.0, 1.0]).unwrap().rows_vec(), vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        let t = two(&[1.0f64, 4.0, 2.0]).unwrap();
        assert_eq!(t.rows_vec(), vec![vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(t.min_eigenvalue().abs() < 1e-14);
        let bad = two(&[1.0, 1.0, 2.0]).unwrap();
        assert!(bad.min_eigenvalue() < 0.0);
        assert!(two(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn boxtimes_arrow_arrow_identity() {
        let z = Mat::from_rows(&[vec![1, 0], vec![0, 0]]).unwrap();
        let b = boxtimes(LiftOp::Arrow(2), LiftOp::Arrow(2), &z).unwrap();
        assert_eq!(b, SymMatrix::identity(4));
    }

    #[test]
    fn boxtimes_two_two_all_ones() {
        let z = Mat::from_fn(3, 3, |_, _| 1);
        let b = boxtimes(LiftOp::Two, LiftOp::Two, &z).unwrap();
        assert_eq!(b, SymMatrix::from_upper(4, |_, _| 1));
    }

    #[test]
    fn boxtimes_shape_mismatch() {
        let z = Mat::<f64>::zeros(3, 3);
        assert!(boxtimes(LiftOp::Arrow(3), LiftOp::Arrow(4), &z).is_err());
    }

    #[test]
    fn boxtimes_rank_one_exact_over_rationals() {
        let r = |n, d| Rational64::new(n, d);
        let y = [r(1, 2), r(-3, 4), r(2, 1)];
        let z = [r(5, 3), r(0, 1), r(-1, 7), r(4, 9)];
        let zy = Mat::from_fn(4, 3, |l, k| z[l] * y[k]);
        let b = boxtimes(LiftOp::Arrow(3), LiftOp::Arrow(4), &zy).unwrap();
        let expected = kron(&arrow(&y).unwrap(), &arrow(&z).unwrap());
        assert_eq!(b, expected);
    }

    #[test]
    fn boxtimes_linear_exactly_over_rationals() {
        let r = |n, d| Rational64::new(n, d);
        let z1 = Mat::from_fn(3, 4, |i, j| r((i * 7 + j) as i64 - 5, 3));
        let z2 = Mat::from_fn(3, 4, |i, j| r((i as i64 - j as i64) * 2 + 1, 5));
        let alpha = r(-7, 2);
        let combo = Mat::from_fn(3, 4, |i, j| alpha * z1.get(i, j) + z2.get(i, j));
        for (left, right) in [(LiftOp::Arrow(4), LiftOp::Two)] {
            let lhs = boxtimes(left, right, &combo).unwrap();
            let mut rhs = boxtimes(left, right, &z1).unwrap().scaled(alpha);
            rhs.add_assign_scaled(r(1, 1), &boxtimes(left, right, &z2).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn j_form_examples() {
        assert_eq!(j_form(&SymMatrix::outer(&[1.0, 1.0, 0.0])).unwrap(), 0.0);
        assert_eq!(j_form(&SymMatrix::outer(&[2.0, 1.0, 1.0])).unwrap(), 2.0);
        for d in 1..6 {
            assert_eq!(j_form(&SymMatrix::<i64>::identity(d)).unwrap(), 2 - d as i64);
        }
        assert!(j_form(&SymMatrix::<f64>::zeros(0)).is_err());
    }

    #[test]
    fn j_matrix_dot_equals_j_form() {
        let m = SymMatrix::from_upper(4, |i, j| (i * 3 + j) as i64);
        assert_eq!(j_matrix::<i64>(4).dot(&m), j_form(&m).unwrap());
    }

    #[test]
    fn coefficient_rows_reproduce_boxtimes() {
        // The emitted coefficient matrices applied to W must equal boxtimes
        // evaluated on Z = z_mapᵀ W y_map.
        let w = SymMatrix::from_upper(4, |i, j| Rational64::new((i * 5 + j * 3) as i64 - 4, 3));
        let y_map = Mat::from_fn(4, 3, |i, j| Rational64::from_integer((i + 2 * j) as i64 % 3 - 1));
        let z_map = Mat::from_fn(4, 3, |i, j| Rational64::from_integer((3 * i + j) as i64 % 4 - 2));
        let z = w.cross_congruence(&z_map, &y_map);
        let direct = boxtimes(LiftOp::Two, LiftOp::Two, &z).unwrap();
        let coeffs = boxtimes_coefficients(LiftOp::Two, LiftOp::Two, &y_map, &z_map);
        for i in 0..4 {
            for j in i..4 {
                let v = coeffs[i][j].as_ref().map_or(Rational64::from_integer(0), |c| c.dot(&w));
                assert_eq!(v, direct.get(i, j), "entry ({i},{j})");
            }
        }
    }
}
