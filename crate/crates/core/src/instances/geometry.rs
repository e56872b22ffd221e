use crate::conic::{Mat, SymMatrix};
use crate::error::Result;
use crate::instances::model::{BallQpInstance, LinearTwoInstance};
use crate::scalar::Scalar;

/// The homogenization and β-lifting data of one instance.
///
/// `w = (α, x, β) ∈ ℝⁿ⁺²` is the β-lifted vector and `w̃ = (α, x) ∈ ℝⁿ⁺¹`
/// the plain homogenization.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedGeometry<T> {
    pub n: usize,
    /// `Pᵀw = (β, x)`.
    pub p: Mat<T>,
    /// `ℓ₁` (ball case), or `ℓ₁, ℓ₂` (linear case): `ℓᵢᵀw = gᵢα + hᵢᵀx − β`.
    pub ell: Vec<Vec<T>>,
    /// Ball case only, for `i = 2..m`: `Lᵢᵀw = (α, gᵢα + hᵢᵀx, β)`.
    pub l: Vec<Mat<T>>,
    /// `L̃ᵢᵀw̃ ∈ SOCⁿ⁺¹` describes constraint `i` in the homogenized space.
    pub ltilde: Vec<Mat<T>>,
    pub gh: Vec<(T, Vec<T>)>,
    /// `[[0, qᵀ], [q, Q]]`.
    pub q_tilde: SymMatrix<T>,
    /// `Q̃` padded with a zero row and column for `β`.
    pub q_hat: SymMatrix<T>,
}

/// `P = [[0, 0], [0, Iₙ], [1, 0]]`.
pub fn p_matrix<T: Scalar>(n: usize) -> Mat<T> {
    Mat::from_fn(n + 2, n + 1, |r, c| {
        let hit = (r == n + 1 && c == 0) || (r >= 1 && r <= n && c == r);
        if hit {
            T::one()
        } else {
            T::zero()
        }
    })
}

fn ell<T: Scalar>(g: T, h: &[T]) -> Vec<T> {
    let mut v = Vec::with_capacity(h.len() + 2);
    v.push(g);
    v.extend_from_slice(h);
    v.push(-T::one());
    v
}

fn objectives<T: Scalar>(q_mat: &SymMatrix<T>, q: &[T]) -> (SymMatrix<T>, SymMatrix<T>) {
    let n = q.len();
    let entry = |i: usize, j: usize| match (i, j) {
        (0, 0) => T::zero(),
        (0, j) => q[j - 1],
        (i, j) => q_mat.get(i - 1, j - 1),
    };
    let tilde = SymMatrix::from_upper(n + 1, entry);
    let hat = SymMatrix::from_upper(n + 2, |i, j| if j == n + 1 { T::zero() } else { entry(i, j) });
    (tilde, hat)
}

/// `[[g, 0], [h, Iₙ]]`.
fn ltilde_linear<T: Scalar>(g: T, h: &[T]) -> Mat<T> {
    let n = h.len();
    Mat::from_fn(n + 1, n + 1, |r, c| match (r, c) {
        (0, 0) => g,
        (0, _) => T::zero(),
        (r, 0) => h[r - 1],
        (r, c) if r == c => T::one(),
        _ => T::zero(),
    })
}

/// `[[ρ, −cᵀ], [0, Iₙ]]`, so `L̃ᵀ(α, x) = (ρα, x − αc)`.
fn ltilde_ball<T: Scalar>(center: &[T], radius: T) -> Mat<T> {
    let n = center.len();
    Mat::from_fn(n + 1, n + 1, |r, c| match (r, c) {
        (0, 0) => radius,
        (0, c) => -center[c - 1],
        (_, 0) => T::zero(),
        (r, c) if r == c => T::one(),
        _ => T::zero(),
    })
}

/// Columns `e_α`, `(gᵢ, hᵢ, 0)`, `e_β`.
fn l_ball<T: Scalar>(g: T, h: &[T]) -> Mat<T> {
    let n = h.len();
    Mat::from_fn(n + 2, 3, |r, c| match c {
        0 => if r == 0 { T::one() } else { T::zero() },
        1 => {
            if r == 0 {
                g
            } else if r <= n {
                h[r - 1]
            } else {
                T::zero()
            }
        }
        _ => if r == n + 1 { T::one() } else { T::zero() },
    })
}

/// The ball-case lifting. The instance must be normalized.
pub fn lift_balls<T: Scalar>(inst: &BallQpInstance<T>) -> Result<LiftedGeometry<T>> {
    inst.require_normalized()?;
    let n = inst.n();
    let gh = inst.gh();
    let (q_tilde, q_hat) = objectives(&inst.q_mat, &inst.q);
    Ok(LiftedGeometry {
        n,
        p: p_matrix(n),
        ell: vec![ell(T::one(), &vec![T::zero(); n])],
        l: gh.iter().skip(1).map(|(g, h)| l_ball(*g, h)).collect(),
        ltilde: inst.balls.iter().map(|b| ltilde_ball(&b.center, b.radius)).collect(),
        gh,
        q_tilde,
        q_hat,
    })
}

pub fn lift_linear<T: Scalar>(inst: &LinearTwoInstance<T>) -> LiftedGeometry<T> {
    let n = inst.n();
    let gh = inst.gh();
    let (q_tilde, q_hat) = objectives(&inst.q_mat, &inst.q);
    LiftedGeometry {
        n,
        p: p_matrix(n),
        ell: gh.iter().map(|(g, h)| ell(*g, h)).collect(),
        l: Vec::new(),
        ltilde: gh.iter().map(|(g, h)| ltilde_linear(*g, h)).collect(),
        gh,
        q_tilde,
        q_hat,
    }
}

impl<T: Scalar> LiftedGeometry<T> {
    /// `w = (1, x, β)`.
    pub fn lifted_point(x: &[T], beta: T) -> Vec<T> {
        let mut w = Vec::with_capacity(x.len() + 2);
        w.push(T::one());
        w.extend_from_slice(x);
        w.push(beta);
        w
    }

    /// `w̃ = (1, x)`.
    pub fn homogenized_point(x: &[T]) -> Vec<T> {
        let mut w = Vec::with_capacity(x.len() + 1);
        w.push(T::one());
        w.extend_from_slice(x);
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::model::Ball;

    #[test]
    fn p_matches_display() {
        let p = p_matrix::<i64>(2);
        let expected = Mat::from_rows(&[vec![0, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]).unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn ball_example_gh() {
        let inst = BallQpInstance::new(
            SymMatrix::<f64>::identity(2),
            vec![0.0; 2],
            vec![Ball::unit(2), Ball::new(vec![0.09, -0.34], 0.98)],
        )
        .unwrap();
        let geo = lift_balls(&inst).unwrap();
        assert_eq!(geo.gh[0], (1.0, vec![0.0, 0.0]));
        assert!((geo.gh[1].0 - 0.8367).abs() < 1e-12);
        assert_eq!(geo.gh[1].1, vec![0.18, -0.68]);
        assert_eq!(geo.ell[0], vec![1.0, 0.0, 0.0, -1.0]);
        assert_eq!(geo.l.len(), 1);
        assert_eq!(geo.l[0].column(1), vec![geo.gh[1].0, 0.18, -0.68, 0.0]);
    }

    #[test]
    fn objectives_pad_beta() {
        let q_mat = SymMatrix::from_rows(&[vec![1, 2], vec![2, 3]]).unwrap();
        let inst = LinearTwoInstance::new(q_mat, vec![4, 5], 1, vec![0, 0]).unwrap();
        let geo = lift_linear(&inst);
        assert_eq!(geo.q_tilde.rows_vec(), vec![vec![0, 4, 5], vec![4, 1, 2], vec![5, 2, 3]]);
        let hat = geo.q_hat.rows_vec();
        assert_eq!(hat[3], vec![0; 4]);
        assert_eq!(&hat[1][..3], &[4, 1, 2]);
    }

    #[test]
    fn unnormalized_rejected() {
        let inst = BallQpInstance::new(SymMatrix::<f64>::identity(1), vec![0.0], vec![Ball::new(vec![1.0], 1.0)])
            .unwrap();
        assert!(lift_balls(&inst).is_err());
    }
}
