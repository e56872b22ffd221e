use std::fmt;

use serde::{Deserialize, Serialize};

use crate::conic::matrix::SymMatrix;
use crate::error::{Error, Result};
use crate::scalar::RealScalar;

/// Cone a linear image is constrained to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConeTag {
    /// `{0}ᵏ`.
    Zero(usize),
    /// `ℝᵏ₊`.
    Nonneg(usize),
    /// `{v : ‖v₂..d‖ ≤ v₁}`.
    Soc(usize),
    /// `{v ∈ ℝ³ : v₁, v₂ ≥ 0, v₃² ≤ v₁v₂}`.
    Rsoc3,
    /// `p × p` PSD cone, in the scaled upper-triangle encoding of [`svec`].
    PsdImage(usize),
}

impl ConeTag {
    pub fn size(self) -> usize {
        match self {
            ConeTag::Zero(k) | ConeTag::Nonneg(k) | ConeTag::Soc(k) => k,
            ConeTag::Rsoc3 => 3,
            ConeTag::PsdImage(p) => svec_len(p),
        }
    }

    pub fn validate(self) -> Result<()> {
        match self {
            ConeTag::Soc(0) => Err(Error::invalid("SOC dimension must be >= 1")),
            ConeTag::PsdImage(0) => Err(Error::invalid("PSD image order must be >= 1")),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ConeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConeTag::Zero(k) => write!(f, "zero({k})"),
            ConeTag::Nonneg(k) => write!(f, "nonneg({k})"),
            ConeTag::Soc(k) => write!(f, "soc({k})"),
            ConeTag::Rsoc3 => write!(f, "rsoc3"),
            ConeTag::PsdImage(p) => write!(f, "psd({p})"),
        }
    }
}

pub fn svec_len(p: usize) -> usize {
    p * (p + 1) / 2
}

/// Position of `(i, j)`, `i <= j`, in the column-major upper triangle.
#[inline]
pub fn svec_index(i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    j * (j + 1) / 2 + i
}

/// Matrix order `p` with `p(p+1)/2 = len`, if any.
pub fn svec_order(len: usize) -> Option<usize> {
    let p = ((((8 * len + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
    (svec_len(p) == len).then_some(p)
}

/// Upper triangle in column-major order, off-diagonals scaled by `√2`, so
/// that `svec(A)·svec(B) = A • B`.
pub fn svec<T: RealScalar>(m: &SymMatrix<T>) -> Vec<T> {
    let s2 = T::sqrt2();
    let p = m.dim();
    let mut out = Vec::with_capacity(svec_len(p));
    for j in 0..p {
        for i in 0..=j {
            let v = m.get(i, j);
            out.push(if i == j { v } else { v * s2 });
        }
    }
    out
}

/// Inverse of [`svec`].
pub fn smat<T: RealScalar>(v: &[T]) -> Result<SymMatrix<T>> {
    let p = svec_order(v.len())
        .ok_or_else(|| Error::dimension(format!("{} is not a triangular number", v.len())))?;
    let inv = T::one() / T::sqrt2();
    let mut m = SymMatrix::zeros(p);
    for j in 0..p {
        for i in 0..=j {
            let x = v[svec_index(i, j)];
            m.set(i, j, if i == j { x } else { x * inv });
        }
    }
    Ok(m)
}

fn euclid<T: RealScalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

/// Nonnegative violation of `v ∈ cone`; zero exactly on the cone.
pub fn cone_residual<T: RealScalar>(v: &[T], cone: ConeTag) -> Result<T> {
    cone.validate()?;
    if v.len() != cone.size() {
        return Err(Error::dimension(format!(
            "cone {cone} has size {}, vector has {}",
            cone.size(),
            v.len()
        )));
    }
    let zero = T::zero();
    Ok(match cone {
        ConeTag::Zero(_) => v.iter().fold(zero, |m, &x| m.max(x.abs())),
        ConeTag::Nonneg(_) => v.iter().fold(zero, |m, &x| m.max(-x)),
        ConeTag::Soc(_) => (euclid(&v[1..]) - v[0]).max(zero),
        ConeTag::Rsoc3 => {
            // v₃² ≤ v₁v₂ with v₁, v₂ ≥ 0  ⟺  ‖(v₁ − v₂, 2v₃)‖ ≤ v₁ + v₂
            let (a, b, c) = (v[0], v[1], v[2]);
            let two = T::one() + T::one();
            let gap = (euclid(&[a - b, two * c]) - (a + b)) / two;
            zero.max(-a).max(-b).max(gap)
        }
        ConeTag::PsdImage(_) => (-smat(v)?.min_eigenvalue()).max(zero),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_examples() {
        assert_eq!(cone_residual(&[1.0, 0.0, 0.0], ConeTag::Soc(3)).unwrap(), 0.0);
        let r = cone_residual(&[0.0, 1.0, 1.0], ConeTag::Soc(3)).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(cone_residual(&[1.0, 4.0, 2.0], ConeTag::Rsoc3).unwrap(), 0.0);
        assert!(cone_residual(&[1.0, 1.0, 2.0], ConeTag::Rsoc3).unwrap() > 0.0);
        assert!(cone_residual(&[-1.0, 0.0, 0.0], ConeTag::Rsoc3).unwrap() >= 1.0);
        assert_eq!(cone_residual(&[0.5, -2.0], ConeTag::Nonneg(2)).unwrap(), 2.0);
        assert_eq!(cone_residual(&[0.5, -2.0], ConeTag::Zero(2)).unwrap(), 2.0);
    }

    #[test]
    fn residual_length_mismatch() {
        assert!(cone_residual(&[1.0, 0.0], ConeTag::Soc(3)).is_err());
        assert!(cone_residual(&[1.0, 0.0], ConeTag::Rsoc3).is_err());
        assert!(cone_residual::<f64>(&[], ConeTag::Soc(0)).is_err());
    }

    #[test]
    fn psd_image_residual_is_negative_min_eigenvalue() {
        let m = SymMatrix::from_rows(&[vec![1.0f64, 2.0], vec![2.0, 1.0]]).unwrap();
        let r = cone_residual(&svec(&m), ConeTag::PsdImage(2)).unwrap();
        assert!((r - 1.0).abs() < 1e-14);
        assert_eq!(cone_residual(&svec(&SymMatrix::<f64>::identity(3)), ConeTag::PsdImage(3)).unwrap(), 0.0);
    }

    #[test]
    fn svec_layout_and_inner_product() {
        let a = SymMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 5.0], vec![3.0, 5.0, 6.0]])
            .unwrap();
        let s = svec(&a);
        let r2 = 2f64.sqrt();
        let expected = [1.0, 2.0 * r2, 4.0, 3.0 * r2, 5.0 * r2, 6.0];
        for (x, y) in s.iter().zip(expected) {
            assert!((x - y).abs() < 1e-15);
        }
        let dot: f64 = s.iter().map(|x| x * x).sum();
        assert!((dot - a.dot(&a)).abs() < 1e-12);
        assert_eq!(svec_index(1, 2), 4);
        assert_eq!(svec_order(6), Some(3));
        assert_eq!(svec_order(5), None);
        assert!(smat(&[1.0, 2.0]).is_err());
    }
}
