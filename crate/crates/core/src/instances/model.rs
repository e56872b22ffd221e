use crate::conic::SymMatrix;
use crate::error::{Error, Result};
use crate::scalar::{RealScalar, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Ball<T> {
    pub center: Vec<T>,
    pub radius: T,
}

impl<T: Scalar> Ball<T> {
    pub fn new(center: Vec<T>, radius: T) -> Self {
        Ball { center, radius }
    }

    pub fn unit(n: usize) -> Self {
        Ball { center: vec![T::zero(); n], radius: T::one() }
    }
}

/// Where an instance came from; carried through to JSON and CSV output.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Provenance {
    pub family: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(family: impl Into<String>, seed: u64) -> Self {
        Provenance { family: family.into(), seed }
    }
}

/// `min xᵀQx + 2qᵀx  s.t.  ‖x − cᵢ‖ ≤ ρᵢ, i = 1..m`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallQpInstance<T> {
    pub provenance: Provenance,
    pub q_mat: SymMatrix<T>,
    pub q: Vec<T>,
    pub balls: Vec<Ball<T>>,
    /// A point of the feasible set, when one is known.
    pub witness: Option<Vec<T>>,
}

/// `min xᵀQx + 2qᵀx  s.t.  ‖x‖ ≤ 1, ‖x‖ ≤ g₂ + h₂ᵀx`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearTwoInstance<T> {
    pub provenance: Provenance,
    pub q_mat: SymMatrix<T>,
    pub q: Vec<T>,
    pub g2: T,
    pub h2: Vec<T>,
    pub witness: Option<Vec<T>>,
}

/// `x = shift + scale·x′`; the original objective equals the normalized one
/// plus `offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap<T> {
    pub shift: Vec<T>,
    pub scale: T,
    pub offset: T,
}

impl<T: Scalar> AffineMap<T> {
    pub fn identity(n: usize) -> Self {
        AffineMap { shift: vec![T::zero(); n], scale: T::one(), offset: T::zero() }
    }

    /// Original coordinates of a normalized point.
    pub fn to_original(&self, x: &[T]) -> Vec<T> {
        x.iter().zip(&self.shift).map(|(&xi, &c)| c + self.scale * xi).collect()
    }

    pub fn to_normalized(&self, x: &[T]) -> Vec<T> {
        x.iter().zip(&self.shift).map(|(&xi, &c)| (xi - c) / self.scale).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.scale == T::one() && self.offset == T::zero() && self.shift.iter().all(|&c| c == T::zero())
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn norm<T: RealScalar>(v: &[T]) -> T {
    dot(v, v).sqrt()
}

fn quadratic<T: Scalar>(q_mat: &SymMatrix<T>, q: &[T], x: &[T]) -> Result<T> {
    if x.len() != q.len() {
        return Err(Error::dimension(format!("point has {} coordinates, instance has n = {}", x.len(), q.len())));
    }
    Ok(q_mat.quad_form(x) + T::two() * dot(q, x))
}

fn check_objective<T: Scalar>(q_mat: &SymMatrix<T>, q: &[T]) -> Result<usize> {
    let n = q.len();
    if n == 0 {
        return Err(Error::invalid("instance dimension must be >= 1"));
    }
    if q_mat.dim() != n {
        return Err(Error::dimension(format!("Q is {0}x{0} but q has length {n}", q_mat.dim())));
    }
    Ok(n)
}

impl<T: Scalar> BallQpInstance<T> {
    pub fn new(q_mat: SymMatrix<T>, q: Vec<T>, balls: Vec<Ball<T>>) -> Result<Self> {
        let n = check_objective(&q_mat, &q)?;
        if balls.is_empty() {
            return Err(Error::invalid("need at least one ball"));
        }
        for (i, b) in balls.iter().enumerate() {
            if b.center.len() != n {
                return Err(Error::dimension(format!("center of ball {} has the wrong length", i + 1)));
            }
            if b.radius <= T::zero() {
                return Err(Error::invalid(format!("radius of ball {} must be positive", i + 1)));
            }
        }
        Ok(BallQpInstance { provenance: Provenance::default(), q_mat, q, balls, witness: None })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn with_witness(mut self, witness: Vec<T>) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn m(&self) -> usize {
        self.balls.len()
    }

    pub fn is_normalized(&self) -> bool {
        let b = &self.balls[0];
        b.radius == T::one() && b.center.iter().all(|&c| c == T::zero())
    }

    pub fn objective(&self, x: &[T]) -> Result<T> {
        quadratic(&self.q_mat, &self.q, x)
    }

    /// Substitutes `x = c₁ + ρ₁x′` so that the first ball becomes the unit
    /// ball.
    pub fn normalize(&self) -> (Self, AffineMap<T>) {
        let c1 = self.balls[0].center.clone();
        let r1 = self.balls[0].radius;
        let qc = self.q_mat.mul_vec(&c1);
        let offset = dot(&c1, &qc) + T::two() * dot(&self.q, &c1);
        let map = AffineMap { shift: c1, scale: r1, offset };
        let balls = self
            .balls
            .iter()
            .map(|b| Ball { center: map.to_normalized(&b.center), radius: b.radius / r1 })
            .collect();
        let q = self.q.iter().zip(&qc).map(|(&a, &b)| r1 * (a + b)).collect();
        let out = BallQpInstance {
            provenance: self.provenance.clone(),
            q_mat: self.q_mat.scaled(r1 * r1),
            q,
            balls,
            witness: self.witness.as_ref().map(|w| map.to_normalized(w)),
        };
        (out, map)
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::invalid("instance must be normalized (c₁ = 0, ρ₁ = 1); call normalize() first"))
        }
    }

    /// `gᵢ = ρᵢ² − cᵢᵀcᵢ` and `hᵢ = 2cᵢ`, so that `‖x − cᵢ‖ ≤ ρᵢ ⟺ ‖x‖² ≤ gᵢ + hᵢᵀx`.
    pub fn gh(&self) -> Vec<(T, Vec<T>)> {
        self.balls
            .iter()
            .map(|b| {
                let g = b.radius * b.radius - dot(&b.center, &b.center);
                (g, b.center.iter().map(|&c| T::two() * c).collect())
            })
            .collect()
    }
}

impl<T: RealScalar> BallQpInstance<T> {
    /// `max(0, maxᵢ ‖x − cᵢ‖ − ρᵢ)`.
    pub fn feasibility_violation(&self, x: &[T]) -> Result<T> {
        if x.len() != self.n() {
            return Err(Error::dimension("point has the wrong dimension"));
        }
        Ok(self.balls.iter().fold(T::zero(), |acc, b| {
            let d: Vec<T> = x.iter().zip(&b.center).map(|(&a, &c)| a - c).collect();
            acc.max(norm(&d) - b.radius)
        }))
    }

    /// Confirms the stored witness, or for `m = 2` finds one in closed form.
    /// Larger hand-entered instances without a witness are reported as
    /// unverified (`Ok(None)`); the local oracle can settle them.
    pub fn verify_nonempty(&self, tol: T) -> Result<Option<Vec<T>>> {
        if let Some(w) = &self.witness {
            let v = self.feasibility_violation(w)?;
            if v > tol {
                return Err(Error::invalid(format!("stored witness violates the constraints by {v:?}")));
            }
            return Ok(Some(w.clone()));
        }
        if self.m() == 1 {
            return Ok(Some(self.balls[0].center.clone()));
        }
        if self.m() == 2 {
            // closest point of ball 1 to c₂
            let (b1, b2) = (&self.balls[0], &self.balls[1]);
            let d: Vec<T> = b2.center.iter().zip(&b1.center).map(|(&a, &b)| a - b).collect();
            let dist = norm(&d);
            let x = if dist <= b1.radius {
                b2.center.clone()
            } else {
                let s = b1.radius / dist;
                b1.center.iter().zip(&d).map(|(&c, &di)| c + s * di).collect()
            };
            if self.feasibility_violation(&x)? > tol {
                return Err(Error::invalid("ball intersection is empty"));
            }
            return Ok(Some(x));
        }
        Ok(None)
    }
}

impl<T: Scalar> LinearTwoInstance<T> {
    pub fn new(q_mat: SymMatrix<T>, q: Vec<T>, g2: T, h2: Vec<T>) -> Result<Self> {
        let n = check_objective(&q_mat, &q)?;
        if h2.len() != n {
            return Err(Error::dimension("h₂ has the wrong length"));
        }
        Ok(LinearTwoInstance { provenance: Provenance::default(), q_mat, q, g2, h2, witness: None })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn with_witness(mut self, witness: Vec<T>) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn objective(&self, x: &[T]) -> Result<T> {
        quadratic(&self.q_mat, &self.q, x)
    }

    /// `(g₁, h₁) = (1, 0)` followed by `(g₂, h₂)`.
    pub fn gh(&self) -> Vec<(T, Vec<T>)> {
        vec![(T::one(), vec![T::zero(); self.n()]), (self.g2, self.h2.clone())]
    }
}

impl<T: RealScalar> LinearTwoInstance<T> {
    /// `max(0, ‖x‖ − 1, ‖x‖ − g₂ − h₂ᵀx)`.
    pub fn feasibility_violation(&self, x: &[T]) -> Result<T> {
        if x.len() != self.n() {
            return Err(Error::dimension("point has the wrong dimension"));
        }
        let nx = norm(x);
        Ok(T::zero().max(nx - T::one()).max(nx - self.g2 - dot(&self.h2, x)))
    }
}

/// Either problem family.
#[derive(Clone, Debug, PartialEq)]
pub enum Instance<T> {
    Balls(BallQpInstance<T>),
    Linear(LinearTwoInstance<T>),
}

impl<T: Scalar> Instance<T> {
    pub fn n(&self) -> usize {
        match self {
            Instance::Balls(b) => b.n(),
            Instance::Linear(l) => l.n(),
        }
    }

    pub fn m(&self) -> usize {
        match self {
            Instance::Balls(b) => b.m(),
            Instance::Linear(_) => 2,
        }
    }

    pub fn provenance(&self) -> &Provenance {
        match self {
            Instance::Balls(b) => &b.provenance,
            Instance::Linear(l) => &l.provenance,
        }
    }

    pub fn objective(&self, x: &[T]) -> Result<T> {
        match self {
            Instance::Balls(b) => b.objective(x),
            Instance::Linear(l) => l.objective(x),
        }
    }

    pub fn q_mat(&self) -> &SymMatrix<T> {
        match self {
            Instance::Balls(b) => &b.q_mat,
            Instance::Linear(l) => &l.q_mat,
        }
    }

    pub fn witness(&self) -> Option<&[T]> {
        match self {
            Instance::Balls(b) => b.witness.as_deref(),
            Instance::Linear(l) => l.witness.as_deref(),
        }
    }
}

impl<T: RealScalar> Instance<T> {
    pub fn feasibility_violation(&self, x: &[T]) -> Result<T> {
        match self {
            Instance::Balls(b) => b.feasibility_violation(x),
            Instance::Linear(l) => l.feasibility_violation(x),
        }
    }
}

impl<T> From<BallQpInstance<T>> for Instance<T> {
    fn from(b: BallQpInstance<T>) -> Self {
        Instance::Balls(b)
    }
}

impl<T> From<LinearTwoInstance<T>> for Instance<T> {
    fn from(l: LinearTwoInstance<T>) -> Self {
        Instance::Linear(l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_shifted_unit_ball() {
        let inst = BallQpInstance::new(
            SymMatrix::<f64>::identity(2),
            vec![0.0, 0.0],
            vec![Ball::new(vec![1.0, 0.0], 2.0)],
        )
        .unwrap();
        let (norm_inst, map) = inst.normalize();
        assert!(norm_inst.is_normalized());
        assert_eq!(norm_inst.objective(&[0.0, 0.0]).unwrap() + map.offset, 1.0);
        assert_eq!(map.to_original(&[0.0, 0.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn normalize_is_identity_on_normalized() {
        let inst = BallQpInstance::new(
            SymMatrix::<f64>::identity(2),
            vec![1.0, -1.0],
            vec![Ball::unit(2), Ball::new(vec![0.5, 0.0], 0.7)],
        )
        .unwrap();
        let (again, map) = inst.normalize();
        assert!(map.is_identity());
        assert_eq!(again, inst);
    }

    #[test]
    fn violation_examples() {
        let inst = BallQpInstance::new(SymMatrix::<f64>::identity(2), vec![0.0; 2], vec![Ball::unit(2)]).unwrap();
        assert_eq!(inst.feasibility_violation(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(inst.feasibility_violation(&[2.0, 0.0]).unwrap(), 1.0);
        assert!(inst.objective(&[1.0]).is_err());
    }

    #[test]
    fn rejects_bad_data() {
        assert!(BallQpInstance::new(SymMatrix::<f64>::identity(2), vec![0.0; 2], vec![]).is_err());
        assert!(BallQpInstance::new(SymMatrix::<f64>::identity(2), vec![0.0; 2], vec![Ball::new(vec![0.0; 2], 0.0)]).is_err());
        assert!(LinearTwoInstance::new(SymMatrix::<f64>::identity(2), vec![0.0; 2], 1.0, vec![0.0]).is_err());
    }

    #[test]
    fn closed_form_witness_for_two_balls() {
        let inst = BallQpInstance::new(
            SymMatrix::<f64>::identity(2),
            vec![0.0; 2],
            vec![Ball::unit(2), Ball::new(vec![1.5, 0.0], 0.6)],
        )
        .unwrap();
        let w = inst.verify_nonempty(1e-12).unwrap().unwrap();
        assert!((w[0] - 1.0).abs() < 1e-15);
        let empty = BallQpInstance::new(
            SymMatrix::<f64>::identity(2),
            vec![0.0; 2],
            vec![Ball::unit(2), Ball::new(vec![3.0, 0.0], 0.5)],
        )
        .unwrap();
        assert!(empty.verify_nonempty(1e-12).is_err());
    }
}
