use serde::{Deserialize, Serialize};

use crate::conic::cone::{cone_residual, ConeTag};
use crate::conic::matrix::SymMatrix;
use crate::error::{Error, Result};
use crate::scalar::{RealScalar, Scalar};

/// `(coeffs_j • W)_j ∈ cone`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearImageConstraint<T> {
    pub label: String,
    pub coeffs: Vec<SymMatrix<T>>,
    pub cone: ConeTag,
}

impl<T: Scalar> LinearImageConstraint<T> {
    pub fn new(label: impl Into<String>, coeffs: Vec<SymMatrix<T>>, cone: ConeTag) -> Self {
        LinearImageConstraint { label: label.into(), coeffs, cone }
    }

    pub fn scalar(label: impl Into<String>, coeff: SymMatrix<T>, cone: ConeTag) -> Self {
        Self::new(label, vec![coeff], cone)
    }

    pub fn image(&self, w: &SymMatrix<T>) -> Vec<T> {
        self.coeffs.iter().map(|c| c.dot(w)).collect()
    }
}

/// `min objective • W  s.t.  W ⪰ 0, W₁₁ = 1, every constraint`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConicProgram<T> {
    pub var_dim: usize,
    pub objective: SymMatrix<T>,
    pub constraints: Vec<LinearImageConstraint<T>>,
    /// Entry of `W` pinned to one; always `(0, 0)` for the relaxations here.
    pub normalization: (usize, usize),
}

impl<T: Scalar> ConicProgram<T> {
    pub fn new(objective: SymMatrix<T>) -> Self {
        ConicProgram {
            var_dim: objective.dim(),
            objective,
            constraints: Vec::new(),
            normalization: (0, 0),
        }
    }

    pub fn push(&mut self, c: LinearImageConstraint<T>) {
        self.constraints.push(c);
    }

    pub fn validate(&self) -> Result<()> {
        if self.var_dim == 0 {
            return Err(Error::invalid("program needs a variable of dimension >= 1"));
        }
        if self.objective.dim() != self.var_dim {
            return Err(Error::dimension("objective dimension differs from the variable"));
        }
        let (i, j) = self.normalization;
        if i >= self.var_dim || j >= self.var_dim {
            return Err(Error::invalid("normalization index out of range"));
        }
        for c in &self.constraints {
            c.cone.validate()?;
            if c.coeffs.len() != c.cone.size() {
                return Err(Error::dimension(format!(
                    "constraint '{}' has {} rows for cone {}",
                    c.label,
                    c.coeffs.len(),
                    c.cone
                )));
            }
            if c.coeffs.iter().any(|m| m.dim() != self.var_dim) {
                return Err(Error::dimension(format!(
                    "constraint '{}' has coefficients of the wrong dimension",
                    c.label
                )));
            }
        }
        Ok(())
    }

    /// Total number of scalar rows, excluding the normalization.
    pub fn num_rows(&self) -> usize {
        self.constraints.iter().map(|c| c.cone.size()).sum()
    }

    pub fn count_cones(&self, pred: impl Fn(ConeTag) -> bool) -> usize {
        self.constraints.iter().filter(|c| pred(c.cone)).count()
    }
}

impl<T: RealScalar> ConicProgram<T> {
    /// Per-constraint cone residuals of `W`, plus the normalization and PSD
    /// residuals under the labels `"normalization"` and `"psd"`.
    pub fn residuals(&self, w: &SymMatrix<T>) -> Result<Vec<(String, T)>> {
        if w.dim() != self.var_dim {
            return Err(Error::dimension("point has the wrong dimension"));
        }
        let (i, j) = self.normalization;
        let mut out = vec![
            ("normalization".to_string(), (w.get(i, j) - T::one()).abs()),
            ("psd".to_string(), (-w.min_eigenvalue()).max(T::zero())),
        ];
        for c in &self.constraints {
            out.push((c.label.clone(), cone_residual(&c.image(w), c.cone)?));
        }
        Ok(out)
    }

    pub fn max_residual(&self, w: &SymMatrix<T>) -> Result<T> {
        Ok(self.residuals(w)?.into_iter().fold(T::zero(), |m, (_, r)| m.max(r)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    NearOptimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

impl SolveStatus {
    pub fn is_usable(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::NearOptimal => "near_optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::NumericalFailure => "numerical_failure",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub backend: String,
    pub iterations: u32,
    pub solve_time_s: f64,
    /// SOC/RSOC rows were rewritten as PSD blocks through arrow/Two.
    pub lifted_cones: bool,
    pub duality_gap: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ConicSolution {
    pub w: SymMatrix<f64>,
    pub obj_value: f64,
    pub status: SolveStatus,
    pub stats: SolverStats,
}

impl ConicSolution {
    pub fn failed(dim: usize, status: SolveStatus, stats: SolverStats) -> Self {
        ConicSolution { w: SymMatrix::zeros(dim), obj_value: f64::NAN, status, stats }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_catches_row_count() {
        let mut p = ConicProgram::new(SymMatrix::<f64>::identity(2));
        p.push(LinearImageConstraint::new("bad", vec![SymMatrix::identity(2)], ConeTag::Soc(2)));
        assert!(p.validate().is_err());
        let mut q = ConicProgram::new(SymMatrix::<f64>::identity(2));
        q.push(LinearImageConstraint::scalar("ok", SymMatrix::identity(2), ConeTag::Nonneg(1)));
        q.validate().unwrap();
        assert_eq!(q.num_rows(), 1);
    }

    #[test]
    fn residuals_of_feasible_point() {
        let mut p = ConicProgram::new(SymMatrix::<f64>::identity(2));
        p.push(LinearImageConstraint::scalar("tr", SymMatrix::identity(2), ConeTag::Nonneg(1)));
        let w = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        assert_eq!(p.max_residual(&w).unwrap(), 0.0);
        let bad = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!((p.max_residual(&bad).unwrap() - 1.0).abs() < 1e-12);
    }
}
