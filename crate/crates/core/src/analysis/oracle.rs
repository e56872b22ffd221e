//! Feasible-value oracles: projected-gradient local search and a grid scan.
//! Both only ever return feasible points, so their values are upper bounds on
//! the true minimum.

use crate::analysis::projection::{feasible_sets, max_violation, project_intersection, ConvexSet};
use crate::conic::SymMatrix;
use crate::error::{Error, Result};
use crate::instances::Instance;
use crate::rng::Rng;

/// Accepted feasibility violation of oracle points.
pub const ORACLE_FEAS_TOL: f64 = 1e-9;
const ARMIJO: f64 = 1e-4;
const MAX_DESCENT_ITERS: usize = 2_000;

/// `min xᵀHx + 2gᵀx + c₀` over the intersection of `sets`.
#[derive(Clone, Debug)]
pub struct QuadProblem {
    pub h: SymMatrix<f64>,
    pub g: Vec<f64>,
    pub c0: f64,
    pub sets: Vec<ConvexSet>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefineOptions {
    pub restarts: usize,
    pub seed: u64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions { restarts: 20, seed: 0 }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl QuadProblem {
    pub fn from_instance(inst: &Instance<f64>) -> Self {
        let q = match inst {
            Instance::Balls(b) => b.q.clone(),
            Instance::Linear(l) => l.q.clone(),
        };
        QuadProblem { h: inst.q_mat().clone(), g: q, c0: 0.0, sets: feasible_sets(inst) }
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.h.quad_form(x) + 2.0 * self.g.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.c0
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.h.mul_vec(x).iter().zip(&self.g).map(|(a, b)| 2.0 * (a + b)).collect()
    }

    pub fn violation(&self, x: &[f64]) -> f64 {
        max_violation(&self.sets, x)
    }

    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        project_intersection(&self.sets, y)
    }

    /// Projected gradient with Armijo backtracking from one start point.
    pub fn descend(&self, x0: &[f64]) -> Result<(Vec<f64>, f64)> {
        let mut x = self.project(x0)?;
        let mut f = self.value(&x);
        let lip = 2.0 * self.h.frobenius_norm();
        // 1/L with L ≥ the gradient's Lipschitz constant; only backtracking
        // below it, since longer steps oscillate across curved boundaries
        let t = if lip > 0.0 { 1.0 / lip } else { 1.0 };
        for _ in 0..MAX_DESCENT_ITERS {
            let grad = self.gradient(&x);
            let mut step = t;
            let (xn, fnew) = loop {
                let trial: Vec<f64> = x.iter().zip(&grad).map(|(a, b)| a - step * b).collect();
                let xn = self.project(&trial)?;
                let fnew = self.value(&xn);
                let decrease: f64 = grad.iter().zip(xn.iter().zip(&x)).map(|(gi, (a, b))| gi * (a - b)).sum();
                if fnew <= f + ARMIJO * decrease || step < 1e-16 {
                    break (xn, fnew);
                }
                step *= 0.5;
            };
            let moved = norm(&xn.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>());
            let improved = fnew < f;
            if improved {
                x = xn;
                f = fnew;
            }
            if !improved || moved <= 1e-12 * (1.0 + norm(&x)) {
                break;
            }
        }
        Ok((x, f))
    }

    /// Best of a descent from each start and from `restarts` random points of
    /// `[−1, 1]ⁿ` projected onto the feasible set. Deterministic given the seed.
    pub fn refine(&self, starts: &[Vec<f64>], opts: &RefineOptions) -> Result<(Vec<f64>, f64)> {
        let mut rng = Rng::from_seed(opts.seed);
        let n = self.dim();
        let randoms = (0..opts.restarts).map(|_| (0..n).map(|_| rng.uniform_in(-1.0, 1.0)).collect::<Vec<_>>());
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut last_err = None;
        for x0 in starts.iter().cloned().chain(randoms) {
            match self.descend(&x0) {
                Ok((x, v)) if self.violation(&x) < ORACLE_FEAS_TOL => {
                    if best.as_ref().is_none_or(|b| v < b.1) {
                        best = Some((x, v));
                    }
                }
                Ok(_) => {}
                Err(e) => last_err = Some(e),
            }
        }
        best.ok_or_else(|| last_err.unwrap_or_else(|| Error::invalid("no feasible point found")))
    }

    /// Minimum over the feasible points of a regular grid on `[lo, hi]ᵏ`.
    pub fn grid_min(&self, points_per_axis: usize, lo: f64, hi: f64) -> Option<(Vec<f64>, f64)> {
        let n = self.dim();
        let k = points_per_axis.max(2);
        let coord = |i: usize| lo + (hi - lo) * i as f64 / (k - 1) as f64;
        let total = k.checked_pow(n as u32)?;
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut x = vec![0.0; n];
        for idx in 0..total {
            let mut r = idx;
            for xi in x.iter_mut() {
                *xi = coord(r % k);
                r /= k;
            }
            if self.violation(&x) > 0.0 {
                continue;
            }
            let v = self.value(&x);
            if best.as_ref().is_none_or(|b| v < b.1) {
                best = Some((x.clone(), v));
            }
        }
        best
    }
}

/// Projected-gradient multi-start from `x0` plus random feasible points.
pub fn local_refine(inst: &Instance<f64>, x0: &[f64], opts: &RefineOptions) -> Result<(Vec<f64>, f64)> {
    let mut starts = vec![x0.to_vec()];
    if let Some(w) = inst.witness() {
        starts.push(w.to_vec());
    }
    QuadProblem::from_instance(inst).refine(&starts, opts)
}

/// Grid scan over `[−1, 1]ⁿ` (which contains every normalized feasible set),
/// polished by a local descent from the best grid point.
pub fn grid_oracle(inst: &Instance<f64>, points_per_axis: usize) -> Result<(Vec<f64>, f64)> {
    if inst.n() > 3 {
        return Err(Error::Unsupported(format!("grid oracle needs n <= 3, got {}", inst.n())));
    }
    let prob = QuadProblem::from_instance(inst);
    let (x, v) = prob
        .grid_min(points_per_axis, -1.0, 1.0)
        .ok_or_else(|| Error::invalid("no grid point is feasible; refine the grid"))?;
    let (xr, vr) = prob.descend(&x)?;
    Ok(if vr < v && prob.violation(&xr) < ORACLE_FEAS_TOL { (xr, vr) } else { (x, v) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{ball_example, linear_example};
    use crate::instances::{Ball, BallQpInstance};

    fn balls(q_mat: SymMatrix<f64>, q: Vec<f64>, balls: Vec<Ball<f64>>) -> Instance<f64> {
        BallQpInstance::new(q_mat, q, balls).unwrap().into()
    }

    #[test]
    fn convex_objective_reaches_zero() {
        let inst = balls(SymMatrix::identity(2), vec![0.0, 0.0], vec![Ball::unit(2), Ball::new(vec![0.2, 0.1], 0.8)]);
        let (x, v) = local_refine(&inst, &[0.5, 0.5], &RefineOptions::default()).unwrap();
        assert!(v.abs() < 1e-12 && norm(&x) < 1e-6, "{x:?} {v}");
    }

    #[test]
    fn trust_region_eigenvector() {
        let inst = balls(SymMatrix::diag(&[-1.0, 1.0]), vec![0.0, 0.0], vec![Ball::unit(2)]);
        let (x, v) = local_refine(&inst, &[0.1, 0.3], &RefineOptions::default()).unwrap();
        assert!((v + 1.0).abs() < 1e-9 && (x[0].abs() - 1.0).abs() < 1e-6, "{x:?} {v}");
    }

    #[test]
    fn grid_on_unit_ball() {
        let inst = balls(SymMatrix::diag(&[-1.0, -1.0]), vec![0.0, 0.0], vec![Ball::unit(2)]);
        let (_, v) = grid_oracle(&inst, 201).unwrap();
        assert!((v + 1.0).abs() < 1e-3);
        let inst4 = balls(SymMatrix::identity(4), vec![0.0; 4], vec![Ball::unit(4)]);
        assert!(grid_oracle(&inst4, 3).is_err());
    }

    #[test]
    fn catalog_values_from_both_oracles() {
        let (lin, lref) = linear_example();
        let lin = Instance::from(lin);
        let (_, v) = local_refine(&lin, &[0.0, 0.0], &RefineOptions::default()).unwrap();
        assert!((v - lref.beta).abs() < 1e-3, "{v}");
        let (ball, bref) = ball_example();
        let ball = Instance::from(ball);
        let (x, v) = grid_oracle(&ball, 401).unwrap();
        assert!((v - bref.beta).abs() < 1e-3, "{v}");
        assert!(norm(&[x[0] - bref.x_star[0], x[1] - bref.x_star[1]]) < 1e-3, "{x:?}");
    }
}
