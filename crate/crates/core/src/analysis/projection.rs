//! Euclidean projection onto intersections of simple convex sets.

use crate::error::{Error, Result};
use crate::instances::Instance;

pub const PROJECTION_TOL: f64 = 1e-12;
pub const MAX_PROJECTION_ITERS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub enum ConvexSet {
    /// `‖x − c‖ ≤ r`
    Ball { center: Vec<f64>, radius: f64 },
    /// `‖x‖ ≤ g + hᵀx`
    Lorentz { g: f64, h: Vec<f64> },
    /// `‖(x₁..x_{k−1})‖ ≤ x_k`
    Soc,
    /// `aᵀx ≤ b`
    HalfSpace { a: Vec<f64>, b: f64 },
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ConvexSet {
    pub fn violation(&self, x: &[f64]) -> f64 {
        let v = match self {
            ConvexSet::Ball { center, radius } => {
                let d: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
                norm(&d) - radius
            }
            ConvexSet::Lorentz { g, h } => norm(x) - g - dot(h, x),
            ConvexSet::Soc => {
                let (t, rest) = x.split_last().expect("nonempty point");
                norm(rest) - t
            }
            ConvexSet::HalfSpace { a, b } => dot(a, x) - b,
        };
        v.max(0.0)
    }

    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        if self.violation(y) == 0.0 {
            return y.to_vec();
        }
        match self {
            ConvexSet::Ball { center, radius } => {
                let d: Vec<f64> = y.iter().zip(center).map(|(a, c)| a - c).collect();
                let s = radius / norm(&d);
                center.iter().zip(&d).map(|(c, di)| c + s * di).collect()
            }
            ConvexSet::Lorentz { g, h } => project_lorentz(*g, h, y),
            ConvexSet::Soc => {
                let (&t, rest) = y.split_last().expect("nonempty point");
                let nr = norm(rest);
                if nr <= -t {
                    return vec![0.0; y.len()];
                }
                let a = (t + nr) / 2.0;
                let mut out: Vec<f64> = rest.iter().map(|v| v * a / nr).collect();
                out.push(a);
                out
            }
            ConvexSet::HalfSpace { a, b } => {
                let s = (dot(a, y) - b) / dot(a, a);
                y.iter().zip(a).map(|(yi, ai)| yi - s * ai).collect()
            }
        }
    }
}

/// Projection onto `{‖x‖ − hᵀx ≤ g}` by bisection on the multiplier: the
/// proximal point of `μ(‖·‖ − hᵀ·)` at `y` is a shrinkage of `y + μh`, and
/// the constraint value along that path is nonincreasing in `μ`. The
/// returned point is on the feasible side of the bracket.
fn project_lorentz(g: f64, h: &[f64], y: &[f64]) -> Vec<f64> {
    let prox = |mu: f64| -> Vec<f64> {
        let z: Vec<f64> = y.iter().zip(h).map(|(a, b)| a + mu * b).collect();
        let nz = norm(&z);
        let s = if nz > mu { 1.0 - mu / nz } else { 0.0 };
        z.into_iter().map(|v| s * v).collect()
    };
    let f = |x: &[f64]| norm(x) - dot(h, x) - g;
    let mut hi = 1.0;
    while f(&prox(hi)) > 0.0 && hi < 1e12 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(&prox(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    prox(hi)
}

/// The convex pieces of an instance's feasible set.
pub fn feasible_sets(inst: &Instance<f64>) -> Vec<ConvexSet> {
    match inst {
        Instance::Balls(b) => {
            b.balls.iter().map(|ball| ConvexSet::Ball { center: ball.center.clone(), radius: ball.radius }).collect()
        }
        Instance::Linear(l) => vec![
            ConvexSet::Ball { center: vec![0.0; l.n()], radius: 1.0 },
            ConvexSet::Lorentz { g: l.g2, h: l.h2.clone() },
        ],
    }
}

pub fn max_violation(sets: &[ConvexSet], x: &[f64]) -> f64 {
    sets.iter().map(|s| s.violation(x)).fold(0.0, f64::max)
}

/// Dykstra's alternating projection onto `∩ sets`. Stops once a full sweep
/// moves the iterate by at most `PROJECTION_TOL·(1 + ‖x‖)` and the point
/// violates no set by more than `PROJECTION_TOL`.
pub fn project_intersection(sets: &[ConvexSet], y: &[f64]) -> Result<Vec<f64>> {
    if max_violation(sets, y) == 0.0 {
        return Ok(y.to_vec());
    }
    if sets.len() == 1 {
        return Ok(sets[0].project(y));
    }
    let n = y.len();
    let mut x = y.to_vec();
    let mut incr = vec![vec![0.0; n]; sets.len()];
    let mut last_change = f64::INFINITY;
    for _ in 0..MAX_PROJECTION_ITERS {
        let start = x.clone();
        for (set, p) in sets.iter().zip(incr.iter_mut()) {
            let shifted: Vec<f64> = x.iter().zip(p.iter()).map(|(a, b)| a + b).collect();
            let proj = set.project(&shifted);
            for i in 0..n {
                p[i] = shifted[i] - proj[i];
            }
            x = proj;
        }
        let change = norm(&x.iter().zip(&start).map(|(a, b)| a - b).collect::<Vec<_>>());
        last_change = change;
        if change <= PROJECTION_TOL * (1.0 + norm(&x)) && max_violation(sets, &x) <= PROJECTION_TOL {
            return Ok(x);
        }
    }
    Err(Error::Projection { iterations: MAX_PROJECTION_ITERS, residual: max_violation(sets, &x).max(last_change) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_set_projections() {
        let b = ConvexSet::Ball { center: vec![1.0, 0.0], radius: 1.0 };
        assert_eq!(b.project(&[3.0, 0.0]), vec![2.0, 0.0]);
        let s = ConvexSet::Soc;
        assert_eq!(s.project(&[1.0, 0.0, 0.0]), vec![0.5, 0.0, 0.5]);
        assert_eq!(s.project(&[1.0, 0.0, -2.0]), vec![0.0, 0.0, 0.0]);
        let hs = ConvexSet::HalfSpace { a: vec![1.0, 1.0], b: 0.0 };
        assert_eq!(hs.project(&[1.0, 1.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn lorentz_projection_is_optimal() {
        // ‖x‖ ≤ 0.5 + 0.3x₁: check the optimality condition y − x ∈ normal cone
        let set = ConvexSet::Lorentz { g: 0.5, h: vec![0.3, 0.0] };
        let y = [2.0, 1.5];
        let x = set.project(&y);
        assert!(set.violation(&x) < 1e-12);
        let f = |p: &[f64]| norm(p) - 0.3 * p[0] - 0.5;
        assert!(f(&x).abs() < 1e-10);
        let grad = [x[0] / norm(&x) - 0.3, x[1] / norm(&x)];
        let r = [y[0] - x[0], y[1] - x[1]];
        let cross = r[0] * grad[1] - r[1] * grad[0];
        assert!(cross.abs() < 1e-8 && r[0] * grad[0] + r[1] * grad[1] > 0.0);
    }

    #[test]
    fn dykstra_finds_the_lens_point() {
        let sets = vec![
            ConvexSet::Ball { center: vec![-0.5, 0.0], radius: 1.0 },
            ConvexSet::Ball { center: vec![0.5, 0.0], radius: 1.0 },
        ];
        let x = project_intersection(&sets, &[0.0, 3.0]).unwrap();
        let top = (0.75f64).sqrt();
        assert!((x[0]).abs() < 1e-9 && (x[1] - top).abs() < 1e-9, "{x:?}");
    }

    #[test]
    fn empty_intersection_errors() {
        let sets = vec![
            ConvexSet::Ball { center: vec![-2.0, 0.0], radius: 1.0 },
            ConvexSet::Ball { center: vec![2.0, 0.0], radius: 1.0 },
        ];
        assert!(project_intersection(&sets, &[0.0, 0.0]).is_err());
    }
}
