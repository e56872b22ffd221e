//! Seeded random instance families.
//!
//! Variates are drawn in a fixed order so that any implementation of the
//! streams in [`crate::rng`] reproduces the instances exactly:
//! - linear: `x⁰` (in-ball), `h₂` (n normals), `u`, `Q` upper triangle
//!   row by row, `q` (n normals);
//! - martinez: `Q` upper triangle, `q`, then `c₂` (in-ball, redrawn while
//!   within `10⁻⁶` of the `m = 1` optimum), then the radius factor;
//! - maxnorm: `p` (in-ball, scaled by 4), then for each extra ball `cᵢ`
//!   (in-ball) followed by its radius increment.

mod trs;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{evaluate, RelaxationReport};
use crate::conic::SymMatrix;
use crate::error::{Error, Result};
use crate::instances::{Ball, BallQpInstance, Instance, LinearTwoInstance, Provenance};
use crate::relaxations::{BuildOptions, RelaxationKind};
use crate::rng::{stream_seed, Rng};
use crate::solver::SolverOptions;

pub use trs::trust_region;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Linear,
    Martinez,
    Maxnorm,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Linear => "linear",
            Family::Martinez => "martinez",
            Family::Maxnorm => "maxnorm",
        }
    }

    pub fn check_dims(self, n: usize, m: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        match self {
            Family::Linear | Family::Martinez if m != 2 => {
                Err(Error::invalid(format!("the {self} family has m = 2, got {m}")))
            }
            Family::Maxnorm if m < 2 => Err(Error::invalid("maxnorm needs m >= 2")),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Family::Linear),
            "martinez" => Ok(Family::Martinez),
            "maxnorm" => Ok(Family::Maxnorm),
            other => Err(Error::invalid(format!("unknown family '{other}' (expected linear, martinez or maxnorm)"))),
        }
    }
}

fn gaussian_sym(n: usize, rng: &mut Rng) -> SymMatrix<f64> {
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            m.set(i, j, rng.normal());
        }
    }
    m
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `‖x‖ ≤ min(1, g₂ + h₂ᵀx)` with a random strictly interior point `x⁰`:
/// `g₂ = u − h₂ᵀx⁰ + ‖x⁰‖`, so the second constraint holds at `x⁰` with
/// slack exactly `u ~ U(0, 1)`.
pub fn gen_linear(n: usize, rng: &mut Rng) -> LinearTwoInstance<f64> {
    let x0 = rng.in_ball(n);
    let h2 = rng.normals(n);
    let u = rng.uniform();
    let g2 = u - h2.iter().zip(&x0).map(|(a, b)| a * b).sum::<f64>() + norm(&x0);
    let q_mat = gaussian_sym(n, rng);
    let q = rng.normals(n);
    LinearTwoInstance::new(q_mat, q, g2, h2).expect("consistent dimensions").with_witness(x0)
}

const MARTINEZ_RETRIES: usize = 100;

/// A trust-region instance whose optimum is cut off by a second ball.
pub fn gen_martinez(n: usize, rng: &mut Rng) -> Result<BallQpInstance<f64>> {
    let q_mat = gaussian_sym(n, rng);
    let q = rng.normals(n);
    let x_star = trust_region(&q_mat, &q);
    for _ in 0..MARTINEZ_RETRIES {
        let c2 = rng.in_ball(n);
        let d = norm(&x_star.iter().zip(&c2).map(|(a, b)| a - b).collect::<Vec<_>>());
        if d < 1e-6 {
            continue;
        }
        let rho2 = rng.uniform_in(0.5, 0.95) * d;
        // 0 if it lies in ball 2, else c₂ itself (which lies in the unit ball)
        let witness = if norm(&c2) <= rho2 { vec![0.0; n] } else { c2.clone() };
        let inst = BallQpInstance::new(q_mat, q, vec![Ball::unit(n), Ball::new(c2, rho2)])?.with_witness(witness);
        return Ok(inst);
    }
    Err(Error::Degenerate("could not place the second ball away from the trust-region optimum".into()))
}

/// Farthest point from `p` in an intersection of balls containing 0.
pub fn gen_maxnorm(n: usize, m: usize, rng: &mut Rng) -> Result<BallQpInstance<f64>> {
    if m < 2 {
        return Err(Error::invalid("maxnorm needs m >= 2"));
    }
    let p: Vec<f64> = rng.in_ball(n).into_iter().map(|v| 4.0 * v).collect();
    let mut balls = vec![Ball::unit(n)];
    for _ in 1..m {
        let c = rng.in_ball(n);
        let rho = norm(&c) + rng.uniform_in(0.0, 1.5);
        balls.push(Ball::new(c, rho));
    }
    let q_mat = SymMatrix::identity(n).scaled(-1.0);
    Ok(BallQpInstance::new(q_mat, p, balls)?.with_witness(vec![0.0; n]))
}

/// Instance `index` of a family, from its own stream of the master seed.
pub fn generate_one(family: Family, n: usize, m: usize, master_seed: u64, index: u64) -> Result<Instance<f64>> {
    family.check_dims(n, m)?;
    let seed = stream_seed(master_seed, family.as_str(), n, m, index);
    let mut rng = Rng::from_seed(seed);
    let prov = Provenance::new(family.as_str(), seed);
    Ok(match family {
        Family::Linear => gen_linear(n, &mut rng).with_provenance(prov).into(),
        Family::Martinez => gen_martinez(n, &mut rng)?.with_provenance(prov).into(),
        Family::Maxnorm => gen_maxnorm(n, m, &mut rng)?.with_provenance(prov).into(),
    })
}

pub fn generate(family: Family, n: usize, m: usize, count: usize, master_seed: u64) -> Result<Vec<Instance<f64>>> {
    (0..count as u64).map(|i| generate_one(family, n, m, master_seed, i)).collect()
}

/// Instances Shor does not solve, each with its Shor report (`s*` is its
/// `r_star`).
#[derive(Debug, Default)]
pub struct Filtered {
    pub kept: Vec<(Instance<f64>, RelaxationReport)>,
    pub solved_by_shor: usize,
    pub solver_failures: usize,
}

pub fn filter_shor_unsolved(instances: Vec<Instance<f64>>, opts: &SolverOptions) -> Filtered {
    let mut out = Filtered::default();
    for inst in instances {
        let kind = RelaxationKind::shor_for(matches!(inst, Instance::Linear(_)));
        match evaluate(&inst, kind, BuildOptions::default(), opts) {
            Ok(r) if r.has_bound() && r.v_feasible.is_finite() => {
                if r.solved {
                    out.solved_by_shor += 1;
                } else {
                    out.kept.push((inst, r));
                }
            }
            Ok(r) => {
                log::warn!("{}: Shor returned {:?}; dropping the instance", r.instance_id, r.status);
                out.solver_failures += 1;
            }
            Err(e) => {
                log::warn!("Shor failed: {e}; dropping the instance");
                out.solver_failures += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_witness_is_strictly_interior() {
        let mut rng = Rng::from_seed(11);
        for n in [1, 2, 5] {
            for _ in 0..200 {
                let inst = gen_linear(n, &mut rng);
                let x0 = inst.witness.clone().unwrap();
                let nx = norm(&x0);
                let rhs = inst.g2 + inst.h2.iter().zip(&x0).map(|(a, b)| a * b).sum::<f64>();
                assert!(nx <= 1.0 && nx < rhs);
            }
        }
    }

    #[test]
    fn linear_margin_is_uniform() {
        let mut rng = Rng::from_seed(2024);
        let margins: Vec<f64> = (0..1000)
            .map(|_| {
                let inst = gen_linear(4, &mut rng);
                let x0 = inst.witness.clone().unwrap();
                inst.g2 + inst.h2.iter().zip(&x0).map(|(a, b)| a * b).sum::<f64>() - norm(&x0)
            })
            .collect();
        let mean = margins.iter().sum::<f64>() / 1000.0;
        assert!((mean - 0.5).abs() < 0.05, "{mean}");
    }

    #[test]
    fn martinez_cuts_off_the_trust_region_optimum() {
        for i in 0..200 {
            let inst = generate_one(Family::Martinez, 1 + i as usize % 4, 2, 99, i).unwrap();
            let Instance::Balls(b) = inst else { unreachable!() };
            let x_star = trust_region(&b.q_mat, &b.q);
            let c2 = &b.balls[1];
            let d = norm(&x_star.iter().zip(&c2.center).map(|(a, c)| a - c).collect::<Vec<_>>());
            assert!(d - c2.radius >= 0.05 * d - 1e-15);
            assert_eq!(b.feasibility_violation(b.witness.as_ref().unwrap()).unwrap(), 0.0);
        }
    }

    #[test]
    fn maxnorm_contains_origin_and_objective_identity() {
        let mut rng = Rng::from_seed(8);
        for _ in 0..100 {
            let inst = gen_maxnorm(3, 5, &mut rng).unwrap();
            assert_eq!(inst.feasibility_violation(&[0.0; 3]).unwrap(), 0.0);
            let x = rng.in_ball(3);
            let p = &inst.q;
            let dist2: f64 = x.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum();
            let expected = -dist2 + p.iter().map(|v| v * v).sum::<f64>();
            assert!((inst.objective(&x).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn generation_is_reproducible() {
        for fam in [Family::Linear, Family::Martinez, Family::Maxnorm] {
            let m = if fam == Family::Maxnorm { 4 } else { 2 };
            let a = generate(fam, 3, m, 5, 1234).unwrap();
            let b = generate(fam, 3, m, 5, 1234).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x.to_json(), y.to_json());
            }
        }
        assert!(generate_one(Family::Linear, 2, 3, 0, 0).is_err());
        assert!("lin".parse::<Family>().is_err());
    }

    #[test]
    fn shor_filter_drops_convex_and_single_ball_instances() {
        let opts = SolverOptions::default();
        let convex = BallQpInstance::new(SymMatrix::identity(2), vec![0.3, -0.2], vec![Ball::unit(2)]).unwrap();
        let mut rng = Rng::from_seed(3);
        let trs = BallQpInstance::new(gaussian_sym(3, &mut rng), rng.normals(3), vec![Ball::unit(3)]).unwrap();
        let out = filter_shor_unsolved(vec![convex.into(), trs.into()], &opts);
        assert!(out.kept.is_empty());
        assert_eq!(out.solved_by_shor, 2);
    }
}
