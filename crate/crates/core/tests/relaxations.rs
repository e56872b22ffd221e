use ballqp::analysis::{evaluate, grid_oracle, local_refine, RefineOptions};
use ballqp::catalog::{ball_example, linear_example};
use ballqp::conic::SymMatrix;
use ballqp::generators::{generate_one, Family};
use ballqp::instances::{Ball, BallQpInstance, Instance, LiftedGeometry, LinearTwoInstance};
use ballqp::relaxations::{build, BuildOptions, RelaxationKind};
use ballqp::solver::SolverOptions;

fn value(inst: &Instance<f64>, kind: RelaxationKind) -> f64 {
    let r = evaluate(inst, kind, BuildOptions::default(), &SolverOptions::default()).unwrap();
    assert!(r.has_bound(), "{kind}: {:?}", r.status);
    r.r_star
}

fn kinds(inst: &Instance<f64>) -> Vec<RelaxationKind> {
    RelaxationKind::ALL.into_iter().filter(|k| k.is_linear() == matches!(inst, Instance::Linear(_))).collect()
}

fn sample_instances() -> Vec<Instance<f64>> {
    let mut out = Vec::new();
    for i in 0..6 {
        out.push(generate_one(Family::Linear, 3, 2, 5, i).unwrap());
        out.push(generate_one(Family::Martinez, 3, 2, 5, i).unwrap());
        out.push(generate_one(Family::Maxnorm, 2, 4, 5, i).unwrap());
    }
    out
}

#[test]
fn catalog_values() {
    let (lin, r) = linear_example();
    let lin = Instance::from(lin);
    assert!((value(&lin, RelaxationKind::KronLinear) - r.kron).abs() < 1e-3);
    assert!((value(&lin, RelaxationKind::BetaLinear) - r.beta).abs() < 1e-3);
    assert!((value(&lin, RelaxationKind::Beta0Linear) - r.beta).abs() < 1e-3);
    let (ball, r) = ball_example();
    let ball = Instance::from(ball);
    assert!((value(&ball, RelaxationKind::KronBalls) - r.kron).abs() < 1e-3);
    assert!((value(&ball, RelaxationKind::BetaBalls) - r.beta).abs() < 1e-3);
}

// The data exactly as printed (h₂₁ = +0.19) describe a different problem:
// its optimum is −2.7103 near (0.697, 0.717), and Beta is still exact there.
#[test]
fn printed_linear_data_has_a_different_optimum() {
    let (cat, _) = linear_example();
    let printed = LinearTwoInstance::new(cat.q_mat.clone(), cat.q.clone(), cat.g2, vec![0.19, -0.91])
        .unwrap()
        .with_witness(vec![0.0, 0.0]);
    let inst = Instance::from(printed);
    let (x, v) = grid_oracle(&inst, 401).unwrap();
    assert!((v + 2.7103).abs() < 1e-3, "{v}");
    assert!((x[0] - 0.697).abs() < 5e-3 && (x[1] - 0.717).abs() < 5e-3, "{x:?}");
    assert!((value(&inst, RelaxationKind::BetaLinear) - v).abs() < 1e-4);
    assert!((value(&inst, RelaxationKind::KronLinear) + 2.7321).abs() < 1e-3);
}

#[test]
fn rank_one_lifts_of_feasible_points_are_feasible() {
    let opts = RefineOptions::default();
    for inst in sample_instances() {
        let w0 = inst.witness().unwrap().to_vec();
        let (xr, _) = local_refine(&inst, &w0, &opts).unwrap();
        for x in [w0, xr] {
            let f = inst.objective(&x).unwrap();
            // β between ‖x‖ and every upper bound; the linear case's tightest
            // bound also makes the RLT product vanish
            let beta = match &inst {
                Instance::Linear(l) => l.g2 + l.h2.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>(),
                Instance::Balls(_) => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            }
            .min(1.0);
            for kind in kinds(&inst) {
                let p = build(&inst, kind, BuildOptions::default()).unwrap().program;
                let w = if p.objective.dim() == x.len() + 1 {
                    LiftedGeometry::homogenized_point(&x)
                } else {
                    LiftedGeometry::lifted_point(&x, beta)
                };
                let ww = SymMatrix::outer(&w);
                assert!(p.max_residual(&ww).unwrap() < 1e-9, "{kind}: {:?}", p.residuals(&ww));
                assert!((p.objective.dot(&ww) - f).abs() < 1e-12);
            }
        }
    }
}

// The interior-point solves of these degenerate programs are accurate to
// about 10⁻⁷ in value, so nested bounds are compared with that slack.
const VALUE_TOL: f64 = 1e-6;

#[test]
fn bounds_are_ordered_and_valid() {
    let opts = SolverOptions::default();
    for inst in sample_instances() {
        let w0 = inst.witness().unwrap().to_vec();
        let (_, v) = local_refine(&inst, &w0, &RefineOptions::default()).unwrap();
        let get = |k| evaluate(&inst, k, BuildOptions::default(), &opts).unwrap().r_star;
        let linear = matches!(inst, Instance::Linear(_));
        let shor = get(RelaxationKind::shor_for(linear));
        let (kron, beta) = if linear {
            (get(RelaxationKind::KronLinear), get(RelaxationKind::BetaLinear))
        } else {
            (get(RelaxationKind::KronBalls), get(RelaxationKind::BetaBalls))
        };
        assert!(kron >= shor - VALUE_TOL, "{kron} < {shor}");
        for r in [shor, kron, beta] {
            assert!(r <= v + VALUE_TOL, "bound {r} above feasible value {v}");
        }
        if linear {
            let beta0 = get(RelaxationKind::Beta0Linear);
            assert!(beta0 >= beta - VALUE_TOL, "{beta0} < {beta}");
        }
    }
}

// With a convex objective every relaxation attains the minimum; the
// β-block of Beta's W is not pinned down, so only the gap is checked.
#[test]
fn convex_objective_closes_every_gap() {
    let inst = Instance::from(
        BallQpInstance::new(SymMatrix::identity(2), vec![-0.3, 0.2], vec![Ball::unit(2), Ball::new(vec![0.4, 0.0], 0.9)])
            .unwrap()
            .with_witness(vec![0.0, 0.0]),
    );
    for kind in kinds(&inst) {
        let r = evaluate(&inst, kind, BuildOptions::default(), &SolverOptions::default()).unwrap();
        assert!(r.relative_gap.abs() < 1e-7, "{kind}: gap {}", r.relative_gap);
        assert!((r.r_star + 0.13).abs() < 1e-7);
    }
}

#[test]
fn extra_rlt_only_strengthens() {
    let (ball, _) = ball_example();
    let ball = Instance::from(ball);
    let plain = build(&ball, RelaxationKind::BetaBalls, BuildOptions::default()).unwrap().program;
    let extra = build(&ball, RelaxationKind::BetaBalls, BuildOptions { extra_rlt: true }).unwrap().program;
    assert!(extra.constraints.len() > plain.constraints.len());
    let opts = SolverOptions::default();
    let r0 = evaluate(&ball, RelaxationKind::BetaBalls, BuildOptions::default(), &opts).unwrap().r_star;
    let r1 = evaluate(&ball, RelaxationKind::BetaBalls, BuildOptions { extra_rlt: true }, &opts).unwrap().r_star;
    assert!(r1 >= r0 - 1e-8);
}

#[test]
fn family_mismatch_is_rejected() {
    let (ball, _) = ball_example();
    let (lin, _) = linear_example();
    assert!(build(&Instance::from(ball.clone()), RelaxationKind::Beta0Linear, BuildOptions::default()).is_err());
    assert!(build(&Instance::from(lin.clone()), RelaxationKind::KronBalls, BuildOptions::default()).is_err());
    assert!(RelaxationKind::resolve("beta0", &Instance::from(ball)).is_err());
    assert_eq!(RelaxationKind::resolve("kron", &Instance::from(lin)).unwrap(), RelaxationKind::KronLinear);
}
