use ballqp::analysis::evaluate;
use ballqp::catalog::linear_example;
use ballqp::conic::SymMatrix;
use ballqp::instances::{Instance, LinearTwoInstance};
use ballqp::relaxations::{BuildOptions, RelaxationKind};
use ballqp::solver::SolverOptions;
use ballqp::verify::{
    check_rlt_activity, exactness_gap, verify_counterexample, verify_rlt_conjecture, verify_theorem_exactness,
    PRINTED_V_STAR,
};

fn check<'a>(report: &'a ballqp::verify::CounterexampleReport, name: &str) -> &'a ballqp::verify::Check {
    report.checks.iter().find(|c| c.name == name).unwrap_or_else(|| panic!("no check named {name}"))
}

#[test]
fn counterexample_construction_identities() {
    let r = verify_counterexample(&SolverOptions::default()).unwrap();
    assert!(check(&r, "N̂ spans Null(Ŵ)").passed);
    assert!(check(&r, "rank(Ŵ) = 3").passed);
    // the lifted value of the feasible point found is never below the bound
    assert!(r.v_star >= r.r_star - 1e-7);
    assert!(r.printed.v_star >= r.printed.r_star - 1e-7);
}

// With the matrix exactly as printed the relaxation value is 1 to about
// 2·10⁻⁴ and the best feasible value found matches the reported 1.0002.
#[test]
fn printed_objective_reproduces_the_reported_values() {
    let r = verify_counterexample(&SolverOptions::default()).unwrap();
    assert!((r.printed.r_star - 1.0).abs() < 1e-3, "{}", r.printed.r_star);
    assert!(r.printed.v_star >= 1.0 + 1e-4, "{}", r.printed.v_star);
    assert!((r.printed.v_star - PRINTED_V_STAR).abs() <= 5e-4, "{}", r.printed.v_star);
}

#[test]
fn rlt_row_is_slack_for_the_beta_objective() {
    let r = verify_counterexample(&SolverOptions::default()).unwrap();
    assert!(r.rlt_activity > 1e-3, "{}", r.rlt_activity);
    assert!(r.printed.rlt_activity > 1e-3, "{}", r.printed.rlt_activity);
}

#[test]
fn rlt_row_is_active_on_the_linear_example() {
    let inst = Instance::from(linear_example().0);
    let rep = evaluate(&inst, RelaxationKind::BetaLinear, BuildOptions::default(), &SolverOptions::default()).unwrap();
    assert!(rep.rlt_activity.unwrap().abs() < 1e-6, "{:?}", rep.rlt_activity);
    let s = check_rlt_activity(&[rep]);
    assert_eq!(s.instances, 1);
    assert!(s.flagged.is_empty());
}

#[test]
fn conjecture_batch_has_no_unresolved_instances() {
    let s = verify_rlt_conjecture(30, &[2, 3], 11, &SolverOptions::default()).unwrap();
    assert_eq!(s.instances, 60);
    assert!(s.unresolved.is_empty(), "{:?}", s.unresolved);
}

#[test]
fn beta0_is_exact_on_reference_and_convex_instances() {
    let opts = SolverOptions::default();
    let (lin, r) = linear_example();
    let inst = Instance::from(lin.clone());
    let (gap, _) = exactness_gap(&inst, &opts).unwrap();
    assert!(gap < 1e-4, "{gap}");
    let v = evaluate(&inst, RelaxationKind::Beta0Linear, BuildOptions::default(), &opts).unwrap().r_star;
    assert!((v - r.beta).abs() < 1e-3);
    let convex = LinearTwoInstance::new(SymMatrix::diag(&[2.0, 0.5]), vec![-0.4, 0.1], lin.g2, lin.h2.clone())
        .unwrap()
        .with_witness(vec![0.0, 0.0]);
    let (gap, _) = exactness_gap(&Instance::from(convex), &opts).unwrap();
    assert!(gap < 1e-6, "{gap}");
}

#[test]
fn exactness_rate_does_not_drop_with_precision() {
    let loose = SolverOptions { rel_tol: 1e-7, ..SolverOptions::default() };
    let tight = SolverOptions { rel_tol: 1e-9, ..SolverOptions::default() };
    let a = verify_theorem_exactness(25, &[2, 4], 3, &loose).unwrap();
    let b = verify_theorem_exactness(25, &[2, 4], 3, &tight).unwrap();
    for (ca, cb) in a.cells.iter().zip(&b.cells) {
        assert!(cb.exact >= ca.exact, "n = {}: {} at 1e-9 vs {} at 1e-7", ca.n, cb.exact, ca.exact);
    }
    assert!(b.passed(), "{:?}", b.failures);
}
