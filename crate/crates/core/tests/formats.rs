use ballqp::catalog::{ball_example, linear_example};
use ballqp::conic::{ConicProgram, SymMatrix};
use ballqp::instances::Instance;
use ballqp::relaxations::{build, BuildOptions, RelaxationKind};
use ballqp::solver::cbf::{export_cbf, CbfModel};
use ballqp::solver::sdpa::{export_sdpa, SdpaModel};
use ballqp::solver::{solve, solve_standard, Backend, SolverOptions, StandardForm};

fn programs() -> Vec<(String, ConicProgram<f64>)> {
    let lin = Instance::from(linear_example().0);
    let ball = Instance::from(ball_example().0);
    let mut out = Vec::new();
    for kind in RelaxationKind::ALL {
        let inst = if kind.is_linear() { &lin } else { &ball };
        let opts = BuildOptions::default();
        out.push((kind.to_string(), build(inst, kind, opts).unwrap().program));
    }
    out
}

/// Set `BALLQP_BLESS=1` to rewrite the golden files from the current output.
fn check_golden(name: &str, text: &str) {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    if std::env::var_os("BALLQP_BLESS").is_some() {
        std::fs::write(&path, text).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    assert!(expected == text, "{name} differs from its golden file");
}

fn resolve(sf: &StandardForm, backend: Backend) -> f64 {
    let raw = solve_standard(sf, &SolverOptions::default().with_backend(backend)).unwrap();
    assert!(raw.status.is_usable(), "{backend}: {:?}", raw.status);
    sf.objective(&raw.x)
}

#[test]
fn text_round_trips_are_byte_identical() {
    for (name, p) in programs() {
        let cbf = export_cbf(&p).unwrap();
        assert_eq!(CbfModel::parse(&cbf).unwrap().to_text(), cbf, "{name}");
        let sdpa = export_sdpa(&p).unwrap();
        assert_eq!(SdpaModel::parse(&sdpa).unwrap().to_text(), sdpa, "{name}");
    }
}

#[test]
fn golden_files_are_stable() {
    let trivial = ConicProgram::new(SymMatrix::<f64>::identity(1));
    check_golden("trivial.cbf", &export_cbf(&trivial).unwrap());
    check_golden("trivial.dat-s", &export_sdpa(&trivial).unwrap());
    let beta = build(&Instance::from(linear_example().0), RelaxationKind::BetaLinear, BuildOptions::default()).unwrap();
    check_golden("linear_example_beta.cbf", &export_cbf(&beta.program).unwrap());
    check_golden("linear_example_beta.dat-s", &export_sdpa(&beta.program).unwrap());
}

#[test]
fn imported_programs_solve_to_the_same_value() {
    for (name, p) in programs() {
        let direct = solve(&p, &SolverOptions::default().with_backend(Backend::Clarabel)).unwrap();
        assert!(direct.status.is_usable());
        let cbf = CbfModel::parse(&export_cbf(&p).unwrap()).unwrap().to_standard_form().unwrap();
        let sdpa = SdpaModel::parse(&export_sdpa(&p).unwrap()).unwrap().to_standard_form().unwrap();
        for (fmt, sf) in [("cbf", &cbf), ("sdpa", &sdpa)] {
            for backend in [Backend::Clarabel, Backend::Admm] {
                let v = resolve(sf, backend);
                let rel = (v - direct.obj_value).abs() / direct.obj_value.abs().max(1.0);
                assert!(rel < 1e-5, "{name} via {fmt}/{backend}: {v} vs {}", direct.obj_value);
            }
        }
    }
}
