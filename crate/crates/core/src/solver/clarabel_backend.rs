use std::time::Instant;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};

use crate::conic::SolveStatus;
use crate::solver::standard::{StandardForm, StdCone};
use crate::solver::{RawSolution, SolverOptions};

fn csc(sf: &StandardForm) -> CscMatrix<f64> {
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); sf.num_vars];
    for (i, row) in sf.rows.iter().enumerate() {
        for &(j, v) in row {
            cols[j].push((i, v));
        }
    }
    let mut colptr = Vec::with_capacity(sf.num_vars + 1);
    let (mut rowval, mut nzval) = (Vec::new(), Vec::new());
    colptr.push(0);
    for col in cols {
        for (i, v) in col {
            rowval.push(i);
            nzval.push(v);
        }
        colptr.push(rowval.len());
    }
    CscMatrix::new(sf.rows.len(), sf.num_vars, colptr, rowval, nzval)
}

fn cone(c: StdCone) -> SupportedConeT<f64> {
    match c {
        StdCone::Zero(k) => SupportedConeT::ZeroConeT(k),
        StdCone::Nonneg(k) => SupportedConeT::NonnegativeConeT(k),
        StdCone::Soc(k) => SupportedConeT::SecondOrderConeT(k),
        StdCone::Psd(p) => SupportedConeT::PSDTriangleConeT(p),
    }
}

fn status(s: SolverStatus) -> SolveStatus {
    match s {
        SolverStatus::Solved => SolveStatus::Optimal,
        SolverStatus::AlmostSolved => SolveStatus::NearOptimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => SolveStatus::Infeasible,
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => SolveStatus::Unbounded,
        _ => SolveStatus::NumericalFailure,
    }
}

pub(crate) fn solve(sf: &StandardForm, opts: &SolverOptions) -> RawSolution {
    let start = Instant::now();
    let p = CscMatrix::zeros((sf.num_vars, sf.num_vars));
    let a = csc(sf);
    let cones: Vec<_> = sf.cones.iter().map(|&c| cone(c)).collect();
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .tol_gap_abs(opts.rel_tol)
        .tol_gap_rel(opts.rel_tol)
        .tol_feas(opts.rel_tol)
        .max_iter(opts.max_iter)
        .time_limit(opts.time_limit_s)
        .max_threads(opts.threads)
        .presolve_enable(false)
        .build()
        .expect("valid clarabel settings");
    let mut solver = match DefaultSolver::new(&p, &sf.c, &a, &sf.b, &cones, settings) {
        Ok(s) => s,
        Err(e) => {
            log::warn!("clarabel rejected the problem: {e}");
            return RawSolution::failed(sf.num_vars, SolveStatus::NumericalFailure, start.elapsed().as_secs_f64());
        }
    };
    solver.solve();
    let sol = &solver.solution;
    let st = status(sol.status);
    RawSolution {
        x: sol.x.clone(),
        status: st,
        iterations: sol.iterations,
        solve_time_s: start.elapsed().as_secs_f64(),
        duality_gap: st.is_usable().then(|| (sol.obj_val - sol.obj_val_dual).abs()),
    }
}
