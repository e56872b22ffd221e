//! Solving conic programs and exchanging them with external solvers.
//!
//! Backends:
//! - `clarabel`: Clarabel interior point, SOC and rotated cones passed natively;
//! - `clarabel-psd`: Clarabel with every SOC/RSOC row lifted to a PSD block
//!   through the arrow and Two maps;
//! - `admm`: the in-crate operator-splitting solver, much less accurate but
//!   independent of Clarabel.
//!
//! The default backend is read from `BALLQP_BACKEND`.

mod admm;
pub mod cbf;
mod clarabel_backend;
pub mod sdpa;
mod standard;

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;

use crate::conic::{smat, svec_len, ConicProgram, ConicSolution, SolveStatus, SolverStats, SymMatrix};
use crate::error::{Error, Result};
use crate::scalar::RealScalar;

pub use standard::{compile, ConeLowering, SparseRow, StandardForm, StdCone};

pub const BACKEND_ENV: &str = "BALLQP_BACKEND";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    Clarabel,
    ClarabelPsd,
    Admm,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Clarabel => "clarabel",
            Backend::ClarabelPsd => "clarabel-psd",
            Backend::Admm => "admm",
        }
    }

    pub fn lowering(self) -> ConeLowering {
        match self {
            Backend::Clarabel | Backend::Admm => ConeLowering::Native,
            Backend::ClarabelPsd => ConeLowering::LiftedToPsd,
        }
    }

    /// `BALLQP_BACKEND` if set and valid, otherwise Clarabel.
    pub fn from_env() -> Self {
        match std::env::var(BACKEND_ENV) {
            Ok(s) if !s.is_empty() => s.parse().unwrap_or_else(|e| {
                log::warn!("{e}; falling back to clarabel");
                Backend::Clarabel
            }),
            _ => Backend::Clarabel,
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clarabel" => Ok(Backend::Clarabel),
            "clarabel-psd" => Ok(Backend::ClarabelPsd),
            "admm" => Ok(Backend::Admm),
            other => Err(Error::invalid(format!("unknown backend '{other}' (expected clarabel, clarabel-psd or admm)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub rel_tol: f64,
    pub max_iter: u32,
    pub time_limit_s: f64,
    pub backend: Backend,
    pub threads: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { rel_tol: 1e-9, max_iter: 500, time_limit_s: 60.0, backend: Backend::from_env(), threads: 1 }
    }
}

impl SolverOptions {
    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        if backend == Backend::Admm && self.max_iter < 20_000 {
            self.max_iter = 20_000;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::invalid("rel_tol must be positive"));
        }
        if !(self.time_limit_s > 0.0) {
            return Err(Error::invalid("time limit must be positive"));
        }
        Ok(())
    }
}

/// Backend output in the standard form's variable space.
#[derive(Clone, Debug)]
pub struct RawSolution {
    pub x: Vec<f64>,
    pub status: SolveStatus,
    pub iterations: u32,
    pub solve_time_s: f64,
    pub duality_gap: Option<f64>,
}

impl RawSolution {
    fn failed(n: usize, status: SolveStatus, solve_time_s: f64) -> Self {
        RawSolution { x: vec![f64::NAN; n], status, iterations: 0, solve_time_s, duality_gap: None }
    }
}

/// Solves a standard-form problem; backend panics become numerical failures.
pub fn solve_standard(sf: &StandardForm, opts: &SolverOptions) -> Result<RawSolution> {
    opts.validate()?;
    sf.validate()?;
    let run = || match opts.backend {
        Backend::Clarabel | Backend::ClarabelPsd => clarabel_backend::solve(sf, opts),
        Backend::Admm => admm::solve(sf, opts),
    };
    Ok(catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| {
        log::warn!("{} backend panicked; reporting a numerical failure", opts.backend);
        RawSolution::failed(sf.num_vars, SolveStatus::NumericalFailure, 0.0)
    }))
}

/// `min objective • W` over the program's feasible set.
pub fn solve<T: RealScalar>(program: &ConicProgram<T>, opts: &SolverOptions) -> Result<ConicSolution> {
    let sf = compile(program, opts.backend.lowering())?;
    let raw = solve_standard(&sf, opts)?;
    let stats = SolverStats {
        backend: opts.backend.name().to_string(),
        iterations: raw.iterations,
        solve_time_s: raw.solve_time_s,
        lifted_cones: opts.backend.lowering() == ConeLowering::LiftedToPsd,
        duality_gap: raw.duality_gap,
    };
    let d = program.var_dim;
    if !raw.status.is_usable() || raw.x.iter().any(|v| !v.is_finite()) {
        let status = if raw.status.is_usable() { SolveStatus::NumericalFailure } else { raw.status };
        return Ok(ConicSolution::failed(d, status, stats));
    }
    let w = smat(&raw.x[..svec_len(d)])?;
    let objective: SymMatrix<f64> = program.objective.map(|v| v.to_f64_lossy());
    let obj_value = objective.dot(&w);
    Ok(ConicSolution { w, obj_value, status: raw.status, stats })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_program_all_backends() {
        let p = ConicProgram::new(SymMatrix::<f64>::identity(1));
        for backend in [Backend::Clarabel, Backend::ClarabelPsd, Backend::Admm] {
            let sol = solve(&p, &SolverOptions::default().with_backend(backend)).unwrap();
            assert!(sol.status.is_usable(), "{backend}: {:?}", sol.status);
            assert!((sol.obj_value - 1.0).abs() < 1e-6, "{backend}: {}", sol.obj_value);
        }
    }

    #[test]
    fn backend_names_roundtrip() {
        for b in [Backend::Clarabel, Backend::ClarabelPsd, Backend::Admm] {
            assert_eq!(b.name().parse::<Backend>().unwrap(), b);
        }
        assert!("mosek".parse::<Backend>().is_err());
    }

    #[test]
    fn options_validated() {
        let mut o = SolverOptions::default();
        o.rel_tol = 0.0;
        assert!(o.validate().is_err());
    }
}
