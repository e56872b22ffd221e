//! Quality metrics for relaxation solutions, extraction of feasible points,
//! and feasible-value oracles.

pub mod oracle;
pub mod projection;

use std::time::Instant;

use serde::Serialize;

use crate::conic::{SolveStatus, SymMatrix};
use crate::error::{Error, Result};
use crate::instances::Instance;
use crate::relaxations::{build, BuildOptions, RelaxationKind};
use crate::solver::{solve, SolverOptions};

pub use oracle::{grid_oracle, local_refine, QuadProblem, RefineOptions, ORACLE_FEAS_TOL};
pub use projection::{feasible_sets, project_intersection, ConvexSet};

pub const GAP_TOL: f64 = 1e-4;
pub const EIG_RATIO_TOL: f64 = 1e4;
/// Raw embedded points violating the constraints by more than this are projected.
pub const EXTRACT_FEAS_TOL: f64 = 1e-8;
/// Largest projection distance still allowed for a "solved" verdict.
pub const MAX_SOLVED_PROJECTION: f64 = 1e-6;
const SHOR_EXACT_TOL: f64 = 1e-8;
/// Percentage points of closure overshoot worth a warning.
const CLOSURE_WARN: f64 = 1.0;

/// `(v − r*) / max{1, ½|v + r*|}`.
pub fn relative_gap(v: f64, r_star: f64) -> f64 {
    (v - r_star) / 1f64.max(0.5 * (v + r_star).abs())
}

/// `λ₁/λ₂`, with `+∞` when `λ₂` is below `10⁻¹²·max(λ₁, 1)`.
pub fn eigenvalue_ratio(w: &SymMatrix<f64>) -> f64 {
    let ev = w.eigenvalues_desc();
    let l1 = ev[0];
    let floor = 1e-12 * l1.max(1.0);
    match ev.get(1) {
        Some(&l2) if l2 >= floor => l1 / l2,
        _ => f64::INFINITY,
    }
}

pub fn is_solved(relative_gap: f64, eig_ratio: f64) -> bool {
    relative_gap < GAP_TOL && eig_ratio > EIG_RATIO_TOL
}

/// Percentage of the interval `[s*, v]` closed by the bound `r`, or `None`
/// when Shor is already exact (`v − s* < 10⁻⁸`). Values are clamped to
/// `[0, 100]`. Exact bounds overshoot slightly through solver error; that is
/// logged at debug level, and only overshoots beyond one percentage point
/// are warned about.
pub fn gap_closure(s_star: f64, r_relax: f64, v_best: f64) -> Option<f64> {
    let width = v_best - s_star;
    if width < SHOR_EXACT_TOL {
        return None;
    }
    let raw = 100.0 * (r_relax - s_star) / width;
    if raw < -CLOSURE_WARN || raw > 100.0 + CLOSURE_WARN {
        log::warn!("gap closure {raw:.6}% outside [0, 100]; clamping");
    } else if !(0.0..=100.0).contains(&raw) {
        log::debug!("gap closure {raw:.6}% clamped to [0, 100]");
    }
    Some(raw.clamp(0.0, 100.0))
}

/// A point recovered from the first column of a relaxation solution.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    /// The embedded point `W[1..=n, 0] / W₀₀`.
    pub raw: Vec<f64>,
    /// `raw`, or its projection onto the feasible set if it violated it.
    pub x: Vec<f64>,
    pub projection_distance: f64,
}

/// Extracts `x` from `W` (ordered `(1, x, …)`), projecting it onto the
/// feasible set when the violation exceeds `10⁻⁸`.
pub fn extract_candidate(w: &SymMatrix<f64>, inst: &Instance<f64>) -> Result<Candidate> {
    let n = inst.n();
    if w.dim() < n + 1 {
        return Err(Error::dimension("matrix is too small for the instance"));
    }
    let w11 = w.get(0, 0);
    if !(w11 > 1e-12) {
        return Err(Error::Degenerate(format!("W₁₁ = {w11:e} is not positive")));
    }
    let raw: Vec<f64> = (1..=n).map(|i| w.get(i, 0) / w11).collect();
    let sets = feasible_sets(inst);
    if projection::max_violation(&sets, &raw) <= EXTRACT_FEAS_TOL {
        return Ok(Candidate { x: raw.clone(), raw, projection_distance: 0.0 });
    }
    let x = project_intersection(&sets, &raw)?;
    let d = raw.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    Ok(Candidate { raw, x, projection_distance: d })
}

#[derive(Clone, Debug, Serialize)]
pub struct RelaxationReport {
    pub instance_id: String,
    pub relaxation: RelaxationKind,
    pub status: SolveStatus,
    pub r_star: f64,
    pub v_feasible: f64,
    pub x_extracted: Vec<f64>,
    pub projection_distance: f64,
    pub relative_gap: f64,
    pub eig_ratio: f64,
    pub solved: bool,
    /// `ℓ₁ᵀWℓ₂`, for the linear-case Beta relaxations only.
    pub rlt_activity: Option<f64>,
    pub build_time_s: f64,
    pub wall_time_s: f64,
    #[serde(skip)]
    pub w: Option<SymMatrix<f64>>,
}

impl RelaxationReport {
    pub fn is_solved(&self) -> bool {
        self.solved
    }

    /// Whether the solver returned a usable bound.
    pub fn has_bound(&self) -> bool {
        self.status.is_usable() && self.r_star.is_finite()
    }
}

pub fn instance_id(inst: &Instance<f64>) -> String {
    let p = inst.provenance();
    format!("{}-{:016x}", p.family, p.seed)
}

/// Builds, solves and scores one relaxation of an instance.
pub fn evaluate(
    inst: &Instance<f64>,
    kind: RelaxationKind,
    build_opts: BuildOptions,
    opts: &SolverOptions,
) -> Result<RelaxationReport> {
    let t0 = Instant::now();
    let relax = build(inst, kind, build_opts)?;
    let build_time_s = t0.elapsed().as_secs_f64();
    let sol = solve(&relax.program, opts)?;
    let mut report = RelaxationReport {
        instance_id: instance_id(inst),
        relaxation: kind,
        status: sol.status,
        r_star: f64::NAN,
        v_feasible: f64::NAN,
        x_extracted: Vec::new(),
        projection_distance: f64::NAN,
        relative_gap: f64::NAN,
        eig_ratio: f64::NAN,
        solved: false,
        rlt_activity: None,
        build_time_s,
        wall_time_s: sol.stats.solve_time_s,
        w: None,
    };
    if !sol.status.is_usable() {
        return Ok(report);
    }
    report.r_star = sol.obj_value;
    report.eig_ratio = eigenvalue_ratio(&sol.w);
    report.rlt_activity = relax.rlt_activity(&sol.w);
    match extract_candidate(&sol.w, inst) {
        Ok(c) => {
            report.v_feasible = inst.objective(&c.x)?;
            report.relative_gap = relative_gap(report.v_feasible, report.r_star);
            report.projection_distance = c.projection_distance;
            report.solved =
                c.projection_distance <= MAX_SOLVED_PROJECTION && is_solved(report.relative_gap, report.eig_ratio);
            report.x_extracted = if c.projection_distance <= MAX_SOLVED_PROJECTION { c.x } else { c.raw };
        }
        Err(e) => log::warn!("{}: no feasible point extracted: {e}", report.instance_id),
    }
    report.w = Some(sol.w);
    Ok(report)
}
