//! Compilation of instances into the relaxation family: Shor, Kron (Shor plus
//! linearized Kronecker products of arrow maps, in the homogenized space),
//! Beta (the β-lifted relaxation) and, for the linear case, Beta⁰ with the
//! complementarity equation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::conic::{
    boxtimes_coefficients, j_matrix, svec_len, ConeTag, ConicProgram, LiftOp, LinearImageConstraint, Mat,
    SymMatrix,
};
use crate::error::{Error, Result};
use crate::instances::{lift_balls, lift_linear, BallQpInstance, Instance, LiftedGeometry, LinearTwoInstance};
use crate::scalar::RealScalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaxationKind {
    ShorBalls,
    KronBalls,
    BetaBalls,
    ShorLinear,
    KronLinear,
    BetaLinear,
    Beta0Linear,
}

impl RelaxationKind {
    pub const ALL: [RelaxationKind; 7] = [
        RelaxationKind::ShorBalls,
        RelaxationKind::KronBalls,
        RelaxationKind::BetaBalls,
        RelaxationKind::ShorLinear,
        RelaxationKind::KronLinear,
        RelaxationKind::BetaLinear,
        RelaxationKind::Beta0Linear,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelaxationKind::ShorBalls => "shor_balls",
            RelaxationKind::KronBalls => "kron_balls",
            RelaxationKind::BetaBalls => "beta_balls",
            RelaxationKind::ShorLinear => "shor_linear",
            RelaxationKind::KronLinear => "kron_linear",
            RelaxationKind::BetaLinear => "beta_linear",
            RelaxationKind::Beta0Linear => "beta0_linear",
        }
    }

    pub fn is_linear(self) -> bool {
        matches!(
            self,
            RelaxationKind::ShorLinear | RelaxationKind::KronLinear | RelaxationKind::BetaLinear | RelaxationKind::Beta0Linear
        )
    }

    /// Works in `w = (α, x, β)` rather than `w̃ = (α, x)`.
    pub fn uses_beta(self) -> bool {
        matches!(self, RelaxationKind::BetaBalls | RelaxationKind::BetaLinear | RelaxationKind::Beta0Linear)
    }

    pub fn is_shor(self) -> bool {
        matches!(self, RelaxationKind::ShorBalls | RelaxationKind::ShorLinear)
    }

    /// Family-neutral short name: `shor`, `kron`, `beta` or `beta0`.
    pub fn short_name(self) -> &'static str {
        match self {
            RelaxationKind::ShorBalls | RelaxationKind::ShorLinear => "shor",
            RelaxationKind::KronBalls | RelaxationKind::KronLinear => "kron",
            RelaxationKind::BetaBalls | RelaxationKind::BetaLinear => "beta",
            RelaxationKind::Beta0Linear => "beta0",
        }
    }

    /// Resolves a short or full name against the instance family.
    pub fn resolve<T>(name: &str, inst: &Instance<T>) -> Result<Self> {
        let linear = matches!(inst, Instance::Linear(_));
        let kind = match (name.to_ascii_lowercase().as_str(), linear) {
            ("shor", false) => RelaxationKind::ShorBalls,
            ("kron", false) => RelaxationKind::KronBalls,
            ("beta", false) => RelaxationKind::BetaBalls,
            ("shor", true) => RelaxationKind::ShorLinear,
            ("kron", true) => RelaxationKind::KronLinear,
            ("beta", true) => RelaxationKind::BetaLinear,
            ("beta0", true) => RelaxationKind::Beta0Linear,
            (other, _) => other.parse()?,
        };
        if kind.is_linear() != linear {
            return Err(Error::invalid(format!("relaxation {kind} does not apply to this instance family")));
        }
        Ok(kind)
    }

    /// The Shor relaxation of the same family.
    pub fn shor_for(linear: bool) -> Self {
        if linear {
            RelaxationKind::ShorLinear
        } else {
            RelaxationKind::ShorBalls
        }
    }
}

impl fmt::Display for RelaxationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelaxationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RelaxationKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown relaxation '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BuildOptions {
    /// Adds valid product inequalities beyond the standard constraint sets
    /// (ball case only): entrywise `Lᵢᵀ W ℓ₁ ≥ 0` and
    /// `(Lᵢe₂)ᵀ W (Lₖe₂) ≥ 0`. Off by default.
    pub extra_rlt: bool,
}

/// A compiled relaxation together with the geometry it was built from.
#[derive(Clone, Debug)]
pub struct Relaxation<T> {
    pub kind: RelaxationKind,
    pub program: ConicProgram<T>,
    pub geometry: LiftedGeometry<T>,
}

pub fn build<T: RealScalar>(inst: &Instance<T>, kind: RelaxationKind, opts: BuildOptions) -> Result<Relaxation<T>> {
    match inst {
        Instance::Balls(b) => build_balls(b, kind, opts),
        Instance::Linear(l) => build_linear(l, kind),
    }
}

pub fn build_balls<T: RealScalar>(
    inst: &BallQpInstance<T>,
    kind: RelaxationKind,
    opts: BuildOptions,
) -> Result<Relaxation<T>> {
    let geo = lift_balls(inst)?;
    let program = match kind {
        RelaxationKind::ShorBalls => shor_balls(&geo),
        RelaxationKind::KronBalls => kron_balls(&geo),
        RelaxationKind::BetaBalls => beta_balls(&geo, opts),
        other => return Err(Error::invalid(format!("relaxation {other} needs a linear-case instance"))),
    };
    program.validate()?;
    Ok(Relaxation { kind, program, geometry: geo })
}

pub fn build_linear<T: RealScalar>(inst: &LinearTwoInstance<T>, kind: RelaxationKind) -> Result<Relaxation<T>> {
    let geo = lift_linear(inst);
    let program = match kind {
        RelaxationKind::ShorLinear => shor_linear(&geo),
        RelaxationKind::KronLinear => kron_linear(&geo),
        RelaxationKind::BetaLinear => beta_linear(&geo, false),
        RelaxationKind::Beta0Linear => beta_linear(&geo, true),
        other => return Err(Error::invalid(format!("relaxation {other} needs a ball instance"))),
    };
    program.validate()?;
    Ok(Relaxation { kind, program, geometry: geo })
}

pub fn build_shor_balls<T: RealScalar>(inst: &BallQpInstance<T>) -> Result<ConicProgram<T>> {
    Ok(build_balls(inst, RelaxationKind::ShorBalls, BuildOptions::default())?.program)
}

pub fn build_kron_balls<T: RealScalar>(inst: &BallQpInstance<T>) -> Result<ConicProgram<T>> {
    Ok(build_balls(inst, RelaxationKind::KronBalls, BuildOptions::default())?.program)
}

pub fn build_beta_balls<T: RealScalar>(inst: &BallQpInstance<T>) -> Result<ConicProgram<T>> {
    Ok(build_balls(inst, RelaxationKind::BetaBalls, BuildOptions::default())?.program)
}

pub fn build_shor_linear<T: RealScalar>(inst: &LinearTwoInstance<T>) -> Result<ConicProgram<T>> {
    Ok(build_linear(inst, RelaxationKind::ShorLinear)?.program)
}

pub fn build_kron_linear<T: RealScalar>(inst: &LinearTwoInstance<T>) -> Result<ConicProgram<T>> {
    Ok(build_linear(inst, RelaxationKind::KronLinear)?.program)
}

pub fn build_beta_linear<T: RealScalar>(inst: &LinearTwoInstance<T>) -> Result<ConicProgram<T>> {
    Ok(build_linear(inst, RelaxationKind::BetaLinear)?.program)
}

pub fn build_beta0_linear<T: RealScalar>(inst: &LinearTwoInstance<T>) -> Result<ConicProgram<T>> {
    Ok(build_linear(inst, RelaxationKind::Beta0Linear)?.program)
}

/// `A D Aᵀ` for diagonal `D`: the representer of `W ↦ D • AᵀWA`.
fn diag_congruence<T: RealScalar>(a: &Mat<T>, d: &[T]) -> SymMatrix<T> {
    let mut out = SymMatrix::zeros(a.rows());
    for (k, &dk) in d.iter().enumerate() {
        if dk != T::zero() {
            out.add_assign_scaled(dk, &SymMatrix::outer(&a.column(k)));
        }
    }
    out
}

/// Representer of `W ↦ K • AᵀWA` for a general symmetric `K`.
fn sym_congruence<T: RealScalar>(a: &Mat<T>, k: &SymMatrix<T>) -> SymMatrix<T> {
    let cols: Vec<Vec<T>> = (0..a.cols()).map(|j| a.column(j)).collect();
    let mut out = SymMatrix::zeros(a.rows());
    for i in 0..k.dim() {
        for j in 0..k.dim() {
            let kij = k.get(i, j);
            if kij != T::zero() {
                out.add_assign_scaled(kij, &SymMatrix::sym_outer(&cols[i], &cols[j]));
            }
        }
    }
    out
}

fn j_row<T: RealScalar>(label: String, a: &Mat<T>) -> LinearImageConstraint<T> {
    let d = j_matrix::<T>(a.cols());
    let diag: Vec<T> = (0..a.cols()).map(|i| d.get(i, i)).collect();
    LinearImageConstraint::scalar(label, diag_congruence(a, &diag), ConeTag::Nonneg(1))
}

/// Rows of `W ↦ Aᵀ W b`.
fn vector_image<T: RealScalar>(a: &Mat<T>, b: &[T]) -> Vec<SymMatrix<T>> {
    (0..a.cols()).map(|r| SymMatrix::sym_outer(&a.column(r), b)).collect()
}

/// `(left ⊠ right)(z_mapᵀ W y_map) ∈ PSD`, as svec rows.
fn kron_block<T: RealScalar>(
    label: String,
    left: LiftOp,
    right: LiftOp,
    y_map: &Mat<T>,
    z_map: &Mat<T>,
    var_dim: usize,
) -> LinearImageConstraint<T> {
    let coeffs = boxtimes_coefficients(left, right, y_map, z_map);
    let p = coeffs.len();
    let s2 = T::sqrt2();
    let mut rows = Vec::with_capacity(svec_len(p));
    for j in 0..p {
        for i in 0..=j {
            let c = coeffs[i][j].clone().unwrap_or_else(|| SymMatrix::zeros(var_dim));
            rows.push(if i == j { c } else { c.scaled(s2) });
        }
    }
    LinearImageConstraint::new(label, rows, ConeTag::PsdImage(p))
}

fn shor_rows<T: RealScalar>(geo: &LiftedGeometry<T>, program: &mut ConicProgram<T>) {
    for (i, lt) in geo.ltilde.iter().enumerate() {
        program.push(j_row(format!("shor[{}]", i + 1), lt));
    }
}

fn shor_balls<T: RealScalar>(geo: &LiftedGeometry<T>) -> ConicProgram<T> {
    let mut program = ConicProgram::new(geo.q_tilde.clone());
    shor_rows(geo, &mut program);
    program
}

fn kron_balls<T: RealScalar>(geo: &LiftedGeometry<T>) -> ConicProgram<T> {
    let mut program = shor_balls(geo);
    let d = geo.n + 1;
    let m = geo.ltilde.len();
    for i in 0..m {
        for k in i + 1..m {
            program.push(kron_block(
                format!("kron[{},{}]", i + 1, k + 1),
                LiftOp::Arrow(d),
                LiftOp::Arrow(d),
                &geo.ltilde[i],
                &geo.ltilde[k],
                d,
            ));
        }
    }
    program
}

fn k_matrix<T: RealScalar>() -> SymMatrix<T> {
    let (z, h) = (T::zero(), T::one().half());
    SymMatrix::from_upper(3, |i, j| match (i, j) {
        (0, 1) => h,
        (2, 2) => -T::one(),
        _ => z,
    })
}

fn check_beta_free<T: RealScalar>(q_hat: &SymMatrix<T>) {
    let last = q_hat.dim() - 1;
    assert!((0..=last).all(|i| q_hat.get(i, last) == T::zero()), "objective must not involve β");
}

/// Lifted-space rows shared by both Beta relaxations:
/// `J • PᵀWP ≥ 0`.
fn beta_base<T: RealScalar>(geo: &LiftedGeometry<T>) -> ConicProgram<T> {
    check_beta_free(&geo.q_hat);
    let mut program = ConicProgram::new(geo.q_hat.clone());
    program.push(j_row("shor".to_string(), &geo.p));
    program
}

fn beta_balls<T: RealScalar>(geo: &LiftedGeometry<T>, opts: BuildOptions) -> ConicProgram<T> {
    let mut program = beta_base(geo);
    let var_dim = geo.n + 2;
    let ell1 = &geo.ell[0];
    program.push(LinearImageConstraint::new("socrlt[1]", vector_image(&geo.p, ell1), ConeTag::Soc(geo.n + 1)));
    let k = k_matrix::<T>();
    for (idx, l) in geo.l.iter().enumerate() {
        program.push(LinearImageConstraint::scalar(format!("rsoc[{}]", idx + 2), sym_congruence(l, &k), ConeTag::Nonneg(1)));
    }
    for (idx, l) in geo.l.iter().enumerate() {
        program.push(LinearImageConstraint::new(format!("socrlt[{}]", idx + 2), vector_image(l, ell1), ConeTag::Rsoc3));
    }
    for (idx, l) in geo.l.iter().enumerate() {
        program.push(kron_block(
            format!("kron[1,{}]", idx + 2),
            LiftOp::Arrow(geo.n + 1),
            LiftOp::Two,
            &geo.p,
            l,
            var_dim,
        ));
    }
    for i in 0..geo.l.len() {
        for kk in i + 1..geo.l.len() {
            program.push(kron_block(
                format!("kron[{},{}]", i + 2, kk + 2),
                LiftOp::Two,
                LiftOp::Two,
                &geo.l[i],
                &geo.l[kk],
                var_dim,
            ));
        }
    }
    if opts.extra_rlt {
        for (idx, l) in geo.l.iter().enumerate() {
            program.push(LinearImageConstraint::new(format!("extra_rlt[1,{}]", idx + 2), vector_image(l, ell1), ConeTag::Nonneg(3)));
        }
        for i in 0..geo.l.len() {
            for kk in i + 1..geo.l.len() {
                let (a, b) = (geo.l[i].column(1), geo.l[kk].column(1));
                program.push(LinearImageConstraint::scalar(
                    format!("extra_rlt[{},{}]", i + 2, kk + 2),
                    SymMatrix::sym_outer(&a, &b),
                    ConeTag::Nonneg(1),
                ));
            }
        }
    }
    program
}

fn shor_linear<T: RealScalar>(geo: &LiftedGeometry<T>) -> ConicProgram<T> {
    let mut program = ConicProgram::new(geo.q_tilde.clone());
    shor_rows(geo, &mut program);
    program
}

fn kron_linear<T: RealScalar>(geo: &LiftedGeometry<T>) -> ConicProgram<T> {
    let mut program = shor_linear(geo);
    let d = geo.n + 1;
    program.push(kron_block("kron[1,2]".to_string(), LiftOp::Arrow(d), LiftOp::Arrow(d), &geo.ltilde[0], &geo.ltilde[1], d));
    program
}

/// Label of the RLT row `ℓ₁ᵀWℓ₂` in the linear Beta programs.
pub const RLT_LABEL: &str = "rlt";

fn beta_linear<T: RealScalar>(geo: &LiftedGeometry<T>, complementarity: bool) -> ConicProgram<T> {
    let mut program = beta_base(geo);
    let cone = if complementarity { ConeTag::Zero(1) } else { ConeTag::Nonneg(1) };
    program.push(LinearImageConstraint::scalar(RLT_LABEL, SymMatrix::sym_outer(&geo.ell[0], &geo.ell[1]), cone));
    for (i, ell) in geo.ell.iter().enumerate() {
        program.push(LinearImageConstraint::new(format!("socrlt[{}]", i + 1), vector_image(&geo.p, ell), ConeTag::Soc(geo.n + 1)));
    }
    program
}

impl<T: RealScalar> Relaxation<T> {
    /// `ℓ₁ᵀWℓ₂` for the linear Beta programs.
    pub fn rlt_activity(&self, w: &SymMatrix<T>) -> Option<T> {
        if self.kind.is_linear() && self.kind.uses_beta() {
            Some(w.bilinear(&self.geometry.ell[0], &self.geometry.ell[1]))
        } else {
            None
        }
    }
}
