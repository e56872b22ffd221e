//! `min cᵀx + c₀  s.t.  Ax + s = b, s ∈ K` — the form every backend consumes.

use std::collections::BTreeMap;

use crate::conic::{svec, svec_index, svec_len, ConeTag, ConicProgram};
use crate::error::{Error, Result};
use crate::scalar::RealScalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StdCone {
    Zero(usize),
    Nonneg(usize),
    Soc(usize),
    /// Scaled upper triangle of a `p × p` PSD matrix, column-major.
    Psd(usize),
}

impl StdCone {
    pub fn size(self) -> usize {
        match self {
            StdCone::Zero(k) | StdCone::Nonneg(k) | StdCone::Soc(k) => k,
            StdCone::Psd(p) => svec_len(p),
        }
    }
}

/// Sparse row: `(column, value)` pairs with distinct, sorted columns.
pub type SparseRow = Vec<(usize, f64)>;

#[derive(Clone, Debug, PartialEq)]
pub struct StandardForm {
    pub num_vars: usize,
    pub c: Vec<f64>,
    pub c0: f64,
    pub rows: Vec<SparseRow>,
    pub b: Vec<f64>,
    pub cones: Vec<StdCone>,
}

/// Accumulates rows, summing duplicate column entries and dropping zeros.
pub(crate) fn sparse_row(entries: impl IntoIterator<Item = (usize, f64)>) -> SparseRow {
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    for (j, v) in entries {
        *acc.entry(j).or_insert(0.0) += v;
    }
    acc.into_iter().filter(|&(_, v)| v != 0.0).collect()
}

pub(crate) fn scale_row(row: &SparseRow, alpha: f64) -> SparseRow {
    row.iter().map(|&(j, v)| (j, alpha * v)).collect()
}

pub(crate) fn add_rows(a: &SparseRow, b: &SparseRow) -> SparseRow {
    sparse_row(a.iter().chain(b.iter()).copied())
}

impl StandardForm {
    pub fn new(num_vars: usize) -> Self {
        StandardForm { num_vars, c: vec![0.0; num_vars], c0: 0.0, rows: Vec::new(), b: Vec::new(), cones: Vec::new() }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Appends a cone block of `rows`, each meaning `bᵢ − aᵢᵀx ∈ K`.
    pub fn push_block(&mut self, cone: StdCone, rows: Vec<SparseRow>, b: Vec<f64>) {
        assert_eq!(rows.len(), cone.size());
        assert_eq!(b.len(), cone.size());
        self.rows.extend(rows);
        self.b.extend(b);
        self.cones.push(cone);
    }

    /// Appends `G x + h ∈ K` (the image form), i.e. `A = −G`, `b = h`.
    pub fn push_image(&mut self, cone: StdCone, g: Vec<SparseRow>, h: Vec<f64>) {
        let rows = g.iter().map(|r| scale_row(r, -1.0)).collect();
        self.push_block(cone, rows, h);
    }

    pub fn validate(&self) -> Result<()> {
        if self.c.len() != self.num_vars {
            return Err(Error::dimension("objective length differs from the variable count"));
        }
        if self.b.len() != self.rows.len() {
            return Err(Error::dimension("right-hand side length differs from the row count"));
        }
        let total: usize = self.cones.iter().map(|c| c.size()).sum();
        if total != self.rows.len() {
            return Err(Error::dimension(format!("cones cover {total} rows, matrix has {}", self.rows.len())));
        }
        if self.rows.iter().flatten().any(|&(j, v)| j >= self.num_vars || !v.is_finite()) {
            return Err(Error::invalid("constraint matrix has an out-of-range column or a non-finite entry"));
        }
        if self.c.iter().chain(&self.b).any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite problem data"));
        }
        Ok(())
    }

    /// `b − Ax`.
    pub fn slack(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().zip(&self.b).map(|(r, &bi)| bi - r.iter().map(|&(j, v)| v * x[j]).sum::<f64>()).collect()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.c0
    }

    /// Largest cone violation of the slack at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let s = self.slack(x);
        let mut offset = 0;
        let mut worst: f64 = 0.0;
        for cone in &self.cones {
            let v = &s[offset..offset + cone.size()];
            offset += cone.size();
            let tag = match *cone {
                StdCone::Zero(k) => ConeTag::Zero(k),
                StdCone::Nonneg(k) => ConeTag::Nonneg(k),
                StdCone::Soc(k) => ConeTag::Soc(k),
                StdCone::Psd(p) => ConeTag::PsdImage(p),
            };
            worst = worst.max(crate::conic::cone_residual(v, tag).unwrap_or(f64::INFINITY));
        }
        worst
    }
}

/// How SOC and RSOC rows reach the backend.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeLowering {
    /// SOC as SOC; RSOC³ rotated into SOC³.
    Native,
    /// SOC through the arrow map, RSOC³ through Two, both into PSD blocks.
    LiftedToPsd,
}

/// Compiles a program with variable `x = svec(W)`.
///
/// Row order: the normalization equality, every constraint in builder
/// order, then `W ⪰ 0`.
pub fn compile<T: RealScalar>(program: &ConicProgram<T>, lowering: ConeLowering) -> Result<StandardForm> {
    program.validate()?;
    let d = program.var_dim;
    let nv = svec_len(d);
    let to_row = |m: &crate::conic::SymMatrix<T>| -> SparseRow {
        sparse_row(svec(m).into_iter().enumerate().map(|(j, v)| (j, v.to_f64_lossy())))
    };
    let mut sf = StandardForm::new(nv);
    sf.c = svec(&program.objective).into_iter().map(|v| v.to_f64_lossy()).collect();

    let (ni, nj) = program.normalization;
    let (lo, hi) = (ni.min(nj), ni.max(nj));
    let norm_coeff = if lo == hi { 1.0 } else { std::f64::consts::SQRT_2 };
    // W_ij = 1 ⟺ svec_k(W) / scale = 1
    sf.push_block(StdCone::Zero(1), vec![vec![(svec_index(lo, hi), 1.0 / norm_coeff)]], vec![1.0]);

    for con in &program.constraints {
        let g: Vec<SparseRow> = con.coeffs.iter().map(to_row).collect();
        let zeros = |k: usize| vec![0.0; k];
        match (con.cone, lowering) {
            (ConeTag::Zero(k), _) => sf.push_image(StdCone::Zero(k), g, zeros(k)),
            (ConeTag::Nonneg(k), _) => sf.push_image(StdCone::Nonneg(k), g, zeros(k)),
            (ConeTag::PsdImage(p), _) => sf.push_image(StdCone::Psd(p), g, zeros(svec_len(p))),
            (ConeTag::Soc(k), ConeLowering::Native) => sf.push_image(StdCone::Soc(k), g, zeros(k)),
            (ConeTag::Rsoc3, ConeLowering::Native) => {
                // v₃² ≤ v₁v₂, v₁, v₂ ≥ 0  ⟺  (v₁ + v₂, v₁ − v₂, 2v₃) ∈ SOC³
                let rot = vec![add_rows(&g[0], &g[1]), add_rows(&g[0], &scale_row(&g[1], -1.0)), scale_row(&g[2], 2.0)];
                sf.push_image(StdCone::Soc(3), rot, zeros(3));
            }
            (ConeTag::Soc(k), ConeLowering::LiftedToPsd) => {
                let rows = lifted_rows(k, &g, |r, c| crate::conic::LiftOp::Arrow(k).source(r, c));
                sf.push_image(StdCone::Psd(k), rows, zeros(svec_len(k)));
            }
            (ConeTag::Rsoc3, ConeLowering::LiftedToPsd) => {
                let rows = lifted_rows(2, &g, |r, c| crate::conic::LiftOp::Two.source(r, c));
                sf.push_image(StdCone::Psd(2), rows, zeros(3));
            }
        }
    }

    let psd_rows = (0..nv).map(|j| vec![(j, 1.0)]).collect();
    sf.push_image(StdCone::Psd(d), psd_rows, vec![0.0; nv]);
    sf.validate()?;
    Ok(sf)
}

/// svec rows of `Op(v)` for an operator placing coordinate `source(r, c)`.
fn lifted_rows(p: usize, g: &[SparseRow], source: impl Fn(usize, usize) -> Option<usize>) -> Vec<SparseRow> {
    let mut rows = Vec::with_capacity(svec_len(p));
    for c in 0..p {
        for r in 0..=c {
            let scale = if r == c { 1.0 } else { std::f64::consts::SQRT_2 };
            rows.push(source(r, c).map_or_else(Vec::new, |k| scale_row(&g[k], scale)));
        }
    }
    rows
}
