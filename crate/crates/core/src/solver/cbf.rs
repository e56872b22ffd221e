//! Conic Benchmark Format (CBF, version 3).
//!
//! A program is written with one `PSDVAR` for `W`. Scalar rows (`L=`, `L+`,
//! `Q`, `QR`) reference `W` through `FCOORD`. A PSD image `M(W) ⪰ 0` cannot
//! reference a matrix variable inside `PSDCON`, so each one gets a block of
//! free scalar variables `u` (one per upper-triangle entry), equality rows
//! `u − M(W) = 0`, and a `PSDCON` whose `HCOORD` places `u`. The
//! normalization is the equality row `W₁₁ − 1 = 0`.
//!
//! Rotated cones follow the CBF convention `2y₁y₂ ≥ ‖y₃..‖²`, so the first
//! coordinate of our `v₃² ≤ v₁v₂` rows is halved.
//!
//! Numbers are printed with Rust's shortest round-trip formatting, which makes
//! writing deterministic and `parse → write` byte-identical.

use std::fmt::Write as _;

use crate::conic::{svec_index, svec_len, ConeTag, ConicProgram, SymMatrix};
use crate::error::{Error, Result};
use crate::scalar::RealScalar;
use crate::solver::standard::{scale_row, sparse_row, SparseRow, StandardForm, StdCone};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CbfCone {
    Free,
    Nonneg,
    Nonpos,
    Zero,
    Quad,
    RotatedQuad,
}

impl CbfCone {
    fn keyword(self) -> &'static str {
        match self {
            CbfCone::Free => "F",
            CbfCone::Nonneg => "L+",
            CbfCone::Nonpos => "L-",
            CbfCone::Zero => "L=",
            CbfCone::Quad => "Q",
            CbfCone::RotatedQuad => "QR",
        }
    }

    fn from_keyword(s: &str) -> Option<Self> {
        Some(match s {
            "F" => CbfCone::Free,
            "L+" => CbfCone::Nonneg,
            "L-" => CbfCone::Nonpos,
            "L=" => CbfCone::Zero,
            "Q" => CbfCone::Quad,
            "QR" => CbfCone::RotatedQuad,
            _ => return None,
        })
    }
}

/// The subset of CBF this crate reads and writes: minimization, PSD and
/// scalar variables, scalar cone rows and affine PSD constraints.
/// Matrix coordinates are lower-triangular (`k ≥ l`) as in the format.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CbfModel {
    pub psdvars: Vec<usize>,
    pub vars: Vec<(CbfCone, usize)>,
    pub cons: Vec<(CbfCone, usize)>,
    pub psdcons: Vec<usize>,
    pub objfcoord: Vec<(usize, usize, usize, f64)>,
    pub objacoord: Vec<(usize, f64)>,
    pub objbcoord: f64,
    pub fcoord: Vec<(usize, usize, usize, usize, f64)>,
    pub acoord: Vec<(usize, usize, f64)>,
    pub bcoord: Vec<(usize, f64)>,
    pub hcoord: Vec<(usize, usize, usize, usize, f64)>,
    pub dcoord: Vec<(usize, usize, usize, f64)>,
}

fn lower_entries(m: &SymMatrix<f64>) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for k in 0..m.dim() {
        for l in 0..=k {
            let v = m.get(k, l);
            if v != 0.0 {
                out.push((k, l, v));
            }
        }
    }
    out
}

/// Writes a program as CBF text.
pub fn export_cbf<T: RealScalar>(program: &ConicProgram<T>) -> Result<String> {
    Ok(CbfModel::from_program(program)?.to_text())
}

impl CbfModel {
    pub fn from_program<T: RealScalar>(program: &ConicProgram<T>) -> Result<Self> {
        program.validate()?;
        let f = |m: &SymMatrix<T>| m.map(|v| v.to_f64_lossy());
        let mut model = CbfModel { psdvars: vec![program.var_dim], ..Default::default() };
        model.objfcoord = lower_entries(&f(&program.objective)).into_iter().map(|(k, l, v)| (0, k, l, v)).collect();

        let mut row = 0;
        let (ni, nj) = program.normalization;
        model.cons.push((CbfCone::Zero, 1));
        model.fcoord.push((row, 0, ni.max(nj), ni.min(nj), if ni == nj { 1.0 } else { 0.5 }));
        model.bcoord.push((row, -1.0));
        row += 1;

        let inv_s2 = 1.0 / std::f64::consts::SQRT_2;
        let mut num_u = 0;
        for con in &program.constraints {
            let coeffs: Vec<SymMatrix<f64>> = con.coeffs.iter().map(f).collect();
            let mut emit_rows = |model: &mut CbfModel, rows: &[SymMatrix<f64>], scale: &[f64]| {
                for (m, &s) in rows.iter().zip(scale) {
                    for (k, l, v) in lower_entries(m) {
                        model.fcoord.push((row, 0, k, l, s * v));
                    }
                    row += 1;
                }
            };
            match con.cone {
                ConeTag::Zero(k) => {
                    model.cons.push((CbfCone::Zero, k));
                    emit_rows(&mut model, &coeffs, &vec![1.0; k]);
                }
                ConeTag::Nonneg(k) => {
                    model.cons.push((CbfCone::Nonneg, k));
                    emit_rows(&mut model, &coeffs, &vec![1.0; k]);
                }
                ConeTag::Soc(k) => {
                    model.cons.push((CbfCone::Quad, k));
                    emit_rows(&mut model, &coeffs, &vec![1.0; k]);
                }
                ConeTag::Rsoc3 => {
                    model.cons.push((CbfCone::RotatedQuad, 3));
                    emit_rows(&mut model, &coeffs, &[0.5, 1.0, 1.0]);
                }
                ConeTag::PsdImage(p) => {
                    let n = svec_len(p);
                    model.cons.push((CbfCone::Zero, n));
                    let psdcon = model.psdcons.len();
                    model.psdcons.push(p);
                    for j in 0..p {
                        for i in 0..=j {
                            let t = svec_index(i, j);
                            let u = num_u + t;
                            let s = if i == j { 1.0 } else { inv_s2 };
                            model.acoord.push((row, u, 1.0));
                            for (k, l, v) in lower_entries(&coeffs[t]) {
                                model.fcoord.push((row, 0, k, l, -s * v));
                            }
                            model.hcoord.push((psdcon, u, j, i, 1.0));
                            row += 1;
                        }
                    }
                    num_u += n;
                }
            }
        }
        if num_u > 0 {
            model.vars.push((CbfCone::Free, num_u));
        }
        Ok(model)
    }

    pub fn num_scalar_vars(&self) -> usize {
        self.vars.iter().map(|v| v.1).sum()
    }

    pub fn num_rows(&self) -> usize {
        self.cons.iter().map(|c| c.1).sum()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let fmt_cones = |s: &mut String, list: &[(CbfCone, usize)]| {
            let total: usize = list.iter().map(|c| c.1).sum();
            writeln!(s, "{total} {}", list.len()).unwrap();
            for (c, n) in list {
                writeln!(s, "{} {n}", c.keyword()).unwrap();
            }
            s.push('\n');
        };
        s.push_str("VER\n3\n\nOBJSENSE\nMIN\n\n");
        if !self.psdvars.is_empty() {
            writeln!(s, "PSDVAR\n{}", self.psdvars.len()).unwrap();
            for p in &self.psdvars {
                writeln!(s, "{p}").unwrap();
            }
            s.push('\n');
        }
        if !self.vars.is_empty() {
            s.push_str("VAR\n");
            fmt_cones(&mut s, &self.vars);
        }
        if !self.psdcons.is_empty() {
            writeln!(s, "PSDCON\n{}", self.psdcons.len()).unwrap();
            for p in &self.psdcons {
                writeln!(s, "{p}").unwrap();
            }
            s.push('\n');
        }
        if !self.cons.is_empty() {
            s.push_str("CON\n");
            fmt_cones(&mut s, &self.cons);
        }
        if !self.objfcoord.is_empty() {
            writeln!(s, "OBJFCOORD\n{}", self.objfcoord.len()).unwrap();
            for (j, k, l, v) in &self.objfcoord {
                writeln!(s, "{j} {k} {l} {v}").unwrap();
            }
            s.push('\n');
        }
        if !self.objacoord.is_empty() {
            writeln!(s, "OBJACOORD\n{}", self.objacoord.len()).unwrap();
            for (j, v) in &self.objacoord {
                writeln!(s, "{j} {v}").unwrap();
            }
            s.push('\n');
        }
        if self.objbcoord != 0.0 {
            writeln!(s, "OBJBCOORD\n{}\n", self.objbcoord).unwrap();
        }
        if !self.fcoord.is_empty() {
            writeln!(s, "FCOORD\n{}", self.fcoord.len()).unwrap();
            for (i, j, k, l, v) in &self.fcoord {
                writeln!(s, "{i} {j} {k} {l} {v}").unwrap();
            }
            s.push('\n');
        }
        if !self.acoord.is_empty() {
            writeln!(s, "ACOORD\n{}", self.acoord.len()).unwrap();
            for (i, j, v) in &self.acoord {
                writeln!(s, "{i} {j} {v}").unwrap();
            }
            s.push('\n');
        }
        if !self.bcoord.is_empty() {
            writeln!(s, "BCOORD\n{}", self.bcoord.len()).unwrap();
            for (i, v) in &self.bcoord {
                writeln!(s, "{i} {v}").unwrap();
            }
            s.push('\n');
        }
        if !self.hcoord.is_empty() {
            writeln!(s, "HCOORD\n{}", self.hcoord.len()).unwrap();
            for (i, j, k, l, v) in &self.hcoord {
                writeln!(s, "{i} {j} {k} {l} {v}").unwrap();
            }
            s.push('\n');
        }
        if !self.dcoord.is_empty() {
            writeln!(s, "DCOORD\n{}", self.dcoord.len()).unwrap();
            for (i, k, l, v) in &self.dcoord {
                writeln!(s, "{i} {k} {l} {v}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .peekable();
        let mut model = CbfModel::default();
        let mut next = |what: &str| -> Result<(usize, &str)> {
            lines.next().ok_or_else(|| Error::parse(0, format!("unexpected end of file, expected {what}")))
        };
        fn nums<'a, const N: usize>(line: usize, s: &'a str) -> Result<[&'a str; N]> {
            let parts: Vec<&str> = s.split_whitespace().collect();
            parts.try_into().map_err(|_| Error::parse(line, format!("expected {N} fields")))
        }
        fn int(line: usize, s: &str) -> Result<usize> {
            s.parse().map_err(|_| Error::parse(line, format!("bad integer '{s}'")))
        }
        fn real(line: usize, s: &str) -> Result<f64> {
            s.parse().map_err(|_| Error::parse(line, format!("bad number '{s}'")))
        }
        let mut saw_version = false;
        loop {
            let Ok((ln, keyword)) = next("a section keyword") else { break };
            match keyword {
                "VER" => {
                    let (l, v) = next("a version")?;
                    let v = int(l, v)?;
                    if !(1..=3).contains(&v) {
                        return Err(Error::parse(l, format!("unsupported CBF version {v}")));
                    }
                    saw_version = true;
                }
                "OBJSENSE" => {
                    let (l, v) = next("MIN or MAX")?;
                    if v != "MIN" {
                        return Err(Error::parse(l, "only OBJSENSE MIN is supported"));
                    }
                }
                "PSDVAR" | "PSDCON" => {
                    let (l, n) = next("a count")?;
                    let mut sizes = Vec::new();
                    for _ in 0..int(l, n)? {
                        let (l, p) = next("a matrix order")?;
                        sizes.push(int(l, p)?);
                    }
                    if keyword == "PSDVAR" {
                        model.psdvars = sizes;
                    } else {
                        model.psdcons = sizes;
                    }
                }
                "VAR" | "CON" => {
                    let (l, header) = next("counts")?;
                    let [total, groups] = nums::<2>(l, header)?;
                    let mut list = Vec::new();
                    for _ in 0..int(l, groups)? {
                        let (l, g) = next("a cone")?;
                        let [name, size] = nums::<2>(l, g)?;
                        let cone = CbfCone::from_keyword(name)
                            .ok_or_else(|| Error::parse(l, format!("unsupported cone '{name}'")))?;
                        list.push((cone, int(l, size)?));
                    }
                    if list.iter().map(|c| c.1).sum::<usize>() != int(l, total)? {
                        return Err(Error::parse(l, "cone sizes do not add up to the declared total"));
                    }
                    if keyword == "VAR" {
                        model.vars = list;
                    } else {
                        model.cons = list;
                    }
                }
                "OBJBCOORD" => {
                    let (l, v) = next("a constant")?;
                    model.objbcoord = real(l, v)?;
                }
                "OBJFCOORD" | "OBJACOORD" | "FCOORD" | "ACOORD" | "BCOORD" | "HCOORD" | "DCOORD" => {
                    let (l, n) = next("an entry count")?;
                    for _ in 0..int(l, n)? {
                        let (l, e) = next("an entry")?;
                        match keyword {
                            "OBJFCOORD" => {
                                let [j, k, m, v] = nums::<4>(l, e)?;
                                model.objfcoord.push((int(l, j)?, int(l, k)?, int(l, m)?, real(l, v)?));
                            }
                            "OBJACOORD" => {
                                let [j, v] = nums::<2>(l, e)?;
                                model.objacoord.push((int(l, j)?, real(l, v)?));
                            }
                            "FCOORD" | "HCOORD" => {
                                let [i, j, k, m, v] = nums::<5>(l, e)?;
                                let entry = (int(l, i)?, int(l, j)?, int(l, k)?, int(l, m)?, real(l, v)?);
                                if keyword == "FCOORD" {
                                    model.fcoord.push(entry);
                                } else {
                                    model.hcoord.push(entry);
                                }
                            }
                            "ACOORD" => {
                                let [i, j, v] = nums::<3>(l, e)?;
                                model.acoord.push((int(l, i)?, int(l, j)?, real(l, v)?));
                            }
                            "BCOORD" => {
                                let [i, v] = nums::<2>(l, e)?;
                                model.bcoord.push((int(l, i)?, real(l, v)?));
                            }
                            _ => {
                                let [i, k, m, v] = nums::<4>(l, e)?;
                                model.dcoord.push((int(l, i)?, int(l, k)?, int(l, m)?, real(l, v)?));
                            }
                        }
                    }
                }
                other => return Err(Error::parse(ln, format!("unsupported section '{other}'"))),
            }
        }
        if !saw_version {
            return Err(Error::parse(1, "missing VER section"));
        }
        model.check()?;
        Ok(model)
    }

    fn check(&self) -> Result<()> {
        let (rows, nvars) = (self.num_rows(), self.num_scalar_vars());
        let in_matrix = |j: usize, k: usize, l: usize, sizes: &[usize]| j < sizes.len() && k < sizes[j] && l <= k;
        let bad = self.objfcoord.iter().any(|&(j, k, l, _)| !in_matrix(j, k, l, &self.psdvars))
            || self.objacoord.iter().any(|&(j, _)| j >= nvars)
            || self.fcoord.iter().any(|&(i, j, k, l, _)| i >= rows || !in_matrix(j, k, l, &self.psdvars))
            || self.acoord.iter().any(|&(i, j, _)| i >= rows || j >= nvars)
            || self.bcoord.iter().any(|&(i, _)| i >= rows)
            || self.hcoord.iter().any(|&(i, j, k, l, _)| j >= nvars || !in_matrix(i, k, l, &self.psdcons))
            || self.dcoord.iter().any(|&(i, k, l, _)| !in_matrix(i, k, l, &self.psdcons));
        if bad {
            return Err(Error::parse(0, "coordinate out of range (matrix coordinates must satisfy k >= l)"));
        }
        Ok(())
    }

    /// Variables: `svec` of each `PSDVAR` in order, then the scalar variables.
    pub fn to_standard_form(&self) -> Result<StandardForm> {
        self.check()?;
        let mut offsets = Vec::with_capacity(self.psdvars.len());
        let mut nv = 0;
        for &p in &self.psdvars {
            offsets.push(nv);
            nv += svec_len(p);
        }
        let scalar_off = nv;
        nv += self.num_scalar_vars();
        let s2 = std::f64::consts::SQRT_2;
        // coefficient of svec(X_j) for lower-triangular entry (k, l) of a
        // symmetric coefficient matrix
        let mat_coord = |j: usize, k: usize, l: usize, v: f64| {
            let idx = offsets[j] + svec_index(l, k);
            (idx, if k == l { v } else { s2 * v })
        };

        let mut sf = StandardForm::new(nv);
        for &(j, k, l, v) in &self.objfcoord {
            let (idx, c) = mat_coord(j, k, l, v);
            sf.c[idx] += c;
        }
        for &(j, v) in &self.objacoord {
            sf.c[scalar_off + j] += v;
        }
        sf.c0 = self.objbcoord;

        let rows = self.num_rows();
        let mut g: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        let mut h = vec![0.0; rows];
        for &(i, j, k, l, v) in &self.fcoord {
            g[i].push(mat_coord(j, k, l, v));
        }
        for &(i, j, v) in &self.acoord {
            g[i].push((scalar_off + j, v));
        }
        for &(i, v) in &self.bcoord {
            h[i] += v;
        }
        let g: Vec<SparseRow> = g.into_iter().map(sparse_row).collect();
        let mut start = 0;
        for &(cone, n) in &self.cons {
            push_group(&mut sf, cone, &g[start..start + n], &h[start..start + n])?;
            start += n;
        }
        let mut start = 0;
        for &(cone, n) in &self.vars {
            let rows: Vec<SparseRow> = (0..n).map(|t| vec![(scalar_off + start + t, 1.0)]).collect();
            push_group(&mut sf, cone, &rows, &vec![0.0; n])?;
            start += n;
        }
        for (i, &p) in self.psdcons.iter().enumerate() {
            let n = svec_len(p);
            let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
            let mut consts = vec![0.0; n];
            let scale = |k: usize, l: usize| if k == l { 1.0 } else { s2 };
            for &(ci, j, k, l, v) in &self.hcoord {
                if ci == i {
                    rows[svec_index(l, k)].push((scalar_off + j, scale(k, l) * v));
                }
            }
            for &(ci, k, l, v) in &self.dcoord {
                if ci == i {
                    consts[svec_index(l, k)] += scale(k, l) * v;
                }
            }
            sf.push_image(StdCone::Psd(p), rows.into_iter().map(sparse_row).collect(), consts);
        }
        for (j, &p) in self.psdvars.iter().enumerate() {
            let rows = (0..svec_len(p)).map(|t| vec![(offsets[j] + t, 1.0)]).collect();
            sf.push_image(StdCone::Psd(p), rows, vec![0.0; svec_len(p)]);
        }
        sf.validate()?;
        Ok(sf)
    }

    /// `svec` of the first matrix variable within a standard-form solution.
    pub fn first_psdvar<'a>(&self, x: &'a [f64]) -> Option<&'a [f64]> {
        self.psdvars.first().map(|&p| &x[..svec_len(p)])
    }
}

fn push_group(sf: &mut StandardForm, cone: CbfCone, g: &[SparseRow], h: &[f64]) -> Result<()> {
    let n = g.len();
    match cone {
        CbfCone::Free => {}
        CbfCone::Zero => sf.push_image(StdCone::Zero(n), g.to_vec(), h.to_vec()),
        CbfCone::Nonneg => sf.push_image(StdCone::Nonneg(n), g.to_vec(), h.to_vec()),
        CbfCone::Nonpos => sf.push_image(
            StdCone::Nonneg(n),
            g.iter().map(|r| scale_row(r, -1.0)).collect(),
            h.iter().map(|v| -v).collect(),
        ),
        CbfCone::Quad => sf.push_image(StdCone::Soc(n), g.to_vec(), h.to_vec()),
        CbfCone::RotatedQuad => {
            if n < 3 {
                return Err(Error::invalid("rotated quadratic cone needs at least 3 rows"));
            }
            // 2y₁y₂ ≥ ‖y₃..‖², y₁, y₂ ≥ 0  ⟺  (y₁ + y₂, y₁ − y₂, √2 y₃..) ∈ SOC
            let s2 = std::f64::consts::SQRT_2;
            let mut rows = vec![
                sparse_row(g[0].iter().chain(&g[1]).copied()),
                sparse_row(g[0].iter().copied().chain(g[1].iter().map(|&(j, v)| (j, -v)))),
            ];
            let mut consts = vec![h[0] + h[1], h[0] - h[1]];
            for t in 2..n {
                rows.push(scale_row(&g[t], s2));
                consts.push(s2 * h[t]);
            }
            sf.push_image(StdCone::Soc(n), rows, consts);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::LinearImageConstraint;

    #[test]
    fn trivial_program_text() {
        let p = ConicProgram::new(SymMatrix::<f64>::identity(1));
        let text = export_cbf(&p).unwrap();
        assert_eq!(
            text,
            "VER\n3\n\nOBJSENSE\nMIN\n\nPSDVAR\n1\n1\n\nCON\n1 1\nL= 1\n\nOBJFCOORD\n1\n0 0 0 1\n\nFCOORD\n1\n0 0 0 0 1\n\nBCOORD\n1\n0 -1\n\n"
        );
        let back = CbfModel::parse(&text).unwrap();
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn rotated_rows_are_halved() {
        let mut p = ConicProgram::new(SymMatrix::<f64>::identity(3));
        let rows = vec![SymMatrix::diag(&[1.0, 0.0, 0.0]), SymMatrix::diag(&[0.0, 1.0, 0.0]), SymMatrix::diag(&[0.0, 0.0, 1.0])];
        p.push(LinearImageConstraint::new("r", rows, ConeTag::Rsoc3));
        let model = CbfModel::from_program(&p).unwrap();
        assert!(model.fcoord.contains(&(1, 0, 0, 0, 0.5)));
        let sf = model.to_standard_form().unwrap();
        for (d, inside) in [([1.0, 4.0, 2.0], true), ([1.0, 4.0, 2.5], false)] {
            let x = crate::conic::svec(&SymMatrix::diag(&d));
            assert_eq!(sf.max_violation(&x) < 1e-12, inside);
        }
    }

    #[test]
    fn parse_errors_carry_lines() {
        assert!(CbfModel::parse("VER\n3\nCON\n2 1\nL= 1\n").is_err());
        assert!(CbfModel::parse("VER\n3\nFOO\n").is_err());
        assert!(CbfModel::parse("OBJSENSE\nMIN\n").is_err());
        let err = CbfModel::parse("VER\n3\nPSDVAR\n1\nx\n").unwrap_err();
        assert!(err.to_string().contains("line 5"), "{err}");
    }
}
