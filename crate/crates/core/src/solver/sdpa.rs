//! Sparse SDPA format (`.dat-s`).
//!
//! SDPA solves the pair `min cᵀx s.t. Σ Fᵢxᵢ − F₀ ⪰ 0` and
//! `max F₀•Y s.t. Fᵢ•Y = cᵢ, Y ⪰ 0`. A program is written in the second
//! form with `Y = blockdiag(W, aux)` and `F₀ = −C`, so the optimal value of
//! `min C•W` is the negated SDPA dual objective. The auxiliary blocks are
//! - one diagonal block holding the slacks of every nonnegative row;
//! - one block per SOC (its arrow matrix), RSOC (its 2×2 Two matrix) and PSD
//!   image, each tied to `W` by one equality per upper-triangle entry.
//!
//! Zero rows become plain equalities. A comment line at the top of every
//! written file records the sign convention.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::conic::{svec_index, svec_len, ConeTag, ConicProgram, SymMatrix};
use crate::error::{Error, Result};
use crate::scalar::RealScalar;
use crate::solver::standard::{sparse_row, SparseRow, StandardForm, StdCone};

pub const SIGN_COMMENT: &str =
    "\"max F0.Y s.t. Fi.Y = ci, Y psd; F0 = -C, so min C.W equals minus this value; block 1 is W";

/// Entries use zero-based block, row and column indices with `i ≤ j`.
/// A negative block size marks a diagonal block.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SdpaModel {
    pub comments: Vec<String>,
    pub blocks: Vec<i64>,
    pub c: Vec<f64>,
    /// `(matrix, block, i, j) → value`; matrix 0 is `F₀`.
    pub entries: BTreeMap<(usize, usize, usize, usize), f64>,
}

/// Writes a program as sparse SDPA text.
pub fn export_sdpa<T: RealScalar>(program: &ConicProgram<T>) -> Result<String> {
    Ok(SdpaModel::from_program(program)?.to_text())
}

impl SdpaModel {
    fn add(&mut self, mat: usize, blk: usize, i: usize, j: usize, v: f64) {
        if v != 0.0 {
            *self.entries.entry((mat, blk, i.min(j), i.max(j))).or_insert(0.0) += v;
        }
    }

    /// Adds `M•W` to constraint `mat` (block 0 is `W`).
    fn add_w(&mut self, mat: usize, m: &SymMatrix<f64>, scale: f64) {
        for (i, j, v) in m.upper_nonzeros() {
            self.add(mat, 0, i, j, scale * v);
        }
    }

    /// Adds the coefficient that makes `F•Y` pick out entry `(i, j)` of a block.
    fn add_pick(&mut self, mat: usize, blk: usize, i: usize, j: usize, scale: f64) {
        self.add(mat, blk, i, j, if i == j { scale } else { 0.5 * scale });
    }

    fn new_equality(&mut self, rhs: f64) -> usize {
        self.c.push(rhs);
        self.c.len()
    }

    pub fn from_program<T: RealScalar>(program: &ConicProgram<T>) -> Result<Self> {
        program.validate()?;
        let f = |m: &SymMatrix<T>| m.map(|v| v.to_f64_lossy());
        let inv_s2 = 1.0 / std::f64::consts::SQRT_2;
        let mut model = SdpaModel { comments: vec![SIGN_COMMENT.to_string()], ..Default::default() };
        model.blocks.push(program.var_dim as i64);
        model.add_w(0, &f(&program.objective), -1.0);

        let (ni, nj) = program.normalization;
        let eq = model.new_equality(1.0);
        model.add_pick(eq, 0, ni, nj, 1.0);

        let num_nonneg: usize =
            program.constraints.iter().map(|c| if let ConeTag::Nonneg(k) = c.cone { k } else { 0 }).sum();
        let diag_blk = (num_nonneg > 0).then(|| {
            model.blocks.push(-(num_nonneg as i64));
            1
        });
        let mut next_slack = 0;

        for con in &program.constraints {
            let coeffs: Vec<SymMatrix<f64>> = con.coeffs.iter().map(f).collect();
            // entry (k, l) of the block as a linear form in W, or None if the
            // entry must vanish
            let block: Option<(usize, Box<dyn Fn(usize, usize) -> Option<SymMatrix<f64>>>)> = match con.cone {
                ConeTag::Zero(_) => {
                    for m in &coeffs {
                        let eq = model.new_equality(0.0);
                        model.add_w(eq, m, 1.0);
                    }
                    None
                }
                ConeTag::Nonneg(_) => {
                    let blk = diag_blk.expect("diagonal block exists when nonnegative rows do");
                    for m in &coeffs {
                        let eq = model.new_equality(0.0);
                        model.add_w(eq, m, 1.0);
                        model.add(eq, blk, next_slack, next_slack, -1.0);
                        next_slack += 1;
                    }
                    None
                }
                ConeTag::Soc(k) => {
                    let cs = coeffs.clone();
                    Some((k, Box::new(move |a, b| match (a, b) {
                        (a, b) if a == b => Some(cs[0].clone()),
                        (0, t) => Some(cs[t].clone()),
                        _ => None,
                    })))
                }
                ConeTag::Rsoc3 => {
                    let cs = coeffs.clone();
                    Some((2, Box::new(move |a, b| Some(cs[if a == b { a } else { 2 }].clone()))))
                }
                ConeTag::PsdImage(p) => {
                    let cs = coeffs.clone();
                    Some((p, Box::new(move |a, b| {
                        let m = &cs[svec_index(a, b)];
                        Some(if a == b { m.clone() } else { m.scaled(inv_s2) })
                    })))
                }
            };
            if let Some((p, entry)) = block {
                model.blocks.push(p as i64);
                let blk = model.blocks.len() - 1;
                for b in 0..p {
                    for a in 0..=b {
                        let eq = model.new_equality(0.0);
                        model.add_pick(eq, blk, a, b, 1.0);
                        if let Some(m) = entry(a, b) {
                            model.add_w(eq, &m, -1.0);
                        }
                    }
                }
            }
        }
        Ok(model)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.comments {
            writeln!(s, "{c}").unwrap();
        }
        writeln!(s, "{}", self.c.len()).unwrap();
        writeln!(s, "{}", self.blocks.len()).unwrap();
        let join = |v: Vec<String>| v.join(" ");
        writeln!(s, "{}", join(self.blocks.iter().map(|b| b.to_string()).collect())).unwrap();
        writeln!(s, "{}", join(self.c.iter().map(|c| c.to_string()).collect())).unwrap();
        for (&(m, b, i, j), v) in &self.entries {
            writeln!(s, "{m} {} {} {} {v}", b + 1, i + 1, j + 1).unwrap();
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut model = SdpaModel::default();
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();
        while let Some((_, l)) = lines.peek() {
            if l.starts_with('"') || l.starts_with('*') {
                model.comments.push(l.to_string());
                lines.next();
            } else {
                break;
            }
        }
        // the two counts may be followed by free text; `{ } ( ) ,` separate
        // numbers everywhere else
        let mut header = |what: &str| -> Result<(usize, String)> {
            let (n, l) = lines.next().ok_or_else(|| Error::parse(0, format!("unexpected end of file, expected {what}")))?;
            let first = l.split(|ch: char| ch.is_whitespace() || "{}(),=".contains(ch)).find(|t| !t.is_empty());
            Ok((n, first.unwrap_or("").to_string()))
        };
        let m_tok = header("the number of constraints")?;
        let nb_tok = header("the number of blocks")?;
        let mut tokens = lines.flat_map(|(n, l)| {
            l.split(|ch: char| ch.is_whitespace() || "{}(),".contains(ch))
                .filter(|t| !t.is_empty())
                .map(move |t| (n, t.to_string()))
                .collect::<Vec<_>>()
        });
        let mut next = |what: &str| tokens.next().ok_or_else(|| Error::parse(0, format!("unexpected end of file, expected {what}")));
        fn int<I: std::str::FromStr>((line, s): &(usize, String)) -> Result<I> {
            s.parse().map_err(|_| Error::parse(*line, format!("bad integer '{s}'")))
        }
        fn real((line, s): &(usize, String)) -> Result<f64> {
            s.parse().map_err(|_| Error::parse(*line, format!("bad number '{s}'")))
        }
        let m: usize = int(&m_tok)?;
        let nb: usize = int(&nb_tok)?;
        for _ in 0..nb {
            let t = next("a block size")?;
            let b: i64 = int(&t)?;
            if b == 0 {
                return Err(Error::parse(t.0, "block size must be nonzero"));
            }
            model.blocks.push(b);
        }
        for _ in 0..m {
            model.c.push(real(&next("an objective coefficient")?)?);
        }
        while let Ok(first) = next("an entry") {
            let mat: usize = int(&first)?;
            let blk: usize = int(&next("a block index")?)?;
            let i: usize = int(&next("a row index")?)?;
            let j: usize = int(&next("a column index")?)?;
            let v = real(&next("a value")?)?;
            let line = first.0;
            if mat > m || blk == 0 || blk > nb {
                return Err(Error::parse(line, "matrix or block index out of range"));
            }
            let size = model.blocks[blk - 1];
            let p = size.unsigned_abs() as usize;
            if i == 0 || j == 0 || i > p || j > p || (size < 0 && i != j) {
                return Err(Error::parse(line, "entry outside its block"));
            }
            model.add(mat, blk - 1, i - 1, j - 1, v);
        }
        Ok(model)
    }

    /// `min −F₀•Y s.t. Fᵢ•Y = cᵢ`, with one PSD cone per block and a
    /// nonnegative cone per diagonal block. Variables are the `svec` of each
    /// PSD block (or the diagonal), in block order.
    pub fn to_standard_form(&self) -> Result<StandardForm> {
        let mut offsets = Vec::with_capacity(self.blocks.len());
        let mut nv = 0;
        for &b in &self.blocks {
            offsets.push(nv);
            nv += if b < 0 { b.unsigned_abs() as usize } else { svec_len(b as usize) };
        }
        let s2 = std::f64::consts::SQRT_2;
        let var = |blk: usize, i: usize, j: usize, v: f64| -> (usize, f64) {
            if self.blocks[blk] < 0 {
                (offsets[blk] + i, v)
            } else if i == j {
                (offsets[blk] + svec_index(i, j), v)
            } else {
                (offsets[blk] + svec_index(i, j), s2 * v)
            }
        };
        let mut sf = StandardForm::new(nv);
        let mut g: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.c.len()];
        for (&(mat, blk, i, j), &v) in &self.entries {
            let (idx, coef) = var(blk, i, j, v);
            if mat == 0 {
                sf.c[idx] -= coef;
            } else {
                g[mat - 1].push((idx, coef));
            }
        }
        if !g.is_empty() {
            let rows: Vec<SparseRow> = g.into_iter().map(sparse_row).collect();
            sf.push_image(StdCone::Zero(rows.len()), rows, self.c.iter().map(|c| -c).collect());
        }
        for (blk, &b) in self.blocks.iter().enumerate() {
            let n = if b < 0 { b.unsigned_abs() as usize } else { svec_len(b as usize) };
            let rows = (0..n).map(|t| vec![(offsets[blk] + t, 1.0)]).collect();
            let cone = if b < 0 { StdCone::Nonneg(n) } else { StdCone::Psd(b as usize) };
            sf.push_image(cone, rows, vec![0.0; n]);
        }
        sf.validate()?;
        Ok(sf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{svec, LinearImageConstraint};

    #[test]
    fn trivial_program_text() {
        let p = ConicProgram::new(SymMatrix::<f64>::identity(1));
        let text = export_sdpa(&p).unwrap();
        assert_eq!(text, format!("{SIGN_COMMENT}\n1\n1\n1\n1\n0 1 1 1 -1\n1 1 1 1 1\n"));
        assert_eq!(SdpaModel::parse(&text).unwrap().to_text(), text);
    }

    #[test]
    fn separators_and_diagonal_blocks() {
        let text = "* test\n2 =mdim\n2 =nblocks\n{2, -1}\n{1.0, 2.0}\n0 1 1 2 0.5\n1 1 1 1 1\n2 2 1 1 1\n";
        let m = SdpaModel::parse(text).unwrap();
        assert_eq!(m.blocks, vec![2, -1]);
        assert_eq!(m.c, vec![1.0, 2.0]);
        let sf = m.to_standard_form().unwrap();
        assert_eq!(sf.num_vars, 4);
        assert_eq!(sf.cones, vec![StdCone::Zero(2), StdCone::Psd(2), StdCone::Nonneg(1)]);
        assert!(SdpaModel::parse("1\n1\n-1\n1\n1 1 1 2 1\n").is_err());
    }

    #[test]
    fn soc_block_matches_cone() {
        let mut p = ConicProgram::new(SymMatrix::<f64>::identity(3));
        let rows = (0..3).map(|t| SymMatrix::from_upper(3, |i, j| if i == t && j == t { 1.0 } else { 0.0 })).collect();
        p.push(LinearImageConstraint::new("q", rows, ConeTag::Soc(3)));
        let sf = SdpaModel::from_program(&p).unwrap().to_standard_form().unwrap();
        // W = diag(d) with the SOC on (W₀₀, W₁₁, W₂₂) and the arrow block filled in
        for (d, inside) in [([1.0, 0.5, 0.5], true), ([1.0, 1.0, 1.0], false)] {
            let w = SymMatrix::diag(&d);
            let mut arrow = SymMatrix::zeros(3);
            for t in 0..3 {
                arrow.set(t, t, d[0]);
            }
            arrow.set(0, 1, d[1]);
            arrow.set(0, 2, d[2]);
            let x: Vec<f64> = svec(&w).into_iter().chain(svec(&arrow)).collect();
            assert_eq!(sf.max_violation(&x) < 1e-12, inside, "{d:?}");
        }
    }

}
