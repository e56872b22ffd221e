//! A small operator-splitting conic solver, used as an independent second
//! backend for cross-checking. Same iteration as COSMO with `P = 0`:
//!
//! ```text
//! (σI + AᵀRA) x̃ = σx − c + Aᵀ(R(b − s) + y)
//! s̃ = b − Ax̃
//! s⁺ = Π_K(αs̃ + (1−α)s + R⁻¹y)
//! y⁺ = y + R(αs̃ + (1−α)s − s⁺)
//! ```
//!
//! with over-relaxation `α`. Here `y` is the multiplier of the dual cone, so
//! optimality reads `c = Aᵀy`. `R` is diagonal with a larger penalty on
//! equality rows; the base penalty adapts to the primal/dual residual balance.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::conic::{smat, svec, SolveStatus};
use crate::solver::standard::{StandardForm, StdCone};
use crate::solver::{RawSolution, SolverOptions};

const SIGMA: f64 = 1e-6;
const ALPHA: f64 = 1.6;
const EQ_SCALE: f64 = 1e3;
const ADAPT_EVERY: u32 = 25;

fn project_soc(v: &mut [f64]) {
    let t = v[0];
    let nrm = v[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
    if nrm <= t {
        return;
    }
    if nrm <= -t {
        v.iter_mut().for_each(|x| *x = 0.0);
        return;
    }
    let a = (t + nrm) / 2.0;
    v[0] = a;
    for x in &mut v[1..] {
        *x *= a / nrm;
    }
}

fn project_psd(v: &mut [f64]) {
    let m = smat(v).expect("svec block has triangular length");
    let (vals, vecs) = m.eigen();
    if vals.iter().all(|&l| l >= 0.0) {
        return;
    }
    let p = m.dim();
    let mut out = crate::conic::SymMatrix::zeros(p);
    for (k, &l) in vals.iter().enumerate() {
        if l > 0.0 {
            out.add_assign_scaled(l, &crate::conic::SymMatrix::outer(&vecs.column(k)));
        }
    }
    v.copy_from_slice(&svec(&out));
}

fn project(cones: &[StdCone], s: &mut [f64]) {
    let mut off = 0;
    for &c in cones {
        let blk = &mut s[off..off + c.size()];
        off += c.size();
        match c {
            StdCone::Zero(_) => blk.iter_mut().for_each(|x| *x = 0.0),
            StdCone::Nonneg(_) => blk.iter_mut().for_each(|x| *x = x.max(0.0)),
            StdCone::Soc(_) => project_soc(blk),
            StdCone::Psd(_) => project_psd(blk),
        }
    }
}

struct Ops {
    a: DMatrix<f64>,
    at: DMatrix<f64>,
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn factor(ops: &Ops, r: &DVector<f64>) -> Option<Cholesky<f64, Dyn>> {
    let mut ra = ops.a.clone();
    for (i, mut row) in ra.row_iter_mut().enumerate() {
        row *= r[i];
    }
    let mut k = &ops.at * ra;
    for i in 0..k.nrows() {
        k[(i, i)] += SIGMA;
    }
    Cholesky::new(k)
}

pub(crate) fn solve(sf: &StandardForm, opts: &SolverOptions) -> RawSolution {
    let start = Instant::now();
    let (m, n) = (sf.num_rows(), sf.num_vars);
    let mut a = DMatrix::zeros(m, n);
    for (i, row) in sf.rows.iter().enumerate() {
        for &(j, v) in row {
            a[(i, j)] = v;
        }
    }
    let ops = Ops { at: a.transpose(), a };
    let b = DVector::from_column_slice(&sf.b);
    let c = DVector::from_column_slice(&sf.c);
    let eq_mask: Vec<bool> = sf
        .cones
        .iter()
        .flat_map(|&cn| std::iter::repeat(matches!(cn, StdCone::Zero(_))).take(cn.size()))
        .collect();
    let penalties = |rho: f64| DVector::from_iterator(m, eq_mask.iter().map(|&eq| if eq { rho * EQ_SCALE } else { rho }));

    let eps = opts.rel_tol.max(1e-9);
    let mut rho = 0.1;
    let mut r = penalties(rho);
    let Some(mut chol) = factor(&ops, &r) else {
        return RawSolution::failed(n, SolveStatus::NumericalFailure, start.elapsed().as_secs_f64());
    };
    let mut x = DVector::zeros(n);
    let mut s = DVector::zeros(m);
    let mut y = DVector::zeros(m);
    let mut status = SolveStatus::NumericalFailure;
    let mut iters = 0;
    for k in 1..=opts.max_iter.max(1) {
        iters = k;
        let rhs = &x * SIGMA - &c + &ops.at * (r.component_mul(&(&b - &s)) + &y);
        let xt = chol.solve(&rhs);
        let axt = &ops.a * &xt;
        // s̃ = b − A x̃ restricted to the slack, then over-relaxed
        let st = &b - &axt;
        let x_new = &xt * ALPHA + &x * (1.0 - ALPHA);
        let s_rel = &st * ALPHA + &s * (1.0 - ALPHA);
        let mut s_new = &s_rel + y.component_div(&r);
        project(&sf.cones, s_new.as_mut_slice());
        y += r.component_mul(&(&s_rel - &s_new));
        x = x_new;
        s = s_new;

        if k % 5 == 0 || k == opts.max_iter {
            let ax = &ops.a * &x;
            let r_prim = inf_norm(&(&ax + &s - &b));
            let aty = &ops.at * &y;
            let r_dual = inf_norm(&(&c - &aty));
            let p_scale = inf_norm(&ax).max(inf_norm(&s)).max(inf_norm(&b)).max(1.0);
            let d_scale = inf_norm(&aty).max(inf_norm(&c)).max(1.0);
            let pobj = c.dot(&x);
            let dobj = b.dot(&y);
            let gap = (pobj - dobj).abs();
            if !(r_prim.is_finite() && r_dual.is_finite()) {
                break;
            }
            if r_prim <= eps * p_scale && r_dual <= eps * d_scale && gap <= eps * (1.0 + pobj.abs().max(dobj.abs())) {
                status = SolveStatus::Optimal;
                break;
            }
            if start.elapsed().as_secs_f64() > opts.time_limit_s {
                break;
            }
            if k % ADAPT_EVERY == 0 {
                let ratio = ((r_prim / p_scale) / (r_dual / d_scale).max(1e-300)).sqrt();
                let new_rho = (rho * ratio).clamp(1e-6, 1e6);
                if new_rho > 5.0 * rho || new_rho < rho / 5.0 {
                    rho = new_rho;
                    r = penalties(rho);
                    match factor(&ops, &r) {
                        Some(f) => chol = f,
                        None => break,
                    }
                }
            }
            if k == opts.max_iter {
                let loose = 1e3 * eps;
                if r_prim <= loose * p_scale && r_dual <= loose * d_scale {
                    status = SolveStatus::NearOptimal;
                }
            }
        }
    }
    let duality_gap = status.is_usable().then(|| (c.dot(&x) - b.dot(&y)).abs());
    RawSolution {
        x: x.as_slice().to_vec(),
        status,
        iterations: iters,
        solve_time_s: start.elapsed().as_secs_f64(),
        duality_gap,
    }
}
