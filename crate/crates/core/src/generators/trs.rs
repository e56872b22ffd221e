use crate::conic::SymMatrix;

/// Global minimizer of `xᵀQx + 2qᵀx` over the unit ball, from the
/// eigen-decomposition of `Q` and the secular equation
/// `‖(Q + λI)⁻¹q‖ = 1`, including the hard case.
pub fn trust_region(q_mat: &SymMatrix<f64>, q: &[f64]) -> Vec<f64> {
    let n = q.len();
    let (vals, vecs) = q_mat.eigen();
    let gamma: Vec<f64> = (0..n).map(|k| (0..n).map(|i| vecs.get(i, k) * q[i]).sum()).collect();
    let lmin = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let qn = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let deg_tol = 1e-12 * (1.0 + qn);
    let from_basis = |y: &[f64]| -> Vec<f64> { (0..n).map(|i| (0..n).map(|k| vecs.get(i, k) * y[k]).sum()).collect() };
    // coordinates in the eigenbasis for shift λ, skipping the eigenspace of
    // λ_min when the shift makes it singular
    let coords = |lam: f64| -> Vec<f64> {
        (0..n)
            .map(|k| {
                let d = vals[k] + lam;
                if d.abs() <= 1e-14 * (1.0 + lam.abs()) { 0.0 } else { -gamma[k] / d }
            })
            .collect()
    };
    let nrm = |y: &[f64]| y.iter().map(|v| v * v).sum::<f64>().sqrt();

    let lbar = (-lmin).max(0.0);
    if lmin > 0.0 && nrm(&coords(0.0)) <= 1.0 {
        return from_basis(&coords(0.0));
    }
    let on_min: Vec<usize> = (0..n).filter(|&k| vals[k] - lmin <= 1e-12 * (1.0 + lmin.abs())).collect();
    let hard = on_min.iter().all(|&k| gamma[k].abs() <= deg_tol);
    if hard {
        let mut y = coords(lbar);
        if nrm(&y) <= 1.0 {
            let tau = (1.0 - nrm(&y).powi(2)).max(0.0).sqrt();
            if lmin < 0.0 {
                y[on_min[0]] = tau;
            }
            return from_basis(&y);
        }
    }
    let (mut lo, mut hi) = (lbar, lbar + qn + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if nrm(&coords(mid)) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    from_basis(&coords(hi))
}
