//! Jacobi-preconditioned conjugate gradients for `−Δ_h + diag(shift)`.

use crate::domain::{apply_neg_laplacian, dot, neg_laplacian_diagonal, Grid};

pub(crate) enum Stop {
    /// `Σ |r_i| h^dim <= tol`.
    WeightedL1(f64),
    /// `‖r‖₂ <= tol · ‖b‖₂`.
    Relative(f64),
}

pub(crate) struct CgOutcome {
    pub iterations: usize,
    pub converged: bool,
}

/// Solves `(−Δ_h + diag(shift)) x = b` starting from the contents of `x`.
/// `shift` must be nonnegative so the operator stays SPD.
pub(crate) fn solve(
    grid: &Grid,
    shift: Option<&[f64]>,
    b: &[f64],
    x: &mut [f64],
    stop: Stop,
    max_iter: usize,
) -> CgOutcome {
    let len = b.len();
    let vol = grid.cell_volume();
    let diag0 = neg_laplacian_diagonal(grid);
    let inv_diag: Vec<f64> = match shift {
        Some(s) => s.iter().map(|d| 1.0 / (diag0 + d)).collect(),
        None => vec![1.0 / diag0; len],
    };

    let mut r = vec![0.0; len];
    apply_neg_laplacian(grid, x, shift, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let b_norm = dot(b, b).sqrt();
    // Below this the recursive residual is roundoff.
    let floor = 1e-15 * b_norm;
    let done = |r: &[f64]| match stop {
        Stop::WeightedL1(tol) => r.iter().map(|v| v.abs()).sum::<f64>() * vol <= tol,
        Stop::Relative(rel) => dot(r, r).sqrt() <= rel * b_norm,
    };
    if b_norm == 0.0 && dot(x, x) == 0.0 {
        return CgOutcome {
            iterations: 0,
            converged: true,
        };
    }
    if done(&r) {
        return CgOutcome {
            iterations: 0,
            converged: true,
        };
    }

    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, m)| a * m).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; len];
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        apply_neg_laplacian(grid, &p, shift, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return CgOutcome {
                iterations: it,
                converged: false,
            };
        }
        let alpha = rz / pap;
        for i in 0..len {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if done(&r) || dot(&r, &r).sqrt() <= floor {
            return CgOutcome {
                iterations: it,
                converged: true,
            };
        }
        for i in 0..len {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..len {
            p[i] = z[i] + beta * p[i];
        }
    }
    CgOutcome {
        iterations: max_iter,
        converged: false,
    }
}
