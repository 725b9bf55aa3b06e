//! Dense floating-point helpers shared by the solver and the conditioning
//! diagnostics, plus exact rational rank for test oracles.

use nalgebra::DMatrix;
use num::{Signed, Zero};

use crate::measures::SymMatrixQ;
use crate::rational::Rat;

/// Eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Largest step a with s + a*ds >= 0 (as PSD matrices), via the Cholesky
/// factor of s. Returns f64::INFINITY when ds keeps the cone for all a.
pub fn max_psd_step(s: &DMatrix<f64>, ds: &DMatrix<f64>) -> f64 {
    let n = s.nrows();
    if n == 0 {
        return f64::INFINITY;
    }
    if !ds.iter().all(|v| v.is_finite()) {
        return 0.0;
    }
    let chol = match nalgebra::Cholesky::new(s.clone()) {
        Some(c) => c,
        // Nearly singular iterate: fall back to a tiny jitter.
        None => match nalgebra::Cholesky::new(s + DMatrix::identity(n, n) * 1e-12) {
            Some(c) => c,
            None => return 0.0,
        },
    };
    let l = chol.l();
    // T = L^-1 ds L^-T, symmetric; min eigenvalue bounds the step.
    let li = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .expect("triangular solve");
    let t = &li * ds * li.transpose();
    let t = (&t + t.transpose()) * 0.5;
    let lam_min = sym_eigenvalues(&t)[0];
    if lam_min >= -1e-13 {
        f64::INFINITY
    } else {
        -1.0 / lam_min
    }
}

/// Exact rank of a symmetric rational matrix by Gaussian elimination.
pub fn exact_rank(m: &SymMatrixQ) -> usize {
    let n = m.size();
    let mut a: Vec<Vec<Rat>> = (0..n)
        .map(|i| (0..n).map(|j| m.get(i, j).clone()).collect())
        .collect();
    let mut rank = 0;
    let mut row = 0;
    for col in 0..n {
        // Pick the largest pivot by absolute value for mild growth control.
        let pivot = (row..n)
            .filter(|&r| !a[r][col].is_zero())
            .max_by(|&x, &y| a[x][col].abs().cmp(&a[y][col].abs()));
        let Some(p) = pivot else { continue };
        a.swap(row, p);
        let inv = a[row][col].clone();
        for r in (row + 1)..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &inv;
            for c in col..n {
                let sub = &factor * &a[row][c];
                a[r][c] -= sub;
            }
        }
        rank += 1;
        row += 1;
        if row == n {
            break;
        }
    }
    rank
}
