//! Eigenvalue lower bounds for rational symmetric matrices via integer
//! scaling, and the conditioning report for moment/localizing matrices.
//!
//! The rational path is authoritative: scale the matrix to integers, bound
//! every nonzero eigenvalue from below by (B*N)^-N, and undo the scaling.
//! The floating-point path only measures, it never certifies.

use num::{BigUint, Integer, One, Signed, Zero};

use crate::error::Error;
use crate::measures::{assemble_localizing_matrix, assemble_moment_matrix, MomentFunctional, SymMatrixQ};
use crate::par;
use crate::pop::{BitComplexity, POPInstance};
use crate::rational::{rat_to_f64, Int, Rat};

pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Every nonzero eigenvalue of a symmetric integer matrix with entries
/// bounded by B in absolute value has absolute value at least (B*N)^-N.
pub fn integer_eig_lower_bound(b: &Int, n_size: usize) -> Rat {
    assert!(n_size >= 1, "matrix size must be at least 1");
    assert!(b >= &Int::one(), "entry bound must be at least 1");
    let bn = b * Int::from(n_size);
    Rat::new(Int::one(), bn.pow(n_size as u32))
}

/// Scales a rational symmetric matrix to integers (C = lcm of denominators),
/// reads off the entry bound B of the scaled matrix, and returns the valid
/// lower bound (B*N)^-N / C on the smallest nonzero eigenvalue of M.
/// A zero matrix takes B := 1; the bound is then vacuous.
pub fn scaled_eig_bound(m: &SymMatrixQ) -> (Int, Int, Rat) {
    let n = m.size();
    let mut c = BigUint::one();
    for i in 0..n {
        for j in i..n {
            c = c.lcm(m.get(i, j).denom().magnitude());
        }
    }
    let c = Int::from(c);
    let mut b = Int::zero();
    for i in 0..n {
        for j in i..n {
            let scaled = (m.get(i, j) * Rat::from_integer(c.clone())).numer().abs();
            if scaled > b {
                b = scaled;
            }
        }
    }
    if b.is_zero() {
        b = Int::one();
    }
    let bound = integer_eig_lower_bound(&b, n) / Rat::from_integer(c.clone());
    (c, b, bound)
}

/// Floating-point measurement: smallest nonzero |eigenvalue| and numerical
/// rank under a relative tolerance. Returns +infinity when all eigenvalues
/// are numerically zero.
pub fn min_nonzero_eig(m: &SymMatrixQ, rank_tol: f64) -> (f64, usize) {
    assert!(rank_tol > 0.0);
    let ev = crate::linalg::sym_eigenvalues(&m.to_f64());
    let max_abs = ev.iter().fold(0.0f64, |a, &e| a.max(e.abs()));
    let cut = rank_tol * max_abs.max(1.0);
    let nonzero: Vec<f64> = ev.iter().map(|e| e.abs()).filter(|&a| a > cut).collect();
    let rank = nonzero.len();
    let min = nonzero.into_iter().fold(f64::INFINITY, f64::min);
    (min, rank)
}

/// Per-matrix record of the certified bound and the measured spectrum.
#[derive(Clone, Debug)]
pub struct MatrixConditioning {
    pub label: String,
    pub size: usize,
    pub common_denominator: Int,
    pub entry_bound: Int,
    pub lemma_bound: Rat,
    pub measured_min_nonzero_eig: f64,
    pub numerical_rank: usize,
    /// Set when the measured nonzero spectrum undercuts the certified bound,
    /// which would indicate an implementation bug.
    pub violates_bound: bool,
}

#[derive(Clone, Debug)]
pub struct ConditioningReport {
    pub records: Vec<MatrixConditioning>,
    /// Max bit-complexity over the moment table entries.
    pub moment_bit_complexity: u64,
    /// False when the instance has equality constraints: zero eigenvectors
    /// would need ideal-membership reasoning this artifact does not attempt.
    pub kernel_certified: bool,
}

impl ConditioningReport {
    pub fn any_violation(&self) -> bool {
        self.records.iter().any(|r| r.violates_bound)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,N,C,B,bound,measured_min_nonzero_eig,rank\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{:.6e},{:.6e},{}\n",
                r.label,
                r.size,
                r.common_denominator,
                r.entry_bound,
                rat_to_f64(&r.lemma_bound),
                r.measured_min_nonzero_eig,
                r.numerical_rank
            ));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<14} {:>4} {:>14} {:>14} {:>12} {:>12} {:>5}\n",
            "matrix", "N", "C", "B", "bound", "measured", "rank"
        );
        for r in &self.records {
            out.push_str(&format!(
                "{:<14} {:>4} {:>14} {:>14} {:>12.4e} {:>12.4e} {:>5}{}\n",
                r.label,
                r.size,
                r.common_denominator.to_string(),
                r.entry_bound.to_string(),
                rat_to_f64(&r.lemma_bound),
                r.measured_min_nonzero_eig,
                r.numerical_rank,
                if r.violates_bound { "  VIOLATION" } else { "" }
            ));
        }
        out
    }
}

fn analyze(label: String, m: &SymMatrixQ, rank_tol: f64) -> MatrixConditioning {
    let (c, b, bound) = scaled_eig_bound(m);
    let (measured, rank) = min_nonzero_eig(m, rank_tol);
    // Allow for float fuzz when comparing the measurement to the exact bound.
    let violates = rank > 0 && measured < rat_to_f64(&bound) * (1.0 - 1e-6);
    MatrixConditioning {
        label,
        size: m.size(),
        common_denominator: c,
        entry_bound: b,
        lemma_bound: bound,
        measured_min_nonzero_eig: measured,
        numerical_rank: rank,
        violates_bound: violates,
    }
}

/// Assembles the moment matrix and every localizing matrix of `l` for the
/// instance, certifies eigenvalue lower bounds via integer scaling, and
/// measures the actual nonzero spectrum in floating point.
pub fn analyze_conditioning(
    l: &MomentFunctional,
    inst: &POPInstance,
    t: u32,
) -> Result<ConditioningReport, Error> {
    let mut matrices = vec![("moment".to_string(), assemble_moment_matrix(l, t)?)];
    for (i, g) in inst.inequalities.iter().enumerate() {
        matrices.push((
            format!("localizing_g{}", i + 1),
            assemble_localizing_matrix(l, g, t)?,
        ));
    }
    let records = par::map(&matrices, |(label, m)| {
        analyze(label.clone(), m, DEFAULT_RANK_TOL)
    });
    let moment_bit_complexity = l.values().map(|(_, v)| v.bit_complexity()).max().unwrap_or(0);
    Ok(ConditioningReport {
        records,
        moment_bit_complexity,
        kernel_certified: inst.equalities.is_empty(),
    })
}
