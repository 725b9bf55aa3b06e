//! Weighted sum-of-squares certificates: extraction from the solver's dual,
//! rounding to low-bit-complexity rationals, exact residual accounting, and
//! a complete quadratic-module membership proof for the residual slack.
//!
//! The invariant that makes this sound: the rounded identity
//! f - lambda + E = sigma_0 + sum g_i sigma_i + sum h_j p_j holds exactly in
//! rational arithmetic because E is *defined* as the defect, and
//! R^{2t} ||E||_1 - E is expressed as an explicit member of the quadratic
//! module, so lambda - R^{2t} ||E||_1 is an unconditional lower bound on f
//! over the feasible set, whatever the floating-point solve did.

use num::{One, Signed, Zero};

use crate::error::Error;
use crate::par;
use crate::poly::{ExponentVec, Polynomial};
use crate::pop::{detect_explicit_bound, POPInstance};
use crate::rational::{
    exact_sqrt, f64_to_rat, floor_to_multiple, fmt_rat, parse_rat, rat, Rat,
};
use crate::sdp::StandardFormSDP;
use crate::solver::{SdpSolution, SolveStatus};

/// Unrounded certificate as read off the solver dual: lambda plus square
/// lists per constraint (index 0 is the implicit g_0 = 1) and ideal
/// multipliers per equality.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub lambda: Rat,
    /// squares[i] holds the s_{i,k} with deg(g_i s_{i,k}^2) <= 2t.
    pub squares: Vec<Vec<Polynomial>>,
    pub ideal_mults: Vec<Polynomial>,
}

/// One syntactically nonnegative quadratic-module term: multiplier times
/// g_{constraint_index}, with index 0 denoting the implicit 1.
#[derive(Clone, Debug, PartialEq)]
pub struct QmTerm {
    pub constraint_index: usize,
    pub kind: QmTermKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum QmTermKind {
    /// scale * poly^2 with scale >= 0.
    Square { scale: Rat, poly: Polynomial },
    /// A nonnegative rational constant.
    Constant(Rat),
}

impl QmTerm {
    fn scaled(&self, s: &Rat) -> QmTerm {
        let kind = match &self.kind {
            QmTermKind::Square { scale, poly } => QmTermKind::Square {
                scale: scale * s,
                poly: poly.clone(),
            },
            QmTermKind::Constant(c) => QmTermKind::Constant(c * s),
        };
        QmTerm {
            constraint_index: self.constraint_index,
            kind,
        }
    }

    /// The multiplier polynomial (scale * poly^2 or the constant).
    pub fn multiplier(&self, n: usize) -> Polynomial {
        match &self.kind {
            QmTermKind::Square { scale, poly } => poly.square().scale(scale),
            QmTermKind::Constant(c) => Polynomial::constant(n, c.clone()),
        }
    }

    pub fn is_syntactically_nonnegative(&self) -> bool {
        match &self.kind {
            QmTermKind::Square { scale, .. } => !scale.is_negative(),
            QmTermKind::Constant(c) => !c.is_negative(),
        }
    }
}

/// Certificate with every coefficient an integer multiple of the rounding
/// step, the exact residual polynomial, and the membership proof for the
/// residual slack.
#[derive(Clone, Debug)]
pub struct RoundedCertificate {
    pub base: Certificate,
    pub residual: Polynomial,
    pub l1_residual: Rat,
    /// lambda - R^{2t} * ||E||_1, a certified lower bound on f over S(g, h).
    pub adjusted_bound: Rat,
    /// Terms summing exactly to R^{2t} ||E||_1 - E.
    pub membership_proof: Vec<QmTerm>,
    pub round_eps: Rat,
    pub t: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QmSign {
    /// Certify R^{|gamma|} - x^gamma.
    Minus,
    /// Certify R^{|gamma|} + x^gamma.
    Plus,
}

/// Exact decomposition produced by [`power_gap_decompose`]: `terms` sum to
/// `target`, every term syntactically nonnegative on the feasible set.
#[derive(Clone, Debug)]
pub struct PowerGapDecomposition {
    pub terms: Vec<QmTerm>,
    /// The certified polynomial. Equals R^{|gamma|} -+ x^gamma whenever that
    /// has rational coefficients (|gamma| even, or R^2 a perfect square);
    /// for odd |gamma| with irrational R the constant is
    /// (R^2)^u (R^2 + 1) / 2 >= R^{|gamma|}, u = (|gamma|-1)/2.
    pub target: Polynomial,
    /// Constant term of the target.
    pub constant: Rat,
}

fn pow_rat(x: &Rat, k: u32) -> Rat {
    let mut p = Rat::one();
    for _ in 0..k {
        p *= x;
    }
    p
}

/// Splits gamma into alpha + beta with |alpha| = lo (greedy over
/// coordinates), |beta| = |gamma| - lo.
fn split_exponent(gamma: &ExponentVec, lo: u32) -> (ExponentVec, ExponentVec) {
    let mut remaining = lo;
    let mut alpha = vec![0u32; gamma.n()];
    let mut beta = vec![0u32; gamma.n()];
    for (i, &g) in gamma.exps().iter().enumerate() {
        let take = g.min(remaining);
        alpha[i] = take;
        beta[i] = g - take;
        remaining -= take;
    }
    debug_assert_eq!(remaining, 0);
    (ExponentVec::new(alpha), ExponentVec::new(beta))
}

/// Decomposition of R^{2|delta|} - x^{2 delta} by telescoping one squared
/// coordinate at a time through R^2 - x_j^2 = g_ball + sum_{i != j} x_i^2.
fn even_decomp(delta: &ExponentVec, rsq: &Rat, ball_index: usize) -> Vec<QmTerm> {
    let n = delta.n();
    let d = delta.total_degree();
    let mut terms = Vec::new();
    let mut prefix = ExponentVec::zeros(n);
    let mut remaining = delta.clone();
    for step in 0..d {
        let j = remaining
            .exps()
            .iter()
            .position(|&e| e > 0)
            .expect("degree left");
        let scale = pow_rat(rsq, d - 1 - step);
        if prefix.is_zero() {
            terms.push(QmTerm {
                constraint_index: ball_index,
                kind: QmTermKind::Constant(scale.clone()),
            });
        } else {
            terms.push(QmTerm {
                constraint_index: ball_index,
                kind: QmTermKind::Square {
                    scale: scale.clone(),
                    poly: Polynomial::monomial(prefix.clone(), Rat::one()),
                },
            });
        }
        for i in (0..n).filter(|&i| i != j) {
            terms.push(QmTerm {
                constraint_index: 0,
                kind: QmTermKind::Square {
                    scale: scale.clone(),
                    poly: Polynomial::monomial(prefix.add(&ExponentVec::unit(n, i)), Rat::one()),
                },
            });
        }
        prefix = prefix.add(&ExponentVec::unit(n, j));
        let mut exps = remaining.exps().to_vec();
        exps[j] -= 1;
        remaining = ExponentVec::new(exps);
    }
    terms
}

fn scale_terms(terms: Vec<QmTerm>, s: &Rat) -> Vec<QmTerm> {
    terms.iter().map(|t| t.scaled(s)).collect()
}

/// Exact quadratic-module decomposition of `constant -+ x^gamma` where the
/// constant is R^{|gamma|} when rational (see [`PowerGapDecomposition`]).
/// `ball_index` is the 1-based position of the ball constraint
/// R^2 - sum x_i^2 in the instance's inequality list.
///
/// Needs R^2 >= 1 and |gamma| <= 2t; every emitted square q has
/// deg(q^2) <= |gamma| rounded up to even.
pub fn power_gap_decompose(
    gamma: &ExponentVec,
    rsq: &Rat,
    t: u32,
    sign: QmSign,
    ball_index: usize,
) -> Result<PowerGapDecomposition, Error> {
    let deg = gamma.total_degree();
    if deg > 2 * t {
        return Err(Error::DegreeViolation(format!(
            "|gamma| = {deg} exceeds 2t = {}",
            2 * t
        )));
    }
    if rsq < &Rat::one() {
        return Err(Error::BallTooSmall(fmt_rat(rsq)));
    }
    let n = gamma.n();
    let minus = sign == QmSign::Minus;

    // Coordinatewise even, minus sign: pure telescoping.
    if minus && gamma.is_coordinatewise_even() {
        let delta = ExponentVec::new(gamma.exps().iter().map(|e| e / 2).collect());
        let constant = pow_rat(rsq, delta.total_degree());
        let target = Polynomial::constant(n, constant.clone())
            - Polynomial::monomial(gamma.clone(), Rat::one());
        return Ok(PowerGapDecomposition {
            terms: even_decomp(&delta, rsq, ball_index),
            target,
            constant,
        });
    }

    if deg % 2 == 0 {
        // Balanced split: R^{|gamma|} -+ x^gamma =
        // ((x^alpha -+ x^beta)^2 + (R^{2|alpha|} - x^{2 alpha})
        //  + (R^{2|beta|} - x^{2 beta})) / 2.
        let (alpha, beta) = split_exponent(gamma, deg / 2);
        let half = rat(1, 2);
        let mono_a = Polynomial::monomial(alpha.clone(), Rat::one());
        let mono_b = Polynomial::monomial(beta.clone(), Rat::one());
        let cross = if minus {
            mono_a - mono_b
        } else {
            mono_a + mono_b
        };
        let mut terms = Vec::new();
        if !cross.is_zero() {
            terms.push(QmTerm {
                constraint_index: 0,
                kind: QmTermKind::Square {
                    scale: half.clone(),
                    poly: cross,
                },
            });
        }
        terms.extend(scale_terms(even_decomp(&alpha, rsq, ball_index), &half));
        terms.extend(scale_terms(even_decomp(&beta, rsq, ball_index), &half));
        let constant = pow_rat(rsq, deg / 2);
        let sign_coeff = if minus { -Rat::one() } else { Rat::one() };
        let target = Polynomial::constant(n, constant.clone())
            + Polynomial::monomial(gamma.clone(), sign_coeff);
        return Ok(PowerGapDecomposition {
            terms,
            target,
            constant,
        });
    }

    // Odd degree: s-weighted identity with s = R when R^2 is a perfect
    // square (giving the constant R^{|gamma|} exactly), else s = R^2 so all
    // coefficients stay rational.
    let u = (deg - 1) / 2;
    let (alpha, beta) = split_exponent(gamma, u);
    let s = exact_sqrt(rsq).unwrap_or_else(|| rsq.clone());
    let half_over_s = Rat::one() / (Rat::from_integer(2.into()) * &s);
    let half_s = &s / Rat::from_integer(2.into());
    let sign_coeff = if minus { -Rat::one() } else { Rat::one() };
    // (1/(2s)) (s x^alpha -+ x^beta)^2 carries the -+x^gamma cross term.
    let cross = Polynomial::monomial(alpha.clone(), s.clone())
        + Polynomial::monomial(beta.clone(), sign_coeff.clone());
    let mut terms = vec![QmTerm {
        constraint_index: 0,
        kind: QmTermKind::Square {
            scale: half_over_s.clone(),
            poly: cross,
        },
    }];
    terms.extend(scale_terms(even_decomp(&alpha, rsq, ball_index), &half_s));
    terms.extend(scale_terms(
        even_decomp(&beta, rsq, ball_index),
        &half_over_s,
    ));
    // Constant: (s/2) (R^2)^u + (1/(2s)) (R^2)^{u+1}; equals R^{|gamma|}
    // when s = R.
    let constant = &half_s * pow_rat(rsq, u) + &half_over_s * pow_rat(rsq, u + 1);
    let target = Polynomial::constant(n, constant.clone())
        + Polynomial::monomial(gamma.clone(), sign_coeff);
    Ok(PowerGapDecomposition {
        terms,
        target,
        constant,
    })
}

/// Expands a quadratic-module term sum exactly: sum of multiplier * g_index,
/// with g_0 = 1 and g_i the instance inequalities (1-based).
pub fn qm_sum(terms: &[QmTerm], inst: &POPInstance) -> Result<Polynomial, Error> {
    let n = inst.n;
    let parts = par::map(terms, |term| {
        let mult = term.multiplier(n);
        if term.constraint_index == 0 {
            Ok(mult)
        } else {
            let g = inst
                .inequalities
                .get(term.constraint_index - 1)
                .ok_or_else(|| {
                    Error::Verification(format!(
                        "qm term references missing constraint g_{}",
                        term.constraint_index
                    ))
                })?;
            mult.checked_mul(g)
        }
    });
    let mut acc = Polynomial::zero(n);
    for p in parts {
        acc = acc.checked_add(&p?)?;
    }
    Ok(acc)
}

/// Reads the weighted-SOS certificate off the solver dual: Gram matrices are
/// the dual slack blocks (eigendecomposed, negative eigenvalues clipped),
/// ideal multipliers are the duals of the equality rows, and lambda is the
/// dual objective b'y.
pub fn extract_sos(
    sol: &SdpSolution,
    sdp: &StandardFormSDP,
    inst: &POPInstance,
    t: u32,
) -> Result<Certificate, Error> {
    if sol.status != SolveStatus::OptimalToEps {
        return Err(Error::MissingDual(format!(
            "solver status {:?} is not optimal-to-eps",
            sol.status
        )));
    }
    if sol.dual_slack_blocks.len() != sdp.block_dims.len() {
        return Err(Error::MissingDual("dual slack blocks missing".into()));
    }
    if sdp.t != t {
        return Err(Error::Invalid(format!(
            "level mismatch: SDP built at t = {}, extraction asked for t = {t}",
            sdp.t
        )));
    }
    let n = inst.n;
    let mut squares = Vec::with_capacity(sdp.block_dims.len());
    for (bi, z) in sol.dual_slack_blocks.iter().enumerate() {
        let basis = &sdp.block_index[bi];
        let eig = z.clone().symmetric_eigen();
        let lam_max = eig.eigenvalues.iter().fold(0.0f64, |a, &e| a.max(e.abs()));
        let cut = 1e-12 * lam_max.max(1.0);
        let mut list = Vec::new();
        for k in 0..eig.eigenvalues.len() {
            let lam = eig.eigenvalues[k];
            if lam <= cut {
                continue; // negatives clipped, numerically-zero dropped
            }
            let w = lam.sqrt();
            let mut s = Polynomial::zero(n);
            for (r, alpha) in basis.iter().enumerate() {
                let coef = f64_to_rat(w * eig.eigenvectors[(r, k)])?;
                s = s + Polynomial::monomial(alpha.clone(), coef);
            }
            if !s.is_zero() {
                list.push(s);
            }
        }
        squares.push(list);
    }
    let mut ideal_mults = vec![Polynomial::zero(n); inst.equalities.len()];
    for eq in &sdp.equality_rows {
        let yv = f64_to_rat(sol.dual_y[eq.row])?;
        ideal_mults[eq.j] = ideal_mults[eq.j].clone()
            + Polynomial::monomial(eq.alpha.clone(), yv);
    }
    let lambda = f64_to_rat(sol.dual_value)?;
    Ok(Certificate {
        lambda,
        squares,
        ideal_mults,
    })
}

/// sigma_i = sum_k s_{i,k}^2, expanded exactly.
fn sos_part(squares: &[Vec<Polynomial>], inst: &POPInstance) -> Polynomial {
    let n = inst.n;
    let blocks: Vec<(usize, &Polynomial)> = squares
        .iter()
        .enumerate()
        .flat_map(|(i, list)| list.iter().map(move |s| (i, s)))
        .collect();
    let parts = par::map(&blocks, |(i, s)| {
        let sq = s.square();
        if *i == 0 {
            sq
        } else {
            sq.checked_mul(&inst.inequalities[*i - 1])
                .expect("dimensions match")
        }
    });
    let mut acc = Polynomial::zero(n);
    for p in parts {
        acc = acc + p;
    }
    acc
}

fn ideal_part(mults: &[Polynomial], inst: &POPInstance) -> Polynomial {
    let mut acc = Polynomial::zero(inst.n);
    for (p, h) in mults.iter().zip(&inst.equalities) {
        acc = acc + p.checked_mul(h).expect("dimensions match");
    }
    acc
}

/// Rounds every certificate coefficient to an integer multiple of eps
/// (lambda rounds down so the bound only weakens), computes the residual
/// E = sum g_i sigma~_i + sum h_j p~_j - (f - lambda~) exactly, and attaches
/// the membership proof for R^{2t} ||E||_1 - E.
pub fn round_certificate(
    cert: &Certificate,
    eps: &Rat,
    inst: &POPInstance,
    t: u32,
) -> Result<RoundedCertificate, Error> {
    if !eps.is_positive() {
        return Err(Error::Invalid("rounding step must be positive".into()));
    }
    let bound = detect_explicit_bound(inst);
    if !bound.explicitly_bounded {
        return Err(Error::NotExplicitlyBounded(
            "certificate rounding requires the ball constraint R^2 - sum x_i^2".into(),
        ));
    }
    let rsq = bound.rsq.clone().unwrap();
    if rsq < Rat::one() {
        return Err(Error::BallTooSmall(fmt_rat(&rsq)));
    }
    let ball_index = bound.witness_index.unwrap() + 1;

    let lambda = floor_to_multiple(&cert.lambda, eps);
    let squares: Vec<Vec<Polynomial>> = cert
        .squares
        .iter()
        .map(|list| list.iter().map(|s| s.round_coeffs(eps)).collect())
        .collect();
    let ideal_mults: Vec<Polynomial> = cert
        .ideal_mults
        .iter()
        .map(|p| p.round_coeffs(eps))
        .collect();
    let base = Certificate {
        lambda: lambda.clone(),
        squares,
        ideal_mults,
    };

    // E := sum g sigma~ + sum h p~ - f + lambda~, the exact defect.
    let residual = sos_part(&base.squares, inst) + ideal_part(&base.ideal_mults, inst)
        - inst.objective.clone()
        + Polynomial::constant(inst.n, lambda.clone());
    if residual.degree() > 2 * t {
        return Err(Error::DegreeViolation(format!(
            "residual degree {} exceeds 2t = {}",
            residual.degree(),
            2 * t
        )));
    }
    let l1 = residual.l1_norm();
    let r2t = pow_rat(&rsq, t);
    let adjusted_bound = &lambda - &r2t * &l1;

    // Membership proof: R^{2t} ||E||_1 - E =
    // sum_gamma |E_gamma| (R^{2t} - sign(E_gamma) x^gamma), each bracket a
    // power-gap target plus a nonnegative constant top-up to R^{2t}.
    let entries: Vec<(ExponentVec, Rat)> = residual
        .terms()
        .map(|(e, c)| (e.clone(), c.clone()))
        .collect();
    let decomposed = par::map(&entries, |(gamma, coef)| {
        let sign = if coef.is_positive() {
            QmSign::Minus
        } else {
            QmSign::Plus
        };
        power_gap_decompose(gamma, &rsq, t, sign, ball_index).map(|d| (coef.abs(), d))
    });
    let mut membership_proof = Vec::new();
    for item in decomposed {
        let (weight, dec) = item?;
        for term in dec.terms {
            membership_proof.push(term.scaled(&weight));
        }
        let gap = &r2t - &dec.constant;
        debug_assert!(!gap.is_negative(), "top-up constant must be nonnegative");
        if !gap.is_zero() {
            membership_proof.push(QmTerm {
                constraint_index: 0,
                kind: QmTermKind::Constant(weight * gap),
            });
        }
    }

    Ok(RoundedCertificate {
        base,
        residual,
        l1_residual: l1,
        adjusted_bound,
        membership_proof,
        round_eps: eps.clone(),
        t,
    })
}

/// Outcome of the exact re-verification of a rounded certificate.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub identity_ok: bool,
    /// First offending monomial when the rounded identity fails.
    pub identity_failure: Option<ExponentVec>,
    pub degrees_ok: bool,
    pub degree_failure: Option<String>,
    pub membership_ok: bool,
    pub membership_failure: Option<String>,
    /// lambda - R^{2t} ||E||_1 recomputed from the certificate data.
    pub certified_bound: Rat,
}

impl VerificationReport {
    pub fn pass(&self) -> bool {
        self.identity_ok && self.degrees_ok && self.membership_ok
    }
}

/// Re-expands all products in exact rational arithmetic and checks
/// (a) the rounded identity with E exactly, (b) the degree bounds, and
/// (c) that the membership proof sums exactly to R^{2t} ||E||_1 - E with
/// every term syntactically nonnegative.
pub fn verify_certificate(
    rc: &RoundedCertificate,
    inst: &POPInstance,
    t: u32,
) -> VerificationReport {
    let n = inst.n;
    let bound = detect_explicit_bound(inst);
    let l1 = rc.residual.l1_norm();
    let (rsq, ball_index) = match (&bound.rsq, bound.witness_index) {
        (Some(r), Some(w)) => (r.clone(), w + 1),
        _ => (Rat::zero(), 0),
    };
    let r2t = pow_rat(&rsq, t);
    let certified_bound = &rc.base.lambda - &r2t * &l1;

    // (a) f - lambda + E = sigma~_0 + sum g_i sigma~_i + sum h_j p~_j
    let lhs = inst.objective.clone()
        - Polynomial::constant(n, rc.base.lambda.clone())
        + rc.residual.clone();
    let rhs = sos_part(&rc.base.squares, inst) + ideal_part(&rc.base.ideal_mults, inst);
    let diff = lhs - rhs;
    let identity_ok = diff.is_zero();
    let identity_failure = diff.terms().next().map(|(e, _)| e.clone());

    // (b) degree bounds
    let mut degrees_ok = true;
    let mut degree_failure = None;
    for (i, list) in rc.base.squares.iter().enumerate() {
        let gdeg = if i == 0 {
            0
        } else {
            match inst.inequalities.get(i - 1) {
                Some(g) => g.degree(),
                None => {
                    degrees_ok = false;
                    degree_failure = Some(format!("square list for missing g_{i}"));
                    continue;
                }
            }
        };
        for s in list {
            if gdeg + 2 * s.degree() > 2 * t {
                degrees_ok = false;
                degree_failure =
                    Some(format!("deg(g_{i} * s^2) = {} > 2t", gdeg + 2 * s.degree()));
            }
        }
    }
    for (j, p) in rc.base.ideal_mults.iter().enumerate() {
        match inst.equalities.get(j) {
            Some(h) => {
                if !p.is_zero() && h.degree() + p.degree() > 2 * t {
                    degrees_ok = false;
                    degree_failure = Some(format!(
                        "deg(h_{} * p) = {} > 2t",
                        j + 1,
                        h.degree() + p.degree()
                    ));
                }
            }
            None => {
                degrees_ok = false;
                degree_failure = Some(format!("ideal multiplier for missing h_{}", j + 1));
            }
        }
    }

    // (c) membership proof sums to R^{2t} ||E||_1 - E
    let mut membership_ok = true;
    let mut membership_failure = None;
    if !bound.explicitly_bounded {
        if !(rc.residual.is_zero() && rc.membership_proof.is_empty()) {
            membership_ok = false;
            membership_failure = Some("instance lacks the ball constraint".into());
        }
    } else {
        for (k, term) in rc.membership_proof.iter().enumerate() {
            if !term.is_syntactically_nonnegative() {
                membership_ok = false;
                membership_failure = Some(format!("term {k} has a negative weight"));
            }
            if term.constraint_index != 0 && term.constraint_index != ball_index {
                membership_ok = false;
                membership_failure = Some(format!(
                    "term {k} references g_{} (only 1 and the ball are allowed)",
                    term.constraint_index
                ));
            }
            let mult_deg = term.multiplier(n).degree()
                + if term.constraint_index == 0 { 0 } else { 2 };
            if mult_deg > 2 * t {
                membership_ok = false;
                membership_failure = Some(format!("term {k} exceeds degree 2t"));
            }
        }
        if membership_ok {
            match qm_sum(&rc.membership_proof, inst) {
                Ok(sum) => {
                    let expect = Polynomial::constant(n, &r2t * &l1) - rc.residual.clone();
                    let diff = sum - expect;
                    if !diff.is_zero() {
                        membership_ok = false;
                        let mono = diff.terms().next().map(|(e, _)| e.clone());
                        membership_failure =
                            Some(format!("sum mismatch at monomial {mono:?}"));
                    }
                }
                Err(e) => {
                    membership_ok = false;
                    membership_failure = Some(e.to_string());
                }
            }
        }
    }

    VerificationReport {
        identity_ok,
        identity_failure,
        degrees_ok,
        degree_failure,
        membership_ok,
        membership_failure,
        certified_bound,
    }
}

// ---------------------------------------------------------------------------
// Certificate file format.
// ---------------------------------------------------------------------------

/// Text form: header `lambda p/q` and `t <int>`, then `square i k : <poly>`,
/// `ideal j : <poly>`, `residual : <poly>`, and `qmterm i : const p/q` or
/// `qmterm i : square p/q : <poly>` lines.
pub fn write_certificate(rc: &RoundedCertificate) -> String {
    let mut out = String::new();
    out.push_str(&format!("lambda {}\n", fmt_rat(&rc.base.lambda)));
    out.push_str(&format!("t {}\n", rc.t));
    out.push_str(&format!("round_eps {}\n", fmt_rat(&rc.round_eps)));
    for (i, list) in rc.base.squares.iter().enumerate() {
        for (k, s) in list.iter().enumerate() {
            out.push_str(&format!("square {i} {} : {s}\n", k + 1));
        }
    }
    for (j, p) in rc.base.ideal_mults.iter().enumerate() {
        out.push_str(&format!("ideal {} : {p}\n", j + 1));
    }
    out.push_str(&format!("residual : {}\n", rc.residual));
    for term in &rc.membership_proof {
        match &term.kind {
            QmTermKind::Constant(c) => {
                out.push_str(&format!(
                    "qmterm {} : const {}\n",
                    term.constraint_index,
                    fmt_rat(c)
                ));
            }
            QmTermKind::Square { scale, poly } => {
                out.push_str(&format!(
                    "qmterm {} : square {} : {poly}\n",
                    term.constraint_index,
                    fmt_rat(scale)
                ));
            }
        }
    }
    out
}

/// Parses the certificate text; `n` is the ambient dimension of the
/// instance the certificate refers to. The stored residual is trusted as
/// written; verification recomputes everything else.
pub fn parse_certificate(src: &str, n: usize) -> Result<RoundedCertificate, Error> {
    let mut lambda: Option<Rat> = None;
    let mut t: Option<u32> = None;
    let mut round_eps = Rat::one();
    let mut squares: Vec<Vec<Polynomial>> = Vec::new();
    let mut ideal_mults: Vec<Polynomial> = Vec::new();
    let mut residual: Option<Polynomial> = None;
    let mut membership_proof = Vec::new();

    for (lineno, raw) in src.lines().enumerate() {
        let line = lineno + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let at_line = |e: Error| match e {
            Error::Parse { col, msg, .. } => Error::parse(line, col, msg),
            other => other,
        };
        let (key, rest) = text
            .split_once(char::is_whitespace)
            .map(|(k, r)| (k, r.trim()))
            .unwrap_or((text, ""));
        match key {
            "lambda" => lambda = Some(parse_rat(rest).map_err(at_line)?),
            "t" => {
                t = Some(rest.parse().map_err(|_| Error::parse(line, 1, "bad t"))?);
            }
            "round_eps" => round_eps = parse_rat(rest).map_err(at_line)?,
            "square" => {
                let (head, poly_src) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::parse(line, 1, "missing ':'"))?;
                let mut idx = head.split_whitespace();
                let i: usize = idx
                    .next()
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::parse(line, 1, "bad square index"))?;
                let _k = idx.next();
                let p = Polynomial::parse(poly_src.trim(), n).map_err(at_line)?;
                while squares.len() <= i {
                    squares.push(Vec::new());
                }
                squares[i].push(p);
            }
            "ideal" => {
                let (head, poly_src) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::parse(line, 1, "missing ':'"))?;
                let j: usize = head
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(line, 1, "bad ideal index"))?;
                if j == 0 {
                    return Err(Error::parse(line, 1, "ideal indices are 1-based"));
                }
                let p = Polynomial::parse(poly_src.trim(), n).map_err(at_line)?;
                while ideal_mults.len() < j {
                    ideal_mults.push(Polynomial::zero(n));
                }
                ideal_mults[j - 1] = p;
            }
            "residual" => {
                let poly_src = rest
                    .strip_prefix(':')
                    .ok_or_else(|| Error::parse(line, 1, "missing ':'"))?;
                residual = Some(Polynomial::parse(poly_src.trim(), n).map_err(at_line)?);
            }
            "qmterm" => {
                let (head, body) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::parse(line, 1, "missing ':'"))?;
                let ci: usize = head
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(line, 1, "bad qmterm index"))?;
                let body = body.trim();
                let kind = if let Some(c) = body.strip_prefix("const") {
                    QmTermKind::Constant(parse_rat(c.trim()).map_err(at_line)?)
                } else if let Some(srest) = body.strip_prefix("square") {
                    let (scale_src, poly_src) = srest
                        .split_once(':')
                        .ok_or_else(|| Error::parse(line, 1, "missing ':' after scale"))?;
                    QmTermKind::Square {
                        scale: parse_rat(scale_src.trim()).map_err(at_line)?,
                        poly: Polynomial::parse(poly_src.trim(), n).map_err(at_line)?,
                    }
                } else {
                    return Err(Error::parse(line, 1, "qmterm must be 'const' or 'square'"));
                };
                membership_proof.push(QmTerm {
                    constraint_index: ci,
                    kind,
                });
            }
            other => {
                return Err(Error::parse(line, 1, format!("unknown directive '{other}'")));
            }
        }
    }
    let lambda = lambda.ok_or_else(|| Error::parse(0, 0, "missing lambda header"))?;
    let t = t.ok_or_else(|| Error::parse(0, 0, "missing t header"))?;
    let residual = residual.unwrap_or_else(|| Polynomial::zero(n));
    if squares.is_empty() {
        squares.push(Vec::new());
    }
    let l1 = residual.l1_norm();
    Ok(RoundedCertificate {
        base: Certificate {
            lambda,
            squares,
            ideal_mults,
        },
        l1_residual: l1,
        residual,
        // Recomputed against the instance during verification.
        adjusted_bound: Rat::zero(),
        membership_proof,
        round_eps,
        t,
    })
}
