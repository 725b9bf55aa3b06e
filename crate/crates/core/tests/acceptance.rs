//! Acceptance suite: every release gate runs here, one test per criterion,
//! each printing a single PASS line with the measured numbers (visible with
//! `cargo test --test acceptance -- --nocapture`).

use num::{One, Signed, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use momentsos::certificate::{
    extract_sos, power_gap_decompose, qm_sum, round_certificate, verify_certificate, QmSign,
    QmTermKind,
};
use momentsos::conditioning::{analyze_conditioning, integer_eig_lower_bound, scaled_eig_bound};
use momentsos::geometry::{
    counterexample_strict_point, gen_squaring_counterexample, inner_ball_from_strict_point,
    john_ball_radius, sample_counterexample_point, tubular_volume_bound,
};
use momentsos::linalg::{exact_rank, sym_eigenvalues};
use momentsos::measures::{box_functional, box_moment, SymMatrixQ};
use momentsos::poly::{count_monomials, monomials_up_to, ExponentVec, Polynomial};
use momentsos::pop::{detect_explicit_bound, POPInstance};
use momentsos::rational::{
    f64_to_rat, pow2, rat, rat_int, rat_to_f64, sqrt_upper, Rat,
};
use momentsos::sdp::build_mom_sdp;
use momentsos::solver::{solve_sdp, SolveStatus, SolverConfig};

fn ev(exps: &[u32]) -> ExponentVec {
    ExponentVec::new(exps.to_vec())
}

fn pow_rat(x: &Rat, k: u32) -> Rat {
    let mut p = Rat::one();
    for _ in 0..k {
        p *= x;
    }
    p
}

// ---------------------------------------------------------------------------
// Criterion 1: box-moment exactness against a refining midpoint-quadrature
// oracle, and the closed form at z = 0.
// ---------------------------------------------------------------------------

/// Midpoint rule for the k-th raw moment of the uniform measure on [a, b],
/// panels doubled until the value is stable.
fn midpoint_moment(a: f64, b: f64, k: u32) -> f64 {
    let mut m = 4usize;
    let mut last = f64::NAN;
    loop {
        let h = (b - a) / m as f64;
        let mut acc = 0.0;
        for i in 0..m {
            let x = a + (i as f64 + 0.5) * h;
            acc += x.powi(k as i32);
        }
        let val = acc * h / (b - a);
        if !last.is_nan() && (val - last).abs() <= 1e-12 * val.abs().max(1.0) {
            return val;
        }
        if m >= 1 << 21 {
            return val;
        }
        last = val;
        m *= 2;
    }
}

#[test]
fn criterion_1_box_moment_exactness() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut checked = 0usize;
    let mut max_err = 0.0f64;
    for case in 0..20 {
        let n = 1 + (case % 3);
        let r = rat(1 + (rng.next_u64() % 4) as i64, 1 + (rng.next_u64() % 4) as i64);
        let z: Vec<Rat> = (0..n)
            .map(|_| rat((rng.next_u64() % 17) as i64 - 8, 8))
            .collect();
        // Memoized 1-D oracle per (coordinate, exponent).
        let mut coord_moment = vec![[f64::NAN; 7]; n];
        for (i, zi) in z.iter().enumerate() {
            let a = rat_to_f64(&(zi - &r));
            let b = rat_to_f64(&(zi + &r));
            for k in 0..=6u32 {
                coord_moment[i][k as usize] = midpoint_moment(a, b, k);
            }
        }
        for alpha in monomials_up_to(n, 6).unwrap() {
            let exact = rat_to_f64(&box_moment(&r, &z, &alpha));
            let oracle: f64 = alpha
                .exps()
                .iter()
                .enumerate()
                .map(|(i, &k)| coord_moment[i][k as usize])
                .product();
            let err = (exact - oracle).abs() / exact.abs().max(1.0);
            max_err = max_err.max(err);
            assert!(
                err <= 1e-9,
                "moment mismatch: n={n} r={r} z={z:?} alpha={alpha:?}: {exact} vs {oracle}"
            );
            checked += 1;
        }
    }
    // Closed form at z = 0: prod r^{a_i}/(a_i + 1) for even alpha, else 0.
    for n in 1..=3usize {
        let r = rat(2, 3);
        let z = vec![rat_int(0); n];
        for alpha in monomials_up_to(n, 6).unwrap() {
            let expect = if alpha.exps().iter().all(|&a| a % 2 == 0) {
                alpha.exps().iter().fold(Rat::one(), |acc, &a| {
                    acc * pow_rat(&r, a) / Rat::from_integer((a + 1).into())
                })
            } else {
                Rat::zero()
            };
            assert_eq!(box_moment(&r, &z, &alpha), expect, "closed form at {alpha:?}");
        }
    }
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 10.0, "criterion 1 took {dt:.1}s (limit 10s)");
    println!(
        "criterion 1 (box-moment exactness): PASS — {checked} quadrature comparisons, \
         max rel err {max_err:.2e}, closed form exact, {dt:.2}s"
    );
}

// ---------------------------------------------------------------------------
// Criterion 2: integer-eigenvalue lemma soundness on random matrices.
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_integer_eig_soundness() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut min_margin = f64::INFINITY;
    for case in 0..200 {
        let n = 1 + (rng.next_u64() % 6) as usize;
        let idx: Vec<ExponentVec> = (0..n).map(|i| ev(&[i as u32])).collect();
        let m = SymMatrixQ::from_fn(idx, |_, _| rat_int((rng.next_u64() % 21) as i64 - 10));
        let b = m
            .row_index
            .iter()
            .enumerate()
            .flat_map(|(i, _)| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| m.get(i, j).numer().abs())
            .max()
            .unwrap();
        if b.is_zero() {
            continue; // zero matrix: no nonzero eigenvalues, vacuous
        }
        let bound = rat_to_f64(&integer_eig_lower_bound(&b, n));
        // Oracle: exact rank fixes which eigenvalues are nonzero; the float
        // eigensolver then measures them (error ~1e-14 * ||M||, far below
        // the (BN)^-N scale for these sizes).
        let rank = exact_rank(&m);
        let mut mags: Vec<f64> = sym_eigenvalues(&m.to_f64())
            .iter()
            .map(|e| e.abs())
            .collect();
        mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for &lam in mags.iter().take(rank) {
            assert!(
                lam >= bound * (1.0 - 1e-9),
                "case {case}: nonzero eigenvalue {lam} under (BN)^-N = {bound}"
            );
            min_margin = min_margin.min(lam / bound);
        }
    }
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 10.0, "criterion 2 took {dt:.1}s (limit 10s)");
    println!(
        "criterion 2 (integer-eigenvalue lemma): PASS — 200 matrices, \
         min eigenvalue/bound ratio {min_margin:.3e}, {dt:.2}s"
    );
}

// ---------------------------------------------------------------------------
// Criterion 3: canonical solves against analytic oracles.
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_canonical_solves() {
    let start = std::time::Instant::now();
    let solve_val = |f: &str| -> f64 {
        let inst = POPInstance::new(
            Polynomial::parse(f, 1).unwrap(),
            vec![Polynomial::parse("1 - x1^2", 1).unwrap()],
            vec![],
        )
        .unwrap();
        let sdp = build_mom_sdp(&inst, 1).unwrap();
        let sol = solve_sdp(&sdp, &SolverConfig::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::OptimalToEps);
        sol.primal_value
    };
    let v1 = solve_val("x1");
    assert!((v1 + 1.0).abs() <= 1e-6, "mom(x)_1 = {v1}, oracle -1");
    let v2 = solve_val("x1^2");
    assert!(v2.abs() <= 1e-6, "mom(x^2)_1 = {v2}, oracle 0");
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 5.0, "criterion 3 took {dt:.1}s (limit 5s)");
    println!(
        "criterion 3 (canonical solves): PASS — mom(x)_1 = {v1:.9} (oracle -1), \
         mom(x^2)_1 = {v2:.2e} (oracle 0), {dt:.2}s"
    );
}

// ---------------------------------------------------------------------------
// Corpus shared by criteria 4, 5, and 8.
// ---------------------------------------------------------------------------

enum Sampler {
    /// Rejection from the cube [-a, a]^n with exact acceptance.
    Rejection,
    /// Constructive sampling of the repeated-squaring chain.
    Chain(usize),
    /// The two boolean points {0, 1}.
    Boolean,
}

struct CorpusItem {
    name: &'static str,
    inst: POPInstance,
    t: u32,
    strict_point: Vec<Rat>,
    sampler: Sampler,
}

fn parse_inst(n: usize, f: &str, gs: &[&str], hs: &[&str]) -> POPInstance {
    POPInstance::new(
        Polynomial::parse(f, n).unwrap(),
        gs.iter().map(|g| Polynomial::parse(g, n).unwrap()).collect(),
        hs.iter().map(|h| Polynomial::parse(h, n).unwrap()).collect(),
    )
    .unwrap()
}

fn random_dense_quadratic(n: usize, rng: &mut ChaCha8Rng) -> Polynomial {
    let mut f = Polynomial::zero(n);
    for alpha in monomials_up_to(n, 2).unwrap() {
        let num = (rng.next_u64() % 9) as i64 - 4;
        let den = 1 + (rng.next_u64() % 4) as i64;
        f = f + Polynomial::monomial(alpha, rat(num, den));
    }
    f
}

fn corpus() -> Vec<CorpusItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut items = vec![
        CorpusItem {
            name: "ball_min_x",
            inst: parse_inst(1, "x1", &["1 - x1^2"], &[]),
            t: 1,
            strict_point: vec![rat_int(0)],
            sampler: Sampler::Rejection,
        },
        CorpusItem {
            name: "ball2_lin",
            inst: parse_inst(2, "x1 + x2", &["1 - x1^2 - x2^2"], &[]),
            t: 1,
            strict_point: vec![rat_int(0), rat_int(0)],
            sampler: Sampler::Rejection,
        },
        CorpusItem {
            name: "box2",
            inst: parse_inst(
                2,
                "x1 x2",
                &["2 - x1^2 - x2^2", "1 - x1^2", "1 - x2^2"],
                &[],
            ),
            t: 2,
            strict_point: vec![rat_int(0), rat_int(0)],
            sampler: Sampler::Rejection,
        },
        CorpusItem {
            name: "simplex2_ball",
            inst: parse_inst(
                2,
                "-x1 - 2 x2",
                &["2 - x1^2 - x2^2", "x1", "x2", "1 - x1 - x2"],
                &[],
            ),
            t: 1,
            strict_point: vec![rat(1, 4), rat(1, 4)],
            sampler: Sampler::Rejection,
        },
        CorpusItem {
            name: "cex2_ball",
            inst: gen_squaring_counterexample(2).with_ball(rat_int(1)),
            t: 2,
            strict_point: counterexample_strict_point(2),
            sampler: Sampler::Chain(2),
        },
        CorpusItem {
            name: "cex3_ball",
            inst: gen_squaring_counterexample(3).with_ball(rat_int(1)),
            t: 2,
            strict_point: counterexample_strict_point(3),
            sampler: Sampler::Chain(3),
        },
        CorpusItem {
            name: "boolean1",
            inst: parse_inst(1, "-x1", &["1 - x1^2"], &["x1^2 - x1"]),
            t: 1,
            strict_point: vec![rat(1, 2)],
            sampler: Sampler::Boolean,
        },
    ];
    let f2 = random_dense_quadratic(2, &mut rng);
    items.push(CorpusItem {
        name: "randquad2",
        inst: POPInstance::new(
            f2,
            vec![Polynomial::parse("1 - x1^2 - x2^2", 2).unwrap()],
            vec![],
        )
        .unwrap(),
        t: 1,
        strict_point: vec![rat_int(0), rat_int(0)],
        sampler: Sampler::Rejection,
    });
    let f3 = random_dense_quadratic(3, &mut rng);
    items.push(CorpusItem {
        name: "randquad3",
        inst: POPInstance::new(
            f3,
            vec![Polynomial::parse("4 - x1^2 - x2^2 - x3^2", 3).unwrap()],
            vec![],
        )
        .unwrap(),
        t: 2,
        strict_point: vec![rat_int(0), rat_int(0), rat_int(0)],
        sampler: Sampler::Rejection,
    });
    items
}

fn dyadic_in(rng: &mut ChaCha8Rng, a: &Rat) -> Rat {
    let v = (rng.next_u64() >> 44) as i64 - (1i64 << 19);
    Rat::new(v.into(), (1i64 << 19).into()) * a
}

/// Draws one exactly feasible rational point.
fn feasible_sample(item: &CorpusItem, rng: &mut ChaCha8Rng) -> Vec<Rat> {
    match &item.sampler {
        Sampler::Boolean => vec![rat_int((rng.next_u64() % 2) as i64)],
        Sampler::Chain(n) => loop {
            let x = sample_counterexample_point(*n, rng);
            let ok = item
                .inst
                .inequalities
                .iter()
                .all(|g| !g.eval(&x).unwrap().is_negative());
            if ok {
                return x;
            }
        },
        Sampler::Rejection => {
            let bound = detect_explicit_bound(&item.inst);
            let a = bound.r_pow2_upper.clone().unwrap();
            loop {
                let x: Vec<Rat> = (0..item.inst.n).map(|_| dyadic_in(rng, &a)).collect();
                let ok = item
                    .inst
                    .inequalities
                    .iter()
                    .all(|g| !g.eval(&x).unwrap().is_negative());
                if ok {
                    return x;
                }
            }
        }
    }
}

struct CertifiedRun {
    cert: momentsos::Certificate,
    rc: momentsos::RoundedCertificate,
}

fn certify_item(item: &CorpusItem, round_eps: &Rat) -> CertifiedRun {
    let sdp = build_mom_sdp(&item.inst, item.t).unwrap();
    let cfg = SolverConfig {
        eps: 5e-9,
        feasibility_tol: 1e-8,
        max_iter: 300,
        ..Default::default()
    };
    let sol = solve_sdp(&sdp, &cfg).unwrap();
    assert_eq!(
        sol.status,
        SolveStatus::OptimalToEps,
        "{}: solver failed (gap {:.3e})",
        item.name,
        sol.duality_gap
    );
    let cert = extract_sos(&sol, &sdp, &item.inst, item.t).unwrap();
    let rc = round_certificate(&cert, round_eps, &item.inst, item.t).unwrap();
    CertifiedRun { cert, rc }
}

// ---------------------------------------------------------------------------
// Criterion 4: certificate roundtrip and soundness against sampled minima.
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_certificate_roundtrip() {
    let start = std::time::Instant::now();
    let round_eps = pow2(-20);
    let mut lines = Vec::new();
    for item in corpus() {
        let run = certify_item(&item, &round_eps);
        let report = verify_certificate(&run.rc, &item.inst, item.t);
        assert!(
            report.pass(),
            "{}: verification failed: {report:?}",
            item.name
        );
        // Exact-rational sample minimum over 10^4 feasible points.
        let mut rng = ChaCha8Rng::seed_from_u64(7_000 + item.t as u64);
        let mut sample_min: Option<Rat> = None;
        for _ in 0..10_000 {
            let x = feasible_sample(&item, &mut rng);
            let v = item.inst.objective.eval(&x).unwrap();
            sample_min = Some(match sample_min {
                Some(m) if m <= v => m,
                _ => v,
            });
        }
        let sample_min = sample_min.unwrap();
        assert!(
            run.rc.adjusted_bound <= sample_min,
            "{}: certified bound {} exceeds sampled minimum {}",
            item.name,
            run.rc.adjusted_bound,
            sample_min
        );
        lines.push(format!(
            "{}: bound {:.6} <= sampled min {:.6}",
            item.name,
            rat_to_f64(&run.rc.adjusted_bound),
            rat_to_f64(&sample_min)
        ));
    }
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 120.0, "criterion 4 took {dt:.1}s (limit 120s)");
    println!(
        "criterion 4 (certificate roundtrip): PASS — {} instances verified exactly; {}; {dt:.1}s",
        lines.len(),
        lines.join("; ")
    );
}

// ---------------------------------------------------------------------------
// Criterion 5: the explicit rounding-error law, all constants exact.
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_rounding_error_law() {
    let start = std::time::Instant::now();
    let eps = pow2(-20);
    let mut worst_ratio = 0.0f64;
    for item in corpus() {
        let run = certify_item(&item, &eps);
        // Right-hand side of the error law:
        // eps * (sum_i ||g_i||_1 * sum_k (2 ||s_ik||_1 + eps C(n+2t, 2t))
        //        + sum_j ||h_j||_1 * eps),
        // with the unrounded s_ik and every norm exact.
        let n = item.inst.n;
        let binom: Rat = Rat::from_integer(
            count_monomials(n, 2 * item.t)
                .to_string()
                .parse::<num::BigInt>()
                .unwrap(),
        );
        let mut rhs = Rat::zero();
        for (i, list) in run.cert.squares.iter().enumerate() {
            let g_norm = if i == 0 {
                Rat::one()
            } else {
                item.inst.inequalities[i - 1].l1_norm()
            };
            let mut inner = Rat::zero();
            for s in list {
                inner += Rat::from_integer(2.into()) * s.l1_norm() + &eps * &binom;
            }
            rhs += g_norm * inner;
        }
        for (j, h) in item.inst.equalities.iter().enumerate() {
            let _ = j;
            rhs += h.l1_norm() * &eps;
        }
        rhs *= &eps;
        let measured = &run.rc.l1_residual;
        assert!(
            measured <= &rhs,
            "{}: ||E||_1 = {} exceeds the error law bound {}",
            item.name,
            rat_to_f64(measured),
            rat_to_f64(&rhs)
        );
        worst_ratio = worst_ratio.max(rat_to_f64(measured) / rat_to_f64(&rhs));

        // Halving the rounding step at least halves ||E||_1.
        let rc_half = round_certificate(&run.cert, &(&eps / Rat::from_integer(2.into())), &item.inst, item.t)
            .unwrap();
        assert!(
            &rc_half.l1_residual * Rat::from_integer(2.into()) <= run.rc.l1_residual,
            "{}: halving eps did not halve ||E||_1: {} vs {}",
            item.name,
            rat_to_f64(&rc_half.l1_residual),
            rat_to_f64(&run.rc.l1_residual)
        );
    }
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 60.0, "criterion 5 took {dt:.1}s (limit 60s)");
    println!(
        "criterion 5 (rounding error law): PASS — worst measured/bound ratio {worst_ratio:.3}, \
         eps-halving law holds on all instances, {dt:.1}s"
    );
}

// ---------------------------------------------------------------------------
// Criterion 6: power-gap decomposition completeness, exhaustive.
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_power_gap_completeness() {
    let mut count = 0usize;
    for n in 1..=3usize {
        for rsq in [1i64, 4] {
            let ball = momentsos::pop::ball_polynomial(n, rat_int(rsq));
            let inst = POPInstance::new(Polynomial::var(n, 0), vec![ball], vec![]).unwrap();
            let r = rat_int(if rsq == 1 { 1 } else { 2 });
            for gamma in monomials_up_to(n, 6).unwrap() {
                for sign in [QmSign::Minus, QmSign::Plus] {
                    let d = power_gap_decompose(&gamma, &rat_int(rsq), 3, sign, 1).unwrap();
                    let sum = qm_sum(&d.terms, &inst).unwrap();
                    assert_eq!(
                        sum, d.target,
                        "n={n} rsq={rsq} gamma={gamma:?} sign={sign:?}"
                    );
                    // R^2 is a perfect square here, so the certified target
                    // is exactly R^{|gamma|} -+ x^gamma.
                    assert_eq!(d.constant, pow_rat(&r, gamma.total_degree()));
                    let cap = gamma.total_degree().div_ceil(2).max(1);
                    for term in &d.terms {
                        if let QmTermKind::Square { poly, .. } = &term.kind {
                            assert!(
                                poly.degree() <= cap,
                                "square degree {} over cap {cap} at {gamma:?}",
                                poly.degree()
                            );
                        }
                    }
                    count += 1;
                }
            }
        }
    }
    println!(
        "criterion 6 (power-gap decomposition completeness): PASS — {count}/{count} exhaustive decompositions \
         sum exactly to target (n <= 3, |gamma| <= 6, R^2 in {{1,4}}, both signs)"
    );
}

// ---------------------------------------------------------------------------
// Criterion 7: counterexample law.
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_counterexample_law() {
    let mut radii = Vec::new();
    for n in 1..=6usize {
        let cap = pow2(-(1i64 << (n - 1)));
        let inst = gen_squaring_counterexample(n);
        // Sampled maximum of x_1, exact comparison.
        let mut rng = ChaCha8Rng::seed_from_u64(700 + n as u64);
        let mut max_x1 = Rat::zero();
        for _ in 0..100_000 {
            let x = sample_counterexample_point(n, &mut rng);
            if x[0] > max_x1 {
                max_x1 = x[0].clone();
            }
        }
        assert!(
            max_x1 <= cap,
            "n={n}: sampled x1 = {} exceeds 2^-2^(n-1)",
            rat_to_f64(&max_x1)
        );
        // Strict-point inner-ball radius at the feasible chain point.
        let strict = counterexample_strict_point(n);
        let cert = inner_ball_from_strict_point(&inst.with_ball(rat_int(1)), &strict).unwrap();
        assert!(
            cert.radius <= cap,
            "n={n}: inner radius {} exceeds 2^-2^(n-1)",
            rat_to_f64(&cert.radius)
        );
        radii.push(format!("n={n}: r={:.2e}", rat_to_f64(&cert.radius)));
    }
    println!(
        "criterion 7 (counterexample law): PASS — 6 x 100000 sampled maxima within \
         2^-2^(n-1) exactly; strict-point radii {}",
        radii.join(", ")
    );
}

// ---------------------------------------------------------------------------
// Criterion 8: conditioning soundness over every corpus analysis.
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_conditioning_soundness() {
    let mut matrices = 0usize;
    for item in corpus() {
        // Probe box: the inscribed box of the strict-point inner ball.
        let cert = inner_ball_from_strict_point(&item.inst, &item.strict_point).unwrap();
        let half = momentsos::rational::pow2_floor(
            &(cert.radius.clone() / sqrt_upper(&rat_int(item.inst.n as i64), 8)),
        );
        let l = box_functional(&half, &cert.center, 2 * item.t).unwrap();
        let report = analyze_conditioning(&l, &item.inst, item.t).unwrap();
        for rec in &report.records {
            let bound = rat_to_f64(&rec.lemma_bound);
            assert!(
                !rec.violates_bound,
                "{} / {}: measured {} under certified bound {}",
                item.name, rec.label, rec.measured_min_nonzero_eig, bound
            );
            matrices += 1;
        }
        assert_eq!(
            report.kernel_certified,
            item.inst.equalities.is_empty(),
            "{}: kernel certification flag",
            item.name
        );
    }
    // Independent re-check on raw scaled_eig_bound values for the canonical
    // moment matrix family.
    for k in 1..=6 {
        let l = box_functional(&pow2(-k), &[rat_int(0)], 2).unwrap();
        let m = momentsos::measures::assemble_moment_matrix(&l, 1).unwrap();
        let (_, _, bound) = scaled_eig_bound(&m);
        let ev = sym_eigenvalues(&m.to_f64());
        for &lam in ev.iter().filter(|&&e| e.abs() > 1e-12) {
            assert!(lam.abs() >= rat_to_f64(&bound) * (1.0 - 1e-9));
        }
    }
    println!(
        "criterion 8 (conditioning soundness): PASS — {matrices} matrices across the corpus, \
         zero violations of the certified lower bounds"
    );
}

// ---------------------------------------------------------------------------
// Criterion 9: geometry formulas against hand-computed pins.
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_geometry_formulas() {
    // John-ellipsoid radius formula.
    let j1 = john_ball_radius(&rat_int(2), 1, &rat_int(1));
    assert!((j1 - 1.0).abs() < 1e-12, "john(vol=2, n=1, R=1) = {j1}");
    let pi = f64_to_rat(std::f64::consts::PI).unwrap();
    let j2 = john_ball_radius(&pi, 2, &rat_int(1));
    assert!((j2 - 0.5).abs() < 1e-12, "john(vol=pi, n=2, R=1) = {j2}");

    // Tubular-neighborhood volume bound.
    let t0 = tubular_volume_bound(1, 1, 1.0, 0.0);
    assert!(t0 == 0.0, "delta = 0 must vanish, got {t0}");
    let t1 = tubular_volume_bound(1, 1, 1.0, 0.125);
    assert!((t1 - 4.0).abs() < 1e-12, "tubular(1,1,1,1/8) = {t1}");
    let expect = 4.0 * (2.0 * 0.08 * 1.01 + 0.08f64.powi(2)) * std::f64::consts::PI;
    let t2 = tubular_volume_bound(2, 2, 1.0, 0.01);
    assert!((t2 - expect).abs() < 1e-12, "tubular(2,2,1,1/100) = {t2}");

    println!(
        "criterion 9 (geometry formulas): PASS — john: {j1:.12}, {j2:.12}; \
         tubular: {t1:.12}, {t2:.12} all within 1e-12 of hand values"
    );
}
