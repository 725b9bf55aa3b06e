//! Ball-radius certifiers for the feasible region and the repeated-squaring
//! counterexample family.

use num::{One, Signed, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::par;
use crate::poly::Polynomial;
use crate::pop::{detect_explicit_bound, POPInstance};
use crate::rational::{pow2, rat, rat_int, rat_to_f64, sqrt_upper, Rat};

/// Enclosure precision for the square roots inside Lipschitz bounds. Kept
/// coarse: the bounds only need to be valid upper estimates, and fine
/// enclosures drag huge denominators through every downstream moment.
pub const SQRT_BITS: u64 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BallMethod {
    StrictPoint,
    JohnFormula,
    VolumeFormula,
    UserSupplied,
}

impl std::fmt::Display for BallMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BallMethod::StrictPoint => "strict-point",
            BallMethod::JohnFormula => "john-formula",
            BallMethod::VolumeFormula => "volume-formula",
            BallMethod::UserSupplied => "user-supplied",
        };
        write!(f, "{s}")
    }
}

/// A certified inner ball B(center, radius) of the feasible region.
#[derive(Clone, Debug)]
pub struct BallCertificate {
    pub center: Vec<Rat>,
    pub radius: Rat,
    pub method: BallMethod,
    pub checked: bool,
}

impl std::fmt::Display for BallCertificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c: Vec<String> = self
            .center
            .iter()
            .map(crate::rational::fmt_rat)
            .collect();
        write!(
            f,
            "({}) / {} / {} / {}",
            c.join(", "),
            crate::rational::fmt_rat(&self.radius),
            self.method,
            if self.checked { "checked" } else { "unchecked" }
        )
    }
}

/// Certified inner ball around a strictly feasible rational point.
///
/// For each constraint, r_i = g_i(x) / Lambda_i with Lambda_i a certified
/// Lipschitz upper bound on B(0, R): Lambda_i = sqrt(n) * max_k sum over the
/// terms of d/dx_k g_i of |coefficient| * R^{|alpha|}. The radius is also
/// capped by g_ball(x) / (R_up + ||x||_up) <= R - ||x||, which keeps
/// B(x, r) inside B(0, R) where the Lipschitz bounds are valid; the cap is
/// rational and positive for every strict point, so no square-root
/// precision issue can void it.
pub fn inner_ball_from_strict_point(
    inst: &POPInstance,
    x: &[Rat],
) -> Result<BallCertificate, Error> {
    let n = inst.n;
    if x.len() != n {
        return Err(Error::DimensionMismatch(n, x.len()));
    }
    let bound = detect_explicit_bound(inst);
    if !bound.explicitly_bounded {
        return Err(Error::NotExplicitlyBounded(
            "inner-ball certification needs the ball constraint R^2 - sum x_i^2".into(),
        ));
    }
    let rsq = bound.rsq.as_ref().unwrap();
    // Rational upper bound on R; exact when R^2 is a perfect square.
    let r_up = bound
        .r_exact
        .clone()
        .unwrap_or_else(|| sqrt_upper(rsq, SQRT_BITS));
    let sqrt_n_up = sqrt_upper(&rat_int(n as i64), SQRT_BITS);

    let mut radius: Option<Rat> = None;
    for (i, g) in inst.inequalities.iter().enumerate() {
        let value = g.eval(x)?;
        if !value.is_positive() {
            return Err(Error::NotStrict {
                index: i + 1,
                value: crate::rational::fmt_rat(&value),
            });
        }
        let mut max_partial = Rat::zero();
        for k in 0..n {
            let dgk = g.partial_derivative(k);
            let mut sum = Rat::zero();
            for (alpha, c) in dgk.terms() {
                sum += c.abs() * pow_rat(&r_up, alpha.total_degree());
            }
            if sum > max_partial {
                max_partial = sum;
            }
        }
        let lambda = &sqrt_n_up * &max_partial;
        let candidate = if lambda.is_zero() {
            // Constant positive constraint: no restriction from this g.
            continue;
        } else {
            value / lambda
        };
        radius = Some(match radius {
            Some(rad) if rad <= candidate => rad,
            _ => candidate,
        });
    }
    // R - ||x|| = (R^2 - ||x||^2) / (R + ||x||) >= g_ball(x) / (R_up + ||x||_up).
    let ball_value = inst.inequalities[bound.witness_index.unwrap()].eval(x)?;
    let norm_sq: Rat = x.iter().map(|xi| xi * xi).sum();
    let norm_up = sqrt_upper(&norm_sq, SQRT_BITS);
    let cap = ball_value / (&r_up + norm_up);
    let radius = match radius {
        Some(rad) if rad <= cap => rad,
        _ => cap,
    };
    Ok(BallCertificate {
        center: x.to_vec(),
        radius,
        method: BallMethod::StrictPoint,
        checked: false,
    })
}

/// Validates a ball certificate by exact rational evaluation at `samples`
/// uniform points of the ball; sets `checked` on success. Sampling is
/// deterministic in `seed` (per-sample derived streams, so the result does
/// not depend on thread count).
pub fn validate_ball(
    inst: &POPInstance,
    cert: &mut BallCertificate,
    samples: usize,
    seed: u64,
) -> Result<(), Error> {
    let violations: Vec<Option<usize>> = par::map_range(samples, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (s as u64).wrapping_mul(0x9e3779b97f4a7c15));
        let point = sample_ball_point(&cert.center, &cert.radius, &mut rng);
        for (i, g) in inst.inequalities.iter().enumerate() {
            if g.eval(&point).expect("dimension checked").is_negative() {
                return Some(i + 1);
            }
        }
        None
    });
    if let Some(idx) = violations.into_iter().flatten().next() {
        return Err(Error::Verification(format!(
            "ball validation found a sample violating g_{idx}"
        )));
    }
    cert.checked = true;
    Ok(())
}

/// Uniform rational sample from B(center, radius): rejection from the cube
/// with an exact norm check, dyadic coordinates.
pub fn sample_ball_point(center: &[Rat], radius: &Rat, rng: &mut ChaCha8Rng) -> Vec<Rat> {
    let n = center.len();
    loop {
        let u: Vec<Rat> = (0..n).map(|_| unit_dyadic(rng)).collect();
        let norm_sq: Rat = u.iter().map(|v| v * v).sum();
        if norm_sq <= Rat::one() {
            return center
                .iter()
                .zip(u)
                .map(|(c, v)| c + radius * v)
                .collect();
        }
    }
}

/// Dyadic rational uniform in [-1, 1] with 30 fractional bits.
fn unit_dyadic(rng: &mut ChaCha8Rng) -> Rat {
    let v = (rng.next_u64() >> 33) as i64 - (1i64 << 30);
    Rat::new(v.into(), (1i64 << 30).into())
}

fn pow_rat(x: &Rat, k: u32) -> Rat {
    let mut p = Rat::one();
    for _ in 0..k {
        p *= x;
    }
    p
}

/// Inscribed-ball radius of a convex region from its volume:
/// r = sqrt(vol / (n^n R^{2(n-1)} vol(B(0,1)))). Caller asserts convexity.
pub fn john_ball_radius(vol_s: &Rat, n: usize, r_outer: &Rat) -> f64 {
    assert!(n >= 1);
    let vol = rat_to_f64(vol_s);
    let r = rat_to_f64(r_outer);
    assert!(vol > 0.0 && r > 0.0);
    let denom = (n as f64).powi(n as i32) * r.powi(2 * (n as i32 - 1)) * unit_ball_volume(n);
    (vol / denom).sqrt()
}

/// Volume of the unit n-ball, by the two-step recurrence V_n = V_{n-2} 2 pi / n.
pub fn unit_ball_volume(n: usize) -> f64 {
    let mut v = if n % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v
}

/// Upper bound on the volume of the delta-neighborhood of the variety cut
/// out by the product of the constraint polynomials:
/// vol(B(0,R)) * 4 sum_{i=1..n} C(n,i) (4 D delta / R)^i (1 + delta/R)^{n-i},
/// D the product of the constraint degrees.
pub fn tubular_volume_bound(n: usize, d_prod: u64, r_outer: f64, delta: f64) -> f64 {
    assert!(n >= 1 && d_prod >= 1 && r_outer > 0.0 && delta >= 0.0);
    let x = 4.0 * d_prod as f64 * delta / r_outer;
    let y = 1.0 + delta / r_outer;
    let mut sum = 0.0;
    let mut binom = 1.0f64;
    for i in 1..=n {
        binom = binom * (n - i + 1) as f64 / i as f64;
        sum += binom * x.powi(i as i32) * y.powi((n - i) as i32);
    }
    4.0 * sum * unit_ball_volume(n) * r_outer.powi(n as i32)
}

/// Largest delta (by bisection) whose tubular-neighborhood volume bound stays
/// below vol_S; such a delta is a valid inner-ball radius by a pigeonhole
/// argument. Capped at R.
pub fn ball_radius_from_volume(inst: &POPInstance, vol_s: f64) -> Result<f64, Error> {
    assert!(vol_s > 0.0);
    let bound = detect_explicit_bound(inst);
    if !bound.explicitly_bounded {
        return Err(Error::NotExplicitlyBounded(
            "volume-based radius needs the ball constraint".into(),
        ));
    }
    let r = rat_to_f64(bound.rsq.as_ref().unwrap()).sqrt();
    let n = inst.n;
    let d_prod: u64 = inst
        .inequalities
        .iter()
        .map(|g| g.degree().max(1) as u64)
        .product();
    if tubular_volume_bound(n, d_prod, r, r) < vol_s {
        return Ok(r);
    }
    let mut lo = 0.0f64;
    let mut hi = r;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tubular_volume_bound(n, d_prod, r, mid) < vol_s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// The repeated-squaring instance: x_i >= 0, x_{i+1}^2 - x_i >= 0 for
/// i < n, 1/2 - x_n >= 0, objective min -x_1 (maximize x_1). The feasible
/// region forces 0 <= x_1 <= 2^(-2^(n-1)) yet is full-dimensional.
pub fn gen_squaring_counterexample(n: usize) -> POPInstance {
    assert!(n >= 1);
    let mut inequalities = Vec::with_capacity(2 * n);
    for i in 0..n {
        inequalities.push(Polynomial::var(n, i));
    }
    for i in 0..n - 1 {
        let g = Polynomial::var(n, i + 1).square() - Polynomial::var(n, i);
        inequalities.push(g);
    }
    inequalities.push(Polynomial::constant(n, rat(1, 2)) - Polynomial::var(n, n - 1));
    let objective = -Polynomial::var(n, 0);
    POPInstance::new(objective, inequalities, vec![]).expect("dimensions match")
}

/// The boundary chain point (2^-2^(n-1), ..., 2^-1): feasible, with every
/// squaring constraint and the top constraint tight, and x_1 at its maximum.
pub fn counterexample_chain_point(n: usize) -> Vec<Rat> {
    (0..n).map(|i| pow2(-(1i64 << (n - 1 - i)))).collect()
}

/// A strictly feasible chain point: x_i = 2^-(3*2^(n-i)-1) in 1-based terms,
/// which satisfies x_i < x_{i+1}^2 and x_n < 1/2 strictly.
pub fn counterexample_strict_point(n: usize) -> Vec<Rat> {
    (0..n)
        .map(|i| pow2(-(3 * (1i64 << (n - 1 - i)) - 1)))
        .collect()
}

/// Samples a feasible point of the counterexample constructively:
/// x_n uniform in [0, 1/2], then x_i uniform in [0, x_{i+1}^2].
pub fn sample_counterexample_point(n: usize, rng: &mut ChaCha8Rng) -> Vec<Rat> {
    let mut x = vec![Rat::zero(); n];
    let u = unit_fraction(rng);
    x[n - 1] = u * rat(1, 2);
    for i in (0..n - 1).rev() {
        let cap = &x[i + 1] * &x[i + 1];
        x[i] = unit_fraction(rng) * cap;
    }
    x
}

/// Dyadic rational uniform in [0, 1] with 16 fractional bits. Kept coarse:
/// chain sampling squares the denominator at every level, so bit sizes grow
/// geometrically in n.
fn unit_fraction(rng: &mut ChaCha8Rng) -> Rat {
    Rat::new(((rng.next_u64() >> 48) as i64).into(), (1i64 << 16).into())
}
