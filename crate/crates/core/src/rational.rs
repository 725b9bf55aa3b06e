//! Exact rational scalars: parsing, formatting, bit counting, square-root
//! enclosures, and conversions to and from `f64`.

use num::bigint::BigUint;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::Error;

pub type Rat = BigRational;
pub type Int = BigInt;

/// Rational from an `i64` pair.
pub fn rat(num: i64, den: i64) -> Rat {
    assert!(den != 0, "zero denominator");
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from an integer.
pub fn rat_int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// 2^k as an exact rational, k may be negative.
pub fn pow2(k: i64) -> Rat {
    if k >= 0 {
        Rat::from_integer(BigInt::one() << k as usize)
    } else {
        Rat::new(BigInt::one(), BigInt::one() << (-k) as usize)
    }
}

/// Bit length of |numerator| plus bit length of the denominator.
pub fn rat_bits(r: &Rat) -> u64 {
    r.numer().magnitude().bits() + r.denom().magnitude().bits()
}

/// Canonical text form: `p` when the denominator is 1, else `p/q`.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p`, `p/q`, or a plain decimal like `-0.25` into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    let s = s.trim();
    let bad = |msg: &str| Error::parse(0, 0, format!("invalid rational '{s}': {msg}"));
    if s.is_empty() {
        return Err(bad("empty"));
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad("bad numerator"))?;
        let q: BigInt = q.trim().parse().map_err(|_| bad("bad denominator"))?;
        if q.is_zero() {
            return Err(bad("zero denominator"));
        }
        return Ok(Rat::new(p, q));
    }
    if let Some((a, b)) = s.split_once('.') {
        let neg = a.starts_with('-');
        let a = a.trim_start_matches(['-', '+']);
        if !a.chars().all(|c| c.is_ascii_digit()) || !b.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad("bad decimal"));
        }
        let int_part: BigUint = if a.is_empty() {
            BigUint::zero()
        } else {
            a.parse().map_err(|_| bad("bad integer part"))?
        };
        let frac_part: BigUint = if b.is_empty() {
            BigUint::zero()
        } else {
            b.parse().map_err(|_| bad("bad fraction part"))?
        };
        let den = BigUint::from(10u32).pow(b.len() as u32);
        let num = int_part * &den + frac_part;
        let mut r = Rat::new(BigInt::from(num), BigInt::from(den));
        if neg {
            r = -r;
        }
        return Ok(r);
    }
    let p: BigInt = s.parse().map_err(|_| bad("bad integer"))?;
    Ok(Rat::from_integer(p))
}

/// Exact rational value of a finite `f64`.
pub fn f64_to_rat(x: f64) -> Result<Rat, Error> {
    if !x.is_finite() {
        return Err(Error::Invalid(format!("non-finite float {x}")));
    }
    if x == 0.0 {
        return Ok(Rat::zero());
    }
    let bits = x.to_bits();
    let neg = bits >> 63 == 1;
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    let (m, e) = if exp == 0 {
        (mant, -1074i64)
    } else {
        (mant | (1 << 52), exp - 1075)
    };
    let mut r = Rat::from_integer(BigInt::from(m)) * pow2(e);
    if neg {
        r = -r;
    }
    Ok(r)
}

/// Nearest `f64` (within one ulp; huge magnitudes saturate to infinity).
pub fn rat_to_f64(r: &Rat) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let neg = r.is_negative();
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    // Scale so the integer quotient carries ~56 significant bits, then let the
    // final BigUint -> f64 conversion do the last rounding step.
    let shift = 56 - (nb - db);
    let (q, rem, d) = if shift >= 0 {
        let scaled = num << shift as u64;
        let q = &scaled / den;
        let rem = &scaled % den;
        (q, rem, den.clone())
    } else {
        let d = den << (-shift) as u64;
        let q = num / &d;
        let rem = num % &d;
        (q, rem, d)
    };
    let mut q = q;
    if &rem * 2u32 >= d {
        q += 1u32;
    }
    let f = q.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(-shift.clamp(-2000, 2000) as i32);
    if neg {
        -f
    } else {
        f
    }
}

fn isqrt_floor(v: &BigUint) -> BigUint {
    v.sqrt()
}

fn isqrt_ceil(v: &BigUint) -> BigUint {
    let s = v.sqrt();
    if &(&s * &s) == v {
        s
    } else {
        s + 1u32
    }
}

/// `Some(sqrt(x))` when `x` is a perfect rational square.
pub fn exact_sqrt(x: &Rat) -> Option<Rat> {
    if x.is_negative() {
        return None;
    }
    if x.is_zero() {
        return Some(Rat::zero());
    }
    let sn = isqrt_floor(x.numer().magnitude());
    let sd = isqrt_floor(x.denom().magnitude());
    if &(&sn * &sn) == x.numer().magnitude() && &(&sd * &sd) == x.denom().magnitude() {
        Some(Rat::new(BigInt::from(sn), BigInt::from(sd)))
    } else {
        None
    }
}

/// Rational upper bound on sqrt(x), tight to relative error ~2^-bits.
pub fn sqrt_upper(x: &Rat, bits: u64) -> Rat {
    assert!(!x.is_negative(), "sqrt of negative rational");
    if x.is_zero() {
        return Rat::zero();
    }
    let p = x.numer().magnitude();
    let q = x.denom().magnitude();
    // ceil(sqrt(p*q*4^b)) / (q*2^b) >= sqrt(p/q)
    let s = isqrt_ceil(&((p * q) << (2 * bits)));
    Rat::new(BigInt::from(s), BigInt::from(q << bits))
}

/// Rational lower bound on sqrt(x), tight to relative error ~2^-bits.
pub fn sqrt_lower(x: &Rat, bits: u64) -> Rat {
    assert!(!x.is_negative(), "sqrt of negative rational");
    if x.is_zero() {
        return Rat::zero();
    }
    let p = x.numer().magnitude();
    let q = x.denom().magnitude();
    let s = isqrt_floor(&((p * q) << (2 * bits)));
    Rat::new(BigInt::from(s), BigInt::from(q << bits))
}

/// Largest power of two 2^k (k integer, possibly negative) with 2^k <= x.
pub fn pow2_floor(x: &Rat) -> Rat {
    assert!(x.is_positive(), "needs x > 0");
    let log2 = x.numer().magnitude().bits() as i64 - x.denom().magnitude().bits() as i64;
    let mut k = log2 + 1;
    while pow2(k) > *x {
        k -= 1;
    }
    while pow2(k + 1) <= *x {
        k += 1;
    }
    pow2(k)
}

/// Smallest power of two 2^k (k integer, possibly negative) with 4^k >= x.
/// Used as the canonical rational upper estimate for R = sqrt(R^2).
pub fn pow2_upper_sqrt(x: &Rat) -> Rat {
    assert!(x.is_positive(), "needs x > 0");
    // Initial estimate from bit lengths: log2(x) ~ bits(num) - bits(den).
    let log2 = x.numer().magnitude().bits() as i64 - x.denom().magnitude().bits() as i64;
    let mut k = log2.div_euclid(2) + 1;
    while pow2(2 * (k - 1)) >= *x {
        k -= 1;
    }
    while pow2(2 * k) < *x {
        k += 1;
    }
    pow2(k)
}

/// Nearest integer multiple of `eps`; ties round away from zero.
pub fn round_to_multiple(x: &Rat, eps: &Rat) -> Rat {
    assert!(eps.is_positive(), "eps must be positive");
    let q = x / eps;
    let f = q.floor();
    let frac = &q - &f;
    let half = rat(1, 2);
    let n = if frac > half {
        f + Rat::one()
    } else if frac < half {
        f
    } else if q.is_negative() {
        // tie, away from zero on the negative side
        f
    } else {
        f + Rat::one()
    };
    n * eps
}

/// Largest integer multiple of `eps` that does not exceed `x`.
pub fn floor_to_multiple(x: &Rat, eps: &Rat) -> Rat {
    assert!(eps.is_positive(), "eps must be positive");
    (x / eps).floor() * eps
}
