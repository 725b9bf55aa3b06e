//! Sparse multivariate polynomials over exact rationals, with the graded
//! lexicographic monomial order used for all matrix indexing.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigUint, One, Signed, Zero};

use crate::error::Error;
use crate::rational::{fmt_rat, parse_rat, Rat};

/// Hard cap on enumerated monomial bases; anything past this is a sign the
/// relaxation level is far outside desk scale.
pub const MONOMIAL_CAP: usize = 2_000_000;

/// Exponent vector alpha in N^n; totally ordered by (degree, then position of
/// the trailing exponents), which enumerates 1, x1, x2, x1^2, x1 x2, x2^2, ...
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ExponentVec(Vec<u32>);

impl ExponentVec {
    pub fn new(exps: Vec<u32>) -> Self {
        ExponentVec(exps)
    }

    pub fn zeros(n: usize) -> Self {
        ExponentVec(vec![0; n])
    }

    /// Unit vector e_i (0-based variable index).
    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        ExponentVec(e)
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// True when every exponent is even.
    pub fn is_coordinatewise_even(&self) -> bool {
        self.0.iter().all(|&e| e % 2 == 0)
    }

    pub fn add(&self, other: &ExponentVec) -> ExponentVec {
        debug_assert_eq!(self.n(), other.n());
        ExponentVec(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn scale(&self, k: u32) -> ExponentVec {
        ExponentVec(self.0.iter().map(|e| e * k).collect())
    }
}

impl Ord for ExponentVec {
    fn cmp(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.n(), other.n());
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => self.0.iter().rev().cmp(other.0.iter().rev()),
            ord => ord,
        }
    }
}

impl PartialOrd for ExponentVec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Number of monomials of degree <= d in n variables: C(n+d, d).
pub fn count_monomials(n: usize, d: u32) -> BigUint {
    let mut c = BigUint::one();
    for k in 1..=(d as u64) {
        c = c * BigUint::from(n as u64 + k) / BigUint::from(k);
    }
    c
}

/// All alpha with |alpha| <= d in graded-lex order. Errors once the count
/// exceeds the configured cap.
pub fn monomials_up_to(n: usize, d: u32) -> Result<Vec<ExponentVec>, Error> {
    assert!(n >= 1, "dimension must be at least 1");
    let count = count_monomials(n, d);
    if count > BigUint::from(MONOMIAL_CAP) {
        return Err(Error::Capacity {
            count: count.to_string().parse().unwrap_or(u128::MAX),
            cap: MONOMIAL_CAP,
        });
    }
    let mut out = Vec::with_capacity(count.to_string().parse::<usize>().unwrap_or(0));
    let mut cur = vec![0u32; n];
    gen_rec(&mut cur, 0, d, &mut out);
    out.sort();
    Ok(out)
}

fn gen_rec(cur: &mut Vec<u32>, pos: usize, budget: u32, out: &mut Vec<ExponentVec>) {
    if pos == cur.len() {
        out.push(ExponentVec(cur.clone()));
        return;
    }
    for e in 0..=budget {
        cur[pos] = e;
        gen_rec(cur, pos + 1, budget - e, out);
    }
    cur[pos] = 0;
}

/// Sparse polynomial: exponent vector -> nonzero rational coefficient.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<ExponentVec, Rat>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Rat) -> Self {
        let mut p = Polynomial::zero(n);
        if !c.is_zero() {
            p.terms.insert(ExponentVec::zeros(n), c);
        }
        p
    }

    pub fn one(n: usize) -> Self {
        Polynomial::constant(n, Rat::one())
    }

    /// The variable x_{i+1} (0-based index i).
    pub fn var(n: usize, i: usize) -> Self {
        assert!(i < n);
        let mut p = Polynomial::zero(n);
        p.terms.insert(ExponentVec::unit(n, i), Rat::one());
        p
    }

    pub fn monomial(exps: ExponentVec, coeff: Rat) -> Self {
        let mut p = Polynomial::zero(exps.n());
        if !coeff.is_zero() {
            p.terms.insert(exps, coeff);
        }
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Degree; the zero polynomial has degree 0 by convention.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.total_degree())
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVec, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &ExponentVec) -> Rat {
        self.terms.get(e).cloned().unwrap_or_else(Rat::zero)
    }

    fn insert(&mut self, e: ExponentVec, c: Rat) {
        if !c.is_zero() {
            self.terms.insert(e, c);
        }
    }

    fn add_term(&mut self, e: ExponentVec, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial, Error> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial, Error> {
        self.checked_add(&(-other.clone()))
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial, Error> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let mut out = Polynomial::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.add(eb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: &Rat) -> Polynomial {
        if s.is_zero() {
            return Polynomial::zero(self.n);
        }
        let mut out = Polynomial::zero(self.n);
        for (e, c) in &self.terms {
            out.insert(e.clone(), c * s);
        }
        out
    }

    pub fn square(&self) -> Polynomial {
        self.checked_mul(self).expect("same dimension")
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut out = Polynomial::one(self.n);
        for _ in 0..k {
            out = out.checked_mul(self).expect("same dimension");
        }
        out
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, point: &[Rat]) -> Result<Rat, Error> {
        if point.len() != self.n {
            return Err(Error::DimensionMismatch(self.n, point.len()));
        }
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (i, &k) in e.exps().iter().enumerate() {
                for _ in 0..k {
                    term *= &point[i];
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// (l1, linf) coefficient norms; (0, 0) for the zero polynomial.
    pub fn norms(&self) -> (Rat, Rat) {
        let mut l1 = Rat::zero();
        let mut linf = Rat::zero();
        for c in self.terms.values() {
            let a = c.abs();
            if a > linf {
                linf = a.clone();
            }
            l1 += a;
        }
        (l1, linf)
    }

    pub fn l1_norm(&self) -> Rat {
        self.norms().0
    }

    /// Partial derivative with respect to x_{k+1} (0-based k).
    pub fn partial_derivative(&self, k: usize) -> Polynomial {
        assert!(k < self.n);
        let mut out = Polynomial::zero(self.n);
        for (e, c) in &self.terms {
            let ek = e.get(k);
            if ek == 0 {
                continue;
            }
            let mut exps = e.exps().to_vec();
            exps[k] -= 1;
            out.add_term(ExponentVec::new(exps), c * Rat::from_integer(ek.into()));
        }
        out
    }

    /// Coefficients of each term rounded to the nearest multiple of eps
    /// (ties away from zero).
    pub fn round_coeffs(&self, eps: &Rat) -> Polynomial {
        let mut out = Polynomial::zero(self.n);
        for (e, c) in &self.terms {
            out.insert(e.clone(), crate::rational::round_to_multiple(c, eps));
        }
        out
    }

    /// Parses the canonical line form, e.g. `1 - 1/2 * x1^2 x2 + x3`.
    pub fn parse(s: &str, n: usize) -> Result<Polynomial, Error> {
        parse_polynomial(s, n)
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Polynomial) -> Polynomial {
        self.checked_add(&rhs).expect("dimension mismatch in +")
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        self.checked_sub(&rhs).expect("dimension mismatch in -")
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        self.checked_mul(&rhs).expect("dimension mismatch in *")
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        let mut out = Polynomial::zero(self.n);
        for (e, c) in self.terms {
            out.terms.insert(e, -c);
        }
        out
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = c.abs();
            let mono = fmt_monomial(e);
            if mono.is_empty() {
                write!(f, "{}", fmt_rat(&mag))?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{} * {mono}", fmt_rat(&mag))?;
            }
        }
        Ok(())
    }
}

fn fmt_monomial(e: &ExponentVec) -> String {
    let mut parts = Vec::new();
    for (i, &k) in e.exps().iter().enumerate() {
        if k == 1 {
            parts.push(format!("x{}", i + 1));
        } else if k > 1 {
            parts.push(format!("x{}^{}", i + 1, k));
        }
    }
    parts.join(" ")
}

// ---------------------------------------------------------------------------
// Parser for the canonical term syntax.
// ---------------------------------------------------------------------------

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

#[derive(Debug, PartialEq)]
enum Tok {
    Plus,
    Minus,
    Star,
    Caret,
    Number(String),
    Var(usize),
    End,
}

impl<'a> Lexer<'a> {
    fn new(s: &'a str) -> Self {
        Lexer {
            src: s.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Result<(Tok, usize), Error> {
        self.skip_ws();
        let col = self.pos + 1;
        if self.pos >= self.src.len() {
            return Ok((Tok::End, col));
        }
        let c = self.src[self.pos] as char;
        match c {
            '+' => {
                self.pos += 1;
                Ok((Tok::Plus, col))
            }
            '-' => {
                self.pos += 1;
                Ok((Tok::Minus, col))
            }
            '*' => {
                self.pos += 1;
                Ok((Tok::Star, col))
            }
            '^' => {
                self.pos += 1;
                Ok((Tok::Caret, col))
            }
            '0'..='9' | '.' => {
                let start = self.pos;
                while self.pos < self.src.len() {
                    let d = self.src[self.pos] as char;
                    if d.is_ascii_digit() || d == '/' || d == '.' {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                Ok((
                    Tok::Number(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()),
                    col,
                ))
            }
            'x' => {
                self.pos += 1;
                let start = self.pos;
                while self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_digit() {
                    self.pos += 1;
                }
                if start == self.pos {
                    return Err(Error::parse(0, col, "variable index expected after 'x'"));
                }
                let idx: usize = String::from_utf8_lossy(&self.src[start..self.pos])
                    .parse()
                    .map_err(|_| Error::parse(0, col, "bad variable index"))?;
                if idx == 0 {
                    return Err(Error::parse(0, col, "variables are 1-based: x1, x2, ..."));
                }
                Ok((Tok::Var(idx - 1), col))
            }
            other => Err(Error::parse(0, col, format!("unexpected character '{other}'"))),
        }
    }

    fn peek(&mut self) -> Result<(Tok, usize), Error> {
        let save = self.pos;
        let t = self.next();
        self.pos = save;
        t
    }
}

fn parse_polynomial(s: &str, n: usize) -> Result<Polynomial, Error> {
    let mut lex = Lexer::new(s);
    let mut poly = Polynomial::zero(n);
    let mut sign = Rat::one();
    let mut first = true;
    loop {
        let (tok, col) = lex.peek()?;
        match tok {
            Tok::End => {
                if first {
                    return Err(Error::parse(0, col, "empty polynomial"));
                }
                break;
            }
            Tok::Plus => {
                lex.next()?;
                if first {
                    return Err(Error::parse(0, col, "term expected before '+'"));
                }
            }
            Tok::Minus => {
                lex.next()?;
                sign = -Rat::one();
            }
            _ => {
                if !first {
                    return Err(Error::parse(0, col, "expected '+' or '-' between terms"));
                }
            }
        }
        let (coeff, exps) = parse_term(&mut lex, n)?;
        poly.add_term(ExponentVec::new(exps), coeff * &sign);
        sign = Rat::one();
        first = false;
    }
    Ok(poly)
}

fn parse_term(lex: &mut Lexer, n: usize) -> Result<(Rat, Vec<u32>), Error> {
    let mut coeff = Rat::one();
    let mut exps = vec![0u32; n];
    let mut saw_factor = false;
    loop {
        let (tok, col) = lex.peek()?;
        match tok {
            Tok::Number(num) => {
                lex.next()?;
                let r = parse_rat(&num).map_err(|e| Error::parse(0, col, e.to_string()))?;
                coeff *= r;
                saw_factor = true;
            }
            Tok::Var(i) => {
                lex.next()?;
                if i >= n {
                    return Err(Error::parse(
                        0,
                        col,
                        format!("variable x{} exceeds dimension n = {n}", i + 1),
                    ));
                }
                let mut e = 1u32;
                if let (Tok::Caret, _) = lex.peek()? {
                    lex.next()?;
                    match lex.next()? {
                        (Tok::Number(num), ncol) => {
                            e = num
                                .parse()
                                .map_err(|_| Error::parse(0, ncol, "bad exponent"))?;
                        }
                        (_, ncol) => return Err(Error::parse(0, ncol, "exponent expected after '^'")),
                    }
                }
                exps[i] += e;
                saw_factor = true;
            }
            Tok::Star => {
                lex.next()?;
                if !saw_factor {
                    return Err(Error::parse(0, col, "'*' without preceding factor"));
                }
            }
            _ => break,
        }
    }
    if !saw_factor {
        let (_, col) = lex.peek()?;
        return Err(Error::parse(0, col, "term expected"));
    }
    Ok((coeff, exps))
}
