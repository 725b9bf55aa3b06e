//! Polynomial optimization instances, explicit-boundedness detection, and
//! bit-complexity accounting.

use num::{One, Signed};

use crate::error::Error;
use crate::poly::{ExponentVec, Polynomial};
use crate::rational::{exact_sqrt, pow2_upper_sqrt, rat_bits, Rat};

/// minimize f(x) subject to g_i(x) >= 0, h_j(x) = 0.
#[derive(Clone, Debug)]
pub struct POPInstance {
    pub n: usize,
    pub objective: Polynomial,
    pub inequalities: Vec<Polynomial>,
    pub equalities: Vec<Polynomial>,
}

impl POPInstance {
    pub fn new(
        objective: Polynomial,
        inequalities: Vec<Polynomial>,
        equalities: Vec<Polynomial>,
    ) -> Result<Self, Error> {
        let n = objective.n();
        for p in inequalities.iter().chain(equalities.iter()) {
            if p.n() != n {
                return Err(Error::DimensionMismatch(n, p.n()));
            }
        }
        Ok(POPInstance {
            n,
            objective,
            inequalities,
            equalities,
        })
    }

    /// Prepends `R^2 - sum x_i^2` as the first inequality.
    pub fn with_ball(&self, rsq: Rat) -> POPInstance {
        let mut out = self.clone();
        out.inequalities.insert(0, ball_polynomial(self.n, rsq));
        out
    }

    /// Line-oriented instance text: `n <int>`, `minimize <poly>`,
    /// `ineq <poly>` (meaning >= 0), `eq <poly>` (meaning = 0), `#` comments.
    pub fn parse_str(src: &str) -> Result<POPInstance, Error> {
        let mut n: Option<usize> = None;
        let mut objective: Option<Polynomial> = None;
        let mut inequalities = Vec::new();
        let mut equalities = Vec::new();
        for (lineno, raw) in src.lines().enumerate() {
            let line = lineno + 1;
            let text = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            };
            let text = text.trim();
            if text.is_empty() {
                continue;
            }
            let (key, rest) = match text.split_once(char::is_whitespace) {
                Some((k, r)) => (k, r.trim()),
                None => (text, ""),
            };
            let at_line = |e: Error| match e {
                Error::Parse { col, msg, .. } => Error::parse(line, col, msg),
                other => other,
            };
            match key {
                "n" => {
                    let v: usize = rest
                        .parse()
                        .map_err(|_| Error::parse(line, 1, "bad dimension"))?;
                    if v == 0 {
                        return Err(Error::parse(line, 1, "dimension must be positive"));
                    }
                    n = Some(v);
                }
                "minimize" | "ineq" | "eq" => {
                    let dim = n.ok_or_else(|| {
                        Error::parse(line, 1, "dimension line 'n <int>' must come first")
                    })?;
                    let p = Polynomial::parse(rest, dim).map_err(at_line)?;
                    match key {
                        "minimize" => objective = Some(p),
                        "ineq" => inequalities.push(p),
                        _ => equalities.push(p),
                    }
                }
                other => {
                    return Err(Error::parse(line, 1, format!("unknown directive '{other}'")));
                }
            }
        }
        if n.is_none() {
            return Err(Error::parse(0, 0, "missing 'n' line"));
        }
        let objective =
            objective.ok_or_else(|| Error::parse(0, 0, "missing 'minimize' line"))?;
        POPInstance::new(objective, inequalities, equalities)
    }

    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("n {}\n", self.n));
        out.push_str(&format!("minimize {}\n", self.objective));
        for g in &self.inequalities {
            out.push_str(&format!("ineq {g}\n"));
        }
        for h in &self.equalities {
            out.push_str(&format!("eq {h}\n"));
        }
        out
    }
}

pub fn ball_polynomial(n: usize, rsq: Rat) -> Polynomial {
    let mut p = Polynomial::constant(n, rsq);
    for i in 0..n {
        p = p - Polynomial::monomial(ExponentVec::unit(n, i).scale(2), Rat::one());
    }
    p
}

/// Outcome of scanning the inequality list for the exact form
/// `c - sum_i x_i^2` with c > 0.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub explicitly_bounded: bool,
    /// R^2 = c, exactly.
    pub rsq: Option<Rat>,
    /// R itself when c is a perfect rational square.
    pub r_exact: Option<Rat>,
    /// Smallest power-of-two rational upper bound on sqrt(c).
    pub r_pow2_upper: Option<Rat>,
    pub witness_index: Option<usize>,
}

impl BoundReport {
    fn unbounded() -> Self {
        BoundReport {
            explicitly_bounded: false,
            rsq: None,
            r_exact: None,
            r_pow2_upper: None,
            witness_index: None,
        }
    }
}

/// Scans for the syntactic ball constraint. The form must match exactly:
/// constant c > 0, coefficient -1 on every x_i^2, and nothing else.
pub fn detect_explicit_bound(inst: &POPInstance) -> BoundReport {
    let n = inst.n;
    'outer: for (idx, g) in inst.inequalities.iter().enumerate() {
        if g.num_terms() != n + 1 {
            continue;
        }
        let c = g.coeff(&ExponentVec::zeros(n));
        if !c.is_positive() {
            continue;
        }
        for i in 0..n {
            let sq = ExponentVec::unit(n, i).scale(2);
            if g.coeff(&sq) != -Rat::one() {
                continue 'outer;
            }
        }
        return BoundReport {
            explicitly_bounded: true,
            r_exact: exact_sqrt(&c),
            r_pow2_upper: Some(pow2_upper_sqrt(&c)),
            rsq: Some(c),
            witness_index: Some(idx),
        };
    }
    BoundReport::unbounded()
}

/// Bit-complexity: for a rational, bits of |num| plus bits of den; for a
/// polynomial, the max over coefficients plus the bit length of the term
/// count; for an instance, the max over all constituent polynomials.
pub trait BitComplexity {
    fn bit_complexity(&self) -> u64;
}

impl BitComplexity for Rat {
    fn bit_complexity(&self) -> u64 {
        rat_bits(self)
    }
}

impl BitComplexity for Polynomial {
    fn bit_complexity(&self) -> u64 {
        let coeff_max = self
            .terms()
            .map(|(_, c)| rat_bits(c))
            .max()
            .unwrap_or(0);
        coeff_max + u64_bits(self.num_terms() as u64)
    }
}

impl BitComplexity for POPInstance {
    fn bit_complexity(&self) -> u64 {
        std::iter::once(&self.objective)
            .chain(self.inequalities.iter())
            .chain(self.equalities.iter())
            .map(|p| p.bit_complexity())
            .max()
            .unwrap_or(0)
    }
}

fn u64_bits(v: u64) -> u64 {
    (64 - v.leading_zeros()) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::gen_squaring_counterexample;
    use crate::rational::{rat, rat_int};

    fn inst(n: usize, f: &str, gs: &[&str], hs: &[&str]) -> POPInstance {
        POPInstance::new(
            Polynomial::parse(f, n).unwrap(),
            gs.iter().map(|g| Polynomial::parse(g, n).unwrap()).collect(),
            hs.iter().map(|h| Polynomial::parse(h, n).unwrap()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn detect_ball_pins() {
        let i = inst(2, "x1", &["1 - x1^2 - x2^2"], &[]);
        let r = detect_explicit_bound(&i);
        assert!(r.explicitly_bounded);
        assert_eq!(r.rsq.unwrap(), rat_int(1));
        assert_eq!(r.witness_index.unwrap(), 0);
        assert_eq!(r.r_exact.unwrap(), rat_int(1));

        // Missing x2^2 term: not explicitly bounded.
        let i = inst(2, "x1", &["4 - x1^2"], &[]);
        assert!(!detect_explicit_bound(&i).explicitly_bounded);

        let i = inst(2, "x1", &["x1", "9 - x1^2 - x2^2"], &[]);
        let r = detect_explicit_bound(&i);
        assert!(r.explicitly_bounded);
        assert_eq!(r.witness_index.unwrap(), 1);
        assert_eq!(r.rsq.unwrap(), rat_int(9));
        assert_eq!(r.r_exact.unwrap(), rat_int(3));
    }

    #[test]
    fn detect_rejects_near_misses() {
        // Wrong sign on the square.
        let i = inst(1, "x1", &["1 + x1^2"], &[]);
        assert!(!detect_explicit_bound(&i).explicitly_bounded);
        // Extra cross term.
        let i = inst(2, "x1", &["1 - x1^2 - x2^2 + x1 x2"], &[]);
        assert!(!detect_explicit_bound(&i).explicitly_bounded);
        // Nonpositive constant.
        let i = inst(1, "x1", &["0 - x1^2"], &[]);
        assert!(!detect_explicit_bound(&i).explicitly_bounded);
        // Scaled ball (2 - 2 x1^2) is not the syntactic form.
        let i = inst(1, "x1", &["2 - 2 x1^2"], &[]);
        assert!(!detect_explicit_bound(&i).explicitly_bounded);
    }

    #[test]
    fn detect_irrational_radius() {
        let i = inst(2, "x1", &["2 - x1^2 - x2^2"], &[]);
        let r = detect_explicit_bound(&i);
        assert!(r.explicitly_bounded);
        assert_eq!(r.rsq.unwrap(), rat_int(2));
        assert!(r.r_exact.is_none());
        assert_eq!(r.r_pow2_upper.unwrap(), rat_int(2));
    }

    #[test]
    fn detect_is_permutation_invariant() {
        let gs = ["x1", "1 - x1", "9 - x1^2 - x2^2", "x2"];
        let base: Vec<Polynomial> = gs
            .iter()
            .map(|g| Polynomial::parse(g, 2).unwrap())
            .collect();
        let f = Polynomial::parse("x1", 2).unwrap();
        // All 4! permutations, generated by repeated rotations and swaps.
        let perms = permutations(4);
        for perm in perms {
            let shuffled: Vec<Polynomial> =
                perm.iter().map(|&i| base[i].clone()).collect();
            let i = POPInstance::new(f.clone(), shuffled, vec![]).unwrap();
            let r = detect_explicit_bound(&i);
            assert!(r.explicitly_bounded);
            let w = r.witness_index.unwrap();
            assert_eq!(perm[w], 2, "witness tracks the permuted position");
            assert_eq!(r.rsq.unwrap(), rat_int(9));
        }
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 1 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for i in 0..n {
                let mut q: Vec<usize> = p.iter().map(|&v| v + (v >= i) as usize).collect();
                q.insert(0, i);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn bit_complexity_pins() {
        assert_eq!(rat(1, 3).bit_complexity(), 3);
        assert_eq!(rat(1, 65536).bit_complexity(), 18);
        let cex = gen_squaring_counterexample(4);
        assert!(cex.bit_complexity() <= 8, "got {}", cex.bit_complexity());
        assert_eq!(Polynomial::zero(2).bit_complexity(), 0);
    }

    #[test]
    fn bit_complexity_product_slack() {
        // With dyadic coefficients, denominators never grow under addition,
        // so bc(a*b) <= bc(a) + bc(b) + bits(#terms of a*b).
        let a = Polynomial::parse("1/2 x1 + 3/4 x2 + 2", 2).unwrap();
        let b = Polynomial::parse("5/8 x1^2 - 1/2 x2 + 7", 2).unwrap();
        let ab = a.checked_mul(&b).unwrap();
        let slack = u64_bits(ab.num_terms() as u64);
        assert!(ab.bit_complexity() <= a.bit_complexity() + b.bit_complexity() + slack);
    }

    #[test]
    fn instance_file_roundtrip() {
        let i = inst(
            2,
            "x1 - 2 x2",
            &["1 - x1^2 - x2^2", "x1"],
            &["x1 + x2 - 1/3"],
        );
        let text = i.to_file_string();
        let j = POPInstance::parse_str(&text).unwrap();
        assert_eq!(j.to_file_string(), text);
        assert_eq!(j.n, 2);
        assert_eq!(j.inequalities.len(), 2);
        assert_eq!(j.equalities.len(), 1);
    }

    #[test]
    fn instance_parse_errors_carry_line() {
        let bad = "n 2\nminimize x1\nineq 1 - x3^2\n";
        match POPInstance::parse_str(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(POPInstance::parse_str("minimize x1\n").is_err());
        assert!(POPInstance::parse_str("n 1\n").is_err());
    }

    #[test]
    fn with_ball_prepends() {
        let i = inst(2, "x1", &["x1"], &[]);
        let b = i.with_ball(rat_int(4));
        assert_eq!(b.inequalities.len(), 2);
        let r = detect_explicit_bound(&b);
        assert_eq!(r.witness_index.unwrap(), 0);
        assert_eq!(r.r_exact.unwrap(), rat_int(2));
    }
}
