//! Exact moments of uniform measures on translated hypercubes, and assembly
//! of moment and localizing matrices from any moment functional.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::error::Error;
use crate::par;
use crate::poly::{monomials_up_to, ExponentVec, Polynomial};
use crate::rational::{fmt_rat, Rat};

/// A linear functional on polynomials of degree <= order, tabulated on the
/// monomial basis: alpha -> L(x^alpha).
#[derive(Clone, Debug)]
pub struct MomentFunctional {
    pub n: usize,
    /// 2t; the table is complete for all |alpha| <= order.
    pub order: u32,
    values: BTreeMap<ExponentVec, Rat>,
}

impl MomentFunctional {
    pub fn new(n: usize, order: u32, values: BTreeMap<ExponentVec, Rat>) -> Self {
        MomentFunctional { n, order, values }
    }

    pub fn value(&self, alpha: &ExponentVec) -> Option<&Rat> {
        self.values.get(alpha)
    }

    pub fn values(&self) -> impl Iterator<Item = (&ExponentVec, &Rat)> {
        self.values.iter()
    }

    /// L applied to a polynomial: sum of coeff * L(x^alpha).
    pub fn apply(&self, p: &Polynomial) -> Result<Rat, Error> {
        if p.degree() > self.order {
            return Err(Error::OrderTooSmall {
                need: p.degree(),
                have: self.order,
            });
        }
        let mut acc = Rat::zero();
        for (e, c) in p.terms() {
            let v = self.value(e).ok_or(Error::OrderTooSmall {
                need: e.total_degree(),
                have: self.order,
            })?;
            acc += c * v;
        }
        Ok(acc)
    }

    /// Text table: one line `a1 ... an  p/q` per moment.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for (e, v) in &self.values {
            let exps: Vec<String> = e.exps().iter().map(|x| x.to_string()).collect();
            out.push_str(&format!("{}  {}\n", exps.join(" "), fmt_rat(v)));
        }
        out
    }

    /// The Dirac functional at a rational point (moments x^alpha evaluated
    /// at the point). Useful as a degenerate test measure.
    pub fn dirac(point: &[Rat], order: u32) -> Result<MomentFunctional, Error> {
        let n = point.len();
        let basis = monomials_up_to(n, order)?;
        let mut values = BTreeMap::new();
        for alpha in basis {
            let mut v = Rat::one();
            for (i, &k) in alpha.exps().iter().enumerate() {
                for _ in 0..k {
                    v *= &point[i];
                }
            }
            values.insert(alpha, v);
        }
        Ok(MomentFunctional { n, order, values })
    }
}

/// Dense symmetric rational matrix indexed by monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymMatrixQ {
    size: usize,
    entries: Vec<Rat>,
    pub row_index: Vec<ExponentVec>,
}

impl SymMatrixQ {
    pub fn zeros(row_index: Vec<ExponentVec>) -> Self {
        let size = row_index.len();
        SymMatrixQ {
            size,
            entries: vec![Rat::zero(); size * size],
            row_index,
        }
    }

    pub fn from_fn(
        row_index: Vec<ExponentVec>,
        mut f: impl FnMut(usize, usize) -> Rat,
    ) -> Self {
        let size = row_index.len();
        let mut m = SymMatrixQ::zeros(row_index);
        for i in 0..size {
            for j in i..size {
                let v = f(i, j);
                m.entries[i * size + j] = v.clone();
                m.entries[j * size + i] = v;
            }
        }
        m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.entries[i * self.size + j]
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: Rat) {
        self.entries[i * self.size + j] = v.clone();
        self.entries[j * self.size + i] = v;
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.size, self.size, |i, j| {
            crate::rational::rat_to_f64(self.get(i, j))
        })
    }
}

/// Exact moment of the uniform probability measure on [-r, r]^n + z.
///
/// Coordinates are independent, so the moment factors; each per-coordinate
/// moment expands (z_i + u)^{a_i} binomially into centered moments
/// r^k/(k+1) (even k) of the symmetric interval.
pub fn box_moment(r: &Rat, z: &[Rat], alpha: &ExponentVec) -> Rat {
    assert!(r > &Rat::zero(), "box half-width must be positive");
    assert_eq!(z.len(), alpha.n(), "shift vector length must match dimension");
    let mut prod = Rat::one();
    for (i, &a) in alpha.exps().iter().enumerate() {
        prod *= coordinate_moment(r, &z[i], a);
        if prod.is_zero() {
            return prod;
        }
    }
    prod
}

fn coordinate_moment(r: &Rat, z: &Rat, a: u32) -> Rat {
    // E[(z + u)^a] = sum_k C(a,k) z^(a-k) E[u^k], u uniform on [-r, r].
    let mut acc = Rat::zero();
    let mut binom = Rat::one();
    let mut z_pow = vec![Rat::one()];
    for _ in 0..a {
        let last = z_pow.last().unwrap() * z;
        z_pow.push(last);
    }
    let mut r_pow = vec![Rat::one()];
    for _ in 0..a {
        let last = r_pow.last().unwrap() * r;
        r_pow.push(last);
    }
    for k in 0..=a {
        if k % 2 == 0 {
            let central = &r_pow[k as usize] / Rat::from_integer((k + 1).into());
            acc += &binom * &z_pow[(a - k) as usize] * central;
        }
        // C(a, k+1) = C(a, k) * (a-k)/(k+1)
        binom *= Rat::new((a - k).into(), (k + 1).into());
    }
    acc
}

/// Complete moment table of the box measure up to degree `two_t`.
pub fn box_functional(r: &Rat, z: &[Rat], two_t: u32) -> Result<MomentFunctional, Error> {
    let n = z.len();
    let basis = monomials_up_to(n, two_t)?;
    let moments = par::map(&basis, |alpha| box_moment(r, z, alpha));
    let values: BTreeMap<ExponentVec, Rat> = basis.into_iter().zip(moments).collect();
    Ok(MomentFunctional::new(n, two_t, values))
}

/// M_t(L): entry (alpha, beta) = L(x^{alpha+beta}), indexed by |alpha| <= t.
pub fn assemble_moment_matrix(l: &MomentFunctional, t: u32) -> Result<SymMatrixQ, Error> {
    if l.order < 2 * t {
        return Err(Error::OrderTooSmall {
            need: 2 * t,
            have: l.order,
        });
    }
    let basis = monomials_up_to(l.n, t)?;
    let size = basis.len();
    let rows = par::map_range(size, |i| {
        let mut row = Vec::with_capacity(size - i);
        for j in i..size {
            let e = basis[i].add(&basis[j]);
            row.push(l.value(&e).cloned().unwrap_or_else(Rat::zero));
        }
        row
    });
    let mut m = SymMatrixQ::zeros(basis);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            m.set_sym(i, i + off, v);
        }
    }
    Ok(m)
}

/// M_t(gL): entry (alpha, beta) = sum_gamma g_gamma L(x^{alpha+beta+gamma}),
/// indexed by |alpha| <= t - ceil(deg(g)/2).
pub fn assemble_localizing_matrix(
    l: &MomentFunctional,
    g: &Polynomial,
    t: u32,
) -> Result<SymMatrixQ, Error> {
    if l.order < 2 * t {
        return Err(Error::OrderTooSmall {
            need: 2 * t,
            have: l.order,
        });
    }
    let dg = g.degree();
    if dg > 2 * t {
        return Err(Error::DegreeViolation(format!(
            "deg(g) = {dg} exceeds 2t = {}",
            2 * t
        )));
    }
    if g.n() != l.n {
        return Err(Error::DimensionMismatch(l.n, g.n()));
    }
    let sub_t = t - dg.div_ceil(2);
    let basis = monomials_up_to(l.n, sub_t)?;
    let size = basis.len();
    let rows = par::map_range(size, |i| {
        let mut row = Vec::with_capacity(size - i);
        for j in i..size {
            let ab = basis[i].add(&basis[j]);
            let mut acc = Rat::zero();
            for (gamma, c) in g.terms() {
                let e = ab.add(gamma);
                acc += c * l.value(&e).cloned().unwrap_or_else(Rat::zero);
            }
            row.push(acc);
        }
        row
    });
    let mut m = SymMatrixQ::zeros(basis);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            m.set_sym(i, i + off, v);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int, rat_to_f64, sqrt_upper};
    use num::Signed;

    fn ev(exps: &[u32]) -> ExponentVec {
        ExponentVec::new(exps.to_vec())
    }

    #[test]
    fn box_moment_pins() {
        let one = rat_int(1);
        assert_eq!(box_moment(&one, &[rat_int(0)], &ev(&[2])), rat(1, 3));
        assert_eq!(box_moment(&one, &[rat_int(0)], &ev(&[1])), rat_int(0));
        // Shifted: uniform on [0, 2], second moment 4/3.
        assert_eq!(box_moment(&one, &[rat_int(1)], &ev(&[2])), rat(4, 3));
    }

    #[test]
    fn box_functional_pins() {
        let l = box_functional(&rat_int(1), &[rat_int(0)], 2).unwrap();
        assert_eq!(l.value(&ev(&[0])).unwrap(), &rat_int(1));
        assert_eq!(l.value(&ev(&[1])).unwrap(), &rat_int(0));
        assert_eq!(l.value(&ev(&[2])).unwrap(), &rat(1, 3));

        let l = box_functional(&rat(1, 2), &[rat_int(0)], 2).unwrap();
        assert_eq!(l.value(&ev(&[2])).unwrap(), &rat(1, 12));

        // Uniform on [1/4, 3/4]: mean z, second moment z^2 + r^2/3.
        let l = box_functional(&rat(1, 4), &[rat(1, 2)], 2).unwrap();
        assert_eq!(l.value(&ev(&[0])).unwrap(), &rat_int(1));
        assert_eq!(l.value(&ev(&[1])).unwrap(), &rat(1, 2));
        assert_eq!(l.value(&ev(&[2])).unwrap(), &rat(13, 48));
    }

    #[test]
    fn moment_matrix_pins() {
        let l = box_functional(&rat_int(1), &[rat_int(0)], 2).unwrap();
        let m = assemble_moment_matrix(&l, 1).unwrap();
        assert_eq!(m.size(), 2);
        assert_eq!(m.get(0, 0), &rat_int(1));
        assert_eq!(m.get(0, 1), &rat_int(0));
        assert_eq!(m.get(1, 1), &rat(1, 3));

        let dirac = MomentFunctional::dirac(&[rat_int(0)], 2).unwrap();
        let m = assemble_moment_matrix(&dirac, 1).unwrap();
        assert_eq!(m.get(0, 0), &rat_int(1));
        assert_eq!(m.get(0, 1), &rat_int(0));
        assert_eq!(m.get(1, 1), &rat_int(0));

        let l = box_functional(&rat_int(1), &[rat_int(1)], 2).unwrap();
        let m = assemble_moment_matrix(&l, 1).unwrap();
        assert_eq!(m.get(0, 1), &rat_int(1));
        assert_eq!(m.get(1, 1), &rat(4, 3));
    }

    #[test]
    fn localizing_matrix_pins() {
        let g = Polynomial::parse("1 - x1^2", 1).unwrap();
        let l = box_functional(&rat_int(1), &[rat_int(0)], 2).unwrap();
        let m = assemble_localizing_matrix(&l, &g, 1).unwrap();
        assert_eq!(m.size(), 1);
        assert_eq!(m.get(0, 0), &rat(2, 3));

        let dirac = MomentFunctional::dirac(&[rat_int(0)], 2).unwrap();
        let m = assemble_localizing_matrix(&dirac, &g, 1).unwrap();
        assert_eq!(m.get(0, 0), &rat_int(1));

        let gx = Polynomial::parse("x1", 1).unwrap();
        let m = assemble_localizing_matrix(&l, &gx, 1).unwrap();
        assert_eq!(m.size(), 1);
        assert_eq!(m.get(0, 0), &rat_int(0));
    }

    #[test]
    fn order_too_small_errors() {
        let l = box_functional(&rat_int(1), &[rat_int(0)], 2).unwrap();
        assert!(assemble_moment_matrix(&l, 2).is_err());
        let g = Polynomial::parse("1 - x1^2", 1).unwrap();
        assert!(assemble_localizing_matrix(&l, &g, 2).is_err());
        let f = Polynomial::parse("x1^4", 1).unwrap();
        assert!(l.apply(&f).is_err());
    }

    #[test]
    fn shift_consistency_exact() {
        // box_moment(r, z, alpha) = sum_{gamma <= alpha} binom * z^(alpha-gamma)
        // * box_moment(r, 0, gamma), checked exactly for n = 2.
        let r = rat(2, 3);
        let z = [rat(1, 5), rat(-3, 7)];
        for alpha in monomials_up_to(2, 4).unwrap() {
            let direct = box_moment(&r, &z, &alpha);
            let mut acc = Rat::zero();
            for g0 in 0..=alpha.get(0) {
                for g1 in 0..=alpha.get(1) {
                    let gamma = ev(&[g0, g1]);
                    let c = binom(alpha.get(0), g0)
                        * binom(alpha.get(1), g1)
                        * pow_rat(&z[0], alpha.get(0) - g0)
                        * pow_rat(&z[1], alpha.get(1) - g1);
                    acc += c * box_moment(&r, &[rat_int(0), rat_int(0)], &gamma);
                }
            }
            assert_eq!(direct, acc, "shift consistency failed at {alpha:?}");
        }
    }

    fn binom(n: u32, k: u32) -> Rat {
        let mut c = Rat::one();
        for i in 0..k {
            c *= Rat::new((n - i).into(), (i + 1).into());
        }
        c
    }

    fn pow_rat(x: &Rat, k: u32) -> Rat {
        let mut p = Rat::one();
        for _ in 0..k {
            p *= x;
        }
        p
    }

    #[test]
    fn degree_bound_on_moments() {
        // |L(x^alpha)| <= R^{|alpha|} for the box inside B(0, R); compared as
        // L^2 <= (R^2)^{|alpha|} to stay exact for irrational R.
        let r = rat(1, 2);
        let z = [rat(1, 4), rat(-1, 3)];
        // Box corners have squared norm at most sum (|z_i| + r)^2.
        let rsq: Rat = z
            .iter()
            .map(|zi| {
                let s = zi.clone().abs() + &r;
                &s * &s
            })
            .sum();
        let l = box_functional(&r, &z, 4).unwrap();
        for (alpha, v) in l.values() {
            let bound = pow_rat(&rsq, alpha.total_degree());
            assert!(v * v <= bound, "degree bound violated at {alpha:?}");
        }
    }

    #[test]
    fn box_matrices_are_psd_numerically() {
        // Box [-1/2, 1/2] + (1/4, 0) inside S(g) for g = 1 - x1^2 - x2^2 is
        // false (corner norm > 1), so use a smaller box strictly inside.
        let r = rat(1, 4);
        let z = [rat(1, 4), rat_int(0)];
        let l = box_functional(&r, &z, 4).unwrap();
        let m = assemble_moment_matrix(&l, 2).unwrap();
        let eig = m.to_f64().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&e| e >= -1e-9));

        let g = Polynomial::parse("1 - x1^2 - x2^2", 2).unwrap();
        // Corner check: (|z| + r*sqrt(2))^2 <= 1 so the box is inside S(g).
        let reach = rat(1, 2) + &r * sqrt_upper(&rat_int(2), 30);
        let corner = &reach * &reach;
        assert!(rat_to_f64(&corner) <= 1.0);
        let ml = assemble_localizing_matrix(&l, &g, 2).unwrap();
        let eig = ml.to_f64().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&e| e >= -1e-9));
    }

    #[test]
    fn moment_table_format() {
        let l = box_functional(&rat_int(1), &[rat_int(0)], 2).unwrap();
        let table = l.to_table();
        assert_eq!(table, "0  1\n1  0\n2  1/3\n");
    }
}
