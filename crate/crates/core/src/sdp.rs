//! Standard-form SDP construction for the moment relaxation: one PSD block
//! for the moment matrix, one per inequality for its localizing matrix, and
//! linear rows tying every cell to a designated representative moment.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};

use crate::error::Error;
use crate::measures::{assemble_localizing_matrix, assemble_moment_matrix, MomentFunctional, SymMatrixQ};
use crate::poly::{monomials_up_to, ExponentVec, Polynomial};
use crate::pop::POPInstance;
use crate::rational::Rat;

/// Sparse block-diagonal symmetric rational matrix. Entries are stored on
/// the upper triangle (row <= col); an off-diagonal stored value v denotes
/// the symmetric pair A[r][c] = A[c][r] = v, so the logical coefficient on
/// the cell (the weight of X_rc in <A, X>) is 2v off the diagonal.
#[derive(Clone, Debug, Default)]
pub struct SparseSymMat {
    pub entries: Vec<(usize, usize, usize, Rat)>,
}

impl SparseSymMat {
    /// Exact <A, X> for block matrices X.
    pub fn pair_exact(&self, blocks: &[SymMatrixQ]) -> Rat {
        let mut acc = Rat::zero();
        for (b, r, c, v) in &self.entries {
            let x = blocks[*b].get(*r, *c);
            if r == c {
                acc += v * x;
            } else {
                acc += Rat::from_integer(2.into()) * v * x;
            }
        }
        acc
    }

    /// Logical cell coefficients: (block, row, col, weight of X_rc).
    pub fn iter_logical(&self) -> impl Iterator<Item = (usize, usize, usize, Rat)> + '_ {
        self.entries.iter().map(|(b, r, c, v)| {
            let w = if r == c {
                v.clone()
            } else {
                Rat::from_integer(2.into()) * v
            };
            (*b, *r, *c, w)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowClass {
    Normalization,
    Consistency,
    Localizing,
    Equality,
}

#[derive(Clone, Debug)]
pub struct LinearConstraint {
    pub a: SparseSymMat,
    pub b: Rat,
    pub class: RowClass,
}

/// Row metadata for an equality constraint L(h_j x^alpha) = 0.
#[derive(Clone, Debug)]
pub struct EqualityRow {
    pub j: usize,
    pub alpha: ExponentVec,
    pub row: usize,
}

/// The moment relaxation in standard primal form:
/// min <C, X> s.t. <A_k, X> = b_k, X PSD block-diagonal.
#[derive(Clone, Debug)]
pub struct StandardFormSDP {
    pub n: usize,
    pub t: u32,
    pub block_dims: Vec<usize>,
    /// Monomial labels of the rows of each block.
    pub block_index: Vec<Vec<ExponentVec>>,
    pub constraints: Vec<LinearConstraint>,
    pub cost: SparseSymMat,
    /// Moment-block positions carrying each L(x^alpha), upper triangle,
    /// ordered; the first entry is the designated representative.
    pub var_map: BTreeMap<ExponentVec, Vec<(usize, usize, usize)>>,
    pub normalization_row: usize,
    pub equality_rows: Vec<EqualityRow>,
}

impl StandardFormSDP {
    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn representative(&self, alpha: &ExponentVec) -> Option<(usize, usize, usize)> {
        self.var_map.get(alpha).map(|v| v[0])
    }

    /// Counts per row class: (normalization, consistency, localizing, equality).
    pub fn class_counts(&self) -> (usize, usize, usize, usize) {
        let mut counts = (0, 0, 0, 0);
        for c in &self.constraints {
            match c.class {
                RowClass::Normalization => counts.0 += 1,
                RowClass::Consistency => counts.1 += 1,
                RowClass::Localizing => counts.2 += 1,
                RowClass::Equality => counts.3 += 1,
            }
        }
        counts
    }

    /// Assembles the block matrix X(L) of a moment functional via the
    /// measures module: M_t(L) followed by every localizing matrix.
    pub fn functional_blocks(
        &self,
        inst: &POPInstance,
        l: &MomentFunctional,
    ) -> Result<Vec<SymMatrixQ>, Error> {
        let mut blocks = vec![assemble_moment_matrix(l, self.t)?];
        for g in &inst.inequalities {
            blocks.push(assemble_localizing_matrix(l, g, self.t)?);
        }
        Ok(blocks)
    }

    /// Exact residuals <A_k, X> - b_k over all constraints.
    pub fn constraint_residuals(&self, blocks: &[SymMatrixQ]) -> Vec<Rat> {
        self.constraints
            .iter()
            .map(|c| c.a.pair_exact(blocks) - c.b.clone())
            .collect()
    }

    /// True when every constraint coefficient (logical, per cell) lies in
    /// {-1, 0, 1} or matches +-(a coefficient of some g_i or h_j), and every
    /// right-hand side lies in {0, 1}.
    pub fn data_entries_in_allowed_set(&self, inst: &POPInstance) -> bool {
        let mut allowed: Vec<Rat> = vec![Rat::one(), -Rat::one()];
        for p in inst.inequalities.iter().chain(inst.equalities.iter()) {
            for (_, c) in p.terms() {
                allowed.push(c.clone());
                allowed.push(-c.clone());
            }
        }
        for c in &self.constraints {
            if !c.b.is_zero() && !c.b.is_one() {
                return false;
            }
            for (_, _, _, w) in c.a.iter_logical() {
                if w.is_zero() {
                    continue;
                }
                if !allowed.iter().any(|a| a == &w) {
                    return false;
                }
            }
        }
        true
    }

    /// SDPA-like sparse text export. Line format after the header:
    /// `<matno> <block> <row> <col> <value>`, 1-based, upper triangle,
    /// matno 0 is the cost matrix. Values are decimal strings with
    /// `precision` digits.
    pub fn to_sdpa_sparse(&self, precision: usize) -> String {
        let mut out = String::new();
        out.push_str(&format!("{}\n", self.constraints.len()));
        out.push_str(&format!("{}\n", self.block_dims.len()));
        let dims: Vec<String> = self.block_dims.iter().map(|d| d.to_string()).collect();
        out.push_str(&format!("{}\n", dims.join(" ")));
        let rhs: Vec<String> = self
            .constraints
            .iter()
            .map(|c| fmt_decimal(&c.b, precision))
            .collect();
        out.push_str(&format!("{}\n", rhs.join(" ")));
        let emit = |matno: usize, a: &SparseSymMat, out: &mut String| {
            for (b, r, c, v) in &a.entries {
                out.push_str(&format!(
                    "{matno} {} {} {} {}\n",
                    b + 1,
                    r + 1,
                    c + 1,
                    fmt_decimal(v, precision)
                ));
            }
        };
        emit(0, &self.cost, &mut out);
        for (k, c) in self.constraints.iter().enumerate() {
            emit(k + 1, &c.a, &mut out);
        }
        out
    }
}

/// Decimal rendering of a rational with `prec` fractional digits, rounded
/// half away from zero.
pub fn fmt_decimal(r: &Rat, prec: usize) -> String {
    let scale = num::BigInt::from(10u32).pow(prec as u32);
    let scaled = crate::rational::round_to_multiple(
        &(r * Rat::from_integer(scale.clone())),
        &Rat::one(),
    );
    let v = scaled.to_integer();
    let neg = v.is_negative();
    let mag = v.abs();
    let (int_part, frac_part) = (mag.clone() / &scale, mag % &scale);
    let sign = if neg { "-" } else { "" };
    if prec == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{:0>width$}", frac_part.to_string(), width = prec)
    }
}

struct RowBuilder {
    cells: BTreeMap<(usize, usize, usize), Rat>,
}

impl RowBuilder {
    fn new() -> Self {
        RowBuilder {
            cells: BTreeMap::new(),
        }
    }

    /// Adds logical coefficient v on cell (r, c); off-diagonal values are
    /// split across the symmetric pair.
    fn add(&mut self, pos: (usize, usize, usize), v: Rat) {
        let (b, r, c) = pos;
        let key = (b, r.min(c), r.max(c));
        let store = if r == c { v } else { v / Rat::from_integer(2.into()) };
        let slot = self.cells.entry(key).or_insert_with(Rat::zero);
        *slot += store;
    }

    fn finish(self) -> SparseSymMat {
        SparseSymMat {
            entries: self
                .cells
                .into_iter()
                .filter(|(_, v)| !v.is_zero())
                .map(|((b, r, c), v)| (b, r, c, v))
                .collect(),
        }
    }
}

/// Builds the moment relaxation of the instance at level t.
///
/// Constraint classes are emitted in fixed order: the normalization row
/// L(1) = 1; consistency rows tying every moment-block cell to the
/// representative of its monomial; localizing linkage rows expressing each
/// localizing cell as sum_gamma g_gamma L(x^{alpha+beta+gamma}); and the
/// equality rows L(h_j x^alpha) = 0.
pub fn build_mom_sdp(inst: &POPInstance, t: u32) -> Result<StandardFormSDP, Error> {
    let n = inst.n;
    if t < 1 {
        return Err(Error::DegreeViolation("level t must be at least 1".into()));
    }
    if inst.objective.degree() > 2 * t {
        return Err(Error::DegreeViolation(format!(
            "deg(f) = {} exceeds 2t = {}",
            inst.objective.degree(),
            2 * t
        )));
    }
    for (i, g) in inst.inequalities.iter().enumerate() {
        if g.degree() > 2 * t {
            return Err(Error::DegreeViolation(format!(
                "deg(g_{}) = {} exceeds 2t = {}",
                i + 1,
                g.degree(),
                2 * t
            )));
        }
    }
    for (j, h) in inst.equalities.iter().enumerate() {
        if h.is_zero() {
            return Err(Error::Invalid(format!(
                "equality h_{} is the zero polynomial",
                j + 1
            )));
        }
        if h.degree() > 2 * t {
            return Err(Error::DegreeViolation(format!(
                "deg(h_{}) = {} exceeds 2t = {}",
                j + 1,
                h.degree(),
                2 * t
            )));
        }
    }

    let mut block_index = vec![monomials_up_to(n, t)?];
    for g in &inst.inequalities {
        let sub_t = t - g.degree().div_ceil(2);
        block_index.push(monomials_up_to(n, sub_t)?);
    }
    let block_dims: Vec<usize> = block_index.iter().map(|b| b.len()).collect();

    // Moment-block cells carrying each monomial, in (row, col) order; the
    // first position is the representative.
    let mut var_map: BTreeMap<ExponentVec, Vec<(usize, usize, usize)>> = BTreeMap::new();
    let basis0 = &block_index[0];
    for r in 0..basis0.len() {
        for c in r..basis0.len() {
            let alpha = basis0[r].add(&basis0[c]);
            var_map.entry(alpha).or_default().push((0, r, c));
        }
    }
    let rep = |alpha: &ExponentVec| -> (usize, usize, usize) {
        var_map
            .get(alpha)
            .map(|v| v[0])
            .expect("every monomial of degree <= 2t splits into two of degree <= t")
    };

    let mut constraints = Vec::new();

    // (a) normalization L(1) = 1
    let mut row = RowBuilder::new();
    row.add(rep(&ExponentVec::zeros(n)), Rat::one());
    constraints.push(LinearConstraint {
        a: row.finish(),
        b: Rat::one(),
        class: RowClass::Normalization,
    });
    let normalization_row = 0;

    // (b) consistency: every secondary cell equals its representative
    for positions in var_map.values() {
        let repr = positions[0];
        for &pos in &positions[1..] {
            let mut row = RowBuilder::new();
            row.add(pos, Rat::one());
            row.add(repr, -Rat::one());
            constraints.push(LinearConstraint {
                a: row.finish(),
                b: Rat::zero(),
                class: RowClass::Consistency,
            });
        }
    }

    // (c) localizing linkage: block cell = sum_gamma g_gamma * representative
    for (i, g) in inst.inequalities.iter().enumerate() {
        let bi = i + 1;
        let basis = &block_index[bi];
        for r in 0..basis.len() {
            for c in r..basis.len() {
                let ab = basis[r].add(&basis[c]);
                let mut row = RowBuilder::new();
                row.add((bi, r, c), Rat::one());
                for (gamma, coef) in g.terms() {
                    row.add(rep(&ab.add(gamma)), -coef.clone());
                }
                constraints.push(LinearConstraint {
                    a: row.finish(),
                    b: Rat::zero(),
                    class: RowClass::Localizing,
                });
            }
        }
    }

    // (d) equality rows L(h_j x^alpha) = 0, |alpha| <= 2t - deg(h_j)
    let mut equality_rows = Vec::new();
    for (j, h) in inst.equalities.iter().enumerate() {
        for alpha in monomials_up_to(n, 2 * t - h.degree())? {
            let mut row = RowBuilder::new();
            for (gamma, coef) in h.terms() {
                row.add(rep(&gamma.add(&alpha)), coef.clone());
            }
            equality_rows.push(EqualityRow {
                j,
                alpha: alpha.clone(),
                row: constraints.len(),
            });
            constraints.push(LinearConstraint {
                a: row.finish(),
                b: Rat::zero(),
                class: RowClass::Equality,
            });
        }
    }

    // cost <C, X> = L(f)
    let mut cost = RowBuilder::new();
    for (alpha, coef) in inst.objective.terms() {
        cost.add(rep(alpha), coef.clone());
    }

    Ok(StandardFormSDP {
        n,
        t,
        block_dims,
        block_index,
        constraints,
        cost: cost.finish(),
        var_map,
        normalization_row,
        equality_rows,
    })
}

/// L(f) = sum of f_alpha L(x^alpha), exact.
pub fn objective_value(l: &MomentFunctional, f: &Polynomial) -> Result<Rat, Error> {
    l.apply(f)
}
