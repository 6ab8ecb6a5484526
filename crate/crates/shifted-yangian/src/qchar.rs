//! Depth-truncated q-characters.
//!
//! A [`QCharacter`] stores its top ℓ-weight and the normalized part as a
//! table over `A⁻¹`-monomials; only monomials with at most `depth` factors
//! are kept. Closed forms cover the explicit sl₂ families and `N_{i,a}` in any
//! type. [`jordan_holder_sl2`] peels simple q-characters off an sl₂ product.

use crate::cartan::CartanData;
use crate::factorize::{standard_factorize, DeltaSet};
use crate::lweight::{a_root, psi, LWeight, Weight};
use crate::ratfun::LinRat;
use crate::{fmt_q, parse_q, q, Q};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QCharError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("cannot parse module expression: {0}")]
    Parse(String),
    #[error("negative multiplicity {mult} at {monomial} while peeling")]
    NegativeMultiplicity { monomial: String, mult: i64 },
    #[error("truncation inconclusive: a class appears at the depth boundary {0}")]
    TruncationInconclusive(usize),
    #[error("only supported for sl₂")]
    Unsupported,
    #[error("depth mismatch or rank mismatch between factors")]
    Mismatch,
}

/// Sorted multiset of `(i, a)` standing for `∏ A_{i,a}^{−1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AMono(Vec<(usize, Q)>);

impl AMono {
    pub fn one() -> Self {
        AMono(Vec::new())
    }

    pub fn from_factors(mut f: Vec<(usize, Q)>) -> Self {
        f.sort();
        AMono(f)
    }

    pub fn factors(&self) -> &[(usize, Q)] {
        &self.0
    }

    pub fn size(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, o: &AMono) -> AMono {
        let mut v = self.0.clone();
        v.extend(o.0.iter().cloned());
        AMono::from_factors(v)
    }

    /// Spectral shift of every factor: `A_{i,a} ↦ A_{i,a+c}`.
    pub fn shift(&self, c: &Q) -> AMono {
        AMono(self.0.iter().map(|(i, a)| (*i, a + c)).collect())
    }

    /// The ℓ-weight `∏ A_{i,a}^{−1}`.
    pub fn lweight(&self, cd: &CartanData) -> LWeight {
        self.0.iter().fold(LWeight::one(cd.rank()), |acc, (i, a)| acc.div(&a_root(cd, *i, a)))
    }

    /// Chain `A_b^{−1} A_{b−1}^{−1} ⋯ A_{b−k+1}^{−1}` at node `i`.
    pub fn chain(i: usize, b: &Q, k: usize) -> AMono {
        AMono::from_factors((0..k).map(|t| (i, b - q(t as i64))).collect())
    }
}

impl fmt::Display for AMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|(i, a)| format!("A({},{})^-1", i + 1, fmt_q(a))).collect();
        write!(f, "{}", parts.join("*"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QCharacter {
    pub top: LWeight,
    pub terms: BTreeMap<AMono, i64>,
    pub depth: usize,
}

impl QCharacter {
    /// `qc(s) = s` for a one-dimensional module.
    pub fn monomial(top: LWeight, depth: usize) -> Self {
        QCharacter { top, terms: BTreeMap::from([(AMono::one(), 1)]), depth }
    }

    pub fn unit(rank: usize, depth: usize) -> Self {
        Self::monomial(LWeight::one(rank), depth)
    }

    pub fn from_terms(top: LWeight, terms: impl IntoIterator<Item = (AMono, i64)>, depth: usize) -> Self {
        let mut out = QCharacter { top, terms: BTreeMap::new(), depth };
        for (m, n) in terms {
            out.add_term(m, n);
        }
        out
    }

    fn add_term(&mut self, m: AMono, n: i64) {
        if m.size() > self.depth || n == 0 {
            return;
        }
        let e = self.terms.entry(m.clone()).or_insert(0);
        *e += n;
        if *e == 0 {
            self.terms.remove(&m);
        }
    }

    /// Product in the q-character ring, truncated at the smaller depth.
    pub fn mul(&self, o: &QCharacter) -> QCharacter {
        let depth = self.depth.min(o.depth);
        let mut out = QCharacter { top: self.top.mul(&o.top), terms: BTreeMap::new(), depth };
        for (m1, n1) in &self.terms {
            for (m2, n2) in &o.terms {
                if m1.size() + m2.size() <= depth {
                    out.add_term(m1.mul(m2), n1 * n2);
                }
            }
        }
        out
    }

    pub fn truncate(&self, depth: usize) -> QCharacter {
        QCharacter::from_terms(self.top.clone(), self.terms.clone(), depth.min(self.depth))
    }

    /// Multiset of ℓ-weights `top · m` with multiplicities.
    pub fn lweights(&self, cd: &CartanData) -> BTreeMap<LWeight, i64> {
        let mut out = BTreeMap::new();
        for (m, n) in &self.terms {
            *out.entry(self.top.mul(&m.lweight(cd))).or_insert(0) += n;
        }
        out
    }

    /// Image under `ϖ`: each monomial lowers the top weight by its simple roots.
    pub fn character(&self, cd: &CartanData) -> Character {
        let top = self.top.weight(cd);
        let mut terms = BTreeMap::new();
        for (m, n) in &self.terms {
            let w = m.factors().iter().fold(top.clone(), |w, (i, _)| w.sub(&Weight::simple_root(cd, *i)));
            *terms.entry(w).or_insert(0) += n;
        }
        terms.retain(|_, n| *n != 0);
        Character { terms, depth: self.depth }
    }

    /// Total multiplicity per monomial size.
    pub fn size_profile(&self) -> Vec<i64> {
        let mut v = vec![0; self.depth + 1];
        for (m, n) in &self.terms {
            v[m.size()] += n;
        }
        v
    }
}

impl fmt::Display for QCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, n)| if *n == 1 { m.to_string() } else { format!("{n}*{m}") })
            .collect();
        write!(f, "{} · ({}) + O(depth {})", self.top, parts.join(" + "), self.depth + 1)
    }
}

/// Formal character: weight ↦ multiplicity, truncated at root height `depth`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Character {
    pub terms: BTreeMap<Weight, i64>,
    pub depth: usize,
}

/// The module families with closed-form q-characters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    /// `L_a^+`, highest ℓ-weight `u − a`.
    Lplus(Q),
    /// `L_b^−`, highest ℓ-weight `1/(u − b)`.
    Lminus(Q),
    /// `N_{i,a}` (node 0-based).
    N(usize, Q),
    /// `𝔏_b^a` given as `(a, b)`.
    FrakL(Q, Q),
    /// `L_b^a` given as `(a, b)`.
    L(Q, Q),
    /// KR module `W_{k,a} = L_a^{a−k}`.
    KR(usize, Q),
}

impl Family {
    /// Highest ℓ-weight.
    pub fn top(&self, cd: &CartanData) -> LWeight {
        let sl2 = |f: LinRat| LWeight::single(f);
        match self {
            Family::Lplus(a) => sl2(LinRat::factor(a.clone(), 1)),
            Family::Lminus(b) => sl2(LinRat::factor(b.clone(), -1)),
            Family::N(i, a) => {
                let mut e = psi(cd, *i, &(a - q(cd.d(*i)))).div(&psi(cd, *i, a));
                for j in cd.neighbours(*i) {
                    e = e.mul(&psi(cd, j, &(a - cd.dij(*i, j))));
                }
                e
            }
            Family::FrakL(a, b) | Family::L(a, b) => sl2(LinRat::from_roots([a], [b])),
            Family::KR(k, a) => sl2(LinRat::from_roots([&(a - q(*k as i64))], [a])),
        }
    }

    /// Node and starting point of the `A⁻¹` chain, plus its length (`None`: unbounded).
    fn chain(&self) -> Option<(usize, Q, Option<usize>)> {
        match self {
            Family::Lplus(_) => None,
            Family::Lminus(b) | Family::FrakL(_, b) => Some((0, b.clone(), None)),
            Family::N(i, a) => Some((*i, a.clone(), Some(1))),
            Family::L(a, b) => match DeltaSet::new(a, b) {
                DeltaSet::Finite(n) => Some((0, b.clone(), Some(n as usize))),
                DeltaSet::AllNaturals => Some((0, b.clone(), None)),
            },
            Family::KR(k, a) => Some((0, a.clone(), Some(*k))),
        }
    }

    pub fn is_sl2_only(&self) -> bool {
        !matches!(self, Family::N(..))
    }

    pub fn qc(&self, cd: &CartanData, depth: usize) -> Result<QCharacter, QCharError> {
        if self.is_sl2_only() && cd.rank() != 1 {
            return Err(QCharError::InvalidParameters(format!("{self} is an sl₂ family")));
        }
        if let Family::N(i, _) = self {
            cd.check_node(*i).map_err(|e| QCharError::InvalidParameters(e.to_string()))?;
        }
        let top = self.top(cd);
        let terms: Vec<(AMono, i64)> = match self.chain() {
            None => vec![(AMono::one(), 1)],
            Some((i, b, len)) => {
                let n = len.map_or(depth, |l| l.min(depth));
                (0..=n).map(|k| (AMono::chain(i, &b, k), 1)).collect()
            }
        };
        Ok(QCharacter::from_terms(top, terms, depth))
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Lplus(a) => write!(f, "Lplus({})", fmt_q(a)),
            Family::Lminus(b) => write!(f, "Lminus({})", fmt_q(b)),
            Family::N(0, a) => write!(f, "N({})", fmt_q(a)),
            Family::N(i, a) => write!(f, "N({},{})", i + 1, fmt_q(a)),
            Family::FrakL(a, b) => write!(f, "FrakL({},{})", fmt_q(a), fmt_q(b)),
            Family::L(a, b) => write!(f, "Lba({},{})", fmt_q(a), fmt_q(b)),
            Family::KR(k, a) => write!(f, "KR({},{})", k, fmt_q(a)),
        }
    }
}

impl FromStr for Family {
    type Err = QCharError;

    /// `Lplus(a)`, `Lminus(b)`, `N(a)`, `N(i,a)`, `FrakL(a,b)`, `L(a,b)` or
    /// `Lba(a,b)`, `KR(k,a)`; node labels are 1-based.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || QCharError::Parse(s.to_string());
        let s = s.trim();
        let open = s.find('(').ok_or_else(bad)?;
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let args: Vec<&str> = inner.split(',').map(str::trim).collect();
        let num = |k: usize| args.get(k).and_then(|a| parse_q(a)).ok_or_else(bad);
        let count = |k: usize| args.get(k).and_then(|a| a.parse::<usize>().ok()).ok_or_else(bad);
        let fam = match (&s[..open], args.len()) {
            ("Lplus", 1) => Family::Lplus(num(0)?),
            ("Lminus", 1) => Family::Lminus(num(0)?),
            ("N", 1) => Family::N(0, num(0)?),
            ("N", 2) => Family::N(count(0)?.checked_sub(1).ok_or_else(bad)?, num(1)?),
            ("FrakL", 2) => Family::FrakL(num(0)?, num(1)?),
            ("L" | "Lba", 2) => Family::L(num(0)?, num(1)?),
            ("KR", 2) => Family::KR(count(0)?, num(1)?),
            _ => return Err(bad()),
        };
        Ok(fam)
    }
}

/// Parses a `*`-separated product of families and returns the product q-character.
pub fn qc_product(cd: &CartanData, expr: &str, depth: usize) -> Result<QCharacter, QCharError> {
    let mut out = QCharacter::unit(cd.rank(), depth);
    for part in crate::lweight::split_top(expr, '*') {
        let fam: Family = part.parse()?;
        out = out.mul(&fam.qc(cd, depth)?);
    }
    Ok(out)
}

/// q-character of the simple sl₂ module `L(e)` via its standard factorization.
pub fn qc_simple_sl2(e: &LinRat, depth: usize) -> QCharacter {
    let cd = CartanData::sl2();
    let f = standard_factorize(e);
    let mut out = QCharacter::unit(1, depth);
    let fams = f
        .positive
        .iter()
        .map(|x| Family::Lplus(x.clone()))
        .chain(f.kr_pairs.iter().map(|(y, z)| Family::L(y.clone(), z.clone())))
        .chain(f.negative.iter().map(|w| Family::Lminus(w.clone())));
    for fam in fams {
        out = out.mul(&fam.qc(&cd, depth).expect("sl₂ family"));
    }
    out
}

/// Expansion of `e^{a ϖ_i / d_i} ∏_{γ>0} (1 − e^{−γ})^{−⟨ϖ_i^∨, γ⟩}` up to root height `depth`.
pub fn product_character(cd: &CartanData, i: usize, a: &Q, depth: usize) -> Character {
    let r = cd.rank();
    let mut top = Weight::zero(r);
    top.0[i] = a / q(cd.d(i));
    // Work in root coordinates, then convert.
    let mut series: BTreeMap<Vec<i64>, i64> = BTreeMap::from([(vec![0; r], 1)]);
    for gamma in cd.pos_roots() {
        let height = CartanData::height(gamma) as usize;
        for _ in 0..gamma[i] {
            // multiply by 1/(1 − e^{−γ}) = Σ_k e^{−kγ}
            let mut next = BTreeMap::new();
            for (v, n) in &series {
                let h0: i64 = v.iter().sum();
                let mut k = 0usize;
                while h0 as usize + k * height <= depth {
                    let w: Vec<i64> = v.iter().zip(gamma).map(|(x, g)| x + k as i64 * g).collect();
                    *next.entry(w).or_insert(0) += n;
                    k += 1;
                }
            }
            series = next;
        }
    }
    let mut terms = BTreeMap::new();
    for (v, n) in series {
        let w = v.iter().enumerate().fold(top.clone(), |w, (j, c)| w.sub(&Weight::simple_root(cd, j).scale(&q(*c))));
        *terms.entry(w).or_insert(0) += n;
    }
    Character { terms, depth }
}

/// Compares `χ(L_{i,a}^−)` with the product formula. Only sl₂ has a
/// closed-form `L^−` q-character here.
pub fn product_character_check(cd: &CartanData, i: usize, a: &Q, depth: usize) -> Result<bool, QCharError> {
    if cd.rank() != 1 || i != 0 {
        return Err(QCharError::Unsupported);
    }
    let chi = Family::Lminus(a.clone()).qc(cd, depth)?.character(cd);
    Ok(chi == product_character(cd, i, a, depth))
}

/// Jordan–Hölder multiplicities of an sl₂ q-character.
///
/// Peels the term of smallest monomial size (ties: lexicographic), subtracting
/// the corresponding simple q-character. A peel at the depth boundary cannot
/// be told apart from truncation noise and is reported as inconclusive.
pub fn jordan_holder_sl2(x: &QCharacter) -> Result<BTreeMap<LinRat, i64>, QCharError> {
    if x.top.rank() != 1 {
        return Err(QCharError::Unsupported);
    }
    let cd = CartanData::sl2();
    let depth = x.depth;
    let mut rest = x.terms.clone();
    let mut out = BTreeMap::new();
    while let Some((t, n)) = rest.iter().min_by(|a, b| (a.0.size(), a.0).cmp(&(b.0.size(), b.0))).map(|(t, n)| (t.clone(), *n)) {
        if n < 0 {
            return Err(QCharError::NegativeMultiplicity { monomial: t.to_string(), mult: n });
        }
        if t.size() == depth && depth > 0 {
            return Err(QCharError::TruncationInconclusive(depth));
        }
        let e = x.top.mul(&t.lweight(&cd)).comp(0).clone();
        let simple = qc_simple_sl2(&e, depth - t.size());
        for (m, k) in &simple.terms {
            let key = t.mul(m);
            let v = rest.entry(key.clone()).or_insert(0);
            *v -= n * k;
            if *v == 0 {
                rest.remove(&key);
            }
        }
        *out.entry(e).or_insert(0) += n;
    }
    Ok(out)
}

/// A single Jordan–Hölder class of multiplicity one.
pub fn single_class(e: LinRat) -> BTreeMap<LinRat, i64> {
    BTreeMap::from([(e, 1)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qr;

    fn sl2() -> CartanData {
        CartanData::sl2()
    }

    fn lr(s: &str) -> LinRat {
        LinRat::parse(s).unwrap()
    }

    #[test]
    fn n_squared() {
        let cd = sl2();
        let n = Family::N(0, q(2)).qc(&cd, 4).unwrap();
        let sq = n.mul(&n);
        let a = AMono::from_factors(vec![(0, q(2))]);
        assert_eq!(sq.terms.get(&AMono::one()), Some(&1));
        assert_eq!(sq.terms.get(&a), Some(&2));
        assert_eq!(sq.terms.get(&a.mul(&a)), Some(&1));
        assert_eq!(sq.terms.len(), 3);
    }

    #[test]
    fn unit_and_top_products() {
        let cd = sl2();
        let x = Family::Lminus(q(1)).qc(&cd, 5).unwrap();
        assert_eq!(x.mul(&qc_simple_sl2(&LinRat::one(), 5)), x);
        let p = qc_product(&cd, "Lplus(9)*Lplus(3)*Lminus(0)*Lminus(2)", 4).unwrap();
        assert_eq!(p.top.comp(0), &lr("(u-9)*(u-3)/(u*(u-2))"));
    }

    #[test]
    fn finite_and_infinite_chains() {
        let cd = sl2();
        let b = qr(7, 2);
        let l = Family::L(&b - q(2), b.clone()).qc(&cd, 10).unwrap();
        assert_eq!(l.terms.len(), 3);
        assert!(l.terms.contains_key(&AMono::from_factors(vec![(0, b.clone()), (0, &b - q(1))])));
        assert_eq!(Family::Lplus(q(1)).qc(&cd, 6).unwrap().terms.len(), 1);
        assert_eq!(Family::Lminus(q(0)).qc(&cd, 4).unwrap().terms.len(), 5);
        assert_eq!(Family::FrakL(q(0), q(2)).qc(&cd, 4).unwrap().terms.len(), 5);
    }

    #[test]
    fn n_in_b2_has_two_terms_and_right_top() {
        let cd = CartanData::new("B2").unwrap();
        let n = Family::N(0, q(0)).qc(&cd, 3).unwrap();
        assert_eq!(n.terms.len(), 2);
                let lw = n.lweights(&cd);
        assert!(lw.contains_key(&n.top));
        assert!(lw.contains_key(&n.top.div(&a_root(&cd, 0, &q(0)))));
    }

    #[test]
    fn simple_factorizes() {
        let e = lr("(u-9)*(u-3)/(u*(u-2))");
        let x = qc_simple_sl2(&e, 6);
        let y = qc_product(&sl2(), "Lminus(0)*Lminus(2)*Lplus(9)*Lplus(3)", 6).unwrap();
        assert_eq!(x, y);
        let kr = qc_simple_sl2(&lr("(u-4)/(u-5)"), 3);
        assert_eq!(kr.terms.len(), 2);
        assert!(kr.terms.contains_key(&AMono::from_factors(vec![(0, q(5))])));
    }

    #[test]
    fn characters() {
        let cd = sl2();
        for a in [q(0), qr(-3, 2), q(5)] {
            assert!(product_character_check(&cd, 0, &a, 8).unwrap());
        }
        let chi = Family::Lplus(q(4)).qc(&cd, 3).unwrap().character(&cd);
        assert_eq!(chi.terms, BTreeMap::from([(Weight(vec![q(-4)]), 1)]));
        let chi = Family::Lminus(q(4)).qc(&cd, 0).unwrap().character(&cd);
        assert_eq!(chi.terms, BTreeMap::from([(Weight(vec![q(4)]), 1)]));
        assert_eq!(product_character_check(&CartanData::new("A2").unwrap(), 0, &q(0), 2), Err(QCharError::Unsupported));
    }

    #[test]
    fn product_formula_counts_in_a2() {
        // node 1 of A2: roots α1 and α1+α2 contribute, so heights 0,1,2 have 1,1,2 terms
        let cd = CartanData::new("A2").unwrap();
        let chi = product_character(&cd, 0, &q(0), 2);
        let total: i64 = chi.terms.values().sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn jh_examples() {
        let cd = sl2();
        let x = qc_product(&cd, "Lba(9,0)*Lba(3,2)", 10).unwrap();
        let jh = jordan_holder_sl2(&x).unwrap();
        assert_eq!(jh, single_class(lr("(u-9)*(u-3)/(u*(u-2))")));

        let one = QCharacter::unit(1, 5);
        assert_eq!(jordan_holder_sl2(&one).unwrap(), single_class(LinRat::one()));

        let b = qr(1, 2);
        let x = Family::Lplus(b.clone()).qc(&cd, 10).unwrap().mul(&Family::Lminus(b.clone()).qc(&cd, 10).unwrap());
        let jh = jordan_holder_sl2(&x).unwrap();
        let expect = BTreeMap::from([(LinRat::one(), 1), (LinRat::from_roots([&(&b + q(1))], [&(&b - q(1))]), 1)]);
        assert_eq!(jh, expect);
    }

    #[test]
    fn jh_reducible_kr_product() {
        // N(1) ⊗ N(0) = L_1^0 ⊗ L_0^{-1}: 0 ∈ Δ∩Δ, so the tensor product splits
        let cd = sl2();
        let x = qc_product(&cd, "N(1)*N(0)", 5).unwrap();
        let jh = jordan_holder_sl2(&x).unwrap();
        assert_eq!(jh.values().sum::<i64>(), 2);
    }

    #[test]
    fn jh_inconclusive_at_boundary() {
        let cd = sl2();
        let x = qc_product(&cd, "N(1)*N(0)", 1).unwrap();
        assert_eq!(jordan_holder_sl2(&x), Err(QCharError::TruncationInconclusive(1)));
    }

    #[test]
    fn kr_limit() {
        let cd = sl2();
        for k in 1..=6 {
            let a = qr(2, 3);
            let w = Family::KR(k, a.clone()).qc(&cd, k - 1).unwrap();
            let l = Family::Lminus(a).qc(&cd, k - 1).unwrap();
            assert_eq!(w.terms, l.terms, "k={k}");
        }
    }

    #[test]
    fn family_parsing() {
        assert_eq!("Lba(9,0)".parse::<Family>().unwrap(), Family::L(q(9), q(0)));
        assert_eq!("N(2,1/2)".parse::<Family>().unwrap(), Family::N(1, qr(1, 2)));
        assert_eq!("KR(3,-1)".parse::<Family>().unwrap(), Family::KR(3, q(-1)));
        assert!("Q(1)".parse::<Family>().is_err());
        assert!("N(0,1)".parse::<Family>().is_err());
        for f in ["Lplus(1/2)", "Lminus(-3)", "FrakL(1,2)", "Lba(0,3)", "N(4)"] {
            assert_eq!(f.parse::<Family>().unwrap().to_string(), f);
        }
    }
}
