//! ℓ-weights: tuples of monic rational functions indexed by Dynkin nodes.
//!
//! The distinguished elements are the prefundamental `Ψ_{i,a}`, the
//! fundamental `Y_{i,a}` and the generalized simple roots `A_{i,a}`.

use crate::cartan::{CartanData, CartanError};
use crate::linalg::Mat;
use crate::ratfun::{LinRat, RatFunError};
use crate::{fmt_q, parse_q, q, qr, Q};
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LWeightError {
    #[error("not a monomial in the A_{{i,a}}: {0}")]
    NotAMonomial(String),
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("cannot parse ℓ-weight: {0}")]
    Parse(String),
    #[error(transparent)]
    Cartan(#[from] CartanError),
    #[error(transparent)]
    RatFun(#[from] RatFunError),
}

/// An element of the ℓ-weight group ℛ.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LWeight {
    comps: Vec<LinRat>,
}

/// Multiset of generalized simple roots: `(i, a) ↦ n` stands for `∏ A_{i,a}^n`.
pub type AMonomial = BTreeMap<(usize, Q), i64>;

/// Which distinguished generator to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    Psi,
    Y,
    A,
}

impl LWeight {
    pub fn one(rank: usize) -> Self {
        LWeight { comps: vec![LinRat::one(); rank] }
    }

    pub fn from_comps(comps: Vec<LinRat>) -> Self {
        LWeight { comps }
    }

    /// sl₂ shorthand.
    pub fn single(f: LinRat) -> Self {
        LWeight { comps: vec![f] }
    }

    pub fn rank(&self) -> usize {
        self.comps.len()
    }

    pub fn comp(&self, i: usize) -> &LinRat {
        &self.comps[i]
    }

    pub fn comps(&self) -> &[LinRat] {
        &self.comps
    }

    pub fn is_one(&self) -> bool {
        self.comps.iter().all(LinRat::is_one)
    }

    pub fn mul(&self, o: &LWeight) -> LWeight {
        assert_eq!(self.rank(), o.rank(), "rank mismatch");
        LWeight { comps: self.comps.iter().zip(&o.comps).map(|(a, b)| a.mul(b)).collect() }
    }

    pub fn inv(&self) -> LWeight {
        LWeight { comps: self.comps.iter().map(LinRat::inv).collect() }
    }

    pub fn div(&self, o: &LWeight) -> LWeight {
        self.mul(&o.inv())
    }

    pub fn pow(&self, k: i64) -> LWeight {
        LWeight { comps: self.comps.iter().map(|f| f.pow(k)).collect() }
    }

    /// Spectral shift `τ_a`: every component `f(u) ↦ f(u − a)`.
    pub fn tau(&self, a: &Q) -> LWeight {
        LWeight { comps: self.comps.iter().map(|f| f.shift(a)).collect() }
    }

    /// Membership in the monoid 𝒟 generated by the `Ψ_{i,a}`.
    pub fn in_monoid_d(&self) -> bool {
        self.comps.iter().all(LinRat::is_poly)
    }

    /// `ϖ^∨(e)`: the degrees of the components.
    pub fn coweight(&self) -> Vec<i64> {
        self.comps.iter().map(LinRat::degree).collect()
    }

    /// `ϖ(e)` in fundamental-weight coordinates.
    pub fn weight(&self, cd: &CartanData) -> Weight {
        Weight(self.comps.iter().enumerate().map(|(i, f)| f.subleading() / q(cd.d(i))).collect())
    }

    pub fn weight_and_coweight(&self, cd: &CartanData) -> (Weight, Vec<i64>) {
        (self.weight(cd), self.coweight())
    }

    /// Ψ-exponent coordinates `(j, b) ↦ m`.
    pub fn psi_coords(&self) -> BTreeMap<(usize, Q), i64> {
        let mut out = BTreeMap::new();
        for (j, f) in self.comps.iter().enumerate() {
            for (b, m) in f.roots() {
                out.insert((j, b.clone()), *m);
            }
        }
        out
    }

    pub fn parse(cd: &CartanData, s: &str) -> Result<LWeight, LWeightError> {
        let mut out = LWeight::one(cd.rank());
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(out);
        }
        let bad = |m: &str| LWeightError::Parse(format!("{m} in {s:?}"));
        for tok in split_top(s, '*') {
            let tok = tok.trim();
            if tok == "1" {
                continue;
            }
            let open = tok.find('(').ok_or_else(|| bad("missing '('"))?;
            let close = tok.rfind(')').ok_or_else(|| bad("missing ')'"))?;
            let name = tok[..open].trim();
            let args: Vec<&str> = tok[open + 1..close].split(',').collect();
            if args.len() != 2 {
                return Err(bad("expected two arguments"));
            }
            let node: usize = args[0].trim().parse().map_err(|_| bad("bad node"))?;
            if node == 0 {
                return Err(bad("nodes are numbered from 1"));
            }
            let a = parse_q(args[1]).ok_or_else(|| bad("bad spectral parameter"))?;
            let rest = tok[close + 1..].trim();
            let k: i64 = match rest.strip_prefix('^') {
                Some(e) => e.trim().parse().map_err(|_| bad("bad exponent"))?,
                None if rest.is_empty() => 1,
                None => return Err(bad("unexpected text after factor")),
            };
            let kind = match name {
                "Psi" => GenKind::Psi,
                "Y" => GenKind::Y,
                "A" => GenKind::A,
                _ => return Err(bad("unknown generator")),
            };
            out = out.mul(&generator(cd, kind, node - 1, &a)?.pow(k));
        }
        Ok(out)
    }
}

/// Split on `sep` outside parentheses.
pub(crate) fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (k, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..k]);
                start = k + ch.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

impl fmt::Debug for LWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.comps.iter().map(|c| c.to_string()).collect();
        if parts.len() == 1 {
            write!(f, "{}", parts[0])
        } else {
            write!(f, "[{}]", parts.join("; "))
        }
    }
}

/// `Ψ_{i,a}`, `Y_{i,a} = Ψ_{i,a−d_i/2}/Ψ_{i,a+d_i/2}` or
/// `A_{i,a} = ∏_j Ψ_{j,a−d_ij}/Ψ_{j,a+d_ij}`.
pub fn generator(cd: &CartanData, kind: GenKind, i: usize, a: &Q) -> Result<LWeight, LWeightError> {
    cd.check_node(i)?;
    let mut comps = vec![LinRat::one(); cd.rank()];
    match kind {
        GenKind::Psi => comps[i] = LinRat::factor(a.clone(), 1),
        GenKind::Y => {
            let h = qr(cd.d(i), 2);
            comps[i] = LinRat::factor(a - &h, 1).div(&LinRat::factor(a + &h, 1));
        }
        GenKind::A => {
            for (j, c) in comps.iter_mut().enumerate() {
                let dij = cd.dij(i, j);
                if !dij.is_zero() {
                    *c = LinRat::factor(a - &dij, 1).div(&LinRat::factor(a + &dij, 1));
                }
            }
        }
    }
    Ok(LWeight { comps })
}

pub fn psi(cd: &CartanData, i: usize, a: &Q) -> LWeight {
    generator(cd, GenKind::Psi, i, a).expect("valid node")
}

pub fn y(cd: &CartanData, i: usize, a: &Q) -> LWeight {
    generator(cd, GenKind::Y, i, a).expect("valid node")
}

pub fn a_root(cd: &CartanData, i: usize, a: &Q) -> LWeight {
    generator(cd, GenKind::A, i, a).expect("valid node")
}

/// The ℓ-weight `∏ A_{i,a}^n`.
pub fn a_monomial(cd: &CartanData, m: &AMonomial) -> LWeight {
    m.iter().fold(LWeight::one(cd.rank()), |acc, ((i, a), n)| acc.mul(&a_root(cd, *i, a).pow(*n)))
}

pub fn fmt_a_monomial(m: &AMonomial) -> String {
    if m.is_empty() {
        return "1".into();
    }
    m.iter()
        .map(|((i, a), n)| {
            let base = format!("A({},{})", i + 1, fmt_q(a));
            if *n == 1 {
                base
            } else {
                format!("{base}^{n}")
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

/// Decompose `f` as a product of `A_{i,a}^{±1}`.
///
/// The Ψ-coordinates of the `A_{i,a}` are solved for by exact elimination over
/// a window of candidate spectral parameters around the support of `f`; the
/// answer is unique because the `A_{i,a}` are free, and it is checked by
/// reassembly before being returned.
pub fn a_monomial_decompose(cd: &CartanData, f: &LWeight) -> Result<AMonomial, LWeightError> {
    if f.rank() != cd.rank() {
        return Err(LWeightError::RankMismatch(f.rank(), cd.rank()));
    }
    let target = f.psi_coords();
    if target.is_empty() {
        return Ok(AMonomial::new());
    }
    let not = || LWeightError::NotAMonomial(f.to_string());
    // each A_{i,a} moves weight by α_i; the coordinates of ϖ(f) in the root
    // basis must be integers
    let n_alpha = to_root_coords(cd, &f.weight(cd));
    if n_alpha.iter().any(|x| !x.is_integer()) || f.coweight().iter().any(|k| *k != 0) {
        return Err(not());
    }
    let half = qr(1, 2);
    let big_d = q(cd.max_d());
    let spread = &big_d * q(2 * (cd.rank() as i64 + 1));
    let keys: BTreeSet<Q> = target.keys().map(|(_, b)| b.clone()).collect();
    let lo = keys.iter().next().unwrap() - &spread;
    let hi = keys.iter().next_back().unwrap() + &spread;
    let mut cands = BTreeSet::new();
    for b in &keys {
        let mut a = b.clone();
        while a > lo {
            a -= &half;
        }
        while a <= hi {
            cands.insert(a.clone());
            a += &half;
        }
    }
    let unknowns: Vec<(usize, Q)> = cd.nodes().flat_map(|i| cands.iter().map(move |a| (i, a.clone()))).collect();
    let mut rows: BTreeMap<(usize, Q), usize> = BTreeMap::new();
    let mut entries: Vec<((usize, Q), usize, i64)> = Vec::new();
    for (col, (i, a)) in unknowns.iter().enumerate() {
        for j in cd.nodes() {
            let dij = cd.dij(*i, j);
            if dij.is_zero() {
                continue;
            }
            entries.push(((j, a - &dij), col, 1));
            entries.push(((j, a + &dij), col, -1));
        }
    }
    for (key, _, _) in &entries {
        let n = rows.len();
        rows.entry(key.clone()).or_insert(n);
    }
    for key in target.keys() {
        if !rows.contains_key(key) {
            return Err(not());
        }
    }
    let mut m = Mat::zeros(rows.len(), unknowns.len());
    for (key, col, v) in &entries {
        m.add_to(rows[key], *col, &q(*v));
    }
    let mut rhs = vec![Q::zero(); rows.len()];
    for (key, v) in &target {
        rhs[rows[key]] = q(*v);
    }
    let sol = m.solve(&rhs).ok_or_else(not)?;
    let mut out = AMonomial::new();
    for (x, key) in sol.iter().zip(&unknowns) {
        if x.is_zero() {
            continue;
        }
        if !x.is_integer() {
            return Err(not());
        }
        let n: i64 = x.to_integer().try_into().map_err(|_| not())?;
        out.insert(key.clone(), n);
    }
    if a_monomial(cd, &out) != *f {
        return Err(not());
    }
    Ok(out)
}

/// Weight in fundamental-weight coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Weight(pub Vec<Q>);

impl Weight {
    pub fn zero(rank: usize) -> Self {
        Weight(vec![Q::zero(); rank])
    }

    pub fn add(&self, o: &Weight) -> Weight {
        Weight(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Weight) -> Weight {
        Weight(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: &Q) -> Weight {
        Weight(self.0.iter().map(|a| a * c).collect())
    }

    /// `α_i` in fundamental-weight coordinates: coefficient of `ϖ_j` is `c_ji`.
    pub fn simple_root(cd: &CartanData, i: usize) -> Weight {
        Weight(cd.nodes().map(|j| q(cd.c(j, i))).collect())
    }

    /// `λ ≤ μ` iff `μ − λ` is a nonnegative combination of simple roots.
    pub fn le(&self, mu: &Weight, cd: &CartanData) -> bool {
        to_root_coords(cd, &mu.sub(self)).iter().all(|x| !x.is_negative())
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(fmt_q).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Coordinates of a weight in the simple-root basis.
pub fn to_root_coords(cd: &CartanData, w: &Weight) -> Vec<Q> {
    let cmat = Mat::from_fn(cd.rank(), cd.rank(), |j, i| q(cd.c(j, i)));
    cmat.solve(&w.0).expect("Cartan matrix is invertible")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lr(s: &str) -> LinRat {
        LinRat::parse(s).unwrap()
    }

    #[test]
    fn sl2_simple_root() {
        let cd = CartanData::sl2();
        let a = q(3);
        assert_eq!(a_root(&cd, 0, &a).comp(0), &lr("(u-2)/(u-4)"));
    }

    #[test]
    fn psi_component() {
        let cd = CartanData::new("B2").unwrap();
        let p = psi(&cd, 1, &q(3));
        assert_eq!(p.comp(1), &lr("(u-3)"));
        assert!(p.comp(0).is_one());
    }

    #[test]
    fn b2_simple_root() {
        let cd = CartanData::new("B2").unwrap();
        let a = a_root(&cd, 0, &q(0));
        assert_eq!(a.comp(0), &lr("(u+2)/(u-2)"));
        // d_12 = -1, so Ψ_{2,1}/Ψ_{2,-1}
        assert_eq!(a.comp(1), &lr("(u-1)/(u+1)"));
    }

    #[test]
    fn y_is_psi_ratio() {
        let cd = CartanData::new("G2").unwrap();
        let a = qr(1, 3);
        let h = qr(3, 2);
        assert_eq!(y(&cd, 0, &a), psi(&cd, 0, &(&a - &h)).div(&psi(&cd, 0, &(&a + &h))));
    }

    #[test]
    fn weights() {
        let cd = CartanData::new("B2").unwrap();
        let (w, k) = psi(&cd, 0, &q(4)).weight_and_coweight(&cd);
        assert_eq!(w, Weight(vec![q(-2), q(0)]));
        assert_eq!(k, vec![1, 0]);
        let (w0, k0) = LWeight::one(2).weight_and_coweight(&cd);
        assert_eq!((w0, k0), (Weight::zero(2), vec![0, 0]));
        let sl2 = CartanData::sl2();
        let (wa, ka) = a_root(&sl2, 0, &q(7)).weight_and_coweight(&sl2);
        assert_eq!((wa, ka), (Weight(vec![q(2)]), vec![0]));
        for i in 0..2 {
            assert_eq!(a_root(&cd, i, &q(1)).weight(&cd), Weight::simple_root(&cd, i));
        }
    }

    #[test]
    fn decompose_b2_fundamental_ratio() {
        let cd = CartanData::new("B2").unwrap();
        let m: AMonomial = [((0, q(0)), 1), ((0, q(-1)), 1), ((1, q(0)), 1), ((1, q(-1)), 1)].into_iter().collect();
        let f = a_monomial(&cd, &m);
        assert_eq!(a_monomial_decompose(&cd, &f).unwrap(), m);
        assert!(a_monomial_decompose(&cd, &LWeight::one(2)).unwrap().is_empty());
    }

    #[test]
    fn decompose_g2_fundamental_ratio() {
        let cd = CartanData::new("G2").unwrap();
        let m: AMonomial = [((0, qr(-3, 2)), 1), ((0, qr(-7, 2)), 1), ((1, q(0)), 1), ((1, q(-2)), 1), ((1, q(-3)), 1), ((1, q(-5)), 1)]
            .into_iter()
            .collect();
        assert_eq!(a_monomial_decompose(&cd, &a_monomial(&cd, &m)).unwrap(), m);
    }

    #[test]
    fn decompose_rejects() {
        let cd = CartanData::sl2();
        assert!(a_monomial_decompose(&cd, &psi(&cd, 0, &q(1))).is_err());
        assert!(a_monomial_decompose(&cd, &y(&cd, 0, &q(1))).is_err());
        let f = LWeight::single(lr("(u-1)(u+1)/((u-3)(u+3))"));
        // brute force over |n| ≤ 3, a ∈ {-4..4} (half-integral steps)
        let mut brute = None;
        let grid: Vec<Q> = (-8..=8).map(|k| qr(k, 2)).collect();
        'outer: for a1 in &grid {
            for a2 in &grid {
                for n1 in -3..=3i64 {
                    for n2 in -3..=3i64 {
                        let g = a_root(&cd, 0, a1).pow(n1).mul(&a_root(&cd, 0, a2).pow(n2));
                        if g == f {
                            brute = Some((a1.clone(), n1, a2.clone(), n2));
                            break 'outer;
                        }
                    }
                }
            }
        }
        let solved = a_monomial_decompose(&cd, &f);
        assert_eq!(brute.is_some(), solved.is_ok());
        // here f = A_2 · A_{-2}^{-1}
        let m = solved.unwrap();
        assert_eq!(a_monomial(&cd, &m), f);
    }

    #[test]
    fn monoid_d() {
        let cd = CartanData::new("A2").unwrap();
        assert!(psi(&cd, 0, &q(3)).mul(&psi(&cd, 1, &q(-1))).in_monoid_d());
        assert!(!psi(&cd, 0, &q(3)).inv().in_monoid_d());
        assert!(!y(&cd, 1, &q(0)).in_monoid_d());
    }

    #[test]
    fn parse_forms() {
        let cd = CartanData::new("B2").unwrap();
        let e = LWeight::parse(&cd, "Psi(1,3)*Psi(2,-1)^-1*A(1,0)^2").unwrap();
        let expect = psi(&cd, 0, &q(3)).mul(&psi(&cd, 1, &q(-1)).inv()).mul(&a_root(&cd, 0, &q(0)).pow(2));
        assert_eq!(e, expect);
        assert!(LWeight::parse(&cd, "Psi(0,3)").is_err());
        assert!(LWeight::parse(&cd, "Phi(1,3)").is_err());
        assert!(LWeight::parse(&cd, "Psi(3,3)").is_err());
    }

    #[test]
    fn tau_and_weight() {
        let cd = CartanData::new("B2").unwrap();
        let e = LWeight::parse(&cd, "Psi(1,3)*Psi(2,-1)^-1*Y(1,1/2)").unwrap();
        let a = qr(5, 2);
        let shifted = e.tau(&a);
        assert_eq!(shifted.coweight(), e.coweight());
        let mu_t: Vec<Q> = cd.nodes().map(|i| q(e.coweight()[i]) / q(cd.d(i))).collect();
        let expect = e.weight(&cd).sub(&Weight(mu_t).scale(&a));
        assert_eq!(shifted.weight(&cd), expect);
        assert_eq!(e.tau(&q(1)).tau(&q(2)), e.tau(&q(3)));
    }
}
