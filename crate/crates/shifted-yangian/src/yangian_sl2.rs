//! The shifted Yangian `Y_s(sl₂)` in Drinfeld generators.
//!
//! Elements are ℚ-linear combinations of words. [`Straightener`] rewrites
//! words into the triangular normal form `(x⁻ ascending)(ξ ascending)(x⁺
//! ascending)`, which is exactly the derived order on [`Gen`]: a word is
//! normal iff it is sorted.
//!
//! Commutators are kept in closed recursive form:
//! - `K(p,n) = [ξ_p, x⁻_n]` with `K(−s−1,n) = 0` and
//!   `K(p+1,n) = K(p,n+1) − 2x⁻_n ξ_p − K(p,n)`;
//! - `K⁺(p,n) = [ξ_p, x⁺_n]` with the opposite sign and `ξ_p x⁺_n` ordering;
//! - `C(a,b) = [x⁻_a, x⁻_b]` for `a > b`, `C(b+1,b) = −(x⁻_b)²`.

use crate::{q, qr, Q};
use num_traits::{One, Zero};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("generator {0} is undefined")]
    Undefined(Gen),
    #[error("shift homomorphism needs antidominant arguments, got ζ={0}, η={1}")]
    NotAntidominant(i64, i64),
}

/// A Drinfeld generator. The derived order is the normal order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    XMinus(i64),
    Xi(i64),
    XPlus(i64),
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gen::XMinus(n) => write!(f, "x-[{n}]"),
            Gen::Xi(p) => write!(f, "xi[{p}]"),
            Gen::XPlus(n) => write!(f, "x+[{n}]"),
        }
    }
}

impl Gen {
    /// Weight in units of `α`.
    pub fn weight(&self) -> i64 {
        match self {
            Gen::XMinus(_) => -1,
            Gen::Xi(_) => 0,
            Gen::XPlus(_) => 1,
        }
    }

    pub fn index(&self) -> i64 {
        match self {
            Gen::XMinus(n) | Gen::Xi(n) | Gen::XPlus(n) => *n,
        }
    }

    fn with_index(&self, k: i64) -> Gen {
        match self {
            Gen::XMinus(_) => Gen::XMinus(k),
            Gen::Xi(_) => Gen::Xi(k),
            Gen::XPlus(_) => Gen::XPlus(k),
        }
    }
}

pub type Word = Vec<Gen>;

/// A finite ℚ-linear combination of words.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Element(BTreeMap<Word, Q>);

impl Element {
    pub fn zero() -> Self {
        Element::default()
    }

    pub fn scalar(c: Q) -> Self {
        let mut e = Element::zero();
        e.add_term(Vec::new(), c);
        e
    }

    pub fn terms(&self) -> &BTreeMap<Word, Q> {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add_term(&mut self, w: Word, c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.0.entry(w.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.0.remove(&w);
        }
    }

    pub fn add(&self, o: &Element) -> Element {
        let mut out = self.clone();
        for (w, c) in &o.0 {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Element) -> Element {
        self.add(&o.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Element {
        if c.is_zero() {
            return Element::zero();
        }
        Element(self.0.iter().map(|(w, x)| (w.clone(), x * c)).collect())
    }

    pub fn mul(&self, o: &Element) -> Element {
        let mut out = Element::zero();
        for (w1, c1) in &self.0 {
            for (w2, c2) in &o.0 {
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                out.add_term(w, c1 * c2);
            }
        }
        out
    }

    pub fn commutator(&self, o: &Element) -> Element {
        self.mul(o).sub(&o.mul(self))
    }

    /// Net weight of every term, `None` if the terms disagree.
    pub fn weight(&self) -> Option<i64> {
        let mut ws = self.0.keys().map(|w| w.iter().map(Gen::weight).sum::<i64>());
        let first = ws.next().unwrap_or(0);
        ws.all(|x| x == first).then_some(first)
    }

    pub fn is_normal(&self) -> bool {
        self.0.keys().all(|w| w.windows(2).all(|p| p[0] <= p[1]))
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(w, c)| {
                let word: Vec<String> = w.iter().map(Gen::to_string).collect();
                format!("{}·{}", crate::fmt_q(c), if word.is_empty() { "1".into() } else { word.join(" ") })
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `Y_s(sl₂)` with `s = ⟨μ, α⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShiftedAlgebra {
    pub shift: i64,
}

impl ShiftedAlgebra {
    pub fn new(shift: i64) -> Self {
        ShiftedAlgebra { shift }
    }

    /// Lowest Cartan index `−s−1`, where `ξ` equals 1.
    pub fn xi_floor(&self) -> i64 {
        -self.shift - 1
    }

    /// A generator as an element: `ξ_{−s−1} = 1`, lower `ξ` vanish.
    pub fn gen(&self, g: Gen) -> Result<Element, AlgebraError> {
        match g {
            Gen::XMinus(n) | Gen::XPlus(n) if n < 0 => Err(AlgebraError::Undefined(g)),
            Gen::Xi(p) if p < self.xi_floor() => Ok(Element::zero()),
            Gen::Xi(p) if p == self.xi_floor() => Ok(Element::scalar(Q::one())),
            _ => Ok(Element(BTreeMap::from([(vec![g], Q::one())]))),
        }
    }

    pub fn word(&self, w: &[Gen]) -> Result<Element, AlgebraError> {
        w.iter().try_fold(Element::scalar(Q::one()), |acc, g| Ok(acc.mul(&self.gen(*g)?)))
    }

    /// `T = ξ_{−s+1} − ½ ξ_{−s}²`, with `[T, x^±_m] = ±2 x^±_{m+1}`.
    pub fn t_element(&self) -> Element {
        let s = self.shift;
        let a = self.gen(Gen::Xi(-s + 1)).unwrap();
        let b = self.gen(Gen::Xi(-s)).unwrap();
        a.sub(&b.mul(&b).scale(&qr(1, 2)))
    }

    /// Normal form of `el`, using a fresh memo table.
    pub fn straighten(&self, el: &Element) -> Element {
        Straightener::new(*self).straighten(el)
    }
}

/// Memoized rewriting engine. Separate instances share nothing.
pub struct Straightener {
    alg: ShiftedAlgebra,
    words: HashMap<Word, Element>,
    k_minus: HashMap<(i64, i64), Element>,
    k_plus: HashMap<(i64, i64), Element>,
    c_minus: HashMap<(i64, i64), Element>,
    c_plus: HashMap<(i64, i64), Element>,
}

impl Straightener {
    pub fn new(alg: ShiftedAlgebra) -> Self {
        Straightener {
            alg,
            words: HashMap::new(),
            k_minus: HashMap::new(),
            k_plus: HashMap::new(),
            c_minus: HashMap::new(),
            c_plus: HashMap::new(),
        }
    }

    pub fn algebra(&self) -> ShiftedAlgebra {
        self.alg
    }

    fn mono(&self, w: &[Gen]) -> Element {
        self.alg.word(w).expect("indices produced by rewriting are valid")
    }

    /// `[ξ_p, x⁻_n]` as a combination of normal words `x⁻_j ξ_q`.
    pub fn k_minus(&mut self, p: i64, n: i64) -> Element {
        if p <= self.alg.xi_floor() {
            return Element::zero();
        }
        if let Some(e) = self.k_minus.get(&(p, n)) {
            return e.clone();
        }
        let e = self
            .k_minus(p - 1, n + 1)
            .sub(&self.mono(&[Gen::XMinus(n), Gen::Xi(p - 1)]).scale(&q(2)))
            .sub(&self.k_minus(p - 1, n));
        self.k_minus.insert((p, n), e.clone());
        e
    }

    /// `[ξ_p, x⁺_n]` as a combination of normal words `ξ_q x⁺_j`.
    pub fn k_plus(&mut self, p: i64, n: i64) -> Element {
        if p <= self.alg.xi_floor() {
            return Element::zero();
        }
        if let Some(e) = self.k_plus.get(&(p, n)) {
            return e.clone();
        }
        let e = self
            .k_plus(p - 1, n + 1)
            .add(&self.mono(&[Gen::Xi(p - 1), Gen::XPlus(n)]).scale(&q(2)))
            .sub(&self.k_plus(p - 1, n));
        self.k_plus.insert((p, n), e.clone());
        e
    }

    /// `[x⁻_a, x⁻_b]` for `a ≥ b`, in normal words.
    pub fn c_minus(&mut self, a: i64, b: i64) -> Element {
        self.c_generic(a, b, -1)
    }

    /// `[x⁺_a, x⁺_b]` for `a ≥ b`, in normal words.
    pub fn c_plus(&mut self, a: i64, b: i64) -> Element {
        self.c_generic(a, b, 1)
    }

    fn c_generic(&mut self, a: i64, b: i64, sign: i64) -> Element {
        assert!(a >= b);
        if a == b {
            return Element::zero();
        }
        let memo = if sign < 0 { &self.c_minus } else { &self.c_plus };
        if let Some(e) = memo.get(&(a, b)) {
            return e.clone();
        }
        let x = |k| if sign < 0 { Gen::XMinus(k) } else { Gen::XPlus(k) };
        let s = q(sign);
        let e = if a == b + 1 {
            self.mono(&[x(b), x(b)]).scale(&s)
        } else {
            // [x_a, x_b] = [x_{a−1}, x_{b+1}] ± (2 x_b x_{a−1} + [x_{a−1}, x_b])
            let inner = self.mono(&[x(b), x(a - 1)]).scale(&q(2)).add(&self.c_generic(a - 1, b, sign));
            self.c_generic(a - 1, b + 1, sign).add(&inner.scale(&s))
        };
        let memo = if sign < 0 { &mut self.c_minus } else { &mut self.c_plus };
        memo.insert((a, b), e.clone());
        e
    }

    /// `g1 g2` for an out-of-order pair `g1 > g2`, rewritten as `g2 g1 + correction`.
    fn swap(&mut self, g1: Gen, g2: Gen) -> Element {
        let swapped = self.mono(&[g2, g1]);
        let correction = match (g1, g2) {
            (Gen::XPlus(m), Gen::XMinus(n)) => self.mono(&[Gen::Xi(m + n)]),
            (Gen::XPlus(m), Gen::Xi(p)) => self.k_plus(p, m).scale(&-Q::one()),
            (Gen::Xi(p), Gen::XMinus(n)) => self.k_minus(p, n),
            (Gen::Xi(_), Gen::Xi(_)) => Element::zero(),
            (Gen::XMinus(a), Gen::XMinus(b)) => self.c_minus(a, b),
            (Gen::XPlus(a), Gen::XPlus(b)) => self.c_plus(a, b),
            _ => unreachable!("pair is out of order"),
        };
        swapped.add(&correction)
    }

    fn straighten_word(&mut self, w: &[Gen]) -> Element {
        if let Some(e) = self.words.get(w) {
            return e.clone();
        }
        let out = match w.windows(2).position(|p| p[0] > p[1]) {
            None => Element(BTreeMap::from([(w.to_vec(), Q::one())])),
            Some(i) => {
                let mid = self.swap(w[i], w[i + 1]);
                let mut acc = Element::zero();
                for (m, c) in mid.0 {
                    let mut full = w[..i].to_vec();
                    full.extend(m);
                    full.extend_from_slice(&w[i + 2..]);
                    acc = acc.add(&self.straighten_word(&full).scale(&c));
                }
                acc
            }
        };
        self.words.insert(w.to_vec(), out.clone());
        out
    }

    pub fn straighten(&mut self, el: &Element) -> Element {
        let mut acc = Element::zero();
        for (w, c) in &el.0 {
            acc = acc.add(&self.straighten_word(w).scale(c));
        }
        acc
    }
}

/// Generalized binomial coefficient `C(p, n)` for `p ∈ ℤ`.
pub fn binom(p: i64, n: i64) -> Q {
    (0..n).fold(Q::one(), |acc, k| acc * q(p - k) / q(k + 1))
}

/// Shift homomorphism `ι`: `x⁺_n ↦ x⁺_{n−ζ}`, `x⁻_n ↦ x⁻_{n−η}`, `ξ_p ↦ ξ_{p−ζ−η}`.
/// Returns the target algebra `Y_{s+ζ+η}` and the image.
pub fn shift_hom(alg: ShiftedAlgebra, zeta: i64, eta: i64, g: Gen) -> Result<(ShiftedAlgebra, Element), AlgebraError> {
    if zeta > 0 || eta > 0 {
        return Err(AlgebraError::NotAntidominant(zeta, eta));
    }
    alg.gen(g)?;
    let target = ShiftedAlgebra::new(alg.shift + zeta + eta);
    let img = match g {
        Gen::XPlus(n) => Gen::XPlus(n - zeta),
        Gen::XMinus(n) => Gen::XMinus(n - eta),
        Gen::Xi(p) => Gen::Xi(p - zeta - eta),
    };
    Ok((target, target.gen(img)?))
}

/// `τ_z(X_p) = Σ_n C(p,n) X_{p−n} z^n`, as a map from powers of `z` to elements.
pub fn tau_poly(alg: ShiftedAlgebra, g: Gen) -> Result<BTreeMap<i64, Element>, AlgebraError> {
    let base = alg.gen(g)?;
    if base.is_zero() {
        return Ok(BTreeMap::new());
    }
    let p = g.index();
    let floor = match g {
        Gen::Xi(_) => alg.xi_floor(),
        _ => 0,
    };
    let mut out = BTreeMap::new();
    for n in 0..=(p - floor) {
        let term = alg.gen(g.with_index(p - n))?.scale(&binom(p, n));
        if !term.is_zero() {
            out.insert(n, term);
        }
    }
    Ok(out)
}

/// `τ_a` on a generator.
pub fn tau(alg: ShiftedAlgebra, a: &Q, g: Gen) -> Result<Element, AlgebraError> {
    let mut acc = Element::zero();
    for (n, e) in tau_poly(alg, g)? {
        acc = acc.add(&e.scale(&crate::ratfun::pow_q(a, n)));
    }
    Ok(acc)
}

/// Extends a map on generators multiplicatively to elements.
pub fn apply_map(el: &Element, mut f: impl FnMut(Gen) -> Result<Element, AlgebraError>) -> Result<Element, AlgebraError> {
    let mut acc = Element::zero();
    for (w, c) in el.terms() {
        let mut img = Element::scalar(c.clone());
        for g in w {
            img = img.mul(&f(*g)?);
        }
        acc = acc.add(&img);
    }
    Ok(acc)
}
