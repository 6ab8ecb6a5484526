//! Monic rational functions with rational roots, polynomials, and truncated
//! Laurent expansions at `u = ∞`.

use crate::linalg::Mat;
use crate::{fmt_q, parse_q, Q};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RatFunError {
    #[error("evaluation at a pole u = {0}")]
    Pole(String),
    #[error("cannot parse rational function: {0}")]
    Parse(String),
    #[error("input is not monic: {0}")]
    NotMonic(String),
}

// ---------------------------------------------------------------- Poly

/// Dense univariate polynomial, coefficients in ascending degree.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    c: Vec<Q>,
}

impl Poly {
    pub fn new(mut c: Vec<Q>) -> Self {
        while c.last().is_some_and(Zero::is_zero) {
            c.pop();
        }
        Poly { c }
    }

    pub fn zero() -> Self {
        Poly { c: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(a: Q) -> Self {
        Self::new(vec![a])
    }

    /// The polynomial `u − a`.
    pub fn linear(a: &Q) -> Self {
        Self::new(vec![-a.clone(), Q::one()])
    }

    pub fn from_roots<'a>(roots: impl IntoIterator<Item = &'a Q>) -> Self {
        roots.into_iter().fold(Self::one(), |p, a| p.mul(&Self::linear(a)))
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> Q {
        self.c.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn leading(&self) -> Q {
        self.c.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_one()
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.leading().recip())
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }

    pub fn neg(&self) -> Poly {
        Poly::new(self.c.iter().map(|x| -x).collect())
    }

    pub fn scale(&self, a: &Q) -> Poly {
        Poly::new(self.c.iter().map(|x| x * a).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Q::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn pow(&self, k: u32) -> Poly {
        (0..k).fold(Poly::one(), |p, _| p.mul(self))
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.c.iter().rev().fold(Q::zero(), |acc, a| acc * x + a)
    }

    /// `p(u) ↦ p(u − a)`, which moves every root by `+a`.
    pub fn shift(&self, a: &Q) -> Poly {
        let step = Poly::linear(a);
        self.c.iter().rev().fold(Poly::zero(), |acc, coef| acc.mul(&step).add(&Poly::constant(coef.clone())))
    }

    /// Euclidean division `self = q·d + r`.
    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.c.len() - 1;
        let lead_inv = d.leading().recip();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut qc = vec![Q::zero(); r.len() - dd];
        for k in (0..qc.len()).rev() {
            let coef = &r[k + dd] * &lead_inv;
            if !coef.is_zero() {
                for (j, dc) in d.c.iter().enumerate() {
                    r[k + j] -= &coef * dc;
                }
            }
            qc[k] = coef;
        }
        r.truncate(dd);
        (Poly::new(qc), Poly::new(r))
    }

    pub fn divides(&self, other: &Poly) -> bool {
        other.divrem(self).1.is_zero()
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Rational roots with multiplicity (rational root test on the
    /// integer-scaled polynomial); the cofactor carries the rest.
    pub fn rational_roots(&self) -> (BTreeMap<Q, i64>, Poly) {
        let mut roots = BTreeMap::new();
        let mut p = self.monic();
        loop {
            let Some(deg) = p.degree() else { break };
            if deg == 0 {
                break;
            }
            if p.coeff(0).is_zero() {
                *roots.entry(Q::zero()).or_insert(0) += 1;
                p = Poly::new(p.c[1..].to_vec());
                continue;
            }
            let ints = integer_scaled(&p);
            let a0 = ints[0].abs();
            let an = ints.last().unwrap().abs();
            let mut found = None;
            let small = |n: &num_bigint::BigInt| n.bits() <= 40;
            if small(&a0) && small(&an) {
                'search: for num in divisors(&a0) {
                    for den in divisors(&an) {
                        for sign in [1, -1] {
                            let cand = Q::new(num.clone() * sign, den.clone());
                            if p.eval(&cand).is_zero() {
                                found = Some(cand);
                                break 'search;
                            }
                        }
                    }
                }
            } else {
                let sf = p.divrem(&p.gcd(&p.derivative())).0;
                let all = sturm_rational_roots(&sf);
                if all.is_empty() {
                    break;
                }
                for r in all {
                    while p.eval(&r).is_zero() {
                        *roots.entry(r.clone()).or_insert(0) += 1;
                        p = p.divrem(&Poly::linear(&r)).0;
                    }
                }
                continue;
            }
            match found {
                Some(r) => {
                    *roots.entry(r.clone()).or_insert(0) += 1;
                    p = p.divrem(&Poly::linear(&r)).0;
                }
                None => break,
            }
        }
        (roots, p)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(self.c.iter().enumerate().skip(1).map(|(k, a)| a * Q::from_integer((k as i64).into())).collect())
    }

    /// Lagrange interpolation through distinct nodes.
    pub fn interpolate(points: &[(Q, Q)]) -> Poly {
        let mut out = Poly::zero();
        for (i, (xi, yi)) in points.iter().enumerate() {
            let mut basis = Poly::constant(yi.clone());
            for (j, (xj, _)) in points.iter().enumerate() {
                if i != j {
                    basis = basis.mul(&Poly::linear(xj)).scale(&(xi - xj).recip());
                }
            }
            out = out.add(&basis);
        }
        out
    }
}

fn integer_scaled(p: &Poly) -> Vec<num_bigint::BigInt> {
    use num_integer::Integer;
    let lcm = p.c.iter().fold(num_bigint::BigInt::one(), |l, x| l.lcm(x.denom()));
    p.c.iter().map(|x| (x * Q::from_integer(lcm.clone())).to_integer()).collect()
}

/// Rational roots of a squarefree `p`, exactly: a root `n/d` has `d` dividing
/// the leading coefficient `D` of the integer-scaled polynomial, so `D·r` is an
/// integer root of `p(y/D)`. Those are isolated by Sturm counts and integer bisection.
fn sturm_rational_roots(p: &Poly) -> Vec<Q> {
    use num_bigint::{BigInt, Sign};
    use num_integer::Integer;
    let Some(n) = p.degree() else { return Vec::new() };
    if n == 0 {
        return Vec::new();
    }
    let a = integer_scaled(p);
    let lead = a[n].abs();
    // D^{n−1}·p(y/D) up to sign, as integers: coefficient a_k D^{n−1−k}
    let mut pw = BigInt::from(1);
    let mut g = vec![BigInt::from(0); n + 1];
    for k in (0..=n).rev() {
        g[k] = if k == n { a[n].signum() } else { &a[k] * &pw };
        if k < n {
            pw *= &lead;
        }
    }
    let primitive = |mut f: Vec<BigInt>| {
        while f.last().is_some_and(|x| x.sign() == Sign::NoSign) {
            f.pop();
        }
        let c = f.iter().fold(BigInt::from(0), |c, x| c.gcd(x));
        if c > BigInt::from(1) {
            f.iter_mut().for_each(|x| *x /= &c);
        }
        f
    };
    // positive multiples of −rem(f, h), from pseudo-division over ℤ
    let neg_rem = |f: &[BigInt], h: &[BigInt]| {
        let lc = h.last().unwrap();
        let mut r = f.to_vec();
        let mut flips = false;
        while r.len() >= h.len() {
            let shift = r.len() - h.len();
            let top = r.last().unwrap().clone();
            r.iter_mut().for_each(|x| *x *= lc);
            for (j, hc) in h.iter().enumerate() {
                r[shift + j] -= &top * hc;
            }
            r.pop();
            flips ^= lc.sign() == Sign::Minus;
            r = primitive(r);
        }
        if !flips {
            r.iter_mut().for_each(|x| *x = -&*x);
        }
        r
    };
    let deriv: Vec<BigInt> = g.iter().enumerate().skip(1).map(|(k, c)| c * BigInt::from(k)).collect();
    let mut seq = vec![primitive(g.clone()), primitive(deriv)];
    while seq.last().is_some_and(|s| s.len() > 1) {
        let r = neg_rem(&seq[seq.len() - 2], &seq[seq.len() - 1]);
        if r.is_empty() {
            break;
        }
        seq.push(r);
    }
    let eval = |f: &[BigInt], x: &BigInt| f.iter().rev().fold(BigInt::from(0), |acc, c| acc * x + c);
    let changes = |x: &BigInt| {
        let signs: Vec<Sign> = seq.iter().map(|f| eval(f, x).sign()).filter(|s| *s != Sign::NoSign).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    };
    // Fujiwara-style bound 2·max |c_k/c_n|^{1/(n−k)}, via bit lengths
    let gn = g[n].bits();
    let bits = (0..n).filter(|&k| g[k].sign() != Sign::NoSign).map(|k| g[k].bits().saturating_sub(gn) / (n - k) as u64 + 1).max().unwrap_or(0);
    let hi = BigInt::from(1) << (bits + 1);
    let mut out = Vec::new();
    let mut stack = vec![(-&hi - 1, hi)];
    while let Some((lo, hi)) = stack.pop() {
        // distinct roots in (lo, hi]
        if changes(&lo) == changes(&hi) {
            continue;
        }
        if &hi - &lo == BigInt::from(1) {
            if eval(&g, &hi).sign() == Sign::NoSign {
                out.push(Q::new(hi, lead.clone()));
            }
            continue;
        }
        let mid: BigInt = (&lo + &hi).div_floor(&BigInt::from(2));
        stack.push((lo, mid.clone()));
        stack.push((mid, hi));
    }
    out
}

fn divisors(n: &num_bigint::BigInt) -> Vec<num_bigint::BigInt> {
    use num_traits::ToPrimitive;
    let n = n.to_u64().expect("root search limited to machine-size coefficients");
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d.into());
            if d * d != n {
                out.push((n / d).into());
            }
        }
        d += 1;
    }
    out
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, a) in self.c.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            let neg = a.is_negative();
            let mag = a.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let show = k == 0 || !mag.is_one();
            if show {
                write!(f, "{}", fmt_q(&mag))?;
            }
            match k {
                0 => {}
                1 => write!(f, "{}u", if show { "*" } else { "" })?,
                _ => write!(f, "{}u^{k}", if show { "*" } else { "" })?,
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- LinRat

/// `∏ (u − a)^{m_a}` stored as a root → exponent map without zero exponents.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinRat {
    roots: BTreeMap<Q, i64>,
}

impl LinRat {
    pub fn one() -> Self {
        LinRat::default()
    }

    /// `(u − a)^m`.
    pub fn factor(a: Q, m: i64) -> Self {
        let mut roots = BTreeMap::new();
        if m != 0 {
            roots.insert(a, m);
        }
        LinRat { roots }
    }

    pub fn from_map(map: BTreeMap<Q, i64>) -> Self {
        LinRat { roots: map.into_iter().filter(|(_, m)| *m != 0).collect() }
    }

    pub fn from_roots<'a>(zeros: impl IntoIterator<Item = &'a Q>, poles: impl IntoIterator<Item = &'a Q>) -> Self {
        let mut out = LinRat::one();
        for z in zeros {
            out.bump(z.clone(), 1);
        }
        for p in poles {
            out.bump(p.clone(), -1);
        }
        out
    }

    /// Monic polynomial with rational roots; `None` when it does not split over ℚ.
    pub fn from_poly(p: &Poly) -> Option<Self> {
        if !p.is_monic() {
            return None;
        }
        let (roots, rest) = p.rational_roots();
        (rest.degree() == Some(0)).then(|| LinRat::from_map(roots))
    }

    fn bump(&mut self, a: Q, m: i64) {
        let e = self.roots.entry(a.clone()).or_insert(0);
        *e += m;
        if *e == 0 {
            self.roots.remove(&a);
        }
    }

    pub fn roots(&self) -> &BTreeMap<Q, i64> {
        &self.roots
    }

    pub fn is_one(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn mul(&self, o: &LinRat) -> LinRat {
        let mut out = self.clone();
        for (a, m) in &o.roots {
            out.bump(a.clone(), *m);
        }
        out
    }

    pub fn inv(&self) -> LinRat {
        LinRat { roots: self.roots.iter().map(|(a, m)| (a.clone(), -m)).collect() }
    }

    pub fn div(&self, o: &LinRat) -> LinRat {
        self.mul(&o.inv())
    }

    pub fn pow(&self, k: i64) -> LinRat {
        LinRat::from_map(self.roots.iter().map(|(a, m)| (a.clone(), m * k)).collect())
    }

    /// `f(u) ↦ f(u − c)`: every root moves by `+c`.
    pub fn shift(&self, c: &Q) -> LinRat {
        LinRat { roots: self.roots.iter().map(|(a, m)| (a + c, *m)).collect() }
    }

    pub fn degree(&self) -> i64 {
        self.roots.values().sum()
    }

    pub fn zeros(&self) -> Vec<Q> {
        self.roots.iter().filter(|(_, m)| **m > 0).flat_map(|(a, m)| std::iter::repeat_n(a.clone(), *m as usize)).collect()
    }

    pub fn poles(&self) -> Vec<Q> {
        self.roots.iter().filter(|(_, m)| **m < 0).flat_map(|(a, m)| std::iter::repeat_n(a.clone(), (-m) as usize)).collect()
    }

    pub fn numer(&self) -> Poly {
        Poly::from_roots(&self.zeros())
    }

    pub fn denom(&self) -> Poly {
        Poly::from_roots(&self.poles())
    }

    pub fn is_poly(&self) -> bool {
        self.roots.values().all(|m| *m > 0)
    }

    pub fn eval(&self, x: &Q) -> Result<Q, RatFunError> {
        let mut out = Q::one();
        for (a, m) in &self.roots {
            let base = x - a;
            if base.is_zero() {
                if *m < 0 {
                    return Err(RatFunError::Pole(fmt_q(x)));
                }
                return Ok(Q::zero());
            }
            out *= pow_q(&base, *m);
        }
        Ok(out)
    }

    /// Coefficient of `u^{deg−1}` in the expansion at infinity.
    pub fn subleading(&self) -> Q {
        -self.roots.iter().map(|(a, m)| a * Q::from_integer((*m).into())).sum::<Q>()
    }

    pub fn expand(&self, order: i64) -> Series<Q> {
        expand_at_infinity(self, order)
    }

    /// Recovers `F` of degree `s` from its leading expansion coefficients
    /// `c[j]` of `u^{s−j}` (so `c[0] = 1`) by Padé approximation, trying
    /// denominator degrees up to `max_den`. Every given coefficient must match.
    pub fn from_expansion(s: i64, c: &[Q], max_den: usize) -> Option<LinRat> {
        let len = c.len() as i64;
        let at = |j: i64| if j >= 0 && j < len { c[j as usize].clone() } else { Q::zero() };
        for d in (-s).max(0)..=max_den as i64 {
            let dn = d + s;
            // the equations use c up to dn+d; keep one more for validation
            if dn.max(-1) + d + 2 > len {
                break;
            }
            // rows j = dn+1 ..= dn+d: Σ_{i≥1} q_i c_{j−i} = −c_j
            let du = d as usize;
            let sys = Mat::from_fn(du, du, |r, i| at(dn + 1 + r as i64 - (i as i64 + 1)));
            let rhs: Vec<Q> = (0..du).map(|r| -at(dn + 1 + r as i64)).collect();
            let Some(qs) = sys.solve(&rhs) else { continue };
            let mut qv = vec![Q::one()];
            qv.extend(qs);
            let conv = |j: i64| (0..=d.min(j)).fold(Q::zero(), |acc, i| acc + &qv[i as usize] * at(j - i));
            if (dn + 1..len).any(|j| !conv(j).is_zero()) {
                continue;
            }
            let num = Poly::new((0..=dn).rev().map(conv).collect());
            let den = Poly::new(qv.iter().rev().cloned().collect());
            let (zr, zc) = num.rational_roots();
            let (pr, pc) = den.rational_roots();
            if zc.degree() != Some(0) || pc.degree() != Some(0) {
                return None;
            }
            let mut map = zr;
            for (a, m) in pr {
                *map.entry(a).or_insert(0) -= m;
            }
            return Some(LinRat::from_map(map));
        }
        None
    }

    /// Products and quotients of `(u ± c)` factors with integer powers; a single
    /// bare `u ± c` is accepted too.
    pub fn parse(s: &str) -> Result<LinRat, RatFunError> {
        Self::parse_strict(s).or_else(|e| Self::parse_strict(&format!("({s})")).map_err(|_| e))
    }

    fn parse_strict(s: &str) -> Result<LinRat, RatFunError> {
        let mut p = Parser { s: s.as_bytes(), pos: 0, src: s };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(out)
    }
}

pub fn pow_q(x: &Q, m: i64) -> Q {
    let base = if m < 0 { x.recip() } else { x.clone() };
    (0..m.unsigned_abs()).fold(Q::one(), |acc, _| acc * &base)
}

impl fmt::Debug for LinRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn linear_str(a: &Q) -> String {
    if a.is_zero() {
        "u".into()
    } else if a.is_negative() {
        format!("(u+{})", fmt_q(&-a.clone()))
    } else {
        format!("(u-{})", fmt_q(a))
    }
}

fn side_str(items: &[(Q, i64)]) -> String {
    items
        .iter()
        .map(|(a, m)| if *m == 1 { linear_str(a) } else { format!("{}^{m}", linear_str(a)) })
        .collect::<Vec<_>>()
        .join("*")
}

impl fmt::Display for LinRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num: Vec<(Q, i64)> = self.roots.iter().filter(|(_, m)| **m > 0).map(|(a, m)| (a.clone(), *m)).collect();
        let den: Vec<(Q, i64)> = self.roots.iter().filter(|(_, m)| **m < 0).map(|(a, m)| (a.clone(), -m)).collect();
        let n = if num.is_empty() { "1".to_string() } else { side_str(&num) };
        match den.len() {
            0 => write!(f, "{n}"),
            1 if den[0].1 == 1 => write!(f, "{n}/{}", side_str(&den)),
            _ => write!(f, "{n}/({})", side_str(&den)),
        }
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    src: &'a str,
}

impl Parser<'_> {
    fn err(&self, what: &str) -> RatFunError {
        RatFunError::Parse(format!("{what} at offset {} in {:?}", self.pos, self.src))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<LinRat, RatFunError> {
        let mut acc = self.product()?;
        while self.eat(b'/') {
            acc = acc.div(&self.product()?);
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<LinRat, RatFunError> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.power()?);
                }
                Some(b'(') | Some(b'u') => acc = acc.mul(&self.power()?),
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<LinRat, RatFunError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let k = self.integer()?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i64, RatFunError> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.s.get(self.pos), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        while self.s.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        self.src[start..self.pos].parse().map_err(|_| self.err("expected integer exponent"))
    }

    fn rational(&mut self) -> Result<Q, RatFunError> {
        self.skip_ws();
        let start = self.pos;
        while self.s.get(self.pos).is_some_and(|c| c.is_ascii_digit() || *c == b'/') {
            self.pos += 1;
        }
        parse_q(&self.src[start..self.pos]).ok_or_else(|| self.err("expected rational number"))
    }

    fn atom(&mut self) -> Result<LinRat, RatFunError> {
        match self.peek() {
            Some(b'u') => {
                self.pos += 1;
                Ok(LinRat::factor(Q::zero(), 1))
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(LinRat::one())
            }
            Some(b'(') => {
                self.pos += 1;
                let save = self.pos;
                if let Some(lin) = self.try_linear()? {
                    return Ok(lin);
                }
                self.pos = save;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'-' => Err(RatFunError::NotMonic(self.src.to_string())),
            _ => Err(self.err("expected factor")),
        }
    }

    /// `u ± c )`, consuming the closing parenthesis on success.
    fn try_linear(&mut self) -> Result<Option<LinRat>, RatFunError> {
        if !self.eat(b'u') {
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                // e.g. "(2u-1)" or "(3)": a scalar factor breaks monicity
                let save = self.pos;
                let _ = self.rational();
                let bad = self.peek() == Some(b'u') || self.peek() == Some(b'*');
                let is_one = &self.src[save..self.pos] == "1";
                if bad || !is_one {
                    return Err(RatFunError::NotMonic(self.src.to_string()));
                }
                self.pos = save;
            }
            return Ok(None);
        }
        let sign = match self.peek() {
            Some(b'-') => Q::one(),
            Some(b'+') => -Q::one(),
            Some(b')') => {
                self.pos += 1;
                return Ok(Some(LinRat::factor(Q::zero(), 1)));
            }
            _ => return Ok(None),
        };
        self.pos += 1;
        let c = self.rational()?;
        if !self.eat(b')') {
            return Ok(None);
        }
        Ok(Some(LinRat::factor(sign * c, 1)))
    }
}

// ---------------------------------------------------------------- RatFn

/// General rational function `num/den` in lowest terms with monic denominator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFn {
    num: Poly,
    den: Poly,
}

impl RatFn {
    pub fn new(num: Poly, den: Poly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatFn { num, den: Poly::one() };
        }
        let g = num.gcd(&den);
        let (n, _) = num.divrem(&g);
        let (d, _) = den.divrem(&g);
        let l = d.leading().recip();
        RatFn { num: n.scale(&l), den: d.scale(&l) }
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFn { num: p, den: Poly::one() }
    }

    pub fn constant(a: Q) -> Self {
        Self::from_poly(Poly::constant(a))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_poly(&self) -> bool {
        self.den.degree() == Some(0)
    }

    pub fn eval(&self, x: &Q) -> Result<Q, RatFunError> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(RatFunError::Pole(fmt_q(x)));
        }
        Ok(self.num.eval(x) / d)
    }

    /// Cauchy interpolation with numerator and denominator degree at most
    /// `max_deg`; needs at least `2·max_deg + 2` nodes so the extra node
    /// certifies the result.
    pub fn interpolate(points: &[(Q, Q)], max_deg: usize) -> Option<RatFn> {
        for d in 0..=max_deg {
            if points.len() < 2 * d + 2 {
                break;
            }
            // unknowns: p_0..p_d, q_0..q_d ; rows p(x) − y q(x) = 0
            let rows: Vec<Vec<Q>> = points
                .iter()
                .map(|(x, y)| {
                    let mut r = Vec::with_capacity(2 * d + 2);
                    let mut xp = Q::one();
                    let mut pw = Vec::new();
                    for _ in 0..=d {
                        pw.push(xp.clone());
                        xp *= x;
                    }
                    r.extend(pw.iter().cloned());
                    r.extend(pw.iter().map(|t| -(t * y)));
                    r
                })
                .collect();
            let ker = Mat::from_rows(rows).kernel();
            for k in ker {
                let p = Poly::new(k[..=d].to_vec());
                let qd = Poly::new(k[d + 1..].to_vec());
                if qd.is_zero() || points.iter().any(|(x, _)| qd.eval(x).is_zero()) {
                    continue;
                }
                return Some(RatFn::new(p, qd));
            }
        }
        None
    }
}

impl fmt::Debug for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_poly() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

// ---------------------------------------------------------------- Series

/// Coefficient ring for Laurent series: ℚ or square matrices over ℚ.
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    fn zero_like(&self) -> Self;
    fn is_zero_c(&self) -> bool;
    fn add_c(&self, o: &Self) -> Self;
    fn sub_c(&self, o: &Self) -> Self;
    fn mul_c(&self, o: &Self) -> Self;
    fn scale_c(&self, a: &Q) -> Self;
}

impl Coeff for Q {
    fn zero_like(&self) -> Self {
        Q::zero()
    }
    fn is_zero_c(&self) -> bool {
        self.is_zero()
    }
    fn add_c(&self, o: &Self) -> Self {
        self + o
    }
    fn sub_c(&self, o: &Self) -> Self {
        self - o
    }
    fn mul_c(&self, o: &Self) -> Self {
        self * o
    }
    fn scale_c(&self, a: &Q) -> Self {
        self * a
    }
}

impl Coeff for Mat {
    fn zero_like(&self) -> Self {
        Mat::zeros(self.rows(), self.cols())
    }
    fn is_zero_c(&self) -> bool {
        self.is_zero()
    }
    fn add_c(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn sub_c(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn mul_c(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn scale_c(&self, a: &Q) -> Self {
        self.scale(a)
    }
}

/// Truncated Laurent series `Σ_{e ≤ top} a_e u^e`; every coefficient with
/// `e ≥ −order` is exact and nothing below is known.
#[derive(Clone, PartialEq, Debug)]
pub struct Series<C: Coeff> {
    top: i64,
    order: i64,
    coeffs: Vec<C>,
    zero: C,
}

impl<C: Coeff> Series<C> {
    /// Coefficients given from `u^top` downward; their count fixes the order.
    pub fn from_coeffs(top: i64, coeffs: Vec<C>, zero: C) -> Self {
        let order = coeffs.len() as i64 - top - 1;
        Series { top, order, coeffs, zero }
    }

    /// A finite Laurent polynomial known exactly down to `u^{−order}`.
    pub fn from_terms(terms: &[(i64, C)], order: i64, zero: C) -> Self {
        let top = terms.iter().map(|(e, _)| *e).max().unwrap_or(-order).max(-order);
        let len = (top + order + 1).max(0) as usize;
        let mut coeffs = vec![zero.clone(); len];
        for (e, c) in terms {
            if *e >= -order {
                let k = (top - e) as usize;
                coeffs[k] = coeffs[k].add_c(c);
            }
        }
        Series { top, order, coeffs, zero }
    }

    pub fn top(&self) -> i64 {
        self.top
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn zero_coeff(&self) -> &C {
        &self.zero
    }

    /// Coefficient of `u^e`; `None` when it lies below the known window.
    pub fn coeff(&self, e: i64) -> Option<C> {
        if e < -self.order {
            return None;
        }
        if e > self.top {
            return Some(self.zero.clone());
        }
        Some(self.coeffs[(self.top - e) as usize].clone())
    }

    /// Index of the highest nonzero known coefficient.
    pub fn leading_power(&self) -> Option<i64> {
        self.coeffs.iter().position(|c| !c.is_zero_c()).map(|k| self.top - k as i64)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Coeff::is_zero_c)
    }

    pub fn truncate(&self, order: i64) -> Self {
        let order = order.min(self.order);
        let len = (self.top + order + 1).max(0) as usize;
        Series { top: self.top, order, coeffs: self.coeffs[..len.min(self.coeffs.len())].to_vec(), zero: self.zero.clone() }
    }

    fn aligned(&self, o: &Self, f: impl Fn(&C, &C) -> C) -> Self {
        let top = self.top.max(o.top);
        let order = self.order.min(o.order);
        let coeffs = (0..(top + order + 1).max(0))
            .map(|k| {
                let e = top - k;
                f(&self.coeff(e).unwrap(), &o.coeff(e).unwrap())
            })
            .collect();
        Series { top, order, coeffs, zero: self.zero.clone() }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.aligned(o, C::add_c)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.aligned(o, C::sub_c)
    }

    pub fn scale(&self, a: &Q) -> Self {
        Series { top: self.top, order: self.order, coeffs: self.coeffs.iter().map(|c| c.scale_c(a)).collect(), zero: self.zero.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let top = self.top + o.top;
        let order = (self.order - o.top).min(o.order - self.top);
        let len = (top + order + 1).max(0) as usize;
        let mut coeffs = vec![self.zero.clone(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero_c() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                if !b.is_zero_c() {
                    coeffs[i + j] = coeffs[i + j].add_c(&a.mul_c(b));
                }
            }
        }
        Series { top, order, coeffs, zero: self.zero.clone() }
    }

    /// Coefficientwise map into another coefficient ring.
    pub fn map<D: Coeff>(&self, zero: D, f: impl Fn(&C) -> D) -> Series<D> {
        Series { top: self.top, order: self.order, coeffs: self.coeffs.iter().map(f).collect(), zero }
    }

    /// `⟨·⟩₊`: keep exactly the coefficients of `u^{−p−1}`, `p ≥ 0`.
    pub fn principal_part(&self) -> Self {
        let coeffs = (0..(self.order).max(0))
            .map(|k| self.coeff(-1 - k).unwrap())
            .collect();
        Series { top: -1, order: self.order, coeffs, zero: self.zero.clone() }
    }

    /// `f(u) ↦ f(u − c)` via the generalized binomial series.
    pub fn shift_arg(&self, c: &Q) -> Self {
        let top = self.top;
        let order = self.order;
        let len = (top + order + 1).max(0) as usize;
        let mut coeffs = vec![self.zero.clone(); len];
        // (u − c)^e = Σ_k binom(e,k) (−c)^k u^{e−k}
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero_c() {
                continue;
            }
            let e = top - i as i64;
            let mut factor = Q::one();
            for k in 0..(len - i) {
                if k > 0 {
                    factor = factor * Q::from_integer((e - k as i64 + 1).into()) / Q::from_integer((k as i64).into()) * -c.clone();
                }
                if factor.is_zero() {
                    break;
                }
                coeffs[i + k] = coeffs[i + k].add_c(&a.scale_c(&factor));
            }
        }
        Series { top, order, coeffs, zero: self.zero.clone() }
    }

    /// Whether two series agree on their common known window.
    pub fn agrees_with(&self, o: &Self) -> bool {
        let lo = -(self.order.min(o.order));
        let hi = self.top.max(o.top);
        (lo..=hi).all(|e| self.coeff(e) == o.coeff(e))
    }
}

impl Series<Q> {
    pub fn from_poly(p: &Poly, order: i64) -> Self {
        let terms: Vec<(i64, Q)> = p.coeffs().iter().enumerate().map(|(k, a)| (k as i64, a.clone())).collect();
        Series::from_terms(&terms, order, Q::zero())
    }
}

/// Expansion of `∏ (u − a)^m` at infinity, exact down to `u^{−order}`.
pub fn expand_at_infinity(f: &LinRat, order: i64) -> Series<Q> {
    let deg = f.degree();
    let n = order + deg; // powers of t = 1/u needed
    if n < 0 {
        return Series { top: deg, order, coeffs: Vec::new(), zero: Q::zero() };
    }
    let n = n as usize;
    let mut p = vec![Q::zero(); n + 1];
    p[0] = Q::one();
    for (a, m) in f.roots() {
        for _ in 0..m.unsigned_abs() {
            if *m > 0 {
                // multiply by (1 − a t)
                for k in (1..=n).rev() {
                    let t = &p[k - 1] * a;
                    p[k] -= t;
                }
            } else {
                // divide by (1 − a t): p_k += a p_{k−1}
                for k in 1..=n {
                    let t = &p[k - 1] * a;
                    p[k] += t;
                }
            }
        }
    }
    Series { top: deg, order, coeffs: p, zero: Q::zero() }
}

pub fn principal_part<C: Coeff>(s: &Series<C>) -> Series<C> {
    s.principal_part()
}
