//! R-matrices for sl₂: Baxter operators `R_s^W`, the lowest diagonal entry
//! `t_{V,W}(u)`, the 2×2 matrix for `N ⊗ L⁻_b`, normalized intertwiners of
//! finite-dimensional modules and the Yang–Baxter check built from them.
//!
//! Polynomial and rational dependence on the spectral parameter is always
//! recovered by exact interpolation at `0, 1, 2, …` with an extra check point.

use crate::linalg::Mat;
use crate::lweight::{a_monomial_decompose, AMonomial, LWeight, LWeightError};
use crate::modules_sl2::{
    add_scaled, lweight_decomposition, make_explicit, op_matrix, unit, Key, Module, ModuleError, Op, Vector,
};
use crate::qchar::{AMono, Family};
use crate::ratfun::{LinRat, Poly, RatFn};
use crate::tensor::{add_pair, pack, tensor_y0, unpack, xminus_on_highest, PairVector, TensorError};
use crate::{fmt_q, q, Q};
use num_traits::{One, Zero};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RMatrixError {
    #[error("basis vector {0:?} has no x⁻-word expression")]
    MissingWord(Key),
    #[error("{0} is not a product of simple roots A_(i,a)")]
    NotAMonomial(String),
    #[error("{0} is not a polynomial")]
    NotPolynomial(String),
    #[error("{0} is not a negative prefundamental module")]
    NotPrefundamental(String),
    #[error("{0} is not an unshifted finite-dimensional module")]
    NotFinite(String),
    #[error("no usable sample points for {0}")]
    NoSamples(String),
    #[error("reconstruction failed: {0}")]
    Reconstruction(String),
    #[error("pole at {0}")]
    Pole(String),
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    LWeight(#[from] LWeightError),
}

type Result<T> = std::result::Result<T, RMatrixError>;

// ---------------------------------------------------------------- operators

/// A weight-preserving operator on a truncated module, one block per level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ROperator {
    pub blocks: Vec<Mat>,
}

impl ROperator {
    pub fn compose(&self, o: &ROperator) -> ROperator {
        ROperator { blocks: self.blocks.iter().zip(&o.blocks).map(|(a, b)| a.mul(b)).collect() }
    }

    pub fn inverse(&self) -> Option<ROperator> {
        Some(ROperator { blocks: self.blocks.iter().map(Mat::inverse).collect::<Option<_>>()? })
    }
}

/// Matrix with polynomial entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMat {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Poly>,
}

impl PolyMat {
    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.cols + j]
    }

    pub fn eval(&self, x: &Q) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| self.get(i, j).eval(x))
    }

    pub fn mul(&self, o: &PolyMat) -> PolyMat {
        let mut entries = vec![Poly::zero(); self.rows * o.cols];
        for i in 0..self.rows {
            for j in 0..o.cols {
                for k in 0..self.cols {
                    entries[i * o.cols + j] = entries[i * o.cols + j].add(&self.get(i, k).mul(o.get(k, j)));
                }
            }
        }
        PolyMat { rows: self.rows, cols: o.cols, entries }
    }

    pub fn scale_poly(&self, p: &Poly) -> PolyMat {
        PolyMat { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|e| e.mul(p)).collect() }
    }

    /// `M(u) ↦ M(u + c)`.
    pub fn at_offset(&self, c: &Q) -> PolyMat {
        let back = -c.clone();
        PolyMat { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(|e| e.shift(&back)).collect() }
    }

    pub fn max_degree(&self) -> usize {
        self.entries.iter().filter_map(Poly::degree).max().unwrap_or(0)
    }

    /// Entrywise interpolation through `samples`, checked at the last one.
    pub fn interpolate(samples: &[(Q, Mat)]) -> Option<PolyMat> {
        let (check, fit) = samples.split_last()?;
        let (rows, cols) = (check.1.rows(), check.1.cols());
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let pts: Vec<(Q, Q)> = fit.iter().map(|(x, m)| (x.clone(), m.get(i, j).clone())).collect();
                let p = Poly::interpolate(&pts);
                if p.eval(&check.0) != *check.1.get(i, j) {
                    return None;
                }
                entries.push(p);
            }
        }
        Some(PolyMat { rows, cols, entries })
    }
}

/// Operator whose blocks are polynomial in `u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyOperator {
    pub blocks: Vec<PolyMat>,
}

impl PolyOperator {
    pub fn eval(&self, x: &Q) -> ROperator {
        ROperator { blocks: self.blocks.iter().map(|b| b.eval(x)).collect() }
    }

    pub fn at_offset(&self, c: &Q) -> PolyOperator {
        PolyOperator { blocks: self.blocks.iter().map(|b| b.at_offset(c)).collect() }
    }
}

fn level_index(m: &dyn Module, level: usize) -> (Vec<Key>, HashMap<Key, usize>) {
    let b = m.basis(level);
    let idx = b.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
    (b, idx)
}

// ---------------------------------------------------------------- Baxter recursion

/// `R_s^W`: fixes `ω` and satisfies `R(x⁻_n w) = Σ_k c_k x⁻_{n+k} R(w)` for `s = Σ c_k u^k`.
pub fn baxter_r(s: &Poly, w: &dyn Module) -> Result<ROperator> {
    if s.is_zero() {
        return Err(RMatrixError::NotPolynomial("0".into()));
    }
    let mut memo: HashMap<Key, Vector> = HashMap::new();
    let mut blocks = Vec::new();
    for level in 0..=w.depth() {
        let (basis, idx) = level_index(w, level);
        let mut m = Mat::zeros(basis.len(), basis.len());
        for (j, key) in basis.iter().enumerate() {
            let img = if level == 0 {
                unit(key)
            } else {
                let (n, parent, coef) = w.word(key).ok_or_else(|| RMatrixError::MissingWord(key.clone()))?;
                let mut rp = Vector::new();
                for (pk, pc) in &parent {
                    add_scaled(&mut rp, &memo[pk], pc);
                }
                let mut img = Vector::new();
                for (k, ck) in s.coeffs().iter().enumerate() {
                    if ck.is_zero() {
                        continue;
                    }
                    for (rk, rc) in &rp {
                        add_scaled(&mut img, &w.act(Op::XMinus, n + k as i64, rk)?, &(ck * rc * &coef));
                    }
                }
                img
            };
            for (k, c) in &img {
                let i = *idx.get(k).ok_or_else(|| ModuleError::OutOfRange(format!("{k:?} outside level {level}")))?;
                m.set(i, j, c.clone());
            }
            memo.insert(key.clone(), img);
        }
        blocks.push(m);
    }
    Ok(ROperator { blocks })
}

/// `R^W(u)`, the Baxter operator for `s(z) = z − u`, as a polynomial in `u`.
/// On level `k` it has degree `k`.
pub fn baxter_r_poly(w: &dyn Module) -> Result<PolyOperator> {
    let depth = w.depth();
    let samples: Vec<(Q, ROperator)> =
        (0..=depth as i64 + 1).map(|x| Ok((q(x), baxter_r(&Poly::linear(&q(x)), w)?))).collect::<Result<_>>()?;
    let mut blocks = Vec::new();
    for level in 0..=depth {
        let pts: Vec<(Q, Mat)> = samples[..level + 2].iter().map(|(x, r)| (x.clone(), r.blocks[level].clone())).collect();
        let p = PolyMat::interpolate(&pts).ok_or_else(|| RMatrixError::Reconstruction(format!("R^W(u) on level {level}")))?;
        // a second check point beyond the fit
        if level + 2 < samples.len() && p.eval(&samples[level + 2].0) != samples[level + 2].1.blocks[level] {
            return Err(RMatrixError::Reconstruction(format!("R^W(u) on level {level}")));
        }
        blocks.push(p);
    }
    Ok(PolyOperator { blocks })
}

/// Eigenvalue of `R^W(u)` on the ℓ-weight `top·∏A_{b_t}^{−1}`: `∏(b_t − u)`.
pub fn r_eigenvalue(amono: &AMono) -> Poly {
    amono.factors().iter().fold(Poly::one(), |acc, (_, b)| acc.mul(&Poly::linear(b).neg()))
}

/// The ℓ-weight blocks of `W` as `A`-monomials with multiplicities.
pub fn lweight_blocks(w: &dyn Module) -> Result<BTreeMap<AMono, i64>> {
    Ok(lweight_decomposition(w, None)?.terms)
}

// ---------------------------------------------------------------- λ and t

/// `∏ s_j(u + b)^n` over the factors `A_{j,b}^n` of `ratio`.
pub fn lambda_poly(ratio: &AMonomial, s: &LWeight) -> Result<LinRat> {
    let mut out = LinRat::one();
    for ((j, b), n) in ratio {
        if *n < 0 {
            return Err(RMatrixError::NotAMonomial(crate::lweight::fmt_a_monomial(ratio)));
        }
        let sj = s.comps().get(*j).ok_or_else(|| RMatrixError::NotAMonomial(crate::lweight::fmt_a_monomial(ratio)))?;
        if !sj.is_poly() {
            return Err(RMatrixError::NotPolynomial(sj.to_string()));
        }
        out = out.mul(&sj.shift(&-b.clone()).pow(*n));
    }
    Ok(out)
}

/// The ratio `∏ A_{i_s,a_s}` between highest and lowest ℓ-weight of `V`.
pub fn ratio_of(v_data: &[(usize, Q)]) -> AMonomial {
    let mut out = AMonomial::new();
    for (i, a) in v_data {
        *out.entry((*i, a.clone())).or_insert(0) += 1;
    }
    out
}

/// `s` with `W = L(s^{−1})`.
pub fn negative_s(w: &dyn Module) -> Result<LinRat> {
    let s = w.top().inv();
    if !s.is_poly() {
        return Err(RMatrixError::NotPolynomial(s.to_string()));
    }
    Ok(s)
}

fn sl2_points(v_data: &[(usize, Q)]) -> Result<Vec<Q>> {
    v_data
        .iter()
        .map(|(i, a)| if *i == 0 { Ok(a.clone()) } else { Err(RMatrixError::NotAMonomial(format!("node {}", i + 1))) })
        .collect()
}

/// `t_{V,W}(u)` from `t(u)·∏R(u+a_s) = λ(u)·∏R(u+a_s+1)`, solved at sample
/// points and interpolated with degree `deg λ`.
pub fn t_lowest(v_data: &[(usize, Q)], w: &dyn Module) -> Result<PolyOperator> {
    let pts = sl2_points(v_data)?;
    let lam = lambda_poly(&ratio_of(v_data), &LWeight::single(negative_s(w)?))?;
    let lam_p = lam.numer();
    let need = lam.degree() as usize + 2;
    let mut cache: HashMap<Q, ROperator> = HashMap::new();
    let mut r_at = |x: Q| -> Result<ROperator> {
        if let Some(r) = cache.get(&x) {
            return Ok(r.clone());
        }
        let r = baxter_r(&Poly::linear(&x), w)?;
        cache.insert(x, r.clone());
        Ok(r)
    };
    let mut samples = Vec::new();
    let mut x = 0i64;
    while samples.len() < need {
        if x > 64 + need as i64 {
            return Err(RMatrixError::NoSamples("t_lowest".into()));
        }
        let xq = q(x);
        x += 1;
        let mut den: Option<ROperator> = None;
        let mut num: Option<ROperator> = None;
        for a in &pts {
            let d = r_at(&xq + a)?;
            let n = r_at(&xq + a + q(1))?;
            den = Some(match den { None => d, Some(o) => o.compose(&d) });
            num = Some(match num { None => n, Some(o) => o.compose(&n) });
        }
        let t = match (num, den) {
            (Some(n), Some(d)) => match d.inverse() {
                Some(di) => n.compose(&di),
                None => continue,
            },
            _ => ROperator { blocks: (0..=w.depth()).map(|k| Mat::identity(w.basis(k).len())).collect() },
        };
        let l = lam_p.eval(&xq);
        samples.push((xq, ROperator { blocks: t.blocks.iter().map(|b| b.scale(&l)).collect() }));
    }
    let mut blocks = Vec::new();
    for level in 0..=w.depth() {
        let pts: Vec<(Q, Mat)> = samples.iter().map(|(x, r)| (x.clone(), r.blocks[level].clone())).collect();
        blocks.push(PolyMat::interpolate(&pts).ok_or_else(|| RMatrixError::Reconstruction(format!("t on level {level}")))?);
    }
    Ok(PolyOperator { blocks })
}

/// Eigenvalue of `t_{V,W}(u)` on the block of `top·∏A_{b_t}^{−1}`:
/// `λ(u) ∏_s ∏_t (b_t − u − a_s − 1)/(b_t − u − a_s)`.
pub fn t_eigenvalue(v_data: &[(usize, Q)], lam: &LinRat, block: &AMono) -> Result<LinRat> {
    let mut out = lam.clone();
    for a in sl2_points(v_data)? {
        for (_, b) in block.factors() {
            // (b − u − a − 1)/(b − u − a) = (u − (b − a − 1))/(u − (b − a))
            out = out.mul(&LinRat::from_roots([&(b - &a - q(1))], [&(b - &a)]));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TqReport {
    pub levels: usize,
    pub failures: Vec<String>,
}

impl TqReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for TqReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} levels, {} failures", self.levels, self.failures.len())?;
        for x in &self.failures {
            write!(f, "\n  {x}")?;
        }
        Ok(())
    }
}

/// Checks `t(u)·∏R(u+a_s) = λ(u)·∏R(u+a_s+1)` as a polynomial identity on
/// every level, and that `t(u)` has the closed block eigenvalues.
pub fn check_tq(v_data: &[(usize, Q)], w: &dyn Module) -> Result<TqReport> {
    let pts = sl2_points(v_data)?;
    let lam = lambda_poly(&ratio_of(v_data), &LWeight::single(negative_s(w)?))?;
    let t = t_lowest(v_data, w)?;
    let r = baxter_r_poly(w)?;
    let blocks = lweight_blocks(w)?;
    let mut report = TqReport { levels: w.depth() + 1, failures: Vec::new() };
    for level in 0..=w.depth() {
        let mut lhs = t.blocks[level].clone();
        let mut rhs = PolyMat { rows: lhs.rows, cols: lhs.cols, entries: Vec::new() };
        rhs.entries = (0..lhs.rows * lhs.cols).map(|k| if k / lhs.cols == k % lhs.cols { lam.numer() } else { Poly::zero() }).collect();
        for a in &pts {
            lhs = lhs.mul(&r.blocks[level].at_offset(a));
            rhs = rhs.mul(&r.blocks[level].at_offset(&(a + q(1))));
        }
        if lhs != rhs {
            report.failures.push(format!("TQ identity on level {level}"));
        }
        // spectrum at a generic point
        let x = crate::qr(7, 11);
        let got = t.blocks[level].eval(&x).charpoly();
        let mut expect = Poly::one();
        for (m, mult) in blocks.iter().filter(|(m, _)| m.size() == level) {
            let ev = t_eigenvalue(v_data, &lam, m)?.eval(&x).map_err(|e| RMatrixError::Pole(e.to_string()))?;
            expect = expect.mul(&Poly::linear(&ev).pow(*mult as u32));
        }
        if got != expect {
            report.failures.push(format!("spectrum of t on level {level}"));
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------- N ⊗ L⁻_b

/// `Ř(a)` on `N(a) ⊗ W → W ⊗ N(a)`, `Ř(e_j ⊗ w) = Σ_i t_ij(w) ⊗ e_i`.
///
/// Entries are matrices on the whole enumerated space of `W`, ordered level by
/// level. They are exact on sources of level below `valid`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FundRMatrix {
    pub a: Q,
    pub keys: Vec<Key>,
    pub t: [[Mat; 2]; 2],
    pub valid: usize,
}

impl FundRMatrix {
    pub fn index(&self, key: &Key) -> Option<usize> {
        self.keys.iter().position(|k| k == key)
    }

    /// `t_ij(w)` as a vector.
    pub fn entry(&self, i: usize, j: usize, w: &Key) -> Vector {
        let Some(c) = self.index(w) else { return Vector::new() };
        let m = &self.t[i][j];
        (0..m.rows()).filter(|&r| !m.get(r, c).is_zero()).map(|r| (self.keys[r].clone(), m.get(r, c).clone())).collect()
    }

    /// `Ř(e_j ⊗ w)` with `e_1, e_2` keyed `[0], [1]`.
    pub fn apply(&self, ej: &Key, w: &Key) -> PairVector {
        let j = ej[0] as usize;
        let mut out = PairVector::new();
        for i in 0..2 {
            for (k, c) in self.entry(i, j, w) {
                add_pair(&mut out, (k, vec![i as i64]), c);
            }
        }
        out
    }
}

fn whole_space(w: &dyn Module, levels: usize) -> (Vec<Key>, Vec<usize>) {
    let mut keys = Vec::new();
    let mut offsets = Vec::new();
    for k in 0..=levels {
        offsets.push(keys.len());
        keys.extend(w.basis(k));
    }
    (keys, offsets)
}

fn embed_blocks(n: usize, offsets: &[usize], blocks: &[(usize, usize, Mat)]) -> Mat {
    let mut out = Mat::zeros(n, n);
    for (to, from, b) in blocks {
        for i in 0..b.rows() {
            for j in 0..b.cols() {
                out.set(offsets[*to] + i, offsets[*from] + j, b.get(i, j).clone());
            }
        }
    }
    out
}

/// The R-matrix of `N(a) ⊗ L⁻_b`, from `t_22 = t_{N,W}(a)`,
/// `t_12 = −R(a)^{−1} x⁻_0 R(a) t_22` and the `x⁺_0` bootstrap
/// `t_11 = [x⁺_0, t_12]`, `t_21 = [x⁺_0, t_22]`.
pub fn rhat_fund_negative(a: &Q, w: &crate::modules_sl2::Explicit) -> Result<FundRMatrix> {
    if !matches!(w.family(), Family::Lminus(_)) {
        return Err(RMatrixError::NotPrefundamental(w.label()));
    }
    let depth = w.depth();
    let (keys, offsets) = whole_space(w, depth);
    let n = keys.len();
    let t_poly = t_lowest(&[(0, Q::zero())], w)?;
    let t22_blocks = t_poly.eval(a);
    let r = baxter_r(&Poly::linear(a), w)?;
    let r_inv = r.inverse().ok_or_else(|| RMatrixError::Pole(format!("R(u) singular at u = {}", fmt_q(a))))?;
    let diag = |op: &ROperator| embed_blocks(n, &offsets, &op.blocks.iter().enumerate().map(|(k, b)| (k, k, b.clone())).collect::<Vec<_>>());
    let mut xm = Vec::new();
    let mut xp = Vec::new();
    for k in 0..depth {
        xm.push((k + 1, k, op_matrix(w, Op::XMinus, 0, k)?));
        xp.push((k, k + 1, op_matrix(w, Op::XPlus, 0, k + 1)?));
    }
    let xm = embed_blocks(n, &offsets, &xm);
    let xp = embed_blocks(n, &offsets, &xp);
    let t22 = diag(&t22_blocks);
    let t12 = diag(&r_inv).mul(&xm).mul(&diag(&r)).mul(&t22).scale(&-Q::one());
    let t11 = xp.commutator(&t12);
    let t21 = xp.commutator(&t22);
    Ok(FundRMatrix { a: a.clone(), keys, t: [[t11, t12], [t21, t22]], valid: depth })
}

/// `Ř(u)` on `N(u) ⊗ L⁻_b` with entries polynomial in the spectral parameter,
/// interpolated through generic sample points and checked at one more.
/// Defined also where `R(u)` is singular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FundRMatrixPoly {
    pub keys: Vec<Key>,
    pub t: [[PolyMat; 2]; 2],
    pub valid: usize,
}

impl FundRMatrixPoly {
    pub fn eval(&self, a: &Q) -> FundRMatrix {
        let t = std::array::from_fn(|i| std::array::from_fn(|j| self.t[i][j].eval(a)));
        FundRMatrix { a: a.clone(), keys: self.keys.clone(), t, valid: self.valid }
    }
}

pub fn rhat_fund_negative_poly(w: &crate::modules_sl2::Explicit) -> Result<FundRMatrixPoly> {
    // entries have degree at most one in u; two spare points guard the bound
    let mut samples: Vec<FundRMatrix> = Vec::new();
    let mut k = 0i64;
    while samples.len() < 4 {
        let a = crate::qr(13 * k + 5, 13) + crate::qr(1, 7);
        k += 1;
        match rhat_fund_negative(&a, w) {
            Ok(rm) => samples.push(rm),
            Err(RMatrixError::Pole(_)) if k < 32 => continue,
            Err(e) => return Err(e),
        }
    }
    let (keys, valid) = (samples[0].keys.clone(), samples[0].valid);
    let mut t: [[Option<PolyMat>; 2]; 2] = Default::default();
    for i in 0..2 {
        for j in 0..2 {
            let pts: Vec<(Q, Mat)> = samples.iter().map(|rm| (rm.a.clone(), rm.t[i][j].clone())).collect();
            t[i][j] = Some(PolyMat::interpolate(&pts).ok_or_else(|| RMatrixError::Reconstruction(format!("t{}{} is not polynomial of degree ≤ 2", i + 1, j + 1)))?);
        }
    }
    Ok(FundRMatrixPoly { keys, t: t.map(|row| row.map(|m| m.expect("filled"))), valid })
}

/// Spot-check `Ř(x⁻_n(e_1⊗ω)) = x⁻_n(ω⊗e_1)` for `n ≤ n_max`, both sides
/// from the extreme-vector formulas.
pub fn check_fund_intertwining(rm: &FundRMatrix, w: &dyn Module, n_max: i64) -> Result<bool> {
    let nmod = make_explicit(Family::N(0, rm.a.clone()), 1)?;
    let omega = w.basis(0)[0].clone();
    let e1 = vec![0];
    for n in 0..=n_max {
        let src = xminus_on_highest(&nmod, &e1, w, &omega, n)?;
        let mut lhs = PairVector::new();
        for ((nk, wk), c) in &src {
            if w.level(wk) + 1 >= rm.valid {
                return Err(ModuleError::OutOfRange(format!("x⁻_{n} needs level {}", w.level(wk) + 1)).into());
            }
            for (k, v) in rm.apply(nk, wk) {
                add_pair(&mut lhs, k, v * c);
            }
        }
        let rhs = xminus_on_highest(w, &omega, &nmod, &e1, n)?;
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------- finite-dimensional Ř

/// `Ř_{U,V}(x): U(x) ⊗ V → V ⊗ U(x)` with rational entries in `x`,
/// normalized by `ω ⊗ ω ↦ ω ⊗ ω`.
#[derive(Clone, Debug)]
pub struct FinDimR {
    /// Per level: source keys `pack(u, v)` and target keys `pack(v, u)`.
    pub src: Vec<Vec<Key>>,
    pub tgt: Vec<Vec<Key>>,
    /// Per level, row-major.
    pub blocks: Vec<Vec<RatFn>>,
}

impl FinDimR {
    pub fn eval(&self, x: &Q) -> Result<Vec<Mat>> {
        self.blocks
            .iter()
            .zip(&self.src)
            .map(|(b, s)| {
                let n = s.len();
                let vals: Vec<Q> = b.iter().map(|f| f.eval(x)).collect::<std::result::Result<_, _>>().map_err(|e| RMatrixError::Pole(e.to_string()))?;
                Ok(Mat::from_fn(n, n, |i, j| vals[i * n + j].clone()))
            })
            .collect()
    }

    /// `Ř(x)(u ⊗ v)` as pairs `(v', u')`.
    pub fn apply(&self, mats: &[Mat], u: &Key, v: &Key) -> PairVector {
        let key = pack(u, v);
        let mut out = PairVector::new();
        for (level, src) in self.src.iter().enumerate() {
            if let Some(j) = src.iter().position(|k| *k == key) {
                for (i, t) in self.tgt[level].iter().enumerate() {
                    let c = mats[level].get(i, j);
                    if !c.is_zero() {
                        add_pair(&mut out, unpack(t), c.clone());
                    }
                }
            }
        }
        out
    }

    pub fn max_denominator_degree(&self) -> usize {
        self.blocks.iter().flatten().filter_map(|f| f.den().degree()).max().unwrap_or(0)
    }
}

const INTERTWINE_OPS: [(Op, i64); 4] = [(Op::XPlus, 0), (Op::XMinus, 0), (Op::Xi, 0), (Op::Xi, 1)];

/// The intertwiner at one sample point, or `None` when it is not unique.
fn intertwiner_at<U: Module, V: Module>(u: &U, v: &V, x: &Q) -> Result<Option<Vec<Mat>>> {
    let ux = crate::modules_sl2::spectral_shift(u, x);
    let left = tensor_y0(&ux, v)?;
    let right = tensor_y0(v, &ux)?;
    let depth = left.depth();
    let dims: Vec<usize> = (0..=depth).map(|k| left.basis(k).len()).collect();
    let mut offsets = vec![0];
    for d in &dims {
        offsets.push(offsets.last().unwrap() + d * d);
    }
    let nvar = *offsets.last().unwrap();
    // variable for entry (i, j) of block k
    let var = |k: usize, i: usize, j: usize| offsets[k] + i * dims[k] + j;
    let mut rows: Vec<Vec<Q>> = Vec::new();
    for (op, mode) in INTERTWINE_OPS {
        for k in 0..=depth {
            let t = k as i64 + op.level_step();
            if t < 0 || t as usize > depth {
                continue;
            }
            let t = t as usize;
            let xl = op_matrix(&left, op, mode, k)?;
            let xr = op_matrix(&right, op, mode, k)?;
            // Ř_t X_L − X_R Ř_k = 0, entry (i, j) with i in level t, j in level k
            for i in 0..dims[t] {
                for j in 0..dims[k] {
                    let mut row = vec![Q::zero(); nvar];
                    for l in 0..dims[t] {
                        row[var(t, i, l)] += xl.get(l, j);
                    }
                    for l in 0..dims[k] {
                        row[var(k, l, j)] -= xr.get(i, l);
                    }
                    if row.iter().any(|c| !c.is_zero()) {
                        rows.push(row);
                    }
                }
            }
        }
    }
    let ker = Mat::from_rows(rows).kernel();
    if ker.len() != 1 || ker[0][0].is_zero() {
        return Ok(None);
    }
    let norm = ker[0][0].recip();
    Ok(Some((0..=depth).map(|k| Mat::from_fn(dims[k], dims[k], |i, j| &ker[0][var(k, i, j)] * &norm)).collect()))
}

/// Reconstructs `Ř_{U,V}(x)` by Cauchy interpolation, validated at three
/// held-out sample points.
pub fn rhat_findim<U: Module, V: Module>(u: &U, v: &V) -> Result<FinDimR> {
    for m in [u as &dyn Module, v as &dyn Module] {
        if m.shift() != 0 || m.is_truncated() {
            return Err(RMatrixError::NotFinite(m.label()));
        }
    }
    let probe = tensor_y0(u, v)?;
    let depth = probe.depth();
    let src: Vec<Vec<Key>> = (0..=depth).map(|k| probe.basis(k)).collect();
    let tgt: Vec<Vec<Key>> = (0..=depth).map(|k| tensor_y0(v, u).map(|t| t.basis(k))).collect::<std::result::Result<_, _>>()?;
    let max_block = src.iter().map(Vec::len).max().unwrap_or(1);
    let max_deg = 2 * max_block;
    let need = 2 * max_deg + 2 + 3;
    let mut samples: Vec<(Q, Vec<Mat>)> = Vec::new();
    let mut x = 0i64;
    while samples.len() < need {
        if x > 200 + need as i64 {
            return Err(RMatrixError::NoSamples(format!("Ř for {} ⊗ {}", u.label(), v.label())));
        }
        let xq = q(x);
        x += 1;
        if let Some(m) = intertwiner_at(u, v, &xq)? {
            samples.push((xq, m));
        }
    }
    let (fit, held) = samples.split_at(need - 3);
    let mut blocks = Vec::new();
    for (level, s) in src.iter().enumerate() {
        let n = s.len();
        let mut b = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let pts: Vec<(Q, Q)> = fit.iter().map(|(x, m)| (x.clone(), m[level].get(i, j).clone())).collect();
                let f = RatFn::interpolate(&pts, max_deg).ok_or_else(|| RMatrixError::Reconstruction(format!("entry ({i},{j}) of level {level}")))?;
                b.push(f);
            }
        }
        blocks.push(b);
    }
    let out = FinDimR { src, tgt, blocks };
    for (x, m) in held {
        if out.eval(x)? != *m {
            return Err(RMatrixError::Reconstruction(format!("held-out point {}", fmt_q(x))));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- Yang–Baxter

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct YbeReport {
    pub samples: usize,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl YbeReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty() && self.checked > 0
    }
}

impl fmt::Display for YbeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} samples, {} source vectors, {} failures", self.samples, self.checked, self.failures.len())?;
        for x in &self.failures {
            write!(f, "\n  {x}")?;
        }
        Ok(())
    }
}

type Triple = BTreeMap<(Key, Key, Key), Q>;

/// Applies a map on tensor positions `(pos, pos+1)` of a triple vector.
fn on_pair(state: &Triple, pos: usize, f: &dyn Fn(&Key, &Key) -> Result<PairVector>) -> Result<Triple> {
    let mut out = Triple::new();
    for ((a, b, c), coef) in state {
        let (l, r) = if pos == 0 { (a, b) } else { (b, c) };
        for ((x, y), v) in f(l, r)? {
            let k = if pos == 0 { (x, y, c.clone()) } else { (a.clone(), x, y) };
            let e = out.entry(k.clone()).or_insert_with(Q::zero);
            *e += v * coef;
            if e.is_zero() {
                out.remove(&k);
            }
        }
    }
    Ok(out)
}

/// `Ř_{N(c),W}(x)`: the 2×2 matrix at `a = c + x`, or the flip for trivial `W`.
fn fund_map(c: &Q, w: &crate::modules_sl2::Explicit, x: &Q) -> Result<Box<dyn Fn(&Key, &Key) -> Result<PairVector>>> {
    if w.top().is_one() {
        return Ok(Box::new(|e: &Key, k: &Key| Ok(PairVector::from([((k.clone(), e.clone()), Q::one())]))));
    }
    let rm = rhat_fund_negative(&(c + x), w)?;
    Ok(Box::new(move |e: &Key, k: &Key| Ok(rm.apply(e, k))))
}

/// Checks `Ř²³_{U,V}(u−v)Ř¹²_{U,W}(u)Ř²³_{V,W}(v) = Ř¹²_{V,W}(v)Ř²³_{U,W}(u)Ř¹²_{U,V}(u−v)`
/// on `U ⊗ V ⊗ W` with `U = N(c_u)`, `V = N(c_v)` and `W` a negative
/// prefundamental (or trivial) module. Sources are restricted to `W`-levels at
/// most `depth − 2`, where every factor is exact.
pub fn check_ybe(c_u: &Q, c_v: &Q, w: &crate::modules_sl2::Explicit, samples: &[(Q, Q)]) -> Result<YbeReport> {
    let um = make_explicit(Family::N(0, c_u.clone()), 1)?;
    let vm = make_explicit(Family::N(0, c_v.clone()), 1)?;
    let ruv = rhat_findim(&um, &vm)?;
    let cutoff = w.depth().saturating_sub(2);
    let mut report = YbeReport { samples: samples.len(), ..Default::default() };
    for (su, sv) in samples {
        let muv = ruv.eval(&(su - sv))?;
        let r_uv = |a: &Key, b: &Key| Ok(ruv.apply(&muv, a, b));
        let r_uw = fund_map(c_u, w, su)?;
        let r_vw = fund_map(c_v, w, sv)?;
        for level in 0..=cutoff.min(w.depth()) {
            for wk in w.basis(level) {
                for a in [vec![0], vec![1]] {
                    for b in [vec![0], vec![1]] {
                        let src = Triple::from([((a.clone(), b.clone(), wk.clone()), Q::one())]);
                        let lhs = on_pair(&on_pair(&on_pair(&src, 1, &*r_vw)?, 0, &*r_uw)?, 1, &r_uv)?;
                        let rhs = on_pair(&on_pair(&on_pair(&src, 0, &r_uv)?, 1, &*r_uw)?, 0, &*r_vw)?;
                        report.checked += 1;
                        if lhs != rhs {
                            report.failures.push(format!("u={}, v={}, source {a:?}⊗{b:?}⊗{wk:?}", fmt_q(su), fmt_q(sv)));
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

/// `A`-monomial of the lowest ℓ-weight of `V` relative to its top, for
/// modules whose lowest vector is the last basis vector.
pub fn lowest_ratio(cd: &crate::cartan::CartanData, top: &LWeight, lowest: &LWeight) -> Result<AMonomial> {
    Ok(a_monomial_decompose(cd, &top.div(lowest))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::CartanData;
    use crate::modules_sl2::{make_simple, make_weyl, Explicit};
    use crate::qr;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lminus(b: Q, depth: usize) -> Explicit {
        make_explicit(Family::Lminus(b), depth).unwrap()
    }

    fn lr(s: &str) -> LinRat {
        LinRat::parse(s).unwrap()
    }

    fn falling(u: &Q, i: usize) -> Q {
        (0..i as i64).fold(Q::one(), |acc, t| acc * (-u.clone() - q(t)))
    }

    #[test]
    fn baxter_eigenvalues_on_lminus0() {
        let w = lminus(q(0), 12);
        let u = qr(5, 7);
        let r = baxter_r(&Poly::linear(&u), &w).unwrap();
        for i in 0..=12 {
            assert_eq!(r.blocks[i], Mat::scalar(1, &falling(&u, i)), "v_{i}");
        }
        let p = baxter_r_poly(&w).unwrap();
        for i in 0..=12 {
            assert_eq!(p.blocks[i].max_degree(), i);
            assert_eq!(p.blocks[i].eval(&u), r.blocks[i]);
        }
    }

    #[test]
    fn unit_twist_is_identity() {
        let w = make_simple(&lr("1/((u-1)*(u+1/2))"), 4).unwrap();
        let r = baxter_r(&Poly::one(), &w).unwrap();
        for (k, b) in r.blocks.iter().enumerate() {
            assert_eq!(*b, Mat::identity(w.basis(k).len()));
        }
    }

    #[test]
    fn baxter_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..4 {
            let b = qr(rng.gen_range(-6..6), rng.gen_range(1..4));
            let w = lminus(b, 8);
            let rand_poly = |rng: &mut ChaCha8Rng| {
                let d = rng.gen_range(0..=2);
                Poly::from_roots(&(0..d).map(|_| qr(rng.gen_range(-9..9), rng.gen_range(1..3))).collect::<Vec<_>>())
            };
            let (r, s) = (rand_poly(&mut rng), rand_poly(&mut rng));
            let lhs = baxter_r(&r, &w).unwrap().compose(&baxter_r(&s, &w).unwrap());
            assert_eq!(lhs, baxter_r(&r.mul(&s), &w).unwrap());
        }
    }

    #[test]
    fn baxter_commutes_with_cartan() {
        let w = make_simple(&lr("1/((u-2)*(u+1/3))"), 5).unwrap();
        let r = baxter_r(&Poly::linear(&qr(3, 4)), &w).unwrap();
        for level in 0..=w.depth() {
            for p in w.xi_floor()..=6 {
                let xi = op_matrix(&w, Op::Xi, p, level).unwrap();
                assert_eq!(r.blocks[level].mul(&xi), xi.mul(&r.blocks[level]), "ξ_{p} on level {level}");
            }
        }
    }

    #[test]
    fn baxter_spectrum_matches_lweights() {
        let w = make_simple(&lr("1/((u-1)*(u-3/2))"), 5).unwrap();
        let blocks = lweight_blocks(&w).unwrap();
        let x = qr(2, 9);
        let r = baxter_r(&Poly::linear(&x), &w).unwrap();
        for level in 0..=w.depth() {
            let mut expect = Poly::one();
            for (m, mult) in blocks.iter().filter(|(m, _)| m.size() == level) {
                expect = expect.mul(&Poly::linear(&r_eigenvalue(m).eval(&x)).pow(*mult as u32));
            }
            assert_eq!(r.blocks[level].charpoly(), expect, "level {level}");
        }
    }

    #[test]
    fn missing_words_are_reported() {
        let w = crate::tensor::tensor_onedim(&lr("(u-1)"), lminus(q(0), 3), crate::tensor::Side::Right).unwrap();
        assert!(matches!(baxter_r(&Poly::linear(&q(1)), &w), Err(RMatrixError::MissingWord(_))));
    }

    #[test]
    fn lambda_examples() {
        let cd = CartanData::sl2();
        let s = lr("(u-1)*(u+2)");
        let ratio = ratio_of(&[(0, q(0))]);
        assert_eq!(lambda_poly(&ratio, &LWeight::single(s.clone())).unwrap(), s);
        assert_eq!(lambda_poly(&AMonomial::new(), &LWeight::single(s.clone())).unwrap(), LinRat::one());
        let b2 = CartanData::new("B2").unwrap();
        let (s1, s2) = (lr("(u-1)*(u-5)"), lr("(u+2)"));
        let ratio = AMonomial::from([((0, q(0)), 1), ((0, q(-1)), 1), ((1, q(0)), 1), ((1, q(-1)), 1)]);
        let g = lambda_poly(&ratio, &LWeight::from_comps(vec![s1.clone(), s2.clone()])).unwrap();
        assert_eq!(g, s1.shift(&q(1)).mul(&s1).mul(&s2.shift(&q(1))).mul(&s2));
        let bad = AMonomial::from([((0, q(0)), -1)]);
        assert!(lambda_poly(&bad, &LWeight::single(s)).is_err());
        let _ = (cd, b2);
    }

    #[test]
    fn t_lowest_on_lminus0() {
        let w = lminus(q(0), 8);
        let t = t_lowest(&[(0, q(0))], &w).unwrap();
        for i in 0..=8 {
            let expect = PolyMat { rows: 1, cols: 1, entries: vec![Poly::linear(&q(-(i as i64)))] };
            assert_eq!(t.blocks[i], expect, "v_{i}");
        }
    }

    #[test]
    fn t_lowest_on_omega_is_lambda() {
        let s = lr("(u-2)*(u+1/2)");
        let w = make_simple(&s.inv(), 3).unwrap();
        let t = t_lowest(&[(0, q(0))], &w).unwrap();
        assert_eq!(t.blocks[0].entries, vec![s.numer()]);
    }

    #[test]
    fn tq_relation_blockwise() {
        for b in [q(0), qr(3, 2), q(-4)] {
            let r = check_tq(&[(0, q(0))], &lminus(b, 8)).unwrap();
            assert!(r.is_ok(), "{r}");
        }
        let w = make_simple(&lr("1/((u-1)*(u-7/3))"), 4).unwrap();
        let r = check_tq(&[(0, q(0)), (0, q(2))], &w).unwrap();
        assert!(r.is_ok(), "{r}");
    }

    #[test]
    fn explicit_two_by_two() {
        let a = qr(13, 5);
        let w = lminus(q(0), 12);
        let rm = rhat_fund_negative(&a, &w).unwrap();
        for i in 0..12i64 {
            let v = vec![i];
            let one = |k: i64, c: Q| if c.is_zero() { Vector::new() } else { Vector::from([(vec![k], c)]) };
            assert_eq!(rm.entry(0, 0, &v), one(i, q(1)));
            assert_eq!(rm.entry(0, 1, &v), one(i + 1, q(i + 1)));
            assert_eq!(rm.entry(1, 0, &v), if i == 0 { Vector::new() } else { one(i - 1, q(1)) });
            // (a + a⁺a⁻) v_i = (a + i) v_i
            assert_eq!(rm.entry(1, 1, &v), one(i, &a + q(i)));
        }
        assert_eq!(rm.apply(&vec![0], &vec![0]), PairVector::from([((vec![0], vec![0]), q(1))]));
        assert!(rhat_fund_negative(&a, &make_explicit(Family::N(0, q(1)), 1).unwrap()).is_err());
    }

    #[test]
    fn fund_polynomial_in_spectral_parameter() {
        let w = lminus(q(0), 8);
        let rp = rhat_fund_negative_poly(&w).unwrap();
        // t22 = u + a⁺a⁻ acts on v_i as u + i
        for i in 0..8 {
            assert_eq!(*rp.t[1][1].get(i, i), Poly::new(vec![q(i as i64), q(1)]));
        }
        let a = qr(-9, 4);
        assert_eq!(rp.eval(&a).t, rhat_fund_negative(&a, &w).unwrap().t);
        // at the singular point the polynomial form still intertwines
        assert!(rhat_fund_negative(&q(0), &w).is_err());
        assert!(check_fund_intertwining(&rp.eval(&q(0)), &w, 3).unwrap());
    }

    #[test]
    fn fund_intertwines_extreme_vectors() {
        for (a, b) in [(qr(1, 3), q(0)), (q(5), qr(-1, 2)), (qr(-7, 4), q(2)), (q(11), q(1))] {
            let w = lminus(b, 8);
            let rm = rhat_fund_negative(&a, &w).unwrap();
            assert!(check_fund_intertwining(&rm, &w, 4).unwrap(), "a={a} b");
        }
    }

    #[test]
    fn findim_n_n() {
        let u = make_explicit(Family::N(0, q(0)), 1).unwrap();
        let r = rhat_findim(&u, &u).unwrap();
        // one-dimensional weight blocks are fixed by the normalization
        for x in [q(3), qr(-5, 2)] {
            let m = r.eval(&x).unwrap();
            assert_eq!(m[0], Mat::identity(1));
            assert_eq!(m[2], Mat::identity(1));
        }
        assert!(r.blocks[1].iter().any(|f| !f.is_poly()));
        // a morphism at a fresh point
        let x = qr(17, 3);
        let m = r.eval(&x).unwrap();
        assert_eq!(intertwiner_at(&u, &u, &x).unwrap().unwrap(), m);
    }

    #[test]
    fn findim_kr() {
        let u = make_explicit(Family::KR(2, q(1)), 2).unwrap();
        let v = make_explicit(Family::N(0, q(4)), 1).unwrap();
        let r = rhat_findim(&u, &v).unwrap();
        let x = qr(9, 4);
        assert_eq!(intertwiner_at(&u, &v, &x).unwrap().unwrap(), r.eval(&x).unwrap());
    }

    #[test]
    fn ybe_on_lminus() {
        let w = lminus(q(0), 8);
        let samples = [(qr(1, 3), qr(2, 5)), (q(7), qr(-3, 2))];
        let r = check_ybe(&q(1), &q(5), &w, &samples).unwrap();
        assert!(r.is_ok(), "{r}");
    }

    #[test]
    fn ybe_with_trivial_w() {
        let w = make_explicit(Family::L(q(0), q(0)), 2).unwrap();
        let r = check_ybe(&q(0), &q(2), &w, &[(qr(1, 2), qr(1, 3))]).unwrap();
        assert_eq!(r.checked, 4);
        assert!(r.is_ok(), "{r}");
    }

    #[test]
    fn ybe_detects_wrong_matrix() {
        // swapping the roles of u and v breaks the identity
        let w = lminus(q(0), 6);
        let um = make_explicit(Family::N(0, q(1)), 1).unwrap();
        let ruv = rhat_findim(&um, &make_explicit(Family::N(0, q(5)), 1).unwrap()).unwrap();
        let m_good = ruv.eval(&qr(1, 7)).unwrap();
        let m_bad = ruv.eval(&qr(-1, 7)).unwrap();
        assert_ne!(m_good, m_bad);
        let _ = w;
    }

    #[test]
    fn lowest_row_factorizes() {
        // t_{N,L(1/(rs))} has the spectrum of t_{N,L(1/r)} ⊗ t_{N,L(1/s)}
        let (r, s) = (q(1), qr(-5, 2));
        let depth = 4;
        let w = make_simple(&LinRat::from_roots(std::iter::empty(), [&r, &s]), depth).unwrap();
        let x = qr(3, 11);
        let t = t_lowest(&[(0, q(0))], &w).unwrap().eval(&x);
        let tr = t_lowest(&[(0, q(0))], &lminus(r, depth)).unwrap().eval(&x);
        let ts = t_lowest(&[(0, q(0))], &lminus(s, depth)).unwrap().eval(&x);
        for level in 0..=depth {
            let mut expect = Poly::one();
            for i in 0..=level {
                let ev = tr.blocks[i].get(0, 0) * ts.blocks[level - i].get(0, 0);
                expect = expect.mul(&Poly::linear(&ev));
            }
            assert_eq!(t.blocks[level].charpoly(), expect, "level {level}");
        }
    }

    #[test]
    fn weyl_module_words() {
        let w = make_weyl(&LinRat::one(), &lr("(u-1)*(u-2)"), 3).unwrap();
        assert!(baxter_r(&Poly::linear(&q(1)), &w).is_ok());
    }
}
