//! GKLO series and truncation.
//!
//! For a truncatable pair `(μ, r)` the series `A_i(u) = u^{m_i} + …` are fixed
//! by `ξ_i(u) = r_i(u) / (A_i(u) A_i(u−d_i) ∏ neighbours)`. On sl₂ there are no
//! neighbours, so `A(u)A(u−1) = r(u) ξ(u)^{−1}` is solved coefficient by
//! coefficient, either per ℓ-weight block or on whole level matrices.

use crate::cartan::CartanData;
use crate::linalg::{Mat, Subspace};
use crate::lweight::{AMonomial, LWeight, LWeightError};
use crate::modules_sl2::{op_matrix, Module, ModuleError, Op};
use crate::qchar::AMono;
use crate::ratfun::{Coeff, LinRat, Poly, Series};
use crate::rmatrix::{baxter_r_poly, lambda_poly, lweight_blocks, t_lowest, PolyMat, RMatrixError};
use crate::{fmt_q, q, Q};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TruncationError {
    #[error("not truncatable: {0}")]
    NotTruncatable(String),
    #[error("shift of the module ({0}) does not match the pair ({1})")]
    ShiftMismatch(i64, i64),
    #[error("{0} has no monic square-root factorization g(u)g(u−1)")]
    NoFactorization(String),
    #[error("the eigenvalue and direct routes disagree on level {0}")]
    RouteMismatch(usize),
    #[error("fundamental ratios missing for node {0}")]
    MissingRatio(usize),
    #[error("{0} is not a polynomial")]
    NotPolynomial(String),
    #[error("only rank one is supported here, got rank {0}")]
    RankNotOne(usize),
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error(transparent)]
    RMatrix(#[from] RMatrixError),
    #[error(transparent)]
    LWeight(#[from] LWeightError),
}

type Result<T> = std::result::Result<T, TruncationError>;

/// `(μ, r)` with `ϖ^∨(r) − μ = Σ m_i α_i^∨`, `m_i ∈ ℕ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatablePair {
    pub mu: Vec<i64>,
    pub r: LWeight,
    pub m: Vec<u64>,
}

impl TruncatablePair {
    pub fn new(cd: &CartanData, mu: Vec<i64>, r: LWeight) -> Result<Self> {
        let n = cd.rank();
        if mu.len() != n || r.rank() != n {
            return Err(TruncationError::NotTruncatable("rank mismatch".into()));
        }
        // Σ_i m_i c_ij = deg r_j − μ_j
        let ct = Mat::from_fn(n, n, |j, i| q(cd.c(i, j)));
        let rhs: Vec<Q> = (0..n).map(|j| q(r.comp(j).degree() - mu[j])).collect();
        let sol = ct.solve(&rhs).ok_or_else(|| TruncationError::NotTruncatable("singular Cartan matrix".into()))?;
        let m = sol
            .iter()
            .map(|x| {
                if x.is_integer() && !x.is_negative() {
                    Ok(x.to_integer().try_into().unwrap_or(u64::MAX))
                } else {
                    Err(TruncationError::NotTruncatable(format!("coefficient {}", fmt_q(x))))
                }
            })
            .collect::<Result<_>>()?;
        Ok(TruncatablePair { mu, r, m })
    }

    pub fn sl2(mu: i64, r: LinRat) -> Result<Self> {
        Self::new(&CartanData::sl2(), vec![mu], LWeight::single(r))
    }
}

impl fmt::Display for TruncatablePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "μ = {:?}, r = {}, m = {:?}", self.mu, self.r, self.m)
    }
}

// ---------------------------------------------------------------- series helpers

/// `S^{−1}` for `S = u^t (1 + O(u^{−1}))`.
fn invert_unipotent<C: Coeff>(s: &Series<C>, one: &C) -> Series<C> {
    let t = s.top();
    let order = s.order();
    let len = (order + t).max(0) as usize + 1;
    let c: Vec<C> = (0..len).map(|k| s.coeff(t - k as i64).unwrap_or_else(|| s.zero_coeff().clone())).collect();
    let mut b: Vec<C> = vec![one.clone()];
    for k in 1..len {
        let mut acc = s.zero_coeff().clone();
        for j in 1..=k {
            acc = acc.add_c(&c[j].mul_c(&b[k - j]));
        }
        b.push(acc.scale_c(&-Q::one()));
    }
    Series::from_coeffs(-t, b, s.zero_coeff().clone())
}

/// The monic series `A = u^m + …` with `A(u)A(u−1) = G`, down to `u^{−order}`.
fn solve_square<C: Coeff>(g: &Series<C>, m: i64, order: i64, one: &C) -> Series<C> {
    let zero = g.zero_coeff().clone();
    let len = (m + order + 1).max(1) as usize;
    let mut alpha: Vec<C> = vec![one.clone()];
    for n in 1..len {
        let mut trial = alpha.clone();
        trial.push(zero.clone());
        let a = Series::from_coeffs(m, trial, zero.clone());
        let prod = a.mul(&a.shift_arg(&Q::one()));
        let e = 2 * m - n as i64;
        let known = prod.coeff(e).expect("within window");
        let target = g.coeff(e).unwrap_or_else(|| zero.clone());
        alpha.push(target.sub_c(&known).scale_c(&crate::qr(1, 2)));
    }
    Series::from_coeffs(m, alpha, zero)
}

fn mat_series_mul(a: &Series<Mat>, b: &Series<Mat>, rows: usize, cols: usize) -> Series<Mat> {
    let top = a.top() + b.top();
    let order = (a.order() - b.top()).min(b.order() - a.top());
    let coeffs = (0..(top + order + 1).max(0))
        .map(|k| {
            let e = top - k;
            let mut acc = Mat::zeros(rows, cols);
            for ea in (e - b.top())..=a.top() {
                let (Some(x), Some(y)) = (a.coeff(ea), b.coeff(e - ea)) else { continue };
                acc = acc.add(&x.mul(&y));
            }
            acc
        })
        .collect();
    Series::from_coeffs(top, coeffs, Mat::zeros(rows, cols))
}

fn poly_series(p: &PolyMat, order: i64) -> Series<Mat> {
    let deg = p.max_degree() as i64;
    let coeffs = (0..=(deg + order))
        .map(|k| {
            let e = deg - k;
            if e < 0 {
                Mat::zeros(p.rows, p.cols)
            } else {
                Mat::from_fn(p.rows, p.cols, |i, j| p.get(i, j).coeff(e as usize))
            }
        })
        .collect();
    Series::from_coeffs(deg, coeffs, Mat::zeros(p.rows, p.cols))
}

fn scalar_series(s: &Series<Q>, n: usize) -> Series<Mat> {
    s.map(Mat::zeros(n, n), |c| Mat::scalar(n, c))
}

// ---------------------------------------------------------------- GKLO action

/// `A(u)` on a module, by both routes.
#[derive(Clone, Debug)]
pub struct GKLOAction {
    pub m: i64,
    pub order: i64,
    /// Eigenvalue of `A(u)` on `ω`.
    pub g: Series<Q>,
    /// Per ℓ-weight block: `g(u) ∏ (u − b_t + 1)/(u − b_t)`.
    pub blocks: Vec<(AMono, i64, Series<Q>)>,
    /// Per level, from `A(u)A(u−1) = r(u)ξ(u)^{−1}`.
    pub levels: Vec<Series<Mat>>,
}

fn xi_series(w: &dyn Module, level: usize, order: i64) -> Result<Series<Mat>> {
    let n = w.basis(level).len();
    let floor = w.xi_floor();
    let s = w.shift();
    let coeffs = (0..=(s + order)).map(|k| op_matrix(w, Op::Xi, floor + k, level)).collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(Series::from_coeffs(s, coeffs, Mat::zeros(n, n)))
}

/// The eigenvalue-route and direct-route GKLO series on every level of `w`.
/// Fails with [`TruncationError::RouteMismatch`] when they disagree.
pub fn gklo_action(pair: &TruncatablePair, w: &dyn Module, order: i64) -> Result<GKLOAction> {
    if pair.mu.len() != 1 {
        return Err(TruncationError::RankNotOne(pair.mu.len()));
    }
    if pair.mu[0] != w.shift() {
        return Err(TruncationError::ShiftMismatch(w.shift(), pair.mu[0]));
    }
    let m = pair.m[0] as i64;
    let r = pair.r.comp(0);
    let work = order + r.degree().abs() + 2;
    let h = r.div(&w.top()).expand(work);
    let g = solve_square(&h, m, work, &Q::one());
    let mut blocks = Vec::new();
    for (mono, mult) in lweight_blocks(w)? {
        let ratio = mono.factors().iter().fold(LinRat::one(), |acc, (_, b)| acc.mul(&LinRat::from_roots([&(b - q(1))], [b])));
        blocks.push((mono, mult, g.mul(&ratio.expand(work)).truncate(order)));
    }
    let rs = r.expand(work);
    let mut levels = Vec::new();
    for level in 0..=w.depth() {
        let n = w.basis(level).len();
        let xi = xi_series(w, level, work + r.degree().abs())?;
        let inv = invert_unipotent(&xi, &Mat::identity(n));
        let gmat = mat_series_mul(&scalar_series(&rs, n), &inv, n, n);
        let a = solve_square(&gmat, m, work, &Mat::identity(n)).truncate(order);
        // compare with the blocks through characteristic polynomials coefficientwise
        for e in (-order)..=m {
            let got = a.coeff(e).expect("known").charpoly();
            let mut expect = Poly::one();
            for (_, mult, s) in blocks.iter().filter(|(mo, _, _)| mo.size() == level) {
                expect = expect.mul(&Poly::linear(&s.coeff(e).expect("known")).pow(*mult as u32));
            }
            if got != expect {
                return Err(TruncationError::RouteMismatch(level));
            }
        }
        levels.push(a);
    }
    Ok(GKLOAction { m, order, g: g.truncate(order), blocks, levels })
}

/// Checks `A(u) x⁻_n A(u)^{−1} = x⁻_n + Σ_k x⁻_{n+k} u^{−k−1}` from each level
/// to the next, for `n ≤ n_max`, to the order of `action`.
pub fn check_conjugation(action: &GKLOAction, w: &dyn Module, n_max: i64) -> Result<bool> {
    let order = action.order;
    for level in 0..w.depth() {
        let (d0, d1) = (w.basis(level).len(), w.basis(level + 1).len());
        let a1 = &action.levels[level + 1];
        let a0inv = invert_unipotent(&action.levels[level], &Mat::identity(d0));
        for n in 0..=n_max {
            let x = op_matrix(w, Op::XMinus, n, level)?;
            let xs = Series::from_coeffs(0, vec![x], Mat::zeros(d1, d0));
            let lhs = mat_series_mul(&mat_series_mul(a1, &xs, d1, d0), &a0inv, d1, d0);
            let mut terms = vec![op_matrix(w, Op::XMinus, n, level)?];
            for k in 0..order {
                terms.push(op_matrix(w, Op::XMinus, n + k, level)?);
            }
            let rhs = Series::from_coeffs(0, terms, Mat::zeros(d1, d0));
            let common = lhs.order().min(rhs.order()).min(order - action.m);
            if !lhs.truncate(common).agrees_with(&rhs.truncate(common)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SeriesReport {
    pub levels: usize,
    pub order: i64,
    pub failures: Vec<String>,
}

impl SeriesReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for SeriesReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} levels to order {}, {} failures", self.levels, self.order, self.failures.len())?;
        for x in &self.failures {
            write!(f, "\n  {x}")?;
        }
        Ok(())
    }
}

/// `R(u+1) g(u) = R(u) A(u)` on every level, to `order`.
pub fn check_difference_equation(pair: &TruncatablePair, w: &dyn Module, order: i64) -> Result<SeriesReport> {
    let action = gklo_action(pair, w, order)?;
    let r = baxter_r_poly(w)?;
    let mut report = SeriesReport { levels: w.depth() + 1, order, failures: Vec::new() };
    for level in 0..=w.depth() {
        let n = w.basis(level).len();
        let rl = poly_series(&r.blocks[level], order + action.m + 2);
        let rs = poly_series(&r.blocks[level].at_offset(&Q::one()), order + action.m + 2);
        let lhs = mat_series_mul(&rs, &scalar_series(&action.g, n), n, n);
        let rhs = mat_series_mul(&rl, &action.levels[level], n, n);
        let common = lhs.order().min(rhs.order());
        if !lhs.truncate(common).agrees_with(&rhs.truncate(common)) {
            report.failures.push(format!("level {level}"));
        }
    }
    Ok(report)
}

/// `⟨A(u)⟩₊ = 0` on every level.
pub fn truncation_check_pair(pair: &TruncatablePair, w: &dyn Module, order: i64) -> Result<SeriesReport> {
    let action = gklo_action(pair, w, order)?;
    let mut report = SeriesReport { levels: w.depth() + 1, order, failures: Vec::new() };
    for (level, a) in action.levels.iter().enumerate() {
        if !a.principal_part().is_zero() {
            report.failures.push(format!("⟨A(u)⟩₊ ≠ 0 on level {level}"));
        }
    }
    Ok(report)
}

/// For `W = L(s^{−1})`: the pair `(−deg s, s(u−1))`, `⟨A(u)⟩₊ = 0`, and
/// `A(u) = t_{N_0,W}(u)` on every level.
pub fn truncation_check(s: &LinRat, w: &dyn Module, order: i64) -> Result<SeriesReport> {
    if !s.is_poly() {
        return Err(TruncationError::NotPolynomial(s.to_string()));
    }
    let pair = TruncatablePair::sl2(-s.degree(), s.shift(&Q::one()))?;
    let mut report = truncation_check_pair(&pair, w, order)?;
    let action = gklo_action(&pair, w, order)?;
    let t = t_lowest(&[(0, Q::zero())], w)?;
    for level in 0..=w.depth() {
        let ts = poly_series(&t.blocks[level], order);
        if !ts.agrees_with(&action.levels[level]) {
            report.failures.push(format!("A(u) ≠ t(u) on level {level}"));
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------- s ↦ s̄

/// `V_i` lowest-to-highest ratios transcribed for the shipped types, keyed by 0-based node.
pub fn fund_ratios(cd: &CartanData) -> Option<BTreeMap<usize, AMonomial>> {
    let h = crate::qr(1, 2);
    let mono = |f: &[(usize, Q, i64)]| -> AMonomial { f.iter().map(|(i, a, n)| ((*i, a.clone()), *n)).collect() };
    match cd.label().as_str() {
        "A1" => Some(BTreeMap::from([(0, mono(&[(0, q(0), 1)]))])),
        "B2" => Some(BTreeMap::from([
            (0, mono(&[(0, q(0), 1), (0, q(-1), 1), (1, q(0), 1), (1, q(-1), 1)])),
            (1, mono(&[(0, q(-1), 1), (1, q(0), 1), (1, q(-2), 1)])),
        ])),
        "G2" => Some(BTreeMap::from([
            (
                0,
                mono(&[
                    (0, q(0), 1),
                    (0, q(-1), 1),
                    (0, q(-2), 1),
                    (0, q(-3), 1),
                    (1, h.clone(), 1),
                    (1, -h.clone(), 1),
                    (1, q(-3) * &h, 2),
                    (1, q(-5) * &h, 1),
                    (1, q(-7) * &h, 1),
                ]),
            ),
            (1, mono(&[(0, q(-3) * &h, 1), (0, q(-7) * &h, 1), (1, q(0), 1), (1, q(-2), 1), (1, q(-3), 1), (1, q(-5), 1)])),
        ])),
        _ => None,
    }
}

/// `s̄_i = g_i(u) g_i(u−d_i) / (s_i ∏_{j: c_ji<0} ∏_{t=1}^{−c_ji} g_j(u − d_ij − t d_j))`
/// with `g_i = λ_{V_i, L(s^{−1})}`.
pub fn sbar_map(cd: &CartanData, ratios: &BTreeMap<usize, AMonomial>, s: &LWeight) -> Result<LWeight> {
    let g: Vec<LinRat> =
        cd.nodes().map(|i| lambda_poly(ratios.get(&i).ok_or(TruncationError::MissingRatio(i))?, s).map_err(Into::into)).collect::<Result<_>>()?;
    let comps = cd
        .nodes()
        .map(|i| {
            let mut den = s.comp(i).clone();
            for j in cd.nodes() {
                if j == i || cd.c(j, i) >= 0 {
                    continue;
                }
                for t in 1..=(-cd.c(j, i)) {
                    den = den.mul(&g[j].shift(&(cd.dij(i, j) + q(t * cd.d(j)))));
                }
            }
            g[i].mul(&g[i].shift(&q(cd.d(i)))).div(&den)
        })
        .collect();
    Ok(LWeight::from_comps(comps))
}

// ---------------------------------------------------------------- candidates

/// Monic `g` of degree `m` that can occur as `A(u)|_ω` for the sl₂ pair:
/// roots drawn from `X = {a : p^r(a+1) = 0}` (the neighbour shifts are empty
/// for sl₂) and filtered by `g(u) q^r(u+1) | p^r(u+1)`.
pub fn enumerate_truncation_candidates_sl2(pair: &TruncatablePair) -> Result<Vec<Poly>> {
    if pair.mu.len() != 1 {
        return Err(TruncationError::RankNotOne(pair.mu.len()));
    }
    let m = pair.m[0] as usize;
    let r = pair.r.comp(0);
    let p_shift = r.numer().shift(&-Q::one());
    let q_shift = r.denom().shift(&-Q::one());
    let (roots, _) = p_shift.rational_roots();
    let x: Vec<Q> = roots.keys().cloned().collect();
    let mut out = Vec::new();
    let mut pick = vec![0usize; m];
    loop {
        // multisets as non-decreasing index sequences
        let g = Poly::from_roots(pick.iter().map(|&i| &x[i]));
        if (m == 0 || !x.is_empty()) && g.mul(&q_shift).divides(&p_shift) {
            out.push(g);
        }
        if m == 0 || x.is_empty() {
            break;
        }
        let Some(pos) = (0..m).rev().find(|&k| pick[k] + 1 < x.len()) else { break };
        pick[pos] += 1;
        for k in pos + 1..m {
            pick[k] = pick[pos];
        }
    }
    Ok(out)
}

/// Whether the top vector of `w` lies in the span reached from every level:
/// used for denominator checks on simple modules.
pub fn has_lweight(w: &dyn Module, mono: &AMono) -> Result<bool> {
    Ok(lweight_blocks(w)?.contains_key(mono))
}

/// Dimension of the kernel of `⟨A(u)⟩₊` coefficients stacked, per level.
pub fn truncation_kernel_dims(action: &GKLOAction) -> Vec<usize> {
    action
        .levels
        .iter()
        .map(|a| {
            let n = a.zero_coeff().rows();
            let vecs: Vec<Vec<Q>> = (1..=action.order)
                .filter_map(|k| a.coeff(-k))
                .flat_map(|c| (0..n).map(move |i| c.row(i).to_vec()))
                .collect();
            n - Subspace::spanned_by(n, &vecs).dim()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modules_sl2::{make_explicit, make_simple, Explicit};
    use crate::qchar::Family;
    use crate::qr;
    use crate::tensor::{tensor_onedim, Side};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lr(s: &str) -> LinRat {
        LinRat::parse(s).unwrap()
    }

    fn lminus(b: Q, depth: usize) -> Explicit {
        make_explicit(Family::Lminus(b), depth).unwrap()
    }

    #[test]
    fn pair_coefficients() {
        let p = TruncatablePair::sl2(-1, lr("(u-3)")).unwrap();
        assert_eq!(p.m, vec![1]);
        assert!(TruncatablePair::sl2(0, lr("(u-3)")).is_err());
        assert!(TruncatablePair::sl2(3, lr("(u-3)")).is_err());
        let b2 = CartanData::new("B2").unwrap();
        let r = LWeight::from_comps(vec![lr("(u-1)*(u-2)"), lr("(u-1)")]);
        let p = TruncatablePair::new(&b2, vec![0, -1], r).unwrap();
        for j in 0..2 {
            let s: i64 = (0..2).map(|i| p.m[i] as i64 * b2.c(i, j)).sum();
            assert_eq!(s, p.r.comp(j).degree() - p.mu[j]);
        }
    }

    #[test]
    fn series_square_root() {
        let g = lr("(u-2)*(u+1/3)");
        let h = g.mul(&g.shift(&q(1))).expand(10);
        let a = solve_square(&h, 2, 10, &Q::one());
        assert!(a.agrees_with(&g.expand(10)));
    }

    #[test]
    fn gklo_on_lminus() {
        let b = qr(3, 2);
        let w = lminus(b.clone(), 6);
        let pair = TruncatablePair::sl2(-1, lr("(u-5/2)")).unwrap();
        let act = gklo_action(&pair, &w, 10).unwrap();
        assert!(act.g.agrees_with(&LinRat::factor(b.clone(), 1).expand(10)));
        for (i, lvl) in act.levels.iter().enumerate() {
            // A v_i = (u − b + i) v_i
            let expect = LinRat::factor(&b - q(i as i64), 1).expand(10);
            assert!(lvl.map(Q::zero(), |m| m.get(0, 0).clone()).agrees_with(&expect), "level {i}");
        }
        assert!(check_conjugation(&act, &w, 3).unwrap());
    }

    #[test]
    fn gklo_generic_r_is_not_polynomial() {
        let w = lminus(q(0), 4);
        let pair = TruncatablePair::sl2(-1, lr("(u-7/3)")).unwrap();
        let report = truncation_check_pair(&pair, &w, 8).unwrap();
        assert!(!report.is_ok());
        let act = gklo_action(&pair, &w, 8).unwrap();
        assert!(check_conjugation(&act, &w, 2).unwrap());
    }

    #[test]
    fn truncation_on_lminus() {
        for b in [q(0), qr(-7, 3)] {
            let s = LinRat::factor(b.clone(), 1);
            let r = truncation_check(&s, &lminus(b, 10), 20).unwrap();
            assert!(r.is_ok(), "{r}");
        }
    }

    #[test]
    fn truncation_on_simple_degree_two() {
        let s = lr("(u-1)*(u-4)");
        let w = make_simple(&s.inv(), 5).unwrap();
        let r = truncation_check(&s, &w, 10).unwrap();
        assert!(r.is_ok(), "{r}");
    }

    #[test]
    fn truncation_on_onedim_twist() {
        // W(r, s) = L(r) ⊗ L(s^{−1}) with the pair (deg r − deg s, r·s̄)
        let (r, s) = (lr("(u-2)"), lr("(u+1)"));
        let w = tensor_onedim(&r, lminus(q(-1), 6), Side::Left).unwrap();
        let pair = TruncatablePair::sl2(r.degree() - s.degree(), r.mul(&s.shift(&q(1)))).unwrap();
        let rep = truncation_check_pair(&pair, &w, 12).unwrap();
        assert!(rep.is_ok(), "{rep}");
    }

    #[test]
    fn trivial_truncation() {
        let w = make_explicit(Family::L(q(0), q(0)), 2).unwrap();
        let pair = TruncatablePair::sl2(0, LinRat::one()).unwrap();
        let act = gklo_action(&pair, &w, 6).unwrap();
        assert_eq!(act.m, 0);
        assert!(act.levels[0].principal_part().is_zero());
    }

    #[test]
    fn difference_equation() {
        let b = q(2);
        let pair = TruncatablePair::sl2(-1, LinRat::factor(&b + q(1), 1)).unwrap();
        let r = check_difference_equation(&pair, &lminus(b, 8), 16).unwrap();
        assert!(r.is_ok(), "{r}");
        // one-dimensional W: both sides are 1
        let w = make_explicit(Family::L(q(3), q(3)), 2).unwrap();
        let trivial = TruncatablePair::sl2(0, LinRat::one()).unwrap();
        assert!(check_difference_equation(&trivial, &w, 8).unwrap().is_ok());
    }

    fn random_poly_weight(rng: &mut ChaCha8Rng, rank: usize) -> LWeight {
        LWeight::from_comps(
            (0..rank)
                .map(|_| {
                    let d = rng.gen_range(0..=3);
                    LinRat::from_roots(&(0..d).map(|_| qr(rng.gen_range(-8..8), rng.gen_range(1..3))).collect::<Vec<_>>(), std::iter::empty())
                })
                .collect(),
        )
    }

    #[test]
    fn sbar_shifts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (ty, shift) in [("A1", 1), ("B2", 3), ("G2", 6)] {
            let cd = CartanData::new(ty).unwrap();
            let ratios = fund_ratios(&cd).unwrap();
            for _ in 0..5 {
                let s = random_poly_weight(&mut rng, cd.rank());
                assert_eq!(sbar_map(&cd, &ratios, &s).unwrap(), s.tau(&q(shift)), "{ty} {s}");
            }
        }
        assert!(fund_ratios(&CartanData::new("A3").unwrap()).is_none());
    }

    #[test]
    fn candidates_contain_realized_g() {
        for b in [q(0), qr(5, 2), q(-3)] {
            let pair = TruncatablePair::sl2(-1, LinRat::factor(&b + q(1), 1)).unwrap();
            let cands = enumerate_truncation_candidates_sl2(&pair).unwrap();
            let act = gklo_action(&pair, &lminus(b.clone(), 2), 4).unwrap();
            let g = Poly::linear(&b);
            assert!(act.g.agrees_with(&Series::from_poly(&g, 4)));
            assert!(cands.contains(&g));
        }
        let pair = TruncatablePair::sl2(-2, lr("(u-2)*(u-5)")).unwrap();
        let cands = enumerate_truncation_candidates_sl2(&pair).unwrap();
        assert!(cands.contains(&Poly::from_roots(&[q(1), q(4)])));
        assert!(cands.len() <= 3);
        let trivial = TruncatablePair::sl2(0, LinRat::one()).unwrap();
        assert_eq!(enumerate_truncation_candidates_sl2(&trivial).unwrap(), vec![Poly::one()]);
    }

    #[test]
    fn denominator_membership() {
        // (u − a)^k | q^e  ⇒  A_a^{−k} e is an ℓ-weight of L(e)
        for (e, a, k) in [("1/((u-1)^2*(u-3/2))", q(1), 2), ("(u+4)/((u-2)^3)", q(2), 3), ("1/(u*(u-5))", q(5), 1)] {
            let w = make_simple(&lr(e), k).unwrap();
            let mono = AMono::from_factors(vec![(0, a.clone()); k]);
            assert!(has_lweight(&w, &mono).unwrap(), "{e}");
        }
    }

    #[test]
    fn kernel_of_truncation_ideal() {
        let w = lminus(q(0), 4);
        let pair = TruncatablePair::sl2(-1, lr("(u-1)")).unwrap();
        let act = gklo_action(&pair, &w, 6).unwrap();
        assert_eq!(truncation_kernel_dims(&act), vec![1; 5]);
    }
}
