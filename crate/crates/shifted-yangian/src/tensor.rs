//! Tensor products in the regimes where the action is exact.
//!
//! - [`OneDimTwist`]: a one-dimensional factor `L(s)`, `s` polynomial, on either side;
//! - [`TensorY0`]: two unshifted factors through the Yangian coproduct;
//! - [`xminus_on_highest`] and friends: actions on extreme vectors of mixed-shift products.
//!
//! Only `x^±_0, ξ_0, ξ_1` have closed coproducts. Higher modes come from
//! `T = ξ_1 − ½ξ_0²` via `[T, x^±_n] = ±2x^±_{n+1}` and `ξ_{m+n} = [x⁺_m, x⁻_n]`.

use crate::linalg::{Mat, Subspace};
use crate::modules_sl2::{add_scaled, coords, level_dims, spectral_shift, Key, Module, ModuleError, Op, SpectralShift, Vector};
use crate::ratfun::{LinRat, Poly};
use crate::{q, qr, Q};
use num_traits::{One, Zero};
use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TensorError {
    #[error("both factors must be unshifted, got shifts {0} and {1}")]
    ShiftMismatch(i64, i64),
    #[error("twist {0} is not a polynomial")]
    NotPolynomial(String),
    #[error("vector {0:?} is not {1}")]
    NotExtreme(Key, &'static str),
    #[error("polynomial interpolation in z exceeded the degree bound {0}")]
    DegreeBound(usize),
    #[error(transparent)]
    Module(#[from] ModuleError),
}

/// Vectors of `V ⊗ W` as pairs of factor keys.
pub type PairVector = BTreeMap<(Key, Key), Q>;

pub fn add_pair(acc: &mut PairVector, k: (Key, Key), c: Q) {
    if c.is_zero() {
        return;
    }
    let e = acc.entry(k.clone()).or_insert_with(Q::zero);
    *e += c;
    if e.is_zero() {
        acc.remove(&k);
    }
}

/// Tensor keys are `[len(a), a…, b…]`.
pub fn pack(a: &Key, b: &Key) -> Key {
    let mut k = vec![a.len() as i64];
    k.extend(a);
    k.extend(b);
    k
}

pub fn unpack(k: &Key) -> (Key, Key) {
    let n = k[0] as usize;
    (k[1..=n].to_vec(), k[n + 1..].to_vec())
}

pub fn to_pairs(v: &Vector) -> PairVector {
    v.iter().map(|(k, c)| (unpack(k), c.clone())).collect()
}

// ---------------------------------------------------------------- one-dimensional factors

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `L(s) ⊗ V`: twists `x⁺` and `ξ`.
    Left,
    /// `V ⊗ L(s)`: twists `x⁻` and `ξ`.
    Right,
}

/// `L(s) ⊗ V` or `V ⊗ L(s)` as the pullback of `V`.
pub struct OneDimTwist<M> {
    inner: M,
    s: LinRat,
    c: Vec<Q>,
    side: Side,
}

pub fn tensor_onedim<M: Module>(s: &LinRat, inner: M, side: Side) -> Result<OneDimTwist<M>, TensorError> {
    if !s.is_poly() {
        return Err(TensorError::NotPolynomial(s.to_string()));
    }
    Ok(OneDimTwist { inner, s: s.clone(), c: s.numer().coeffs().to_vec(), side })
}

impl<M: Module> OneDimTwist<M> {
    /// `⟨s(u) X(u)⟩₊` at mode `p`.
    fn twisted(&self, op: Op, p: i64, key: &Key) -> Result<Vector, ModuleError> {
        let mut out = Vector::new();
        for (k, ck) in self.c.iter().enumerate() {
            add_scaled(&mut out, &self.inner.act(op, p + k as i64, key)?, ck);
        }
        Ok(out)
    }
}

impl<M: Module> Module for OneDimTwist<M> {
    fn shift(&self) -> i64 {
        self.inner.shift() + self.s.degree()
    }
    fn top(&self) -> LinRat {
        self.s.mul(&self.inner.top())
    }
    fn depth(&self) -> usize {
        self.inner.depth()
    }
    fn is_truncated(&self) -> bool {
        self.inner.is_truncated()
    }
    fn basis(&self, level: usize) -> Vec<Key> {
        self.inner.basis(level)
    }
    fn level(&self, key: &Key) -> usize {
        self.inner.level(key)
    }
    fn act(&self, op: Op, mode: i64, key: &Key) -> Result<Vector, ModuleError> {
        match (op, self.side) {
            (Op::Xi, _) if mode < self.xi_floor() => Ok(Vector::new()),
            (Op::Xi, _) | (Op::XPlus, Side::Left) | (Op::XMinus, Side::Right) if mode >= 0 || op == Op::Xi => {
                self.twisted(op, mode, key)
            }
            _ => self.inner.act(op, mode, key),
        }
    }
    fn word(&self, key: &Key) -> Option<(i64, Vector, Q)> {
        match self.side {
            Side::Left => self.inner.word(key),
            Side::Right if self.c.len() == 1 => self.inner.word(key),
            Side::Right => None,
        }
    }
    fn label(&self) -> String {
        match self.side {
            Side::Left => format!("L({}) ⊗ {}", self.s, self.inner.label()),
            Side::Right => format!("{} ⊗ L({})", self.inner.label(), self.s),
        }
    }
}

// ---------------------------------------------------------------- Y(sl₂) coproduct

/// `V ⊗ W` over the unshifted Yangian.
///
/// When a factor is cut off, one extra level is kept internally so that `ξ_p`
/// (built from `x⁻_p`) is exact on every exposed level.
pub struct TensorY0<V, W> {
    left: V,
    right: W,
    depth: usize,
    truncated: bool,
    acts: RefCell<HashMap<(Op, i64, Key), Vector>>,
}

pub fn tensor_y0<V: Module, W: Module>(left: V, right: W) -> Result<TensorY0<V, W>, TensorError> {
    if left.shift() != 0 || right.shift() != 0 {
        return Err(TensorError::ShiftMismatch(left.shift(), right.shift()));
    }
    let (dl, dr) = (left.depth(), right.depth());
    let (tl, tr) = (left.is_truncated(), right.is_truncated());
    let window = match (tl, tr) {
        (false, false) => dl + dr,
        (false, true) => dr,
        (true, false) => dl,
        (true, true) => dl.min(dr),
    };
    let truncated = tl || tr;
    let depth = if truncated { window.saturating_sub(1) } else { window };
    Ok(TensorY0 { left, right, depth, truncated, acts: RefCell::new(HashMap::new()) })
}

impl<V: Module, W: Module> TensorY0<V, W> {
    pub fn left(&self) -> &V {
        &self.left
    }

    pub fn right(&self) -> &W {
        &self.right
    }

    fn primitive(&self, op: Op, mode: i64, key: &Key) -> Result<Vector, ModuleError> {
        let (a, b) = unpack(key);
        let mut out = Vector::new();
        for (ka, c) in self.left.act(op, mode, &a)? {
            add_scaled(&mut out, &BTreeMap::from([(pack(&ka, &b), Q::one())]), &c);
        }
        for (kb, c) in self.right.act(op, mode, &b)? {
            add_scaled(&mut out, &BTreeMap::from([(pack(&a, &kb), Q::one())]), &c);
        }
        Ok(out)
    }

    fn outer(&self, op_a: (Op, i64), op_b: (Op, i64), key: &Key) -> Result<Vector, ModuleError> {
        let (a, b) = unpack(key);
        let va = self.left.act(op_a.0, op_a.1, &a)?;
        if va.is_empty() {
            return Ok(Vector::new());
        }
        let vb = self.right.act(op_b.0, op_b.1, &b)?;
        let mut out = Vector::new();
        for (ka, ca) in &va {
            for (kb, cb) in &vb {
                add_scaled(&mut out, &BTreeMap::from([(pack(ka, kb), Q::one())]), &(ca * cb));
            }
        }
        Ok(out)
    }

    fn on(&self, op: Op, mode: i64, v: &Vector) -> Result<Vector, ModuleError> {
        let mut out = Vector::new();
        for (k, c) in v {
            add_scaled(&mut out, &self.act(op, mode, k)?, c);
        }
        Ok(out)
    }

    /// `Δ(T)`, `T = ξ_1 − ½ξ_0²`.
    fn t_op(&self, v: &Vector) -> Result<Vector, ModuleError> {
        let mut out = self.on(Op::Xi, 1, v)?;
        let sq = self.on(Op::Xi, 0, &self.on(Op::Xi, 0, v)?)?;
        add_scaled(&mut out, &sq, &qr(-1, 2));
        Ok(out)
    }

    fn compute(&self, op: Op, mode: i64, key: &Key) -> Result<Vector, ModuleError> {
        let unit = BTreeMap::from([(key.clone(), Q::one())]);
        match (op, mode) {
            (_, 0) => self.primitive(op, 0, key),
            (Op::Xi, 1) => {
                let mut out = self.primitive(Op::Xi, 1, key)?;
                add_scaled(&mut out, &self.outer((Op::Xi, 0), (Op::Xi, 0), key)?, &Q::one());
                add_scaled(&mut out, &self.outer((Op::XMinus, 0), (Op::XPlus, 0), key)?, &q(-2));
                Ok(out)
            }
            (Op::Xi, p) => {
                let mut out = self.on(Op::XPlus, 0, &self.on(Op::XMinus, p, &unit)?)?;
                add_scaled(&mut out, &self.on(Op::XMinus, p, &self.on(Op::XPlus, 0, &unit)?)?, &-Q::one());
                Ok(out)
            }
            (_, n) => {
                // x^±_n = ±½ [T, x^±_{n−1}]
                let sign = if op == Op::XPlus { qr(1, 2) } else { qr(-1, 2) };
                let mut out = self.t_op(&self.on(op, n - 1, &unit)?)?;
                add_scaled(&mut out, &self.on(op, n - 1, &self.t_op(&unit)?)?, &-Q::one());
                Ok(out.into_iter().map(|(k, c)| (k, c * &sign)).collect())
            }
        }
    }
}

impl<V: Module, W: Module> Module for TensorY0<V, W> {
    fn shift(&self) -> i64 {
        0
    }
    fn top(&self) -> LinRat {
        self.left.top().mul(&self.right.top())
    }
    fn depth(&self) -> usize {
        self.depth
    }
    fn is_truncated(&self) -> bool {
        self.truncated
    }
    fn basis(&self, level: usize) -> Vec<Key> {
        if level > self.depth {
            return Vec::new();
        }
        let mut out = Vec::new();
        for i in 0..=level {
            let lb = self.left.basis(i);
            if lb.is_empty() {
                continue;
            }
            let rb = self.right.basis(level - i);
            for a in &lb {
                for b in &rb {
                    out.push(pack(a, b));
                }
            }
        }
        out
    }
    fn level(&self, key: &Key) -> usize {
        let (a, b) = unpack(key);
        self.left.level(&a) + self.right.level(&b)
    }
    fn act(&self, op: Op, mode: i64, key: &Key) -> Result<Vector, ModuleError> {
        match op {
            Op::Xi if mode < -1 => return Ok(Vector::new()),
            Op::Xi if mode == -1 => return Ok(BTreeMap::from([(key.clone(), Q::one())])),
            Op::XPlus | Op::XMinus if mode < 0 => return Ok(Vector::new()),
            _ => {}
        }
        let memo = (op, mode, key.clone());
        if let Some(v) = self.acts.borrow().get(&memo) {
            return Ok(v.clone());
        }
        let out = self.compute(op, mode, key)?;
        self.acts.borrow_mut().insert(memo, out.clone());
        Ok(out)
    }
    fn word(&self, _key: &Key) -> Option<(i64, Vector, Q)> {
        None
    }
    fn label(&self) -> String {
        format!("{} ⊗ {}", self.left.label(), self.right.label())
    }
}

// ---------------------------------------------------------------- extreme vectors

/// The ℓ-weight of an ℓ-weight vector, read off from `modes` of its `ξ` eigenvalues.
pub fn lweight_of_vector(m: &dyn Module, key: &Key, max_den: usize) -> Result<LinRat, TensorError> {
    let floor = m.xi_floor();
    let count = 2 * max_den as i64 + m.shift() + 3;
    let mut c = vec![Q::one()];
    for j in 1..count.max(2) {
        let v = m.act(Op::Xi, floor + j, key)?;
        let lam = v.get(key).cloned().unwrap_or_else(Q::zero);
        if v.len() > usize::from(!lam.is_zero()) {
            return Err(TensorError::NotExtreme(key.clone(), "an ℓ-weight vector"));
        }
        c.push(lam);
    }
    LinRat::from_expansion(m.shift(), &c, max_den).ok_or(TensorError::NotExtreme(key.clone(), "of rational ℓ-weight"))
}

fn ensure(cond: bool, key: &Key, what: &'static str) -> Result<(), TensorError> {
    if cond {
        Ok(())
    } else {
        Err(TensorError::NotExtreme(key.clone(), what))
    }
}

/// `ξ_p (v_− ⊗ w)` for a lowest ℓ-weight vector `v_−` of `V`:
/// `ξ(u)(v_− ⊗ w) = f(u) · v_− ⊗ ξ(u)w`, with `f` the ℓ-weight of `v_−`.
pub fn xi_on_lowest(v: &dyn Module, v_minus: &Key, w: &dyn Module, wkey: &Key, p: i64) -> Result<PairVector, TensorError> {
    for n in 0..3 {
        ensure(v.act(Op::XMinus, n, v_minus)?.is_empty(), v_minus, "a lowest vector")?;
    }
    let f = lweight_of_vector(v, v_minus, 4)?;
    let sv = v.shift();
    let series = f.expand(p + w.xi_floor() + 2 + sv.abs());
    let mut out = PairVector::new();
    // mode p of f(u)ξ(u) is Σ_j f_j ξ_{p+s_V−j}
    for j in 0.. {
        let qm = p + sv - j;
        if qm < w.xi_floor() {
            break;
        }
        let fj = series.coeff(sv - j).unwrap_or_else(Q::zero);
        for (k, c) in w.act(Op::Xi, qm, wkey)? {
            add_pair(&mut out, (v_minus.clone(), k), &fj * c);
        }
    }
    Ok(out)
}

/// `x⁻_n (v_− ⊗ w) = v_− ⊗ x⁻_n w`.
pub fn xminus_on_lowest(v: &dyn Module, v_minus: &Key, w: &dyn Module, wkey: &Key, n: i64) -> Result<PairVector, TensorError> {
    for m in 0..3 {
        ensure(v.act(Op::XMinus, m, v_minus)?.is_empty(), v_minus, "a lowest vector")?;
    }
    Ok(w.act(Op::XMinus, n, wkey)?.into_iter().map(|(k, c)| ((v_minus.clone(), k), c)).collect())
}

/// `x⁻_n (v ⊗ ω) = v ⊗ x⁻_n ω + Σ_{m=0}^{n+s_W} e_{n−1−m} x⁻_m v ⊗ ω` for the top vector `ω` of `W`.
pub fn xminus_on_highest(v: &dyn Module, vkey: &Key, w: &dyn Module, omega: &Key, n: i64) -> Result<PairVector, TensorError> {
    ensure(w.level(omega) == 0, omega, "a highest vector")?;
    let e = w.top().expand(n + 2);
    let sw = w.shift();
    let mut out = PairVector::new();
    for (k, c) in w.act(Op::XMinus, n, omega)? {
        add_pair(&mut out, (vkey.clone(), k), c);
    }
    for m in 0..=(n + sw) {
        // e_{n−1−m} is the coefficient of u^{m−n}
        let coef = e.coeff(m - n).unwrap_or_else(Q::zero);
        if coef.is_zero() {
            continue;
        }
        for (k, c) in v.act(Op::XMinus, m, vkey)? {
            add_pair(&mut out, (k, omega.clone()), &coef * c);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- polynomial parameter

/// `V ⊗ W(z)` with `W(z) = τ_z^* W`, all entries polynomial in `z`.
pub struct PolyParamTensor<V, W> {
    left: V,
    right: W,
}

pub fn tensor_poly_parameter<V: Module, W: Module>(left: V, right: W) -> Result<PolyParamTensor<V, W>, TensorError> {
    if left.shift() != 0 || right.shift() != 0 {
        return Err(TensorError::ShiftMismatch(left.shift(), right.shift()));
    }
    Ok(PolyParamTensor { left, right })
}

impl<V: Module, W: Module> PolyParamTensor<V, W> {
    /// Evaluation at `z = a`.
    pub fn at(&self, a: &Q) -> TensorY0<&V, SpectralShift<&W>> {
        tensor_y0(&self.left, spectral_shift(&self.right, a)).expect("both unshifted")
    }

    /// Action with coefficients in `ℚ[z]`, by exact interpolation in `z`
    /// checked at one extra point. The degree in `z` is at most the mode.
    pub fn act_poly(&self, op: Op, mode: i64, key: &Key) -> Result<BTreeMap<Key, Poly>, TensorError> {
        let bound = mode.max(0) as usize;
        let samples: Vec<(Q, Vector)> =
            (0..=bound as i64 + 1).map(|z| Ok((q(z), self.at(&q(z)).act(op, mode, key)?))).collect::<Result<_, ModuleError>>()?;
        let keys: std::collections::BTreeSet<Key> = samples.iter().flat_map(|(_, v)| v.keys().cloned()).collect();
        let mut out = BTreeMap::new();
        for k in keys {
            let pts: Vec<(Q, Q)> = samples.iter().map(|(z, v)| (z.clone(), v.get(&k).cloned().unwrap_or_else(Q::zero))).collect();
            let p = Poly::interpolate(&pts[..=bound]);
            let (zx, yx) = &pts[bound + 1];
            if p.eval(zx) != *yx {
                return Err(TensorError::DegreeBound(bound));
            }
            if !p.is_zero() {
                out.insert(k, p);
            }
        }
        Ok(out)
    }
}

/// Dimensions of `Y · ω` level by level, using `x⁻_n` with `n ≤ n_max`.
/// For a highest ℓ-weight `ω` this is the cyclic submodule.
pub fn cyclic_span_dims(m: &dyn Module, n_max: i64) -> Result<Vec<usize>, ModuleError> {
    let mut dims = vec![1];
    let mut cur: Vec<Vector> = vec![BTreeMap::from([(m.basis(0)[0].clone(), Q::one())])];
    for level in 1..=m.depth() {
        let basis = m.basis(level);
        let index: HashMap<Key, usize> = basis.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        let mut vecs = Vec::new();
        for v in &cur {
            for n in 0..=n_max {
                let mut img = Vector::new();
                for (k, c) in v {
                    add_scaled(&mut img, &m.act(Op::XMinus, n, k)?, c);
                }
                vecs.push(coords(&img, &index, basis.len()));
            }
        }
        let span = Subspace::spanned_by(basis.len(), &vecs);
        dims.push(span.dim());
        cur = span.basis().iter().map(|b| basis.iter().zip(b).filter(|(_, c)| !c.is_zero()).map(|(k, c)| (k.clone(), c.clone())).collect()).collect();
    }
    Ok(dims)
}

/// Whether the top vector generates every enumerated level.
pub fn is_cyclic_on_top(m: &dyn Module, n_max: i64) -> Result<bool, ModuleError> {
    Ok(cyclic_span_dims(m, n_max)? == level_dims(m))
}

/// Matrix of `X_mode` on one level of a module, rows in the target level basis.
pub fn level_matrix(m: &dyn Module, op: Op, mode: i64, level: usize) -> Result<Mat, ModuleError> {
    crate::modules_sl2::op_matrix(m, op, mode, level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::CartanData;
    use crate::modules_sl2::{lweight_decomposition, make_explicit, unit, verify_relations};
    use crate::qchar::{Family, QCharacter};
    use crate::lweight::LWeight;

    fn lr(s: &str) -> LinRat {
        LinRat::parse(s).unwrap()
    }

    fn fam(s: &str) -> Family {
        s.parse().unwrap()
    }

    fn explicit(s: &str, depth: usize) -> crate::modules_sl2::Explicit {
        make_explicit(fam(s), depth).unwrap()
    }

    #[test]
    fn twist_by_one_is_identity() {
        let m = explicit("Lminus(2)", 4);
        let t = tensor_onedim(&LinRat::one(), &m, Side::Right).unwrap();
        for op in [Op::XPlus, Op::XMinus, Op::Xi] {
            for mode in 0..4 {
                assert_eq!(t.act(op, mode, &vec![1]).unwrap(), m.act(op, mode, &vec![1]).unwrap());
            }
        }
        assert!(tensor_onedim(&lr("1/(u-1)"), &m, Side::Left).is_err());
    }

    #[test]
    fn twists_are_modules() {
        for (s, f) in [("(u-1)", "N(1)"), ("(u-2)*(u+1)", "Lminus(0)"), ("(u-1/2)", "FrakL(0,5/2)")] {
            let m = explicit(f, 5);
            for side in [Side::Left, Side::Right] {
                let t = tensor_onedim(&lr(s), &m, side).unwrap();
                let r = verify_relations(&t, 6);
                assert!(r.is_ok(), "{s} {f} {side:?}: {r}");
            }
        }
    }

    #[test]
    fn left_twist_of_n_has_polynomial_lweights() {
        let a = q(3);
        let m = explicit("N(3)", 2);
        let t = tensor_onedim(&LinRat::factor(a.clone(), 1), &m, Side::Left).unwrap();
        let qc = lweight_decomposition(&t, None).unwrap();
        let cd = CartanData::sl2();
        let lws: Vec<LinRat> = qc.lweights(&cd).keys().map(|l| l.comp(0).clone()).collect();
        assert_eq!(lws.len(), 2);
        assert!(lws.iter().all(LinRat::is_poly));
        assert!(lws.contains(&lr("(u-2)")) && lws.contains(&lr("(u-4)")));
    }

    #[test]
    fn right_twist_matches_principal_part() {
        // ⟨(u−b) x⁻(u)⟩₊ v_i: coefficient (i+1)(b−i)^n ((b−i) − b) = −i(i+1)(b−i)^n
        let b = q(2);
        let m = explicit("Lminus(2)", 5);
        let t = tensor_onedim(&LinRat::factor(b.clone(), 1), &m, Side::Right).unwrap();
        for i in 0..4i64 {
            for n in 0..4 {
                let v = t.act(Op::XMinus, n, &vec![i]).unwrap();
                let expect = -q(i * (i + 1)) * crate::ratfun::pow_q(&(&b - q(i)), n);
                assert_eq!(v.get(&vec![i + 1]).cloned().unwrap_or_else(Q::zero), expect);
            }
        }
    }

    #[test]
    fn n_tensor_n() {
        let (a, b) = (q(1), q(4));
        let t = tensor_y0(explicit("N(1)", 1), explicit("N(4)", 1)).unwrap();
        assert_eq!(t.depth(), 2);
        let top = pack(&vec![0], &vec![0]);
        let f = lweight_of_vector(&t, &top, 4).unwrap();
        assert_eq!(f, LinRat::from_roots([&(&a - q(1)), &(&b - q(1))], [&a, &b]));
        let r = verify_relations(&t, 5);
        assert!(r.is_ok(), "{r}");
        let cd = CartanData::sl2();
        let qc = lweight_decomposition(&t, None).unwrap();
        let expect = fam("N(1)").qc(&cd, 2).unwrap().mul(&fam("N(4)").qc(&cd, 2).unwrap());
        assert_eq!(qc, expect);
    }

    #[test]
    fn coproduct_with_truncated_factor() {
        let t = tensor_y0(explicit("KR(2,1)", 2), explicit("FrakL(1/2,3)", 4)).unwrap();
        assert_eq!(t.depth(), 3);
        let r = verify_relations(&t, 4);
        assert!(r.is_ok(), "{r}");
        let cd = CartanData::sl2();
        let qc = lweight_decomposition(&t, None).unwrap();
        let expect = fam("KR(2,1)").qc(&cd, 3).unwrap().mul(&fam("FrakL(1/2,3)").qc(&cd, 3).unwrap());
        assert_eq!(qc, expect);
    }

    #[test]
    fn shifted_factors_are_rejected() {
        assert!(tensor_y0(explicit("Lminus(0)", 2), explicit("N(0)", 1)).is_err());
    }

    #[test]
    fn extreme_actions_on_n_and_lminus() {
        let a = q(2);
        let n = explicit("N(2)", 1);
        let w = explicit("Lminus(0)", 4);
        // x⁻(u)(e1⊗ω) = e1⊗x⁻(u)ω + ⟨(u−a)^{−1} e2 ⊗ ξ(u)ω⟩₊, with ξ(u)ω = 1/u
        for k in 0..4i64 {
            let got = xminus_on_highest(&n, &vec![0], &w, &vec![0], k).unwrap();
            let mut expect = PairVector::new();
            add_pair(&mut expect, (vec![0], vec![1]), Q::zero() + if k == 0 { q(1) } else { q(0) });
            // coefficient of u^{−k−1} in 1/(u(u−a)) is Σ_{m<k} a^m 0^{k−1−m} = a^{k−1}
            if k >= 1 {
                add_pair(&mut expect, (vec![1], vec![0]), crate::ratfun::pow_q(&a, k - 1));
            }
            assert_eq!(got, expect, "k = {k}");
        }
        // ξ on the lowest vector e2 ⊗ ω is the product of eigenvalues
        let f = lr("(u-3)/(u-2)").mul(&lr("1/u"));
        for p in 0..4 {
            let v = xi_on_lowest(&n, &vec![1], &w, &vec![0], p).unwrap();
            let expect = crate::modules_sl2::mode_coeff(&f, p);
            assert_eq!(v.get(&(vec![1], vec![0])).cloned().unwrap_or_else(Q::zero), expect);
        }
        assert!(xi_on_lowest(&n, &vec![0], &w, &vec![0], 0).is_err());
        let v = xminus_on_lowest(&n, &vec![1], &w, &vec![2], 1).unwrap();
        assert_eq!(v.len(), 1);
    }

    #[test]
    fn extreme_action_matches_coproduct() {
        let v = explicit("N(1)", 1);
        let w = explicit("KR(2,4)", 2);
        let t = tensor_y0(&v, &w).unwrap();
        for n in 0..4 {
            for vk in [vec![0], vec![1]] {
                let direct = to_pairs(&t.act(Op::XMinus, n, &pack(&vk, &vec![0])).unwrap());
                let formula = xminus_on_highest(&v, &vk, &w, &vec![0], n).unwrap();
                assert_eq!(direct, formula, "n={n} v={vk:?}");
            }
        }
    }

    #[test]
    fn polynomial_parameter() {
        let p = tensor_poly_parameter(explicit("N(0)", 1), explicit("KR(2,1)", 2)).unwrap();
        let key = pack(&vec![0], &vec![1]);
        let ev0 = p.at(&q(0)).act(Op::XMinus, 2, &key).unwrap();
        let plain = tensor_y0(explicit("N(0)", 1), explicit("KR(2,1)", 2)).unwrap();
        assert_eq!(ev0, plain.act(Op::XMinus, 2, &key).unwrap());
        for mode in 0..4 {
            for op in [Op::XMinus, Op::Xi, Op::XPlus] {
                let ent = p.act_poly(op, mode, &key).unwrap();
                assert!(ent.values().all(|e| e.degree().unwrap_or(0) <= mode.max(0) as usize));
                let z = qr(7, 3);
                let direct = p.at(&z).act(op, mode, &key).unwrap();
                let evald: Vector = ent.iter().map(|(k, e)| (k.clone(), e.eval(&z))).filter(|(_, c)| !c.is_zero()).collect();
                assert_eq!(direct, evald);
            }
        }
    }

    #[test]
    fn cyclicity_generic_and_special() {
        let p = tensor_poly_parameter(explicit("FrakL(0,1/2)", 4), explicit("FrakL(1,5/3)", 4)).unwrap();
        let generic = p.at(&qr(11, 7));
        assert_eq!(generic.depth(), 3);
        assert!(is_cyclic_on_top(&generic, 4).unwrap());
        // N(0) ⊗ N(0)(z) fails to be generated by ω⊗ω only at z = 1
        let n = tensor_poly_parameter(explicit("N(0)", 1), explicit("N(0)", 1)).unwrap();
        assert!(is_cyclic_on_top(&n.at(&q(5)), 3).unwrap());
        for z in [-2, -1, 2] {
            assert!(is_cyclic_on_top(&n.at(&q(z)), 3).unwrap());
        }
        assert_eq!(cyclic_span_dims(&n.at(&q(1)), 3).unwrap(), vec![1, 1, 1]);
    }

    #[test]
    fn onedim_qc_multiplicative() {
        let cd = CartanData::sl2();
        let s = lr("(u-1)*(u+2)");
        let m = explicit("Lminus(1/2)", 5);
        let t = tensor_onedim(&s, &m, Side::Right).unwrap();
        let got = lweight_decomposition(&t, None).unwrap();
        let expect = QCharacter::monomial(LWeight::single(s.clone()), 5).mul(&fam("Lminus(1/2)").qc(&cd, 5).unwrap());
        assert_eq!(got, expect);
        let _ = unit(&vec![0]);
    }
}
