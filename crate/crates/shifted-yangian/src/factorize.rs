//! Standard factorization of sl₂ ℓ-weights and the Tarasov irreducibility test.
//!
//! An ℓ-weight `e = ∏(u − x) · ∏ (u − y)/(u − z) · ∏ 1/(u − w)` splits into
//! positive prefundamental factors `x`, KR pairs `(y, z)` with `z − y ∈ ℤ_{>0}`
//! and negative prefundamental factors `w`. Under the pairwise conditions
//! checked by [`StandardFactorization::is_standard`] the split is unique.

use crate::ratfun::LinRat;
use crate::{fmt_q, Q};
use num_traits::{Signed, Zero};
use std::fmt;

/// `Δ_b^a`: `{0, …, n−1}` when `b − a = n ∈ ℕ`, all of ℕ otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaSet {
    Finite(u64),
    AllNaturals,
}

impl DeltaSet {
    pub fn new(a: &Q, b: &Q) -> Self {
        match natural(&(b - a)) {
            Some(n) => DeltaSet::Finite(n),
            None => DeltaSet::AllNaturals,
        }
    }

    pub fn contains(&self, k: &Q) -> bool {
        match (natural(k), self) {
            (None, _) => false,
            (Some(_), DeltaSet::AllNaturals) => true,
            (Some(k), DeltaSet::Finite(n)) => k < *n,
        }
    }
}

/// `Some(n)` when `x = n ∈ ℕ`.
fn natural(x: &Q) -> Option<u64> {
    if x.is_integer() && !x.is_negative() {
        x.to_integer().try_into().ok()
    } else {
        None
    }
}

/// Whether the integer `k` lies in `Δ_b^a`.
pub fn delta_contains(a: &Q, b: &Q, k: i64) -> bool {
    DeltaSet::new(a, b).contains(&crate::q(k))
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct StandardFactorization {
    pub positive: Vec<Q>,
    /// `(y, z)` standing for the KR module `L_z^y` of highest ℓ-weight `(u−y)/(u−z)`.
    pub kr_pairs: Vec<(Q, Q)>,
    pub negative: Vec<Q>,
}

impl StandardFactorization {
    /// Sorts each part so that equal factorizations compare equal.
    pub fn normalized(mut self) -> Self {
        self.positive.sort();
        self.kr_pairs.sort();
        self.negative.sort();
        self
    }

    pub fn reassemble(&self) -> LinRat {
        let mut e = LinRat::from_roots(&self.positive, &self.negative);
        for (y, z) in &self.kr_pairs {
            e = e.mul(&LinRat::from_roots([y], [z]));
        }
        e
    }

    /// The pairwise conditions making the factorization standard.
    pub fn is_standard(&self) -> bool {
        let deltas: Vec<DeltaSet> = self.kr_pairs.iter().map(|(y, z)| DeltaSet::new(y, z)).collect();
        let kr_ok = self.kr_pairs.iter().all(|(y, z)| natural(&(z - y)).is_some_and(|n| n > 0));
        let pairs_ok = self.kr_pairs.iter().zip(&deltas).all(|((_, zs), ds)| {
            self.kr_pairs.iter().zip(&deltas).all(|((yl, _), dl)| {
                let k = zs - yl;
                !(ds.contains(&k) && dl.contains(&k))
            })
        });
        let pos_ok = self.kr_pairs.iter().zip(&deltas).all(|((_, z), d)| self.positive.iter().all(|x| !d.contains(&(z - x))));
        let neg_pos_ok = self.negative.iter().all(|w| self.positive.iter().all(|x| natural(&(w - x)).is_none()));
        let neg_kr_ok = self.negative.iter().all(|w| self.kr_pairs.iter().zip(&deltas).all(|((y, _), d)| !d.contains(&(w - y))));
        kr_ok && pairs_ok && pos_ok && neg_pos_ok && neg_kr_ok
    }
}

impl fmt::Display for StandardFactorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[Q]| v.iter().map(fmt_q).collect::<Vec<_>>().join(", ");
        let kr: Vec<String> = self.kr_pairs.iter().map(|(y, z)| format!("({}, {})", fmt_q(y), fmt_q(z))).collect();
        write!(f, "positive [{}], kr [{}], negative [{}]", list(&self.positive), kr.join(", "), list(&self.negative))
    }
}

/// Splits `e` into its standard factorization.
///
/// Repeatedly pairs a zero `y` with a pole `z` such that `z − y ∈ ℤ_{>0}` is
/// minimal (ties: smallest `y`); leftover zeros are positive, leftover poles
/// negative.
pub fn standard_factorize(e: &LinRat) -> StandardFactorization {
    let mut zeros = Vec::new();
    let mut poles = Vec::new();
    for (a, m) in e.roots() {
        let bucket = if *m > 0 { &mut zeros } else { &mut poles };
        bucket.extend(std::iter::repeat(a.clone()).take(m.unsigned_abs() as usize));
    }
    let mut kr_pairs = Vec::new();
    loop {
        let mut best: Option<(Q, Q, usize, usize)> = None;
        for (iy, y) in zeros.iter().enumerate() {
            for (iz, z) in poles.iter().enumerate() {
                let gap = z - y;
                if natural(&gap).is_none() || gap.is_zero() {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some((g, by, _, _)) => gap < *g || (gap == *g && y < by),
                };
                if better {
                    best = Some((gap, y.clone(), iy, iz));
                }
            }
        }
        let Some((_, _, iy, iz)) = best else { break };
        kr_pairs.push((zeros.swap_remove(iy), poles.swap_remove(iz)));
    }
    StandardFactorization { positive: zeros, kr_pairs, negative: poles }.normalized()
}

/// Tarasov's criterion for `L_{b_1}^{a_1} ⊗ ⋯ ⊗ L_{b_n}^{a_n}` given as `(a_i, b_i)`.
pub fn is_irreducible_tensor(factors: &[(Q, Q)]) -> bool {
    let deltas: Vec<DeltaSet> = factors.iter().map(|(a, b)| DeltaSet::new(a, b)).collect();
    factors.iter().zip(&deltas).all(|((_, bi), di)| {
        factors.iter().zip(&deltas).all(|((aj, _), dj)| {
            let k = bi - aj;
            !(di.contains(&k) && dj.contains(&k))
        })
    })
}
