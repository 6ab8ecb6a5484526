//! Exact computations with representations of shifted Yangians.
//!
//! Everything is exact over ℚ. Infinite-dimensional modules are handled by
//! depth truncation: only weight spaces within a bounded height of the top
//! weight are enumerated, while the generator actions themselves stay exact.
//!
//! Layout, bottom to top:
//! - [`cartan`], [`ratfun`], [`linalg`]: root data, rational functions, linear algebra;
//! - [`lweight`], [`qchar`], [`factorize`]: ℓ-weights, q-characters, sl₂ factorization;
//! - [`yangian_sl2`], [`modules_sl2`], [`tensor`]: the algebra and its modules;
//! - [`rmatrix`], [`truncation`]: R-matrices, GKLO series and truncation.

pub mod cartan;
pub mod factorize;
pub mod linalg;
pub mod lweight;
pub mod modules_sl2;
pub mod qchar;
pub mod ratfun;
pub mod rmatrix;
pub mod tensor;
pub mod truncation;
pub mod yangian_sl2;

use num_bigint::BigInt;
use num_rational::BigRational;

/// Exact rational scalar used throughout.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Canonical rendering: `p` for integers, `p/q` otherwise.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `p`, `-p`, `p/q`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d == BigInt::from(0) {
        return None;
    }
    Some(Q::new(n, d))
}
