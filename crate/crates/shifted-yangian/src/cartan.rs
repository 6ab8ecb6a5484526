//! Cartan matrices, symmetrizers and positive roots for the finite types.
//!
//! Nodes are 0-based in the API; the textual forms (`Psi(1,3)`, CLI flags)
//! use the customary 1-based labels. Conventions follow Bourbaki: in `B_n`
//! the last node is short, in `C_n` it is long, `G_2` has node 1 long.

use crate::Q;
use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CartanError {
    #[error("unknown Cartan type {0:?}")]
    UnknownType(String),
    #[error("node {0} out of range for rank {1}")]
    BadNode(usize, usize),
}

/// Dynkin type letter and rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CartanType {
    pub letter: char,
    pub rank: usize,
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.letter, self.rank)
    }
}

impl std::str::FromStr for CartanType {
    type Err = CartanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || CartanError::UnknownType(s.to_string());
        let mut chars = s.chars();
        let letter = chars.next().ok_or_else(bad)?.to_ascii_uppercase();
        let rank: usize = chars.as_str().parse().map_err(|_| bad())?;
        let ok = match letter {
            'A' => rank >= 1,
            'B' | 'C' => rank >= 2,
            'D' => rank >= 4,
            'E' => (6..=8).contains(&rank),
            'F' => rank == 4,
            'G' => rank == 2,
            _ => false,
        };
        if ok {
            Ok(CartanType { letter, rank })
        } else {
            Err(bad())
        }
    }
}

/// Immutable root data of a finite type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CartanData {
    pub cartan_type: CartanType,
    c: Vec<Vec<i64>>,
    d: Vec<i64>,
    pos_roots: Vec<Vec<i64>>,
    dual_coxeter: i64,
    bar: Vec<usize>,
}

impl CartanData {
    pub fn new(label: &str) -> Result<Self, CartanError> {
        let t: CartanType = label.parse()?;
        Ok(Self::from_type(t))
    }

    pub fn sl2() -> Self {
        Self::from_type(CartanType { letter: 'A', rank: 1 })
    }

    pub fn from_type(t: CartanType) -> Self {
        let n = t.rank;
        let mut c = vec![vec![0i64; n]; n];
        for (i, row) in c.iter_mut().enumerate() {
            row[i] = 2;
        }
        let mut link = |i: usize, j: usize, cij: i64, cji: i64| {
            c[i][j] = cij;
            c[j][i] = cji;
        };
        let mut d = vec![1i64; n];
        let mut bar: Vec<usize> = (0..n).collect();
        let h;
        match t.letter {
            'A' => {
                for i in 0..n - 1 {
                    link(i, i + 1, -1, -1);
                }
                bar = (0..n).rev().collect();
                h = n as i64 + 1;
            }
            'B' => {
                for i in 0..n - 2 {
                    link(i, i + 1, -1, -1);
                }
                link(n - 2, n - 1, -1, -2);
                d = vec![2; n];
                d[n - 1] = 1;
                h = 2 * n as i64 - 1;
            }
            'C' => {
                for i in 0..n - 2 {
                    link(i, i + 1, -1, -1);
                }
                link(n - 2, n - 1, -2, -1);
                d[n - 1] = 2;
                h = n as i64 + 1;
            }
            'D' => {
                for i in 0..n - 2 {
                    link(i, i + 1, -1, -1);
                }
                link(n - 3, n - 1, -1, -1);
                if n % 2 == 1 {
                    bar.swap(n - 2, n - 1);
                }
                h = 2 * n as i64 - 2;
            }
            'E' => {
                // Bourbaki: 1-3-4-5-6(-7-8), node 2 attached to 4.
                link(0, 2, -1, -1);
                link(1, 3, -1, -1);
                for i in 2..n - 1 {
                    link(i, i + 1, -1, -1);
                }
                if n == 6 {
                    bar = vec![5, 1, 4, 3, 2, 0];
                }
                h = match n {
                    6 => 12,
                    7 => 18,
                    _ => 30,
                };
            }
            'F' => {
                link(0, 1, -1, -1);
                link(1, 2, -1, -2);
                link(2, 3, -1, -1);
                d = vec![2, 2, 1, 1];
                h = 9;
            }
            'G' => {
                link(0, 1, -1, -3);
                d = vec![3, 1];
                h = 4;
            }
            _ => unreachable!("validated by CartanType::from_str"),
        }
        let pos_roots = positive_roots(&c);
        CartanData { cartan_type: t, c, d, pos_roots, dual_coxeter: h, bar }
    }

    pub fn rank(&self) -> usize {
        self.d.len()
    }

    pub fn label(&self) -> String {
        self.cartan_type.to_string()
    }

    pub fn nodes(&self) -> std::ops::Range<usize> {
        0..self.rank()
    }

    pub fn c(&self, i: usize, j: usize) -> i64 {
        self.c[i][j]
    }

    pub fn d(&self, i: usize) -> i64 {
        self.d[i]
    }

    pub fn max_d(&self) -> i64 {
        *self.d.iter().max().unwrap()
    }

    /// `d_ij = (α_i, α_j)/2 = d_i c_ij / 2`.
    pub fn dij(&self, i: usize, j: usize) -> Q {
        crate::qr(self.d[i] * self.c[i][j], 2)
    }

    pub fn pos_roots(&self) -> &[Vec<i64>] {
        &self.pos_roots
    }

    pub fn dual_coxeter(&self) -> i64 {
        self.dual_coxeter
    }

    /// `κ = ½ · max d_i · h^∨`.
    pub fn kappa(&self) -> Q {
        crate::qr(self.max_d() * self.dual_coxeter, 2)
    }

    pub fn bar(&self, i: usize) -> usize {
        self.bar[i]
    }

    pub fn check_node(&self, i: usize) -> Result<(), CartanError> {
        if i < self.rank() {
            Ok(())
        } else {
            Err(CartanError::BadNode(i, self.rank()))
        }
    }

    /// Neighbours `j` with `c_ij < 0`.
    pub fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.rank()).filter(move |&j| j != i && self.c[i][j] < 0)
    }

    pub fn simple_root(&self, i: usize) -> Vec<i64> {
        let mut v = vec![0; self.rank()];
        v[i] = 1;
        v
    }

    pub fn height(gamma: &[i64]) -> i64 {
        gamma.iter().sum()
    }

    pub fn highest_root(&self) -> &[i64] {
        self.pos_roots.iter().max_by_key(|g| Self::height(g)).unwrap()
    }
}

/// `⟨ϖ_i^∨, γ⟩`: the coefficient of `α_i` in `γ`.
pub fn coweight_pairing(cd: &CartanData, i: usize, gamma: &[i64]) -> Result<i64, CartanError> {
    cd.check_node(i)?;
    Ok(gamma[i])
}

/// Closure of the simple roots under simple reflections
/// `s_i(β) = β − (Σ_j c_ij β_j) α_i`, keeping positive vectors.
fn positive_roots(c: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = c.len();
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    for i in 0..n {
        let mut v = vec![0; n];
        v[i] = 1;
        seen.insert(v.clone());
        queue.push_back(v);
    }
    while let Some(beta) = queue.pop_front() {
        for i in 0..n {
            let pairing: i64 = (0..n).map(|j| c[i][j] * beta[j]).sum();
            let mut img = beta.clone();
            img[i] -= pairing;
            if img.iter().all(|&x| x >= 0) && img.iter().any(|&x| x > 0) && seen.insert(img.clone()) {
                queue.push_back(img);
            }
        }
    }
    let mut roots: Vec<Vec<i64>> = seen.into_iter().collect();
    roots.sort_by_key(|g| (CartanData::height(g), g.clone()));
    roots
}
