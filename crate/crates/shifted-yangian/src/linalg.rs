//! Dense exact linear algebra over ℚ.
//!
//! Matrices here are small (weight blocks, intertwiner systems), so a plain
//! row-major `Vec<Vec<Q>>` with fraction-exact Gaussian elimination is enough.

use crate::ratfun::Poly;
use crate::Q;
use num_traits::{One, Zero};
use std::fmt;

/// Dense matrix with rational entries.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Vec<Q>>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in &self.data {
            let row: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![vec![Q::zero(); cols]; rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i][i] = Q::one();
        }
        m
    }

    pub fn scalar(n: usize, c: &Q) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i][i] = c.clone();
        }
        m
    }

    pub fn from_rows(data: Vec<Vec<Q>>) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, |r| r.len());
        assert!(data.iter().all(|r| r.len() == cols), "ragged rows");
        Mat { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Q) -> Self {
        let data = (0..rows).map(|i| (0..cols).map(|j| f(i, j)).collect()).collect();
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.data[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Q) {
        self.data[i][j] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &Q) {
        self.data[i][j] += v;
    }

    pub fn row(&self, i: usize) -> &[Q] {
        &self.data[i]
    }

    pub fn column(&self, j: usize) -> Vec<Q> {
        self.data.iter().map(|r| r[j].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.iter().all(Zero::is_zero))
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self.data[j][i].clone())
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other.data[k][j];
                    if !b.is_zero() {
                        out.data[i][j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(self.cols, v.len());
        self.data
            .iter()
            .map(|r| r.iter().zip(v).filter(|(a, _)| !a.is_zero()).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| &self.data[i][j] + &other.data[i][j])
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(self.rows, self.cols, |i, j| &self.data[i][j] - &other.data[i][j])
    }

    pub fn scale(&self, c: &Q) -> Mat {
        Mat::from_fn(self.rows, self.cols, |i, j| &self.data[i][j] * c)
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (Mat, Vec<usize>) {
        let mut m = self.data.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !m[i][c].is_zero()) else {
                continue;
            };
            m.swap(r, p);
            let inv = m[r][c].recip();
            for x in m[r].iter_mut() {
                *x *= &inv;
            }
            for i in 0..self.rows {
                if i != r && !m[i][c].is_zero() {
                    let f = m[i][c].clone();
                    for j in c..self.cols {
                        if !m[r][j].is_zero() {
                            let t = &f * &m[r][j];
                            m[i][j] -= t;
                        }
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (Mat { rows: self.rows, cols: self.cols, data: m }, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel `{x : A x = 0}`.
    pub fn kernel(&self) -> Vec<Vec<Q>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Q::zero(); self.cols];
                v[f] = Q::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -r.data[row][f].clone();
                }
                v
            })
            .collect()
    }

    /// Some solution of `A x = b`, or `None` when inconsistent.
    pub fn solve(&self, b: &[Q]) -> Option<Vec<Q>> {
        assert_eq!(b.len(), self.rows);
        let aug = Mat::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self.data[i][j].clone()
            } else {
                b[i].clone()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Q::zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = r.data[row][self.cols].clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Mat> {
        assert!(self.is_square());
        let n = self.rows;
        let aug = Mat::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self.data[i][j].clone()
            } else if j - n == i {
                Q::one()
            } else {
                Q::zero()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(Mat::from_fn(n, n, |i, j| r.data[i][n + j].clone()))
    }

    pub fn det(&self) -> Q {
        assert!(self.is_square());
        let n = self.rows;
        let mut m = self.data.clone();
        let mut det = Q::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
                return Q::zero();
            };
            if p != c {
                m.swap(p, c);
                det = -det;
            }
            det *= &m[c][c];
            let inv = m[c][c].recip();
            for i in c + 1..n {
                if !m[i][c].is_zero() {
                    let f = &m[i][c] * &inv;
                    for j in c..n {
                        let t = &f * &m[c][j];
                        m[i][j] -= t;
                    }
                }
            }
        }
        det
    }

    pub fn pow(&self, k: u32) -> Mat {
        let mut out = Mat::identity(self.rows);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn commutator(&self, other: &Mat) -> Mat {
        self.mul(other).sub(&other.mul(self))
    }
}

/// A subspace of ℚⁿ kept in reduced echelon form, used for quotient coordinates.
#[derive(Clone, Debug)]
pub struct Subspace {
    dim_ambient: usize,
    basis: Vec<Vec<Q>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(dim_ambient: usize) -> Self {
        Subspace { dim_ambient, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn spanned_by(dim_ambient: usize, vectors: &[Vec<Q>]) -> Self {
        if vectors.is_empty() {
            return Self::zero(dim_ambient);
        }
        let (r, pivots) = Mat::from_rows(vectors.to_vec()).rref();
        let basis = (0..pivots.len()).map(|i| r.data[i].clone()).collect();
        Subspace { dim_ambient, basis, pivots }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient(&self) -> usize {
        self.dim_ambient
    }

    pub fn basis(&self) -> &[Vec<Q>] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Reduce `v` so that it vanishes on every pivot coordinate.
    pub fn reduce(&self, v: &[Q]) -> Vec<Q> {
        let mut v = v.to_vec();
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            if !v[p].is_zero() {
                let f = v[p].clone();
                for (x, y) in v.iter_mut().zip(b) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        self.reduce(v).iter().all(Zero::is_zero)
    }

    /// Coordinates not occupied by pivots; they index a basis of the quotient.
    pub fn complement_coords(&self) -> Vec<usize> {
        (0..self.dim_ambient).filter(|c| !self.pivots.contains(c)).collect()
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        // v = Σ a_i b_i = Σ c_j d_j  ⇔  (a, −c) ∈ ker [B^T | −D^T]
        let n = self.dim_ambient;
        let (k1, k2) = (self.dim(), other.dim());
        if k1 == 0 || k2 == 0 {
            return Subspace::zero(n);
        }
        let m = Mat::from_fn(n, k1 + k2, |i, j| {
            if j < k1 {
                self.basis[j][i].clone()
            } else {
                -other.basis[j - k1][i].clone()
            }
        });
        let vecs: Vec<Vec<Q>> = m
            .kernel()
            .iter()
            .map(|k| {
                let mut v = vec![Q::zero(); n];
                for (a, b) in k[..k1].iter().zip(&self.basis) {
                    for (x, y) in v.iter_mut().zip(b) {
                        *x += a * y;
                    }
                }
                v
            })
            .collect();
        Subspace::spanned_by(n, &vecs)
    }

    /// Matrix of `op` on this subspace in its echelon basis; `None` if not invariant.
    pub fn restrict(&self, op: &Mat) -> Option<Mat> {
        let k = self.dim();
        let mut out = Mat::zeros(k, k);
        for (j, b) in self.basis.iter().enumerate() {
            let img = op.mul_vec(b);
            if !self.contains(&img) {
                return None;
            }
            for (i, &p) in self.pivots.iter().enumerate() {
                out.set(i, j, img[p].clone());
            }
        }
        Some(out)
    }

    /// Embeds coordinates in the echelon basis back into the ambient space.
    pub fn embed(&self, coords: &[Q]) -> Vec<Q> {
        let mut v = vec![Q::zero(); self.dim_ambient];
        for (c, b) in coords.iter().zip(&self.basis) {
            if !c.is_zero() {
                for (x, y) in v.iter_mut().zip(b) {
                    *x += c * y;
                }
            }
        }
        v
    }
}

impl Mat {
    /// `det(t·I − A)` by Faddeev–LeVerrier, coefficients ascending.
    pub fn charpoly(&self) -> Poly {
        assert!(self.is_square());
        let n = self.rows;
        let mut c = vec![Q::zero(); n + 1];
        c[n] = Q::one();
        let mut m = Mat::zeros(n, n);
        for k in 1..=n {
            m = self.mul(&m).add(&Mat::scalar(n, &c[n - k + 1]));
            let am = self.mul(&m);
            let tr = (0..n).fold(Q::zero(), |acc, i| acc + am.get(i, i));
            c[n - k] = -tr / Q::from_integer((k as i64).into());
        }
        Poly::new(c)
    }
}
