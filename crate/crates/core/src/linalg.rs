//! Exact matrices over the Gaussian rationals and canonical subspaces.
//!
//! Every rank or span decision in the crate goes through this module, so
//! nothing structural depends on a floating point threshold.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::scalar::{vec_axpy, vec_is_zero, zero_vec, Gq, QVec};

/// Dense row-major matrix of exact scalars.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Gq>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Gq::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Gq::one();
        }
        m
    }

    pub fn from_rows(rows: &[QVec]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().cloned());
        }
        Self { rows: r, cols: c, data }
    }

    /// Matrix whose columns are the given vectors, all of length `n`.
    pub fn from_columns(n: usize, cols: &[QVec]) -> Self {
        let mut m = Self::zeros(n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                m[(i, j)] = c[i].clone();
            }
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Gq) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Gq] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> QVec {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<QVec> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn entries(&self) -> &[Gq] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: &Gq) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| s * x).collect() }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect() }
    }

    /// `self += s·o`
    pub fn axpy(&mut self, s: &Gq, o: &Self) {
        vec_axpy(&mut self.data, s, &o.data);
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = &o[(k, j)];
                    if !b.is_zero() {
                        out.data[i * o.cols + j] += &(a * b);
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Gq]) -> QVec {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Gq::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += &(a * b);
                    }
                }
                acc
            })
            .collect()
    }

    /// `AB − BA`
    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn trace(&self) -> Gq {
        let mut t = Gq::zero();
        for i in 0..self.rows.min(self.cols) {
            t += &self[(i, i)];
        }
        t
    }

    pub fn pow(&self, k: u32) -> Self {
        assert!(self.is_square());
        let mut acc = Self::identity(self.rows);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Smallest `k ≥ 1` with `self^k = 0`, if it is at most the size.
    pub fn nilpotency_index(&self) -> Option<usize> {
        assert!(self.is_square());
        if self.is_zero() {
            return Some(1);
        }
        let mut p = self.clone();
        for k in 2..=self.rows.max(1) {
            p = p.mul(self);
            if p.is_zero() {
                return Some(k);
            }
        }
        None
    }

    /// Row-major flattening, the coordinates of the matrix as a vector.
    pub fn vectorize(&self) -> QVec {
        self.data.clone()
    }

    pub fn to_c64(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_c64())
    }

    pub fn max_bits(&self) -> u64 {
        self.data.iter().map(Gq::bits).max().unwrap_or(0)
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].inv().expect("nonzero pivot");
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            let pivot_row: QVec = m.row(r).to_vec();
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = -&m[(i, c)];
                    let row = &mut m.data[i * m.cols..(i + 1) * m.cols];
                    vec_axpy(row, &f, &pivot_row);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{x : Ax = 0}`, one vector per free column.
    pub fn kernel(&self) -> Vec<QVec> {
        let (r, pivots) = self.rref();
        let mut free = Vec::new();
        let mut pi = 0;
        for c in 0..self.cols {
            if pi < pivots.len() && pivots[pi] == c {
                pi += 1;
            } else {
                free.push(c);
            }
        }
        free.iter()
            .map(|&f| {
                let mut v = zero_vec(self.cols);
                v[f] = Gq::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -&r[(row, f)];
                }
                v
            })
            .collect()
    }

    /// Some solution of `Ax = b`, or `None` when inconsistent.
    pub fn solve(&self, b: &[Gq]) -> Option<QVec> {
        assert_eq!(b.len(), self.rows);
        let aug =
            Self::from_fn(
                self.rows,
                self.cols + 1,
                |i, j| {
                    if j < self.cols {
                        self[(i, j)].clone()
                    } else {
                        b[i].clone()
                    }
                },
            );
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = zero_vec(self.cols);
        for (row, &p) in pivots.iter().enumerate() {
            x[p] = r[(row, self.cols)].clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let aug = Self::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self[(i, j)].clone()
            } else if j - n == i {
                Gq::one()
            } else {
                Gq::zero()
            }
        });
        let (r, pivots) = aug.rref();
        if pivots.len() < n || (n > 0 && pivots[n - 1] >= n) {
            return None;
        }
        Some(Self::from_fn(n, n, |i, j| r[(i, n + j)].clone()))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Gq;
    fn index(&self, (i, j): (usize, usize)) -> &Gq {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Gq {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// A subspace of `ℂⁿ` stored as the nonzero rows of its reduced row echelon
/// form. Equal subspaces have identical representations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    rows: Vec<QVec>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Self { ambient, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        Self::span(ambient, &(0..ambient).map(|i| crate::scalar::unit_vec(ambient, i)).collect::<Vec<_>>())
    }

    pub fn span(ambient: usize, vectors: &[QVec]) -> Self {
        let vs: Vec<QVec> = vectors.iter().filter(|v| !vec_is_zero(v)).cloned().collect();
        if vs.is_empty() {
            return Self::zero(ambient);
        }
        for v in &vs {
            assert_eq!(v.len(), ambient, "vector outside the ambient space");
        }
        let (r, pivots) = QMatrix::from_rows(&vs).rref();
        let rows = (0..pivots.len()).map(|i| r.row(i).to_vec()).collect();
        Self { ambient, rows, pivots }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn basis(&self) -> &[QVec] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// `v` with the pivot coordinates eliminated; zero iff `v` lies in the span.
    pub fn reduce(&self, v: &[Gq]) -> QVec {
        let mut r = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !r[p].is_zero() {
                let f = -&r[p];
                vec_axpy(&mut r, &f, row);
            }
        }
        r
    }

    pub fn contains(&self, v: &[Gq]) -> bool {
        assert_eq!(v.len(), self.ambient);
        vec_is_zero(&self.reduce(v))
    }

    /// Coefficients of `v` in the echelon basis, if `v` lies in the span.
    pub fn coords(&self, v: &[Gq]) -> Option<QVec> {
        if !self.contains(v) {
            return None;
        }
        Some(self.pivots.iter().map(|&p| v[p].clone()).collect())
    }

    /// `Σ cᵢ·basisᵢ`
    pub fn combine(&self, coeffs: &[Gq]) -> QVec {
        assert_eq!(coeffs.len(), self.dim());
        let mut out = zero_vec(self.ambient);
        for (c, row) in coeffs.iter().zip(&self.rows) {
            vec_axpy(&mut out, c, row);
        }
        out
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.rows.iter().all(|v| other.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        let mut vs = self.rows.clone();
        vs.extend(other.rows.iter().cloned());
        Subspace::span(self.ambient, &vs)
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        if self.is_zero() || other.is_zero() {
            return Subspace::zero(self.ambient);
        }
        // Σ aᵢuᵢ − Σ bⱼwⱼ = 0
        let mut cols = self.rows.clone();
        cols.extend(other.rows.iter().map(|w| crate::scalar::vec_neg(w)));
        let m = QMatrix::from_columns(self.ambient, &cols);
        let vs: Vec<QVec> = m.kernel().into_iter().map(|k| self.combine(&k[..self.dim()])).collect();
        Subspace::span(self.ambient, &vs)
    }

    /// Basis vectors of `other` (in echelon order) that extend `self` to
    /// `self + other`: a canonical complement of `self ∩ other` inside `other`
    /// when `self ⊆ other`.
    pub fn completion_from(&self, other: &Subspace) -> Vec<QVec> {
        let mut acc = self.clone();
        let mut added = Vec::new();
        for v in other.basis() {
            if !acc.contains(v) {
                added.push(v.clone());
                acc = acc.sum(&Subspace::span(self.ambient, std::slice::from_ref(v)));
            }
        }
        added
    }

    /// Standard basis vectors at the non-pivot columns: the canonical
    /// complement used for quotients.
    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.ambient).filter(|c| !self.pivots.contains(c)).collect()
    }

    pub fn as_matrix(&self) -> QMatrix {
        QMatrix::from_rows(&self.rows)
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(dim {} in {}) {:?}", self.dim(), self.ambient, self.rows)
    }
}

impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Subspace", 2)?;
        st.serialize_field("dim", &self.dim())?;
        let basis: Vec<Vec<crate::io::ScalarJson>> =
            self.rows.iter().map(|r| r.iter().map(crate::io::ScalarJson::from).collect()).collect();
        st.serialize_field("basis", &basis)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::unit_vec;

    fn v(xs: &[i64]) -> QVec {
        xs.iter().map(|&x| Gq::int(x)).collect()
    }

    #[test]
    fn rref_and_kernel() {
        let m = QMatrix::from_rows(&[v(&[1, 2, 3]), v(&[2, 4, 6]), v(&[1, 0, 1])]);
        assert_eq!(m.rank(), 2);
        let k = m.kernel();
        assert_eq!(k.len(), 1);
        assert!(crate::scalar::vec_is_zero(&m.mul_vec(&k[0])));
    }

    #[test]
    fn inverse_and_solve() {
        let m = QMatrix::from_rows(&[v(&[2, 1]), v(&[1, 1])]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), QMatrix::identity(2));
        assert_eq!(m.solve(&v(&[3, 2])).unwrap(), v(&[1, 1]));
        let sing = QMatrix::from_rows(&[v(&[1, 1]), v(&[1, 1])]);
        assert!(sing.inverse().is_none());
        assert!(sing.solve(&v(&[1, 2])).is_none());
    }

    #[test]
    fn canonical_subspaces() {
        let a = Subspace::span(3, &[v(&[1, 1, 0]), v(&[0, 1, 0])]);
        let b = Subspace::span(3, &[v(&[1, 0, 0]), v(&[3, 2, 0])]);
        assert_eq!(a, b);
        let c = Subspace::span(3, &[v(&[0, 1, 1]), v(&[0, 0, 1])]);
        let i = a.intersect(&c);
        assert_eq!(i, Subspace::span(3, &[unit_vec(3, 1)]));
        assert_eq!(a.sum(&c), Subspace::full(3));
        assert_eq!(a.coords(&v(&[2, 5, 0])).unwrap(), v(&[2, 5]));
        assert!(a.coords(&v(&[0, 0, 1])).is_none());
    }

    #[test]
    fn completion_is_pivot_ordered() {
        let n = Subspace::span(3, &[unit_vec(3, 2)]);
        let added = n.completion_from(&Subspace::full(3));
        assert_eq!(added, vec![unit_vec(3, 0), unit_vec(3, 1)]);
    }

    #[test]
    fn nilpotency_index() {
        let mut m = QMatrix::zeros(3, 3);
        m[(0, 1)] = Gq::one();
        m[(1, 2)] = Gq::one();
        assert_eq!(m.nilpotency_index(), Some(3));
        assert_eq!(QMatrix::identity(2).nilpotency_index(), None);
    }
}
