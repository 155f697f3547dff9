//! Dense complex matrices stored column-major.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense complex matrix. Vectors are the single-column case.
///
/// Storage is column-major, so [`CMatrix::vec`] is the stacked-column
/// vectorization without copying order around.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    /// Builds a matrix from an entry generator `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Wraps column-major data, rejecting wrong lengths and non-finite entries.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Row-major convenience constructor, used mostly by tests.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::from_col_major(r, c, (0..r * c).map(|idx| rows[idx % r][idx / r]).collect())
    }

    pub fn column_vector(entries: Vec<Complex<T>>) -> Result<Self> {
        let n = entries.len();
        Self::from_col_major(n, 1, entries)
    }

    /// Real diagonal matrix.
    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, T::zero());
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Column-major entries; equal to `Vec(self)`.
    #[inline]
    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn vec(&self) -> CMatrix<T> {
        Self {
            rows: self.data.len(),
            cols: 1,
            data: self.data.clone(),
        }
    }

    pub fn column(&self, j: usize) -> CMatrix<T> {
        Self {
            rows: self.rows,
            cols: 1,
            data: self.col_slice(j).to_vec(),
        }
    }

    #[inline]
    pub fn col_slice(&self, j: usize) -> &[Complex<T>] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Rows `start..start+len` of every column.
    pub fn row_block(&self, start: usize, len: usize) -> CMatrix<T> {
        assert!(start + len <= self.rows, "row block out of range");
        Self::from_fn(len, self.cols, |i, j| self[(start + i, j)])
    }

    /// Horizontal concatenation of equally tall blocks.
    pub fn hstack(blocks: &[CMatrix<T>]) -> Result<Self> {
        let rows = blocks.first().map_or(0, |b| b.rows);
        if blocks.iter().any(|b| b.rows != rows) {
            return Err(Error::Dimension("hstack blocks differ in height".into()));
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        let data = blocks.iter().flat_map(|b| b.data.iter().copied()).collect();
        Ok(Self { rows, cols, data })
    }

    /// Vertical concatenation of equally wide blocks.
    pub fn vstack(blocks: &[CMatrix<T>]) -> Result<Self> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        if blocks.iter().any(|b| b.cols != cols) {
            return Err(Error::Dimension("vstack blocks differ in width".into()));
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut out = Self::zeros(rows, cols);
        let mut offset = 0;
        for b in blocks {
            for j in 0..cols {
                for i in 0..b.rows {
                    out[(offset + i, j)] = b[(i, j)];
                }
            }
            offset += b.rows;
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> CMatrix<T> {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMatrix<T> {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> CMatrix<T> {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> CMatrix<T> {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: T) -> CMatrix<T> {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: Complex<T>) -> CMatrix<T> {
        self.map(|z| z * s)
    }

    pub fn matmul(&self, rhs: &CMatrix<T>) -> Result<CMatrix<T>> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let out_col = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in rhs.col_slice(j).iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                for (o, &a) in out_col.iter_mut().zip(self.col_slice(k)) {
                    *o = *o + a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᴴ · rhs` without forming the adjoint.
    pub fn adjoint_mul(&self, rhs: &CMatrix<T>) -> Result<CMatrix<T>> {
        if self.rows != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot form adjoint product of {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self::from_fn(self.cols, rhs.cols, |i, j| {
            dot_conj(self.col_slice(i), rhs.col_slice(j))
        }))
    }

    /// Outer product `u·vᴴ` of two column vectors.
    pub fn outer(u: &CMatrix<T>, v: &CMatrix<T>) -> CMatrix<T> {
        Self::from_fn(u.len(), v.len(), |i, j| u.data[i] * v.data[j].conj())
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &CMatrix<T>) -> CMatrix<T> {
        Self::from_fn(self.rows * rhs.rows, self.cols * rhs.cols, |i, j| {
            self[(i / rhs.rows, j / rhs.cols)] * rhs[(i % rhs.rows, j % rhs.cols)]
        })
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).fold(Complex::zero(), |a, b| a + b)
    }

    /// `trace(self · rhs)` computed without forming the product.
    pub fn trace_of_product(&self, rhs: &CMatrix<T>) -> Complex<T> {
        debug_assert_eq!(self.cols, rhs.rows);
        debug_assert_eq!(self.rows, rhs.cols);
        let mut acc = Complex::zero();
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc = acc + self[(i, k)] * rhs[(k, i)];
            }
        }
        acc
    }

    pub fn frobenius_norm_sqr(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.frobenius_norm_sqr().sqrt()
    }

    /// Number of entries; the length of a column vector.
    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// `‖self − selfᴴ‖_F / ‖self‖_F`, zero for the zero matrix.
    pub fn hermitian_defect(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let norm = self.frobenius_norm();
        if norm.is_zero() {
            return T::zero();
        }
        let mut acc = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc = acc + (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt() / norm
    }

    /// `(self + selfᴴ)/2`.
    pub fn hermitian_part(&self) -> CMatrix<T> {
        let half = T::from_f64(0.5).unwrap();
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * half)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// `Σ conj(a_i)·b_i`.
#[inline]
pub fn dot_conj<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * y)
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

impl<T> Index<usize> for CMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, i: usize) -> &Complex<T> {
        &self.data[i]
    }
}

impl<T> IndexMut<usize> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut Complex<T> {
        &mut self.data[i]
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in add");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sub");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;

    /// Panics on shape mismatch; use [`CMatrix::matmul`] for a checked product.
    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        self.matmul(rhs).expect("shape mismatch in mul")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn rejects_non_finite_entries() {
        let err = CMatrix::from_col_major(1, 2, vec![c(1.0, 0.0), c(f64::NAN, 0.0)]);
        assert!(matches!(err, Err(Error::NonFinite)));
        let err = CMatrix::<f64>::from_col_major(2, 2, vec![c(1.0, 0.0)]);
        assert!(matches!(err, Err(Error::Dimension(_))));
    }

    #[test]
    fn vec_is_column_stacking() {
        let m = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(3.0, 0.0), c(4.0, 0.0)]])
            .unwrap();
        let v: Vec<f64> = m.vec().as_slice().iter().map(|z| z.re).collect();
        assert_eq!(v, vec![1.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn kron_matches_definition() {
        let a = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 1.0)]]).unwrap();
        let b = CMatrix::from_rows(&[vec![c(2.0, 0.0)], vec![c(3.0, 0.0)]]).unwrap();
        let k = a.kron(&b);
        assert_eq!((k.rows(), k.cols()), (2, 2));
        assert_eq!(k[(0, 0)], c(2.0, 0.0));
        assert_eq!(k[(1, 0)], c(3.0, 0.0));
        assert_eq!(k[(0, 1)], c(0.0, 2.0));
        assert_eq!(k[(1, 1)], c(0.0, 3.0));
    }

    #[test]
    fn products_agree() {
        let a = CMatrix::from_fn(3, 2, |i, j| c(i as f64 + 1.0, j as f64 - 0.5));
        let b = CMatrix::from_fn(3, 4, |i, j| c(j as f64, i as f64 * 0.25));
        let direct = a.adjoint().matmul(&b).unwrap();
        let fused = a.adjoint_mul(&b).unwrap();
        assert!((&direct - &fused).frobenius_norm() < 1e-14);
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn hermitian_defect_detects_asymmetry() {
        let h = CMatrix::from_rows(&[vec![c(2.0, 0.0), c(1.0, 1.0)], vec![c(1.0, -1.0), c(3.0, 0.0)]])
            .unwrap();
        assert!(h.hermitian_defect() < 1e-16);
        let mut n = h.clone();
        n[(0, 1)] = c(1.0, -1.0);
        assert!(n.hermitian_defect() > 0.1);
        assert_eq!(CMatrix::<f64>::zeros(3, 3).hermitian_defect(), 0.0);
    }
}
