//! Linear solves: Householder least squares and Cholesky factorizations.

use num_complex::Complex;
use num_traits::Zero;

use super::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::{cast, to_f64, Real};

/// Minimizes `‖A·x − y‖² + ridge·‖x‖²` for tall `A`.
///
/// The ridge term is folded in by stacking `√ridge·I` under `A`, then the
/// system is reduced by Householder QR. Without a ridge, a triangular factor
/// whose diagonal spread exceeds `T::MAX_CONDITION` is reported as
/// [`Error::IllConditioned`].
pub fn ls_solve<T: Real>(a: &CMatrix<T>, y: &CMatrix<T>, ridge: T) -> Result<CMatrix<T>> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::Dimension(format!("least squares needs rows >= cols, got {m}x{n}")));
    }
    if y.rows() != m || y.cols() != 1 {
        return Err(Error::Dimension(format!(
            "right-hand side is {}x{}, expected {m}x1",
            y.rows(),
            y.cols()
        )));
    }
    if ridge < T::zero() || !ridge.is_finite() {
        return Err(Error::Domain("ridge must be a nonnegative finite number".into()));
    }

    let (mut r, mut rhs) = if ridge > T::zero() {
        let s = ridge.sqrt();
        (
            CMatrix::vstack(&[a.clone(), CMatrix::identity(n).scale(s)])?,
            CMatrix::vstack(&[y.clone(), CMatrix::zeros(n, 1)])?,
        )
    } else {
        (a.clone(), y.clone())
    };
    householder_reduce(&mut r, &mut rhs);

    let diag: Vec<T> = (0..n).map(|i| r[(i, i)].norm()).collect();
    let dmax = diag.iter().copied().fold(T::zero(), T::max);
    let dmin = diag.iter().copied().fold(T::infinity(), T::min);
    if n > 0 && ridge.is_zero() {
        let condition = if dmin.is_zero() { f64::INFINITY } else { to_f64(dmax / dmin) };
        if !(condition <= T::MAX_CONDITION) {
            return Err(Error::IllConditioned { condition });
        }
    }

    // back substitution on the leading n×n triangle
    let mut x = vec![Complex::<T>::zero(); n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        for (k, xk) in x.iter().enumerate().skip(i + 1) {
            acc = acc - r[(i, k)] * xk;
        }
        x[i] = acc / r[(i, i)];
    }
    CMatrix::column_vector(x)
}

/// In-place QR reduction: on return the upper triangle of `a` holds `R` and
/// `rhs` holds `Qᴴ·rhs`.
fn householder_reduce<T: Real>(a: &mut CMatrix<T>, rhs: &mut CMatrix<T>) {
    let (m, n) = (a.rows(), a.cols());
    let two = cast::<T>(2.0);
    let mut v = vec![Complex::<T>::zero(); m];
    for j in 0..n.min(m) {
        let norm_x = (j..m).map(|i| a[(i, j)].norm_sqr()).sum::<T>().sqrt();
        if norm_x.is_zero() {
            continue;
        }
        let x0 = a[(j, j)];
        let phase = if x0.norm().is_zero() {
            Complex::new(T::one(), T::zero())
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm_x;
        for i in j..m {
            v[i] = a[(i, j)];
        }
        v[j] = v[j] - alpha;
        let vnorm_sqr: T = (j..m).map(|i| v[i].norm_sqr()).sum();
        if vnorm_sqr.is_zero() {
            continue;
        }
        for k in j..n {
            let mut dot = Complex::zero();
            for i in j..m {
                dot = dot + v[i].conj() * a[(i, k)];
            }
            let f = dot * two / vnorm_sqr;
            for i in j..m {
                a[(i, k)] = a[(i, k)] - v[i] * f;
            }
        }
        let mut dot = Complex::zero();
        for i in j..m {
            dot = dot + v[i].conj() * rhs[i];
        }
        let f = dot * two / vnorm_sqr;
        for i in j..m {
            rhs[i] = rhs[i] - v[i] * f;
        }
    }
}

/// Lower-triangular `L` with `M = L·Lᴴ`, or `None` when `M` is not
/// numerically positive definite.
pub fn cholesky<T: Real>(m: &CMatrix<T>) -> Option<CMatrix<T>> {
    let n = m.rows();
    if !m.is_square() {
        return None;
    }
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re;
        for k in 0..j {
            d = d - l[(j, k)].norm_sqr();
        }
        if !(d > T::zero()) {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = Complex::new(d, T::zero());
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// Inverse of a Hermitian positive definite matrix via its Cholesky factor.
pub fn hpd_inverse<T: Real>(m: &CMatrix<T>) -> Option<CMatrix<T>> {
    let l = cholesky(m)?;
    let n = m.rows();
    let mut inv = CMatrix::zeros(n, n);
    for col in 0..n {
        // L·z = e_col
        let mut z = vec![Complex::<T>::zero(); n];
        for i in 0..n {
            let mut s = if i == col { Complex::new(T::one(), T::zero()) } else { Complex::zero() };
            for (k, zk) in z.iter().enumerate().take(i) {
                s = s - l[(i, k)] * zk;
            }
            z[i] = s / l[(i, i)];
        }
        // Lᴴ·x = z
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in i + 1..n {
                s = s - l[(k, i)].conj() * inv[(k, col)];
            }
            inv[(i, col)] = s / l[(i, i)].re;
        }
    }
    Some(inv.hermitian_part())
}

/// Solves `H·x = b` for a real symmetric positive definite `H` given row-major.
pub fn solve_spd<T: Real>(h: &[T], b: &[T]) -> Option<Vec<T>> {
    let n = b.len();
    debug_assert_eq!(h.len(), n * n);
    let mut l = vec![T::zero(); n * n];
    for j in 0..n {
        let mut d = h[j * n + j];
        for k in 0..j {
            d = d - l[j * n + k] * l[j * n + k];
        }
        if !(d > T::zero()) {
            return None;
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = h[i * n + j];
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    let mut z = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            z[i] = z[i] - l[i * n + k] * z[k];
        }
        z[i] = z[i] / l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            z[i] = z[i] - l[k * n + i] * z[k];
        }
        z[i] = z[i] / l[i * n + i];
    }
    Some(z)
}
