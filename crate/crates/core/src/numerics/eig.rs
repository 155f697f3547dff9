//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! The matrices in this crate are at most a few dozen rows, so the
//! quadratic-convergence Jacobi sweep is fast enough and gives eigenvectors
//! that are orthonormal to working precision.

use num_complex::Complex;
use num_traits::Zero;

use super::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::{cast, to_f64, Real};

const MAX_SWEEPS: usize = 64;

/// Eigenpairs of a Hermitian matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct HermitianEig<T> {
    pub values: Vec<T>,
    /// Unitary matrix whose column `i` pairs with `values[i]`.
    pub vectors: CMatrix<T>,
}

impl<T: Real> HermitianEig<T> {
    /// `U·diag(λ)·Uᴴ`.
    pub fn reconstruct(&self) -> CMatrix<T> {
        let n = self.values.len();
        CMatrix::from_fn(n, n, |i, j| {
            (0..n).fold(Complex::zero(), |acc, k| {
                acc + self.vectors[(i, k)] * self.vectors[(j, k)].conj() * self.values[k]
            })
        })
    }
}

/// Eigendecomposition `M = U·diag(λ)·Uᴴ` with `λ` sorted descending.
///
/// `M` must be Hermitian to `T::HERMITIAN_TOL` in relative Frobenius norm;
/// the Hermitian part is what gets diagonalized.
pub fn hermitian_eig<T: Real>(m: &CMatrix<T>) -> Result<HermitianEig<T>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let defect = m.hermitian_defect();
    if to_f64(defect) > T::HERMITIAN_TOL {
        return Err(Error::NotHermitian {
            asymmetry: to_f64(defect),
        });
    }

    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = CMatrix::identity(n);
    let total = a.frobenius_norm_sqr();
    let threshold = total * cast::<T>(T::JACOBI_TOL) * cast::<T>(T::JACOBI_TOL);

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_sqr(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_sqr(&a) > threshold {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEig { values, vectors })
}

fn off_diagonal_sqr<T: Real>(a: &CMatrix<T>) -> T {
    let n = a.rows();
    let mut acc = T::zero();
    for j in 0..n {
        for i in 0..n {
            if i != j {
                acc = acc + a[(i, j)].norm_sqr();
            }
        }
    }
    acc
}

/// Annihilates `a[p,q]` with the unitary `U = diag(1, e^{-iφ})·R(c,s)`,
/// where `φ = arg a[p,q]` makes the pivot block real symmetric.
fn rotate<T: Real>(a: &mut CMatrix<T>, v: &mut CMatrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let g = apq.norm();
    if g.is_zero() {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Skip rotations that cannot change the diagonal in working precision.
    let tiny = T::epsilon() * T::epsilon();
    if g * g <= tiny * (app * app + aqq * aqq) {
        a[(p, q)] = Complex::zero();
        a[(q, p)] = Complex::zero();
        return;
    }
    let phase = apq / g;
    let tau = (aqq - app) / (g + g);
    let t = if tau >= T::zero() {
        T::one() / (tau + (T::one() + tau * tau).sqrt())
    } else {
        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;

    // U = [[u_pp, u_pq], [u_qp, u_qq]]
    let u_pp = Complex::new(c, T::zero());
    let u_pq = Complex::new(s, T::zero());
    let u_qp = -phase.conj() * s;
    let u_qq = phase.conj() * c;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = Complex::zero();
    a[(q, p)] = Complex::zero();
    a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
    a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}
