//! Max-min received-power program
//!
//! ```text
//! maximize t  s.t.  t ≤ tr(W·H_k) ∀k,  tr(W) ≤ P,  W ⪰ 0
//! ```
//!
//! Any part of `W` outside the joint range of the `H_k` only burns power, so
//! the program is first restricted to an orthonormal basis `Q` of that range
//! (dimension `r ≤ Σ rank H_k`). The reduced `r×r` program is solved with a
//! primal log-barrier method using damped Newton steps over the real
//! coordinates of a Hermitian matrix.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::numerics::{cholesky, hermitian_eig, hpd_inverse, solve_spd, CMatrix};
use crate::scalar::{cast, to_f64, Real};

const RANGE_TOL: f64 = 1e-12;
const BARRIER_GROWTH: f64 = 8.0;
const MAX_OUTER: usize = 80;
const MAX_NEWTON: usize = 200;

/// Solution of the reduced program lifted back to the full space.
#[derive(Debug, Clone)]
pub struct MaxMinSolution<T> {
    /// Orthonormal basis of the joint range, `N × r`.
    pub basis: CMatrix<T>,
    /// Reduced covariance `V` with `W = Q·V·Qᴴ`, trace equal to the budget.
    pub reduced: CMatrix<T>,
    pub covariance: CMatrix<T>,
    pub t_star: T,
    /// Barrier dual estimates, normalized to sum to one.
    pub duals: Vec<T>,
    /// Upper bound `P·λ_max(Σ_k y_k·H_k)` certified by the duals.
    pub dual_bound: T,
}

/// One real coordinate of a Hermitian matrix: `E = Σ c·e_ij`.
#[derive(Debug, Clone)]
struct Coord<T> {
    terms: Vec<(Complex<T>, usize, usize)>,
    trace: T,
}

fn hermitian_coords<T: Real>(r: usize) -> Vec<Coord<T>> {
    let one = Complex::new(T::one(), T::zero());
    let i_unit = Complex::new(T::zero(), T::one());
    let mut out = Vec::with_capacity(r * r);
    for i in 0..r {
        out.push(Coord {
            terms: vec![(one, i, i)],
            trace: T::one(),
        });
    }
    for i in 0..r {
        for j in i + 1..r {
            out.push(Coord {
                terms: vec![(one, i, j), (one, j, i)],
                trace: T::zero(),
            });
            out.push(Coord {
                terms: vec![(i_unit, i, j), (-i_unit, j, i)],
                trace: T::zero(),
            });
        }
    }
    out
}

/// `tr(E·M)` for a coordinate matrix `E`.
fn trace_with<T: Real>(coord: &Coord<T>, m: &CMatrix<T>) -> Complex<T> {
    coord
        .terms
        .iter()
        .fold(Complex::zero(), |acc, &(c, i, j)| acc + c * m[(j, i)])
}

fn assemble<T: Real>(coords: &[Coord<T>], x: &[T], r: usize) -> CMatrix<T> {
    let mut v = CMatrix::zeros(r, r);
    for (coord, &xa) in coords.iter().zip(x) {
        for &(c, i, j) in &coord.terms {
            v[(i, j)] = v[(i, j)] + c * xa;
        }
    }
    v
}

struct Barrier<'a, T> {
    coords: &'a [Coord<T>],
    /// `g[k][a] = tr(E_a·G_k)`
    g: Vec<Vec<T>>,
    r: usize,
}

impl<T: Real> Barrier<'_, T> {
    fn slacks(&self, t: T, x: &[T]) -> (Vec<T>, T) {
        let s = self
            .g
            .iter()
            .map(|gk| gk.iter().zip(x).map(|(&a, &b)| a * b).sum::<T>() - t)
            .collect();
        let trace: T = self.coords.iter().zip(x).map(|(c, &xa)| c.trace * xa).sum();
        (s, T::one() - trace)
    }

    /// Barrier objective, `None` outside the domain.
    fn value(&self, tau: T, t: T, x: &[T]) -> Option<T> {
        let (s, slack) = self.slacks(t, x);
        if slack <= T::zero() || s.iter().any(|&v| v <= T::zero()) {
            return None;
        }
        let l = cholesky(&assemble(self.coords, x, self.r))?;
        let logdet = (0..self.r).map(|i| l[(i, i)].re.ln()).sum::<T>() * cast::<T>(2.0);
        Some(-tau * t - s.iter().map(|v| v.ln()).sum::<T>() - slack.ln() - logdet)
    }
}

/// Solves the max-min program for PSD `H_k` and budget `power`.
pub fn solve_maxmin_sdp<T: Real>(h: &[CMatrix<T>], power: T) -> Result<MaxMinSolution<T>> {
    let k = h.len();
    if k == 0 {
        return Err(Error::Dimension("at least one channel matrix is required".into()));
    }
    let n = h[0].rows();
    for hk in h {
        if hk.rows() != n || hk.cols() != n {
            return Err(Error::Dimension("channel matrices must share one square shape".into()));
        }
        if to_f64(hk.hermitian_defect()) > T::HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                asymmetry: to_f64(hk.hermitian_defect()),
            });
        }
    }
    if !(power > T::zero()) {
        return Err(Error::Domain(format!("power budget must be positive, got {power}")));
    }
    let scale = h.iter().map(|hk| hk.trace().re).fold(T::zero(), T::max);
    if !(scale > T::zero()) {
        return Err(Error::Degenerate);
    }
    let hn: Vec<CMatrix<T>> = h.iter().map(|hk| hk.scale(T::one() / scale).hermitian_part()).collect();

    // joint range
    let mut sum = CMatrix::zeros(n, n);
    for hk in &hn {
        sum = &sum + hk;
    }
    let eig = hermitian_eig(&sum)?;
    let cutoff = eig.values[0] * cast::<T>(RANGE_TOL);
    let r = eig.values.iter().take_while(|&&l| l > cutoff).count().max(1);
    let basis = CMatrix::from_fn(n, r, |i, j| eig.vectors[(i, j)]);
    let reduced_h: Vec<CMatrix<T>> = hn
        .iter()
        .map(|hk| {
            basis
                .adjoint_mul(&hk.matmul(&basis).expect("conformable"))
                .expect("conformable")
                .hermitian_part()
        })
        .collect();

    let coords = hermitian_coords::<T>(r);
    let barrier = Barrier {
        g: reduced_h
            .iter()
            .map(|gk| coords.iter().map(|c| trace_with(c, gk).re).collect())
            .collect(),
        coords: &coords,
        r,
    };

    let dim = coords.len();
    let mut x = vec![T::zero(); dim];
    for xa in x.iter_mut().take(r) {
        *xa = T::one() / cast::<T>(2.0 * r as f64);
    }
    let (s0, _) = barrier.slacks(T::zero(), &x);
    let mut t = s0.iter().copied().fold(T::infinity(), T::min) - T::one();

    // Every point of the simplex certifies an upper bound, so the tightest
    // one seen along the central path is kept. Late iterates lose their dual
    // accuracy to cancellation in the tiny slacks.
    let m = cast::<T>((k + 1 + r) as f64);
    let mut tau = T::one();
    let mut duals = vec![T::one() / cast::<T>(k as f64); k];
    let mut bound = T::infinity();
    for _ in 0..MAX_OUTER {
        center(&barrier, tau, &mut t, &mut x);
        let (s, _) = barrier.slacks(t, &x);
        if s.iter().all(|&sk| sk > T::zero()) {
            let raw: Vec<T> = s.iter().map(|&sk| T::one() / (tau * sk)).collect();
            let total: T = raw.iter().copied().sum();
            let y: Vec<T> = raw.iter().map(|&v| v / total).collect();
            let b = weighted_lambda_max(&reduced_h, &y)?;
            if b < bound {
                bound = b;
                duals = y;
            }
        }
        if m / tau <= cast::<T>(1e-12) * t.abs() + cast::<T>(1e-16) {
            break;
        }
        tau = tau * cast::<T>(BARRIER_GROWTH);
    }

    // project onto the PSD cone and spend the whole budget
    let v_eig = hermitian_eig(&assemble(&coords, &x, r).hermitian_part())?;
    let clamped: Vec<T> = v_eig.values.iter().map(|&l| l.max(T::zero())).collect();
    let total: T = clamped.iter().copied().sum();
    let reduced = crate::numerics::HermitianEig {
        values: clamped.iter().map(|&l| l / total * power).collect(),
        vectors: v_eig.vectors,
    }
    .reconstruct()
    .hermitian_part();
    let covariance = basis
        .matmul(&reduced)?
        .matmul(&basis.adjoint())?
        .hermitian_part();

    let t_star = h
        .iter()
        .map(|hk| covariance.trace_of_product(hk).re)
        .fold(T::infinity(), T::min);

    let dual_bound = bound * scale * power;

    Ok(MaxMinSolution {
        basis,
        reduced,
        covariance,
        t_star,
        duals,
        dual_bound,
    })
}

/// `λ_max(Σ_k y_k·G_k)`.
fn weighted_lambda_max<T: Real>(g: &[CMatrix<T>], y: &[T]) -> Result<T> {
    let r = g[0].rows();
    let mut weighted = CMatrix::zeros(r, r);
    for (gk, &yk) in g.iter().zip(y) {
        weighted = &weighted + &gk.scale(yk);
    }
    Ok(hermitian_eig(&weighted.hermitian_part())?.values[0])
}

/// Newton iterations on the barrier objective for fixed `tau`.
fn center<T: Real>(barrier: &Barrier<'_, T>, tau: T, t: &mut T, x: &mut [T]) {
    let r = barrier.r;
    let dim = x.len();
    let nz = dim + 1;
    for _ in 0..MAX_NEWTON {
        let v = assemble(barrier.coords, x, r);
        let Some(vi) = hpd_inverse(&v) else { return };
        let (s, slack) = barrier.slacks(*t, x);

        let mut grad = vec![T::zero(); nz];
        let mut hess = vec![T::zero(); nz * nz];
        grad[0] = -tau + s.iter().map(|&sk| T::one() / sk).sum::<T>();
        for (a, coord) in barrier.coords.iter().enumerate() {
            let mut ga = coord.trace / slack - trace_with(coord, &vi).re;
            for (gk, &sk) in barrier.g.iter().zip(&s) {
                ga = ga - gk[a] / sk;
            }
            grad[a + 1] = ga;
        }
        // Σ_k d_k·d_kᵀ/s_k² with d_k = (−1, g_k)
        for (gk, &sk) in barrier.g.iter().zip(&s) {
            let w = T::one() / (sk * sk);
            let d = |i: usize| if i == 0 { -T::one() } else { gk[i - 1] };
            for i in 0..nz {
                let di = d(i) * w;
                if di.is_zero() {
                    continue;
                }
                for j in 0..nz {
                    hess[i * nz + j] = hess[i * nz + j] + di * d(j);
                }
            }
        }
        let w0 = T::one() / (slack * slack);
        for a in 0..dim {
            for b in 0..dim {
                let ca = barrier.coords[a].trace;
                let cb = barrier.coords[b].trace;
                // tr(E_a·V⁻¹·E_b·V⁻¹) = Σ c1·c2·V⁻¹[j,p]·V⁻¹[q,i]
                let mut ld = Complex::zero();
                for &(c1, i, j) in &barrier.coords[a].terms {
                    for &(c2, p, q) in &barrier.coords[b].terms {
                        ld = ld + c1 * c2 * vi[(j, p)] * vi[(q, i)];
                    }
                }
                hess[(a + 1) * nz + b + 1] = hess[(a + 1) * nz + b + 1] + ca * cb * w0 + ld.re;
            }
        }

        let neg: Vec<T> = grad.iter().map(|&g| -g).collect();
        let Some(step) = solve_spd(&hess, &neg) else { return };
        let slope: T = grad.iter().zip(&step).map(|(&g, &d)| g * d).sum();
        if -slope * cast::<T>(0.5) <= cast::<T>(1e-14) {
            return;
        }
        let Some(f0) = barrier.value(tau, *t, x) else { return };
        let mut alpha = T::one();
        let mut accepted = false;
        for _ in 0..60 {
            let tn = *t + alpha * step[0];
            let xn: Vec<T> = x.iter().zip(&step[1..]).map(|(&xa, &d)| xa + alpha * d).collect();
            if let Some(f1) = barrier.value(tau, tn, &xn) {
                if f1 <= f0 + cast::<T>(0.25) * alpha * slope {
                    *t = tn;
                    x.copy_from_slice(&xn);
                    accepted = true;
                    break;
                }
            }
            alpha = alpha * cast::<T>(0.5);
        }
        if !accepted {
            return;
        }
    }
}
