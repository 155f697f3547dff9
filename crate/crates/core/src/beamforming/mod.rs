//! Charging phase: max-min beamforming, beam extraction and the
//! perfect-knowledge and isotropic benchmarks.

mod sdp;

use std::io::Write;
use std::path::Path;

use num_complex::Complex;

pub use sdp::{solve_maxmin_sdp, MaxMinSolution};

use crate::channel::{steering_vector, Deployment};
use crate::error::{Error, Result};
use crate::numerics::{dot_conj, hermitian_eig, CMatrix};
use crate::scalar::{cast, to_f64, Real};

/// Relative eigenvalue level above which a covariance direction counts
/// toward its rank.
pub const RANK_TOL: f64 = 1e-6;
/// Normalized dual weight under which a device is reported as dominated.
pub const DOMINATED_DUAL: f64 = 1e-6;

/// Charging covariance, its beams and solver diagnostics.
#[derive(Debug, Clone)]
pub struct BeamSolution<T> {
    /// Aggregate covariance `W = Σ_i w_i·w_iᴴ`.
    pub covariance: CMatrix<T>,
    pub beams: Vec<CMatrix<T>>,
    /// `min_k tr(W·Ĥ_k)`.
    pub t_star: T,
    /// `tr(W·Ĥ_k)` per device.
    pub device_power: Vec<T>,
    pub duals: Vec<T>,
    /// Relative duality gap `(bound − t*)/bound`.
    pub kkt_residual: T,
    /// Devices whose constraint carries (numerically) zero dual weight.
    pub dominated: Vec<bool>,
    /// The covariance has more than `K` significant eigenvalues.
    pub excess_rank: bool,
}

/// Beams `w_i = √λ_i·u_i` for the `count` largest eigenpairs.
#[derive(Debug, Clone)]
pub struct BeamSet<T> {
    pub beams: Vec<CMatrix<T>>,
    pub excess_rank: bool,
}

/// Received power `Σ_i |hᴴ·w_i|²` for a scaled channel `h = β·h_k`.
pub fn received_power<T: Real>(h_scaled: &CMatrix<T>, beams: &[CMatrix<T>]) -> T {
    beams
        .iter()
        .map(|w| {
            debug_assert_eq!(w.len(), h_scaled.len());
            dot_conj(h_scaled.as_slice(), w.as_slice()).norm_sqr()
        })
        .sum()
}

/// Splits a PSD covariance into `count` beams, zero-padded when the rank is
/// lower. Eigenvalues are clamped at zero.
pub fn extract_beams<T: Real>(w: &CMatrix<T>, count: usize) -> Result<BeamSet<T>> {
    let eig = hermitian_eig(w)?;
    let n = w.rows();
    let top = eig.values.first().copied().unwrap_or(T::zero()).max(T::zero());
    let significant = eig
        .values
        .iter()
        .filter(|&&l| l > top * cast::<T>(RANK_TOL))
        .count();
    let beams = (0..count)
        .map(|i| {
            if i < n {
                let amp = eig.values[i].max(T::zero()).sqrt();
                CMatrix::from_fn(n, 1, |r, _| eig.vectors[(r, i)] * amp)
            } else {
                CMatrix::zeros(n, 1)
            }
        })
        .collect();
    Ok(BeamSet {
        beams,
        excess_rank: significant > count,
    })
}

/// Max-min beamforming for `count = Ĥ.len()` devices under budget `power`.
pub fn solve_maxmin<T: Real>(h_hat: &[CMatrix<T>], power: T) -> Result<BeamSolution<T>> {
    let sol = solve_maxmin_sdp(h_hat, power)?;
    let k = h_hat.len();
    let reduced_beams = extract_beams(&sol.reduced, k)?;
    let beams = reduced_beams
        .beams
        .iter()
        .map(|b| sol.basis.matmul(b))
        .collect::<Result<Vec<_>>>()?;
    let device_power = h_hat
        .iter()
        .map(|hk| sol.covariance.trace_of_product(hk).re)
        .collect();
    let kkt_residual = if sol.dual_bound > T::zero() {
        ((sol.dual_bound - sol.t_star) / sol.dual_bound).max(T::zero())
    } else {
        T::zero()
    };
    let dominated = sol.duals.iter().map(|&y| y < cast::<T>(DOMINATED_DUAL)).collect();
    Ok(BeamSolution {
        covariance: sol.covariance,
        beams,
        t_star: sol.t_star,
        device_power,
        duals: sol.duals,
        kkt_residual,
        dominated,
        excess_rank: reduced_beams.excess_rank,
    })
}

/// `weight·a(θ)·a(θ)ᴴ` over the full array.
pub fn los_charging_matrix<T: Real>(theta: T, weight: T, n: usize) -> CMatrix<T> {
    let a = steering_vector(theta, n, 0);
    CMatrix::outer(&a, &a).scale(weight)
}

/// `Ĥ_k = |α̂_k|·a(θ̂_k)·a(θ̂_k)ᴴ` from sensing estimates.
pub fn estimated_charging_matrices<T: Real>(angles: &[T], coefficients: &[Complex<T>], n: usize) -> Vec<CMatrix<T>> {
    angles
        .iter()
        .zip(coefficients)
        .map(|(&theta, alpha)| los_charging_matrix(theta, alpha.norm(), n))
        .collect()
}

/// Perfect-knowledge benchmark: `Ĥ_k = β_k²·a(θ_k)·a(θ_k)ᴴ` with true
/// angles and path gains.
pub fn pk_benchmark<T: Real>(dep: &Deployment<T>, power: T) -> Result<BeamSolution<T>> {
    let n = dep.geometry.n_total;
    let h: Vec<_> = dep
        .angles
        .iter()
        .zip(&dep.path_gains)
        .map(|(&theta, &beta)| los_charging_matrix(theta, beta * beta, n))
        .collect();
    solve_maxmin(&h, power)
}

/// Columns of the isotropic beamformer `√(P/n)·I_n`.
pub fn isotropic_beams<T: Real>(n: usize, power: T) -> Vec<CMatrix<T>> {
    let amp = (power / cast::<T>(n as f64)).sqrt();
    (0..n)
        .map(|i| {
            let mut e = CMatrix::zeros(n, 1);
            e[i] = Complex::new(amp, T::zero());
            e
        })
        .collect()
}

/// Per-block power received from isotropic transmission over the antennas
/// spanned by `h` (unit-scale channel restricted to those antennas).
pub fn isotropic_block_power<T: Real>(h: &CMatrix<T>, beta: T, power: T) -> T {
    received_power(&h.scale(beta), &isotropic_beams(h.len(), power))
}

/// All-antenna independent-symbol benchmark over `blocks` blocks,
/// `L·P·β²·‖h‖²/dim(h)`.
pub fn aa_is_power<T: Real>(h: &CMatrix<T>, beta: T, power: T, blocks: usize) -> T {
    cast::<T>(blocks as f64) * isotropic_block_power(h, beta, power)
}

/// Writes `k,trace_WHk,t_star,kkt_residual` rows.
pub fn write_solution_csv<T: Real>(sol: &BeamSolution<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(out, "k,trace_WHk,t_star,kkt_residual").map_err(io)?;
    for (k, p) in sol.device_power.iter().enumerate() {
        writeln!(out, "{},{},{},{}", k, to_f64(*p), to_f64(sol.t_star), to_f64(sol.kkt_residual)).map_err(io)?;
    }
    out.flush().map_err(io)
}
