use num_complex::Complex;
use num_traits::Zero;

use crate::channel::{ChannelSet, Deployment};
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, RandomSource};
use crate::scalar::{cast, Real};

/// Received echo of one sensing phase.
#[derive(Debug, Clone)]
pub struct EchoFrame<T> {
    /// `N_r × L_s` samples.
    pub samples: CMatrix<T>,
    pub noise_variance: T,
}

impl<T: Real> EchoFrame<T> {
    pub fn n_rx(&self) -> usize {
        self.samples.rows()
    }

    pub fn blocks(&self) -> usize {
        self.samples.cols()
    }

    /// `Y·Yᴴ/L_s`.
    pub fn sample_covariance(&self) -> CMatrix<T> {
        let y = &self.samples;
        y.matmul(&y.adjoint())
            .expect("echo is conformable with its adjoint")
            .scale(T::one() / cast::<T>(self.blocks() as f64))
            .hermitian_part()
    }
}

/// Reflection matrix `G = Σ_k α_k·h_{k,r}·h_{k,t}ᵀ`.
pub fn reflection_matrix<T: Real>(dep: &Deployment<T>, ch: &ChannelSet<T>) -> CMatrix<T> {
    let g = dep.geometry;
    let mut out = CMatrix::zeros(g.n_rx, g.n_tx);
    for ((alpha, hr), ht) in dep.reflection.iter().zip(&ch.rx).zip(&ch.tx) {
        for j in 0..g.n_tx {
            let s = *alpha * ht[j];
            if s.is_zero() {
                continue;
            }
            for i in 0..g.n_rx {
                out[(i, j)] = out[(i, j)] + hr[i] * s;
            }
        }
    }
    out
}

/// `Y = G·X + Z` with `Z` i.i.d. `CN(0, σ²)` drawn block by block.
///
/// Noise columns are drawn in block order, so two calls on the same stream
/// with different `L_s` share their leading noise samples.
pub fn synthesize_echo<T: Real>(
    dep: &Deployment<T>,
    ch: &ChannelSet<T>,
    waveform: &CMatrix<T>,
    noise_variance: T,
    rng: &mut RandomSource,
) -> Result<EchoFrame<T>> {
    let g = dep.geometry;
    if waveform.rows() != g.n_tx {
        return Err(Error::Dimension(format!(
            "waveform has {} rows but the transmit sub-array has {}",
            waveform.rows(),
            g.n_tx
        )));
    }
    let mut samples = reflection_matrix(dep, ch).matmul(waveform)?;
    let var = noise_variance.to_f64().unwrap_or(0.0);
    if var > 0.0 {
        for l in 0..samples.cols() {
            for i in 0..samples.rows() {
                let z: Complex<T> = rng.complex_gaussian(var);
                samples[(i, l)] = samples[(i, l)] + z;
            }
        }
    }
    Ok(EchoFrame {
        samples,
        noise_variance,
    })
}
