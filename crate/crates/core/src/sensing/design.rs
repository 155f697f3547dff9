use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numerics::{hpd_inverse, CMatrix};
use crate::scalar::{cast, Real};

/// Sensing waveform `X = W̄·S̄` with an isotropic beamformer.
#[derive(Debug, Clone)]
pub struct SensingDesign<T> {
    /// `W̄ = √(P_t/N_t)·I`.
    pub beamformer: CMatrix<T>,
    /// Unit-modulus symbols with `S̄·S̄ᴴ/L_s = I`.
    pub symbols: CMatrix<T>,
    pub waveform: CMatrix<T>,
    pub power: T,
}

impl<T: Real> SensingDesign<T> {
    pub fn streams(&self) -> usize {
        self.beamformer.rows()
    }

    pub fn blocks(&self) -> usize {
        self.symbols.cols()
    }

    /// Sample covariance `X·Xᴴ/L_s`.
    pub fn sample_covariance(&self) -> CMatrix<T> {
        let x = &self.waveform;
        x.matmul(&x.adjoint())
            .expect("waveform is conformable with its adjoint")
            .scale(T::one() / cast::<T>(self.blocks() as f64))
    }
}

/// Builds the CRB-optimal sensing design: `R_x = (P_t/N_t)·I`.
///
/// Symbols are the first `n_t` rows of the `L_s`-point DFT matrix with unit
/// modulus entries, which makes the rows exactly orthogonal.
pub fn design_sensing<T: Real>(n_t: usize, blocks: usize, power: T) -> Result<SensingDesign<T>> {
    if n_t == 0 || blocks < n_t {
        return Err(Error::InfeasibleDesign { streams: n_t, blocks });
    }
    let two_pi = cast::<T>(2.0) * T::PI();
    let len = cast::<T>(blocks as f64);
    let symbols = CMatrix::from_fn(n_t, blocks, |i, l| {
        // reduce the index product mod L_s before scaling to keep the phase small
        let idx = cast::<T>(((i * l) % blocks) as f64);
        let phase = -two_pi * idx / len;
        Complex::new(phase.cos(), phase.sin())
    });
    let amplitude = (power / cast::<T>(n_t as f64)).sqrt();
    let beamformer = CMatrix::identity(n_t).scale(amplitude);
    let waveform = symbols.scale(amplitude);
    Ok(SensingDesign {
        beamformer,
        symbols,
        waveform,
        power,
    })
}

/// Cramér-Rao bound on the response matrix: `(σ²·N_r/L_s)·tr(R_x⁻¹)`.
pub fn crb_of_design<T: Real>(rx_cov: &CMatrix<T>, noise: T, n_r: usize, blocks: usize) -> Result<T> {
    if !rx_cov.is_square() {
        return Err(Error::Dimension("covariance must be square".into()));
    }
    let inverse = hpd_inverse(rx_cov)
        .ok_or_else(|| Error::Domain("sample covariance is not positive definite".into()))?;
    Ok(noise * cast::<T>(n_r as f64) / cast::<T>(blocks as f64) * inverse.trace().re)
}
