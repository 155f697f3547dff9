use num_complex::Complex;

use crate::channel::{steering_vector, ArrayGeometry};
use crate::error::{Error, Result};
use crate::numerics::{ls_solve, CMatrix};
use crate::scalar::{cast, Real};

use super::EchoFrame;

/// Relative ridge applied when the plain least-squares system is refused.
pub const FALLBACK_RIDGE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct CoefficientEstimate<T> {
    /// Diagonal of the estimated `Ĉ`.
    pub coefficients: Vec<Complex<T>>,
    /// Full `K×K` estimate before diagonal selection.
    pub full: CMatrix<T>,
    /// The fallback ridge was needed.
    pub regularized: bool,
}

/// LoS sensing matrices `(Ĥ_t, Ĥ_r)` at the given angles.
///
/// Transmit vectors start at array element 0; receive vectors start at the
/// first receive element, so a pure-LoS echo is matched without a phase
/// offset.
pub fn los_sensing_matrices<T: Real>(geometry: &ArrayGeometry, angles: &[T]) -> (CMatrix<T>, CMatrix<T>) {
    let tx: Vec<_> = angles.iter().map(|&t| steering_vector(t, geometry.n_tx, 0)).collect();
    let rx: Vec<_> = angles
        .iter()
        .map(|&t| steering_vector(t, geometry.n_rx, geometry.rx_anchor()))
        .collect();
    (
        CMatrix::hstack(&tx).expect("equal-length steering vectors"),
        CMatrix::hstack(&rx).expect("equal-length steering vectors"),
    )
}

/// The vectorized model matrix `B̄ = Bᵀ ⊗ Ĥ_r` with `B = Ĥ_tᵀ·X`.
pub fn kron_model<T: Real>(h_t: &CMatrix<T>, h_r: &CMatrix<T>, waveform: &CMatrix<T>) -> Result<CMatrix<T>> {
    let b = h_t.transpose().matmul(waveform)?;
    Ok(b.transpose().kron(h_r))
}

/// Least-squares reflection coefficients at fixed angle estimates.
///
/// Solves `Vec(Y) = B̄·Vec(C)` for the full `K×K` matrix `C` and keeps its
/// diagonal. A refused (ill-conditioned) solve is retried with ridge
/// `FALLBACK_RIDGE·‖B̄‖_F²` and flagged.
pub fn estimate_coefficients<T: Real>(
    echo: &EchoFrame<T>,
    waveform: &CMatrix<T>,
    geometry: &ArrayGeometry,
    angles: &[T],
    ridge: T,
) -> Result<CoefficientEstimate<T>> {
    let k = angles.len();
    if echo.n_rx() != geometry.n_rx || waveform.rows() != geometry.n_tx || waveform.cols() != echo.blocks() {
        return Err(Error::Dimension("echo, waveform and geometry disagree".into()));
    }
    if echo.blocks() * echo.n_rx() < k * k {
        return Err(Error::Dimension(format!(
            "{} echo samples cannot determine {} coefficients",
            echo.blocks() * echo.n_rx(),
            k * k
        )));
    }
    let (h_t, h_r) = los_sensing_matrices(geometry, angles);
    let model = kron_model(&h_t, &h_r, waveform)?;
    let y = echo.samples.vec();

    let (solution, regularized) = match ls_solve(&model, &y, ridge) {
        Ok(x) => (x, false),
        Err(Error::IllConditioned { .. }) => {
            let fallback = cast::<T>(FALLBACK_RIDGE) * model.frobenius_norm_sqr();
            (ls_solve(&model, &y, fallback.max(ridge))?, true)
        }
        Err(e) => return Err(e),
    };
    let full = CMatrix::from_col_major(k, k, solution.as_slice().to_vec())?;
    let coefficients = (0..k).map(|i| full[(i, i)]).collect();
    Ok(CoefficientEstimate {
        coefficients,
        full,
        regularized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelSet, Deployment};
    use crate::numerics::{dot_conj, RandomSource};
    use crate::sensing::{design_sensing, synthesize_echo};

    fn scene(angles_deg: &[f64], distances: &[f64]) -> (Deployment<f64>, ChannelSet<f64>) {
        let g = ArrayGeometry::new(12, 24, 0.125);
        let angles = angles_deg.iter().map(|a| a.to_radians()).collect();
        let dep = Deployment::from_parts(g, angles, distances.to_vec(), Complex::new(-0.4, 0.9), f64::INFINITY).unwrap();
        let ch = ChannelSet::new(&dep);
        (dep, ch)
    }

    #[test]
    fn planted_coefficients_recovered() {
        let (dep, ch) = scene(&[-35.0, 12.0, 61.0], &[5.0, 9.0, 14.0]);
        let x = design_sensing(12, 40, 10.0).unwrap().waveform;
        let echo = synthesize_echo(&dep, &ch, &x, 0.0, &mut RandomSource::new(0, 0)).unwrap();
        let est = estimate_coefficients(&echo, &x, &dep.geometry, &dep.angles, 0.0).unwrap();
        assert!(!est.regularized);
        for (a, b) in est.coefficients.iter().zip(&dep.reflection) {
            assert!((a - b).norm() / b.norm() < 1e-8);
        }
        // off-diagonal couplings vanish for a diagonal truth
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(est.full[(i, j)].norm() < 1e-8 * dep.reflection[0].norm());
                }
            }
        }
    }

    #[test]
    fn single_target_closed_form() {
        let (dep, ch) = scene(&[25.0], &[7.0]);
        let x = design_sensing(12, 30, 1.0).unwrap().waveform;
        let echo = synthesize_echo(&dep, &ch, &x, 1e-12, &mut RandomSource::new(5, 5)).unwrap();
        let est = estimate_coefficients(&echo, &x, &dep.geometry, &dep.angles, 0.0).unwrap();
        let (h_t, h_r) = los_sensing_matrices(&dep.geometry, &dep.angles);
        let b = kron_model(&h_t, &h_r, &x).unwrap();
        let y = echo.samples.vec();
        let closed = dot_conj(b.as_slice(), y.as_slice()) / b.frobenius_norm_sqr();
        assert!((est.coefficients[0] - closed).norm() <= 1e-10 * closed.norm());
    }

    #[test]
    fn linear_in_echo() {
        let (dep, ch) = scene(&[-20.0, 30.0], &[6.0, 8.0]);
        let x = design_sensing(12, 24, 1.0).unwrap().waveform;
        let echo = synthesize_echo(&dep, &ch, &x, 1e-14, &mut RandomSource::new(2, 2)).unwrap();
        let base = estimate_coefficients(&echo, &x, &dep.geometry, &dep.angles, 0.0).unwrap();
        let scaled_echo = EchoFrame { samples: echo.samples.scale(3.5), noise_variance: echo.noise_variance };
        let scaled = estimate_coefficients(&scaled_echo, &x, &dep.geometry, &dep.angles, 0.0).unwrap();
        for (a, b) in base.coefficients.iter().zip(&scaled.coefficients) {
            assert!((a * 3.5 - b).norm() <= 1e-10 * b.norm());
        }
    }

    #[test]
    fn coincident_angles_fall_back_to_ridge() {
        let (dep, ch) = scene(&[10.0, 30.0], &[6.0, 8.0]);
        let x = design_sensing(12, 24, 1.0).unwrap().waveform;
        let echo = synthesize_echo(&dep, &ch, &x, 0.0, &mut RandomSource::new(0, 0)).unwrap();
        let same = [0.2f64, 0.2];
        let est = estimate_coefficients(&echo, &x, &dep.geometry, &same, 0.0).unwrap();
        assert!(est.regularized);
        assert!(est.coefficients.iter().all(|c| c.re.is_finite() && c.im.is_finite()));
    }
}
