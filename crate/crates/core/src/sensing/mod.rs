//! Sensing phase: waveform design, echo synthesis, MUSIC angle estimation
//! and least-squares reflection coefficients.

mod coefficients;
mod design;
mod echo;
mod music;

use std::io::Write;
use std::path::Path;

use num_complex::Complex;

pub use coefficients::{estimate_coefficients, kron_model, los_sensing_matrices, CoefficientEstimate, FALLBACK_RIDGE};
pub use design::{crb_of_design, design_sensing, SensingDesign};
pub use echo::{reflection_matrix, synthesize_echo, EchoFrame};
pub use music::{angle_grid, music_estimate_aoas, MusicEstimate, NoiseSubspace};

use crate::channel::ArrayGeometry;
use crate::error::{Error, Result};
use crate::numerics::CMatrix;
use crate::scalar::{to_f64, Real};

/// Angle and reflection-coefficient estimates of one sensing phase.
#[derive(Debug, Clone)]
pub struct TargetEstimates<T> {
    pub angles: Vec<T>,
    pub coefficients: Vec<Complex<T>>,
    /// `(θ, P_MUSIC(θ))` on the search grid.
    pub spectrum: Vec<(T, T)>,
    pub music_degraded: bool,
    pub ls_regularized: bool,
}

impl<T: Real> TargetEstimates<T> {
    pub fn degraded(&self) -> bool {
        self.music_degraded || self.ls_regularized
    }
}

/// MUSIC followed by least squares at the estimated angles.
pub fn estimate_targets<T: Real>(
    echo: &EchoFrame<T>,
    waveform: &CMatrix<T>,
    geometry: &ArrayGeometry,
    devices: usize,
    grid_step_deg: f64,
) -> Result<TargetEstimates<T>> {
    let music = music_estimate_aoas(echo, devices, grid_step_deg)?;
    let coeffs = estimate_coefficients(echo, waveform, geometry, &music.angles, T::zero())?;
    Ok(TargetEstimates {
        angles: music.angles,
        coefficients: coeffs.coefficients,
        spectrum: music.spectrum,
        music_degraded: music.degraded,
        ls_regularized: coeffs.regularized,
    })
}

/// Writes the spectrum as CSV with columns `theta_deg,music_power`.
pub fn write_spectrum_csv<T: Real>(spectrum: &[(T, T)], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(out, "theta_deg,music_power").map_err(io)?;
    for &(theta, p) in spectrum {
        writeln!(out, "{},{}", to_f64(theta).to_degrees(), to_f64(p)).map_err(io)?;
    }
    out.flush().map_err(io)
}
