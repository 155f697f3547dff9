//! MUSIC angle-of-arrival estimation on the receive sub-array.

use std::cmp::Ordering;

use crate::channel::steering_vector;
use crate::error::Result;
use crate::numerics::{dot_conj, hermitian_eig, CMatrix};
use crate::scalar::{cast, Real};

use super::EchoFrame;

const GOLDEN_ITERATIONS: usize = 80;

/// Noise-subspace projector of a sample covariance.
#[derive(Debug, Clone)]
pub struct NoiseSubspace<T> {
    /// `N_r × (N_r − K)` orthonormal basis.
    pub basis: CMatrix<T>,
    /// Eigenvalues of the covariance, descending.
    pub eigenvalues: Vec<T>,
}

impl<T: Real> NoiseSubspace<T> {
    pub fn from_covariance(cov: &CMatrix<T>, sources: usize) -> Result<Self> {
        let eig = hermitian_eig(cov)?;
        let n = cov.rows();
        let k = sources.min(n);
        let basis = CMatrix::from_fn(n, n - k, |i, j| eig.vectors[(i, k + j)]);
        Ok(Self {
            basis,
            eigenvalues: eig.values,
        })
    }

    /// `‖U_nᴴ·a(θ)‖²`, the MUSIC denominator.
    pub fn projection(&self, theta: T) -> T {
        let a = steering_vector(theta, self.basis.rows(), 0);
        (0..self.basis.cols())
            .map(|j| dot_conj(self.basis.col_slice(j), a.as_slice()).norm_sqr())
            .sum()
    }

    /// `P_MUSIC(θ) = 1/(a_rᴴ·U_n·U_nᴴ·a_r)`.
    pub fn pseudo_spectrum(&self, theta: T) -> T {
        T::one() / self.projection(theta).max(T::min_positive_value())
    }
}

/// MUSIC output: angle estimates plus the sampled spectrum.
#[derive(Debug, Clone)]
pub struct MusicEstimate<T> {
    /// Estimated angles, ordered by peak height.
    pub angles: Vec<T>,
    /// `(θ, P_MUSIC(θ))` on the search grid.
    pub spectrum: Vec<(T, T)>,
    pub eigenvalues: Vec<T>,
    /// Fewer than `K` local maxima were found and the remainder was filled
    /// with the highest remaining grid samples.
    pub degraded: bool,
}

/// Uniform grid over `[−π/2, π/2]` with the given spacing in degrees.
pub fn angle_grid<T: Real>(step_deg: f64) -> Vec<T> {
    let points = (180.0 / step_deg).round() as usize;
    (0..=points)
        .map(|i| cast::<T>((-90.0 + 180.0 * i as f64 / points as f64).to_radians()))
        .collect()
}

/// Estimates `K` angles from the `K` highest interior local maxima of the
/// MUSIC spectrum, each refined by golden-section search within one grid
/// step on either side.
pub fn music_estimate_aoas<T: Real>(echo: &EchoFrame<T>, sources: usize, grid_step_deg: f64) -> Result<MusicEstimate<T>> {
    let subspace = NoiseSubspace::from_covariance(&echo.sample_covariance(), sources)?;
    let grid = angle_grid::<T>(grid_step_deg);
    let step = cast::<T>(grid_step_deg.to_radians());
    let values: Vec<T> = grid.iter().map(|&theta| subspace.pseudo_spectrum(theta)).collect();

    let picked = pick_peaks(&values, sources);
    let half_pi = T::FRAC_PI_2();
    let mut angles: Vec<T> = picked
        .maxima
        .iter()
        .map(|&i| {
            let lo = (grid[i] - step).max(-half_pi);
            let hi = (grid[i] + step).min(half_pi);
            golden_section_min(|theta| subspace.projection(theta), lo, hi)
        })
        .collect();
    angles.extend(picked.fill.iter().map(|&i| grid[i]));
    let degraded = !picked.fill.is_empty();

    Ok(MusicEstimate {
        angles,
        spectrum: grid.into_iter().zip(values).collect(),
        eigenvalues: subspace.eigenvalues,
        degraded,
    })
}

/// Grid indices chosen as angle estimates.
#[derive(Debug, Clone, PartialEq, Eq)]
struct PeakPick {
    /// Strict interior local maxima, highest first.
    maxima: Vec<usize>,
    /// Highest remaining samples used when there are too few maxima.
    fill: Vec<usize>,
}

fn pick_peaks<T: Real>(values: &[T], count: usize) -> PeakPick {
    let by_height = |a: &usize, b: &usize| values[*b].partial_cmp(&values[*a]).unwrap_or(Ordering::Equal);
    let mut maxima: Vec<usize> = (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] > values[i + 1])
        .collect();
    maxima.sort_by(by_height);
    maxima.truncate(count);
    let mut rest: Vec<usize> = (0..values.len()).filter(|i| !maxima.contains(i)).collect();
    rest.sort_by(by_height);
    rest.truncate(count - maxima.len());
    PeakPick { maxima, fill: rest }
}

/// Minimizer of a unimodal `f` on `[lo, hi]`.
fn golden_section_min<T: Real>(f: impl Fn(T) -> T, mut lo: T, mut hi: T) -> T {
    let inv_phi = cast::<T>((5f64.sqrt() - 1.0) / 2.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo <= T::epsilon() * (T::one() + lo.abs()) {
            break;
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ArrayGeometry, ChannelSet, Deployment};
    use crate::numerics::RandomSource;
    use crate::sensing::{design_sensing, synthesize_echo};
    use num_complex::Complex;

    fn noiseless_echo(angles_deg: &[f64], n_tx: usize, n_rx: usize) -> EchoFrame<f64> {
        let g = ArrayGeometry::new(n_tx, n_rx, 0.125);
        let angles = angles_deg.iter().map(|a| a.to_radians()).collect();
        let distances = vec![6.0; angles_deg.len()];
        let dep = Deployment::from_parts(g, angles, distances, Complex::new(0.6, 0.8), f64::INFINITY).unwrap();
        let ch = ChannelSet::new(&dep);
        let x = design_sensing(n_tx, 64, 1.0).unwrap().waveform;
        synthesize_echo(&dep, &ch, &x, 0.0, &mut RandomSource::new(0, 0)).unwrap()
    }

    #[test]
    fn grid_covers_half_circle() {
        let g = angle_grid::<f64>(0.1);
        assert_eq!(g.len(), 1801);
        assert!((g[0] + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((g[1800] - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn single_target_noiseless() {
        let echo = noiseless_echo(&[20.0], 12, 24);
        let est = music_estimate_aoas(&echo, 1, 0.1).unwrap();
        assert!(!est.degraded);
        assert!((est.angles[0].to_degrees() - 20.0).abs() <= 0.01);
    }

    #[test]
    fn two_targets_noiseless() {
        let echo = noiseless_echo(&[-40.0, 40.0], 12, 24);
        let est = music_estimate_aoas(&echo, 2, 0.1).unwrap();
        let mut got: Vec<f64> = est.angles.iter().map(|a| a.to_degrees()).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((got[0] + 40.0).abs() < 0.05, "{got:?}");
        assert!((got[1] - 40.0).abs() < 0.05, "{got:?}");
    }

    #[test]
    fn rank_k_covariance() {
        let echo = noiseless_echo(&[-30.0, 10.0, 55.0], 12, 24);
        let cov = echo.sample_covariance();
        let eig = hermitian_eig(&cov).unwrap();
        assert!(eig.values[2] > 1e-6 * eig.values[0]);
        assert!(eig.values[3..].iter().all(|&l| l.abs() < 1e-10 * eig.values[0]));
    }

    #[test]
    fn spectrum_invariant_to_unit_phase() {
        let mut echo = noiseless_echo(&[-10.0, 35.0], 12, 24);
        let mut rng = RandomSource::new(3, 3);
        for z in 0..echo.samples.len() {
            let n: Complex<f64> = rng.complex_gaussian(1e-3);
            echo.samples[z] = echo.samples[z] + n;
        }
        let base = music_estimate_aoas(&echo, 2, 0.5).unwrap();
        let rotated = EchoFrame {
            samples: echo.samples.scale_complex(Complex::from_polar(1.0, 1.234)),
            noise_variance: echo.noise_variance,
        };
        let rot = music_estimate_aoas(&rotated, 2, 0.5).unwrap();
        for ((_, p), (_, q)) in base.spectrum.iter().zip(&rot.spectrum) {
            assert!((p - q).abs() <= 1e-8 * p.abs());
        }
    }

    #[test]
    fn peaks_ranked_by_height() {
        let v = [0.0, 3.0, 1.0, 5.0, 2.0, 4.0, 0.0];
        let p = pick_peaks(&v, 2);
        assert_eq!(p.maxima, vec![3, 5]);
        assert!(p.fill.is_empty());
    }

    #[test]
    fn monotone_spectrum_is_filled() {
        // no interior maximum at all, so both slots come from the fill
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        let p = pick_peaks(&v, 2);
        assert!(p.maxima.is_empty());
        assert_eq!(p.fill, vec![4, 3]);
    }

    #[test]
    fn plateau_is_not_a_strict_peak() {
        let v = [0.0, 2.0, 2.0, 0.0, 1.0, 0.0];
        let p = pick_peaks(&v, 2);
        assert_eq!(p.maxima, vec![4]);
        assert_eq!(p.fill.len(), 1);
        assert!(p.fill[0] == 1 || p.fill[0] == 2);
    }

    #[test]
    fn every_estimate_stays_in_range() {
        let samples = CMatrix::from_fn(6, 40, |_, _| Complex::new(0.0f64, 0.0));
        let echo = EchoFrame { samples, noise_variance: 0.0 };
        let est: MusicEstimate<f64> = music_estimate_aoas(&echo, 2, 1.0).unwrap();
        assert_eq!(est.angles.len(), 2);
        assert!(est.angles.iter().all(|a| a.abs() <= std::f64::consts::FRAC_PI_2));
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let x = golden_section_min(|x: f64| (x - 0.3).powi(2), 0.0, 1.0);
        assert!((x - 0.3).abs() < 1e-7);
    }
}
