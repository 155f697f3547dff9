//! Array geometry, free-space propagation and Rician fading.
//!
//! A single half-wavelength ULA of `N` elements charges with all of them;
//! during sensing the first `N_t` elements transmit and the last `N_r`
//! receive.

use num_complex::Complex;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, RandomSource};
use crate::scalar::{cast, Real};

/// Element spacing in wavelengths.
pub const ELEMENT_SPACING: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub n_total: usize,
    pub n_tx: usize,
    pub n_rx: usize,
    pub wavelength: f64,
}

impl ArrayGeometry {
    pub fn new(n_tx: usize, n_rx: usize, wavelength: f64) -> Self {
        Self {
            n_total: n_tx + n_rx,
            n_tx,
            n_rx,
            wavelength,
        }
    }

    pub fn from_config(cfg: &SystemConfig) -> Self {
        Self::new(cfg.n_tx, cfg.n_rx, cfg.wavelength())
    }

    /// Index of the first receive element inside the full array.
    pub fn rx_anchor(&self) -> usize {
        self.n_tx
    }
}

/// ULA response `a_m = exp(−jπ(anchor + m)·sin θ)` for `m = 0..n`.
///
/// `anchor` is the position of the first element within a larger array, so
/// sub-array vectors stay phase-consistent with the full-array one.
pub fn steering_vector<T: Real>(theta: T, n: usize, anchor: usize) -> CMatrix<T> {
    let k = -T::PI() * theta.sin();
    CMatrix::from_fn(n, 1, |m, _| {
        let phase = k * cast::<T>((anchor + m) as f64);
        Complex::new(phase.cos(), phase.sin())
    })
}

/// Free-space amplitude gain `λ/(4πd)`.
pub fn path_gain<T: Real>(distance: T, wavelength: T) -> Result<T> {
    if !(distance > T::zero()) {
        return Err(Error::Domain(format!("distance must be positive, got {distance}")));
    }
    Ok(wavelength / (cast::<T>(4.0) * T::PI() * distance))
}

/// `h = √(κ/(κ+1))·a(θ) + √(1/(κ+1))·b`; `κ = ∞` gives the pure LoS vector.
pub fn rician_channel<T: Real>(theta: T, kappa: T, b: &CMatrix<T>) -> CMatrix<T> {
    let a = steering_vector(theta, b.len(), 0);
    if kappa.is_infinite() {
        return a;
    }
    let los = (kappa / (kappa + T::one())).sqrt();
    let nlos = (T::one() / (kappa + T::one())).sqrt();
    &a.scale(los) + &b.scale(nlos)
}

/// Ground truth of one random realization.
#[derive(Debug, Clone)]
pub struct Deployment<T> {
    /// Device angles in radians.
    pub angles: Vec<T>,
    pub distances: Vec<T>,
    /// `β_k = λ/(4πd_k)`.
    pub path_gains: Vec<T>,
    /// Radar cross section shared by every device.
    pub rcs: Complex<T>,
    /// Round-trip reflection coefficients `α_k = ρ·β_k²`.
    pub reflection: Vec<Complex<T>>,
    /// NLoS components `b_k`, one `N`-vector per device.
    pub nlos: Vec<CMatrix<T>>,
    /// Linear Rician factor.
    pub kappa: T,
    pub geometry: ArrayGeometry,
}

impl<T: Real> Deployment<T> {
    pub fn devices(&self) -> usize {
        self.angles.len()
    }

    /// Deployment with explicit geometry and no NLoS draws (zero vectors).
    pub fn from_parts(
        geometry: ArrayGeometry,
        angles: Vec<T>,
        distances: Vec<T>,
        rcs: Complex<T>,
        kappa: T,
    ) -> Result<Self> {
        if angles.len() != distances.len() {
            return Err(Error::Dimension("angles and distances differ in length".into()));
        }
        let lambda = cast::<T>(geometry.wavelength);
        let path_gains = distances
            .iter()
            .map(|&d| path_gain(d, lambda))
            .collect::<Result<Vec<_>>>()?;
        let reflection = path_gains.iter().map(|&b| rcs * (b * b)).collect();
        let nlos = vec![CMatrix::zeros(geometry.n_total, 1); angles.len()];
        Ok(Self {
            angles,
            distances,
            path_gains,
            rcs,
            reflection,
            nlos,
            kappa,
            geometry,
        })
    }
}

/// Draws one deployment: angles and distances uniform on the configured
/// ranges, one `CN(0,1)` RCS shared by all devices, and `CN(0, I_N)` NLoS
/// vectors.
pub fn sample_deployment<T: Real>(cfg: &SystemConfig, rng: &mut RandomSource) -> Deployment<T> {
    let k = cfg.devices;
    let geometry = ArrayGeometry::from_config(cfg);
    let (a0, a1) = cfg.angle_range_deg;
    let (d0, d1) = cfg.distance_range_m;
    let mut angles = Vec::with_capacity(k);
    let mut distances = Vec::with_capacity(k);
    for _ in 0..k {
        angles.push(cast::<T>(rng.uniform(a0, a1).to_radians()));
        distances.push(cast::<T>(rng.uniform(d0, d1)));
    }
    let rcs = rng.complex_gaussian(1.0);
    let kappa = cast::<T>(cfg.kappa_linear());
    let mut dep = Deployment::from_parts(geometry, angles, distances, rcs, kappa)
        .expect("validated configuration yields a valid deployment");
    for b in dep.nlos.iter_mut() {
        *b = CMatrix::from_fn(geometry.n_total, 1, |_, _| rng.complex_gaussian(1.0));
    }
    dep
}

/// Small-scale channels of every device plus the sensing sub-array slices.
#[derive(Debug, Clone)]
pub struct ChannelSet<T> {
    /// Full channels `h_k` (unit-scale, `N` entries).
    pub full: Vec<CMatrix<T>>,
    /// First `N_t` entries of each `h_k`.
    pub tx: Vec<CMatrix<T>>,
    /// Last `N_r` entries of each `h_k`.
    pub rx: Vec<CMatrix<T>>,
    /// Downlink channels `β_k·h_k`.
    pub scaled: Vec<CMatrix<T>>,
}

impl<T: Real> ChannelSet<T> {
    pub fn new(dep: &Deployment<T>) -> Self {
        let g = dep.geometry;
        let full: Vec<CMatrix<T>> = dep
            .angles
            .iter()
            .zip(&dep.nlos)
            .map(|(&theta, b)| rician_channel(theta, dep.kappa, b))
            .collect();
        let tx = full.iter().map(|h| h.row_block(0, g.n_tx)).collect();
        let rx = full.iter().map(|h| h.row_block(g.n_tx, g.n_rx)).collect();
        let scaled = full.iter().zip(&dep.path_gains).map(|(h, &beta)| h.scale(beta)).collect();
        Self { full, tx, rx, scaled }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{dot_conj, draw_complex_gaussian};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn broadside_is_all_ones() {
        let a = steering_vector(0.0f64, 4, 0);
        assert!(a.as_slice().iter().all(|z| (z - Complex::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn thirty_degrees_two_elements() {
        let a = steering_vector(PI / 6.0, 2, 0);
        assert!((a[0] - Complex::new(1.0, 0.0)).norm() < 1e-15);
        assert!((a[1] - Complex::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn broadside_and_thirty_degrees_are_orthogonal() {
        // 1 + j − 1 − j = 0 with four elements
        let a0 = steering_vector(0.0f64, 4, 0);
        let a1 = steering_vector(PI / 6.0, 4, 0);
        assert!(dot_conj(a0.as_slice(), a1.as_slice()).norm() < 1e-14);
    }

    #[test]
    fn path_gain_values() {
        let lambda = 0.125;
        assert!((path_gain(lambda / (4.0 * PI), lambda).unwrap() - 1.0).abs() < 1e-15);
        let b5 = path_gain(5.0, lambda).unwrap();
        assert!((b5 - 1.9894e-3).abs() < 1e-7, "{b5}");
        let b10 = path_gain(10.0, lambda).unwrap();
        assert!((b5 / b10 - 2.0).abs() < 1e-14);
        assert!(path_gain(0.0, lambda).is_err());
        assert!(path_gain(-1.0, lambda).is_err());
    }

    #[test]
    fn rician_limits() {
        let mut rng = RandomSource::new(3, 0);
        let b: CMatrix<f64> = draw_complex_gaussian(&mut rng, 8, 1.0);
        let theta = 0.3;
        let a = steering_vector(theta, 8, 0);
        let los = rician_channel(theta, 1e12, &b);
        assert!((&los - &a).frobenius_norm() < 1e-6 * b.frobenius_norm().max(1.0));
        assert_eq!(rician_channel(theta, f64::INFINITY, &b), a);
        let nlos = rician_channel(theta, 0.0, &b);
        assert!((&nlos - &b).frobenius_norm() < 1e-15);
        // b = a with κ = 1: (√0.5 + √0.5)·a = √2·a
        let both = rician_channel(theta, 1.0, &a);
        assert!((&both - &a.scale(2f64.sqrt())).frobenius_norm() < 1e-14);
    }

    #[test]
    fn point_ranges_are_deterministic() {
        let cfg = SystemConfig {
            devices: 1,
            angle_range_deg: (12.5, 12.5),
            distance_range_m: (7.0, 7.0),
            ..SystemConfig::default()
        };
        let dep: Deployment<f64> = sample_deployment(&cfg, &mut RandomSource::new(5, 0));
        assert!((dep.angles[0] - 12.5f64.to_radians()).abs() < 1e-15);
        assert_eq!(dep.distances[0], 7.0);
        let beta = dep.path_gains[0];
        assert!((dep.reflection[0] - dep.rcs * beta * beta).norm() <= 1e-14 * dep.reflection[0].norm());
    }

    #[test]
    fn deployment_moments() {
        let cfg = SystemConfig { devices: 1, ..SystemConfig::default() };
        let mut rng = RandomSource::new(99, 0);
        let mut theta_sum = 0.0;
        let mut rcs_power = 0.0;
        let n = 10_000;
        for _ in 0..n {
            let dep: Deployment<f64> = sample_deployment(&cfg, &mut rng);
            theta_sum += dep.angles[0].to_degrees();
            rcs_power += dep.rcs.norm_sqr();
            assert!(dep.distances[0] >= 5.0 && dep.distances[0] <= 15.0);
            assert!(dep.angles[0].abs() <= 80f64.to_radians() + 1e-12);
        }
        assert!((theta_sum / n as f64).abs() < 2.0);
        assert!((rcs_power / n as f64 - 1.0).abs() < 0.05);
    }

    #[test]
    fn shared_rcs_across_devices() {
        let cfg = SystemConfig { devices: 4, n_tx: 12, n_rx: 24, ..SystemConfig::default() };
        let dep: Deployment<f64> = sample_deployment(&cfg, &mut RandomSource::new(1, 1));
        for (alpha, beta) in dep.reflection.iter().zip(&dep.path_gains) {
            assert!((alpha / (beta * beta) - dep.rcs).norm() < 1e-9 * dep.rcs.norm());
        }
    }

    #[test]
    fn mean_channel_energy_is_n() {
        for kappa_db in [20.0, 0.0, -10.0] {
            let cfg = SystemConfig { devices: 1, kappa_db, ..SystemConfig::default() };
            let mut rng = RandomSource::new(7, 2);
            let trials = 4000;
            let mut acc = 0.0;
            for _ in 0..trials {
                let dep: Deployment<f64> = sample_deployment(&cfg, &mut rng);
                acc += ChannelSet::new(&dep).full[0].frobenius_norm_sqr();
            }
            let mean = acc / trials as f64;
            assert!((mean / 36.0 - 1.0).abs() < 0.03, "κ={kappa_db} dB mean {mean}");
        }
    }

    #[test]
    fn pure_los_receive_slice_is_scaled_steering() {
        let cfg = SystemConfig { devices: 3, kappa_db: f64::INFINITY, ..SystemConfig::default() };
        let dep: Deployment<f64> = sample_deployment(&cfg, &mut RandomSource::new(2, 0));
        let ch = ChannelSet::new(&dep);
        for (k, hr) in ch.rx.iter().enumerate() {
            let a = steering_vector(dep.angles[k], cfg.n_rx, 0);
            let scalar = hr[0] / a[0];
            assert!((scalar.norm() - 1.0).abs() < 1e-12);
            assert!((hr - &a.scale_complex(scalar)).frobenius_norm() < 1e-10);
            assert!((ch.full[k].frobenius_norm_sqr() - 36.0).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn conjugate_symmetry(theta in -1.57f64..1.57, n in 1usize..40) {
            let plus = steering_vector(theta, n, 0);
            let minus = steering_vector(-theta, n, 0);
            prop_assert!((&minus - &plus.conj()).frobenius_norm() < 1e-12);
            prop_assert!((plus.frobenius_norm_sqr() - n as f64).abs() < 1e-10);
        }

        #[test]
        fn sub_arrays_tile_the_channel(seed in any::<u64>(), kappa_db in -10.0f64..30.0) {
            let cfg = SystemConfig { kappa_db, ..SystemConfig::default() };
            let dep: Deployment<f64> = sample_deployment(&cfg, &mut RandomSource::new(seed, 0));
            let ch = ChannelSet::new(&dep);
            for k in 0..dep.devices() {
                let joined = CMatrix::vstack(&[ch.tx[k].clone(), ch.rx[k].clone()]).unwrap();
                prop_assert_eq!(&joined, &ch.full[k]);
            }
        }
    }
}
