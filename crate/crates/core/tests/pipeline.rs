//! End-to-end protocol properties on small scenarios.

use num_complex::Complex;
use proptest::prelude::*;
use stc_core::beamforming::aa_is_power;
use stc_core::channel::{ArrayGeometry, ChannelSet, Deployment};
use stc_core::config::SystemConfig;
use stc_core::protocol::{estimation_errors, realize, run_stc, trial_stream, StreamPurpose};
use stc_core::sensing::TargetEstimates;

fn noiseless(n_tx: usize, n_rx: usize, devices: usize) -> SystemConfig {
    SystemConfig {
        n_antennas: n_tx + n_rx,
        n_tx,
        n_rx,
        devices,
        blocks: 200,
        noise_dbm: f64::NEG_INFINITY,
        kappa_db: f64::INFINITY,
        trials: 1,
        ..SystemConfig::default()
    }
}

fn fixed_deployment(cfg: &SystemConfig, angles_deg: &[f64], distances: &[f64]) -> (Deployment<f64>, ChannelSet<f64>) {
    let g = ArrayGeometry::from_config(cfg);
    let angles = angles_deg.iter().map(|a| a.to_radians()).collect();
    let dep = Deployment::from_parts(g, angles, distances.to_vec(), Complex::new(0.8, -0.6), f64::INFINITY).unwrap();
    let ch = ChannelSet::new(&dep);
    (dep, ch)
}

#[test]
fn perfect_sensing_gives_matched_filter_power() {
    let cfg = noiseless(12, 24, 1);
    let (dep, ch) = fixed_deployment(&cfg, &[23.0], &[8.0]);
    let mut rng = trial_stream(cfg.seed, 0, StreamPurpose::Noise);
    let out = run_stc(&cfg, &dep, &ch, 0.5, &mut rng).unwrap();
    let beta = 2.998e8 / 2.4e9 / (4.0 * std::f64::consts::PI * 8.0);
    let expect = beta * beta * cfg.tx_power_watts() * 36.0;
    assert!((out.charging_power[0] - expect).abs() <= 1e-6 * expect);
    assert!(!out.degraded && !out.fallback);
}

#[test]
fn two_devices_recovered_noiselessly() {
    let cfg = noiseless(12, 24, 2);
    let (dep, ch) = fixed_deployment(&cfg, &[-35.0, 20.0], &[6.0, 12.0]);
    let mut rng = trial_stream(cfg.seed, 0, StreamPurpose::Noise);
    let out = run_stc(&cfg, &dep, &ch, 0.3, &mut rng).unwrap();
    let e = out.errors.unwrap();
    assert!(e.angle.to_degrees() < 0.05);
    assert!(e.coefficient < 1e-6);
}

#[test]
fn full_sensing_reproduces_aa_is_on_desk_trials() {
    let cfg = SystemConfig {
        trials: 20,
        ..SystemConfig::desk()
    };
    for trial in 0..cfg.trials {
        let (dep, ch) = realize::<f64>(&cfg, trial);
        let mut rng = trial_stream(cfg.seed, trial, StreamPurpose::Noise);
        let out = run_stc(&cfg, &dep, &ch, 1.0, &mut rng).unwrap();
        for k in 0..dep.devices() {
            let aa = aa_is_power(&ch.tx[k], dep.path_gains[k], cfg.tx_power_watts(), cfg.blocks);
            assert_eq!(out.total_power[k].to_bits(), aa.to_bits(), "trial {trial} device {k}");
        }
    }
}

#[test]
fn common_random_numbers_replay() {
    let cfg = SystemConfig {
        blocks: 80,
        ..SystemConfig::desk()
    };
    let (dep, ch) = realize::<f64>(&cfg, 3);
    let run = || {
        let mut rng = trial_stream(cfg.seed, 3, StreamPurpose::Noise);
        run_stc(&cfg, &dep, &ch, 0.4, &mut rng).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.total_power, b.total_power);
    assert_eq!(a.estimates.unwrap().angles, b.estimates.unwrap().angles);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn energy_accounting_is_exact(gamma in 0.0f64..=1.0, trial in 0usize..50) {
        let cfg = SystemConfig { blocks: 60, ..SystemConfig::desk() };
        let (dep, ch) = realize::<f64>(&cfg, trial);
        let mut rng = trial_stream(cfg.seed, trial, StreamPurpose::Noise);
        let out = run_stc(&cfg, &dep, &ch, gamma, &mut rng).unwrap();
        prop_assert_eq!(out.sensing_blocks, (gamma * 60.0 + 1e-9).floor() as usize);
        prop_assert_eq!(out.sensing_blocks + out.charging_blocks, 60);
        prop_assert_eq!(out.fallback, out.sensing_blocks < cfg.n_tx);
        for k in 0..dep.devices() {
            let p = out.sensing_blocks as f64 * out.sensing_power[k] + out.charging_blocks as f64 * out.charging_power[k];
            prop_assert_eq!(out.total_power[k], p);
            prop_assert!(out.sensing_power[k] >= 0.0 && out.charging_power[k] >= 0.0);
        }
    }

    #[test]
    fn errors_do_not_depend_on_estimate_order(
        shift in prop::collection::vec(-0.05f64..0.05, 3),
        scale in prop::collection::vec(0.5f64..1.5, 3),
        rotate in 0usize..3,
    ) {
        let cfg = noiseless(8, 16, 3);
        let (dep, _) = fixed_deployment(&cfg, &[-50.0, 5.0, 60.0], &[6.0, 9.0, 13.0]);
        let angles: Vec<f64> = dep.angles.iter().zip(&shift).map(|(a, s)| a + s).collect();
        let coeffs: Vec<Complex<f64>> = dep.reflection.iter().zip(&scale).map(|(a, s)| a * s).collect();
        let est = |a: Vec<f64>, c: Vec<Complex<f64>>| TargetEstimates {
            angles: a,
            coefficients: c,
            spectrum: vec![],
            music_degraded: false,
            ls_regularized: false,
        };
        let base = estimation_errors(&dep, &est(angles.clone(), coeffs.clone()));
        let mut a2 = angles.clone();
        let mut c2 = coeffs.clone();
        a2.rotate_left(rotate);
        c2.rotate_left(rotate);
        let moved = estimation_errors(&dep, &est(a2, c2));
        prop_assert!((base.angle - moved.angle).abs() <= 1e-15);
        prop_assert!((base.coefficient - moved.coefficient).abs() <= 1e-15);
        prop_assert!((base.channel - moved.channel).abs() <= 1e-15);
        // oracle: per-device mean of |shift|, since shifts are smaller than the spacing
        let mean_shift = shift.iter().map(|s| s.abs()).sum::<f64>() / 3.0;
        prop_assert!((base.angle - mean_shift).abs() <= 1e-12);
        let mean_coeff = scale.iter().map(|s| (s - 1.0).abs()).sum::<f64>() / 3.0;
        prop_assert!((base.coefficient - mean_coeff).abs() <= 1e-12);
    }
}
