//! One sense-then-charge round per realization, its energy accounting and
//! the Monte-Carlo search over the sensing fraction `γ`.
//!
//! Randomness is keyed by `(seed, trial, purpose)`: the deployment and the
//! receiver noise of trial `i` come from fixed streams, so every `γ` on the
//! grid and every benchmark sees the same realization (common random
//! numbers).

use itertools::Itertools;
use num_complex::Complex;
use rayon::prelude::*;

use crate::beamforming::{
    aa_is_power, estimated_charging_matrices, isotropic_block_power, pk_benchmark, received_power, solve_maxmin,
    BeamSolution,
};
use crate::channel::{sample_deployment, steering_vector, ChannelSet, Deployment};
use crate::config::{AaIsDenominator, SystemConfig};
use crate::error::{Error, Result};
use crate::numerics::RandomSource;
use crate::scalar::{cast, to_f64, Real};
use crate::sensing::{design_sensing, estimate_targets, synthesize_echo, TargetEstimates};

/// Stream slots per trial; see [`trial_stream`].
const STREAMS_PER_TRIAL: u64 = 8;

/// Purpose of a random stream within one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    Deployment = 0,
    Noise = 1,
}

/// Random source for `purpose` in trial `trial`.
pub fn trial_stream(seed: u64, trial: usize, purpose: StreamPurpose) -> RandomSource {
    RandomSource::new(seed, trial as u64 * STREAMS_PER_TRIAL + purpose as u64)
}

/// Deployment and channels of trial `trial`.
pub fn realize<T: Real>(cfg: &SystemConfig, trial: usize) -> (Deployment<T>, ChannelSet<T>) {
    let mut rng = trial_stream(cfg.seed, trial, StreamPurpose::Deployment);
    let dep = sample_deployment(cfg, &mut rng);
    let ch = ChannelSet::new(&dep);
    (dep, ch)
}

/// Per-device estimation errors after association.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationErrors<T> {
    /// Mean absolute angle error, radians.
    pub angle: T,
    /// Mean `|α_k − α̂_k|/|α_k|`.
    pub coefficient: T,
    /// Mean `‖β_k·a(θ_k) − √|α̂_k|·a(θ̂_k)‖/(N·β_k)`.
    pub channel: T,
}

/// Result of one protocol run.
#[derive(Debug, Clone)]
pub struct TrialOutcome<T> {
    pub gamma: f64,
    pub sensing_blocks: usize,
    pub charging_blocks: usize,
    /// Per-block power during sensing, `P̄_k`.
    pub sensing_power: Vec<T>,
    /// Per-block power during charging, `P̃_k`.
    pub charging_power: Vec<T>,
    /// `P_k = L_s·P̄_k + L_e·P̃_k`, watt-blocks.
    pub total_power: Vec<T>,
    pub estimates: Option<TargetEstimates<T>>,
    pub errors: Option<EstimationErrors<T>>,
    pub charging: Option<BeamSolution<T>>,
    /// Too few sensing blocks: every block used the isotropic design.
    pub fallback: bool,
    /// Estimation or beamforming fell back to a safe substitute.
    pub degraded: bool,
}

impl<T: Real> TrialOutcome<T> {
    /// `min_k P_k`.
    pub fn min_power(&self) -> T {
        self.total_power.iter().copied().fold(T::infinity(), T::min)
    }
}

/// Runs sensing then charging at sensing fraction `gamma`.
///
/// With `L_s < N_t` no estimate is possible and the isotropic sensing design
/// is kept for all `L` blocks. A failing estimator or an all-zero estimated
/// channel set keeps the isotropic design for the charging blocks too and
/// marks the outcome degraded.
pub fn run_stc<T: Real>(
    cfg: &SystemConfig,
    dep: &Deployment<T>,
    ch: &ChannelSet<T>,
    gamma: f64,
    rng: &mut RandomSource,
) -> Result<TrialOutcome<T>> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("sensing fraction must lie in [0, 1], got {gamma}")));
    }
    let power = cast::<T>(cfg.tx_power_watts());
    let l_s = cfg.sensing_blocks(gamma);
    let l_e = cfg.blocks - l_s;
    let k = dep.devices();
    let sensing_power: Vec<T> = (0..k)
        .map(|i| isotropic_block_power(&ch.tx[i], dep.path_gains[i], power))
        .collect();

    let mut outcome = TrialOutcome {
        gamma,
        sensing_blocks: l_s,
        charging_blocks: l_e,
        charging_power: sensing_power.clone(),
        sensing_power,
        total_power: Vec::new(),
        estimates: None,
        errors: None,
        charging: None,
        fallback: l_s < dep.geometry.n_tx,
        degraded: false,
    };

    if !outcome.fallback {
        match sense_and_beamform(cfg, dep, ch, l_s, power, rng) {
            Ok((est, sol)) => {
                outcome.errors = Some(estimation_errors(dep, &est));
                outcome.degraded = est.degraded();
                outcome.estimates = Some(est);
                if let Some(sol) = sol {
                    outcome.charging_power = ch.scaled.iter().map(|h| received_power(h, &sol.beams)).collect();
                    outcome.charging = Some(sol);
                } else {
                    outcome.degraded = true;
                }
            }
            Err(_) => outcome.degraded = true,
        }
    }

    let ls = cast::<T>(l_s as f64);
    let le = cast::<T>(l_e as f64);
    outcome.total_power = outcome
        .sensing_power
        .iter()
        .zip(&outcome.charging_power)
        .map(|(&ps, &pc)| ls * ps + le * pc)
        .collect();
    Ok(outcome)
}

/// Estimates, plus a beam solution unless the estimated channels are all zero.
fn sense_and_beamform<T: Real>(
    cfg: &SystemConfig,
    dep: &Deployment<T>,
    ch: &ChannelSet<T>,
    l_s: usize,
    power: T,
    rng: &mut RandomSource,
) -> Result<(TargetEstimates<T>, Option<BeamSolution<T>>)> {
    let g = dep.geometry;
    let design = design_sensing(g.n_tx, l_s, power)?;
    let echo = synthesize_echo(dep, ch, &design.waveform, cast::<T>(cfg.noise_watts()), rng)?;
    let est = estimate_targets(&echo, &design.waveform, &g, dep.devices(), cfg.music_step_deg)?;
    let h_hat = estimated_charging_matrices(&est.angles, &est.coefficients, g.n_total);
    let sol = match solve_maxmin(&h_hat, power) {
        Ok(sol) => Some(sol),
        Err(Error::Degenerate) => None,
        Err(e) => return Err(e),
    };
    Ok((est, sol))
}

/// Index permutation `p` minimizing `Σ_k |θ_k − θ̂_{p(k)}|`; ties keep the
/// lexicographically first permutation.
pub fn associate<T: Real>(truth: &[T], estimates: &[T]) -> Vec<usize> {
    let k = truth.len().min(estimates.len());
    let cost = |p: &[usize]| -> T { truth.iter().zip(p).map(|(&t, &j)| (t - estimates[j]).abs()).sum() };
    let mut best: Vec<usize> = (0..k).collect();
    let mut best_cost = cost(&best);
    for p in (0..estimates.len()).permutations(k) {
        let c = cost(&p);
        if c < best_cost {
            best_cost = c;
            best = p;
        }
    }
    best
}

/// Angle, coefficient and channel errors after angular association.
pub fn estimation_errors<T: Real>(dep: &Deployment<T>, est: &TargetEstimates<T>) -> EstimationErrors<T> {
    let perm = associate(&dep.angles, &est.angles);
    let n = dep.geometry.n_total;
    let kf = cast::<T>(perm.len().max(1) as f64);
    let nf = cast::<T>(n as f64);
    let mut angle = T::zero();
    let mut coefficient = T::zero();
    let mut channel = T::zero();
    for (i, &j) in perm.iter().enumerate() {
        let alpha = dep.reflection[i];
        let alpha_hat: Complex<T> = est.coefficients[j];
        let beta = dep.path_gains[i];
        angle = angle + (dep.angles[i] - est.angles[j]).abs();
        coefficient = coefficient + (alpha - alpha_hat).norm() / alpha.norm();
        let truth = steering_vector(dep.angles[i], n, 0).scale(beta);
        let guess = steering_vector(est.angles[j], n, 0).scale(alpha_hat.norm().sqrt());
        channel = channel + (&truth - &guess).frobenius_norm() / (nf * beta);
    }
    EstimationErrors {
        angle: angle / kf,
        coefficient: coefficient / kf,
        channel: channel / kf,
    }
}

/// Minimum power and errors of one trial at one `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaPoint {
    pub gamma: f64,
    pub min_power: f64,
    pub errors: Option<EstimationErrors<f64>>,
    pub degraded: bool,
}

/// Everything a sweep needs from one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    /// One entry per grid value, in grid order.
    pub points: Vec<GammaPoint>,
    pub pk_min_power: f64,
    pub aa_is_min_power: f64,
}

/// Runs STC at every `γ` in `grid` plus both benchmarks on trial `trial`.
pub fn evaluate_trial<T: Real>(cfg: &SystemConfig, trial: usize, grid: &[f64]) -> Result<TrialRecord> {
    let (dep, ch) = realize::<T>(cfg, trial);
    let power = cast::<T>(cfg.tx_power_watts());
    let blocks = cast::<T>(cfg.blocks as f64);
    let mut points = Vec::with_capacity(grid.len());
    for &gamma in grid {
        // a fresh copy of the noise stream per γ keeps the samples common
        let mut noise = trial_stream(cfg.seed, trial, StreamPurpose::Noise);
        let out = run_stc(cfg, &dep, &ch, gamma, &mut noise)?;
        points.push(GammaPoint {
            gamma,
            min_power: to_f64(out.min_power()),
            errors: out.errors.map(|e| EstimationErrors {
                angle: to_f64(e.angle),
                coefficient: to_f64(e.coefficient),
                channel: to_f64(e.channel),
            }),
            degraded: out.degraded,
        });
    }

    let pk = pk_benchmark(&dep, power)?;
    let pk_min_power = ch
        .scaled
        .iter()
        .map(|h| to_f64(received_power(h, &pk.beams) * blocks))
        .fold(f64::INFINITY, f64::min);

    let aa_is_min_power = (0..dep.devices())
        .map(|i| {
            let h = match cfg.aa_is_denominator {
                AaIsDenominator::NT => &ch.tx[i],
                AaIsDenominator::N => &ch.full[i],
            };
            to_f64(aa_is_power(h, dep.path_gains[i], power, cfg.blocks))
        })
        .fold(f64::INFINITY, f64::min);

    Ok(TrialRecord {
        trial,
        points,
        pk_min_power,
        aa_is_min_power,
    })
}

/// Evaluates trials `0..cfg.trials` in parallel; records come back in
/// trial order.
pub fn evaluate_trials<T: Real>(cfg: &SystemConfig, grid: &[f64]) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|trial| evaluate_trial::<T>(cfg, trial, grid))
        .collect()
}

/// Sample mean and standard error, accumulated in slice order.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Average `min_k P_k` per grid value and its maximizer.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSearchResult {
    pub grid: Vec<f64>,
    pub objective: Vec<f64>,
    pub std_error: Vec<f64>,
    pub gamma_star: f64,
    /// Objective at `γ*`.
    pub best: f64,
    /// Index of `γ*` in the grid.
    pub best_index: usize,
}

impl GammaSearchResult {
    /// Aggregates trial records evaluated on one common grid.
    pub fn from_records(grid: &[f64], records: &[TrialRecord]) -> Self {
        let mut objective = Vec::with_capacity(grid.len());
        let mut std_error = Vec::with_capacity(grid.len());
        for u in 0..grid.len() {
            let v: Vec<f64> = records.iter().map(|r| r.points[u].min_power).collect();
            let (m, se) = mean_and_se(&v);
            objective.push(m);
            std_error.push(se);
        }
        let mut best_index = 0;
        for (u, &m) in objective.iter().enumerate() {
            if m > objective[best_index] {
                best_index = u;
            }
        }
        Self {
            grid: grid.to_vec(),
            gamma_star: grid[best_index],
            best: objective[best_index],
            best_index,
            objective,
            std_error,
        }
    }
}

/// Grid search for `γ*` over `{0, ξ, …, 1}`; ties go to the smaller `γ`.
pub fn find_gamma_star(cfg: &SystemConfig) -> Result<GammaSearchResult> {
    find_gamma_star_on(cfg, &cfg.gamma_grid())
}

/// [`find_gamma_star`] on an explicit grid.
pub fn find_gamma_star_on(cfg: &SystemConfig, grid: &[f64]) -> Result<GammaSearchResult> {
    if grid.is_empty() {
        return Err(Error::config("gamma_step", "the sensing-fraction grid is empty"));
    }
    let records = evaluate_trials::<f64>(cfg, grid)?;
    Ok(GammaSearchResult::from_records(grid, &records))
}
