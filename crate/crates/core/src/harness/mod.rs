//! Parameter sweeps comparing STC against the PK and AA-IS benchmarks.

mod output;

pub use output::{
    emit_plot, read_results, write_gamma_search, write_gamma_search_to, write_results, write_results_to, PlotAxes,
};

use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::protocol::{evaluate_trials, mean_and_se, GammaSearchResult, TrialRecord};

/// Quantity varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Gamma,
    Devices,
    PowerDbm,
    SplitFraction,
}

impl SweepVariable {
    pub fn label(self) -> &'static str {
        match self {
            Self::Gamma => "sensing fraction",
            Self::Devices => "devices K",
            Self::PowerDbm => "transmit power [dBm]",
            Self::SplitFraction => "receive fraction",
        }
    }

    /// Scenario with the swept quantity set to `value`.
    pub fn apply(self, base: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let cfg = match self {
            Self::Gamma => {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::config("gamma", format!("{value} is not in [0, 1]")));
                }
                base.clone()
            }
            Self::Devices => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::config("devices", format!("{value} is not a positive integer")));
                }
                SystemConfig {
                    devices: value as usize,
                    ..base.clone()
                }
            }
            Self::PowerDbm => SystemConfig {
                tx_power_dbm: value,
                ..base.clone()
            },
            Self::SplitFraction => base.with_split_fraction(value)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One sweep: a variable, its values and the scenario they modify.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub base: SystemConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::config("values", "a sweep needs at least one value"));
        }
        for &v in &self.values {
            self.variable.apply(&self.base, v)?;
        }
        Ok(())
    }
}

/// Averages of one swept value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub swept: f64,
    pub stc_minp: f64,
    pub pk_minp: f64,
    pub aais_minp: f64,
    pub stc_minp_se: f64,
    /// Mean absolute angle error in radians; empty when no trial sensed.
    pub angle_err: Option<f64>,
    pub coeff_err: Option<f64>,
    pub chan_err: Option<f64>,
    pub gamma_star: Option<f64>,
    pub trials: usize,
    /// Trials whose estimation or beamforming was degraded.
    pub degraded: usize,
}

/// Runs every swept value; rows come back in sweep order.
///
/// A `γ` sweep evaluates each value directly. Any other sweep searches `γ*`
/// per value and reports STC at that `γ*`. STC, PK and AA-IS always share
/// the realizations of each trial.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    match spec.variable {
        SweepVariable::Gamma => {
            let records = evaluate_trials::<f64>(&spec.base, &spec.values)?;
            let search = GammaSearchResult::from_records(&spec.values, &records);
            Ok((0..spec.values.len())
                .map(|u| summarize(spec.values[u], &records, u, Some(search.gamma_star)))
                .collect())
        }
        variable => spec
            .values
            .iter()
            .map(|&value| {
                let cfg = variable.apply(&spec.base, value)?;
                let grid = cfg.gamma_grid();
                let records = evaluate_trials::<f64>(&cfg, &grid)?;
                let search = GammaSearchResult::from_records(&grid, &records);
                Ok(summarize(value, &records, search.best_index, Some(search.gamma_star)))
            })
            .collect(),
    }
}

/// Row for grid index `u` of `records`.
pub fn summarize(swept: f64, records: &[TrialRecord], u: usize, gamma_star: Option<f64>) -> ResultRow {
    let stc: Vec<f64> = records.iter().map(|r| r.points[u].min_power).collect();
    let pk: Vec<f64> = records.iter().map(|r| r.pk_min_power).collect();
    let aa: Vec<f64> = records.iter().map(|r| r.aa_is_min_power).collect();
    let (stc_minp, stc_minp_se) = mean_and_se(&stc);
    let errors: Vec<_> = records.iter().filter_map(|r| r.points[u].errors).collect();
    let avg = |f: fn(&crate::protocol::EstimationErrors<f64>) -> f64| {
        (!errors.is_empty()).then(|| errors.iter().map(f).sum::<f64>() / errors.len() as f64)
    };
    ResultRow {
        swept,
        stc_minp,
        pk_minp: mean_and_se(&pk).0,
        aais_minp: mean_and_se(&aa).0,
        stc_minp_se,
        angle_err: avg(|e| e.angle),
        coeff_err: avg(|e| e.coefficient),
        chan_err: avg(|e| e.channel),
        gamma_star,
        trials: records.len(),
        degraded: records.iter().filter(|r| r.points[u].degraded).count(),
    }
}
