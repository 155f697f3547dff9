//! Scenario configuration and its key-value file format.
//!
//! Files are TOML. Every key is optional; omitted keys take the reference
//! scenario values listed on [`SystemConfig::default`]. Unknown keys are
//! rejected.
//!
//! | key                  | meaning                                     | default     |
//! |----------------------|---------------------------------------------|-------------|
//! | `n_antennas`         | total ULA elements `N`                      | 36          |
//! | `n_tx`, `n_rx`       | sensing transmit / receive split            | 12, 24      |
//! | `split_fraction`     | `ς`: `n_rx = ⌈ςN⌉`, `n_tx = N − n_rx`         | unset       |
//! | `devices`            | number of devices `K`                       | 2           |
//! | `blocks`             | transmission blocks `L`                     | 1000        |
//! | `tx_power_dbm`       | per-block transmit budget `P_t`             | 40          |
//! | `noise_dbm`          | echo noise variance `σ²`                     | -70         |
//! | `kappa_db`           | Rician factor (`inf` for pure LoS)          | 20          |
//! | `carrier_hz`         | carrier frequency                           | 2.4e9       |
//! | `angle_range_deg`    | device angle interval                       | [-80, 80]   |
//! | `distance_range_m`   | device distance interval                    | [5, 15]     |
//! | `gamma_step`         | `ξ`, spacing of the sensing-fraction grid    | 0.05        |
//! | `music_step_deg`     | MUSIC search grid spacing                   | 0.1         |
//! | `trials`             | Monte-Carlo realizations                    | 500         |
//! | `seed`               | master seed                                 | 1           |
//! | `aa_is_denominator`  | `"n_t"` or `"n"`                            | `"n_t"`     |

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Normalization of the isotropic all-antenna benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AaIsDenominator {
    /// Sensing transmit sub-array only, identical to sensing with `γ = 1`.
    NT,
    /// All `N` antennas radiate `P_t/N` each.
    N,
}

/// Every scenario parameter of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub n_antennas: usize,
    pub n_tx: usize,
    pub n_rx: usize,
    pub devices: usize,
    pub blocks: usize,
    pub tx_power_dbm: f64,
    pub noise_dbm: f64,
    pub kappa_db: f64,
    pub carrier_hz: f64,
    pub angle_range_deg: (f64, f64),
    pub distance_range_m: (f64, f64),
    pub gamma_step: f64,
    pub music_step_deg: f64,
    pub trials: usize,
    pub seed: u64,
    pub aa_is_denominator: AaIsDenominator,
}

impl Default for SystemConfig {
    /// Reference scenario: `N = 36` split 12/24, two devices, `L = 1000`,
    /// 500 trials, `κ = 20 dB`, `σ² = −70 dBm`, `P_t = 40 dBm` (10 dBW),
    /// 2.4 GHz, devices uniform in ±80° and 5–15 m.
    fn default() -> Self {
        Self {
            n_antennas: 36,
            n_tx: 12,
            n_rx: 24,
            devices: 2,
            blocks: 1000,
            tx_power_dbm: 40.0,
            noise_dbm: -70.0,
            kappa_db: 20.0,
            carrier_hz: 2.4e9,
            angle_range_deg: (-80.0, 80.0),
            distance_range_m: (5.0, 15.0),
            gamma_step: 0.05,
            music_step_deg: 0.1,
            trials: 500,
            seed: 1,
            aa_is_denominator: AaIsDenominator::NT,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n_antennas: Option<usize>,
    n_tx: Option<usize>,
    n_rx: Option<usize>,
    split_fraction: Option<f64>,
    devices: Option<usize>,
    blocks: Option<usize>,
    tx_power_dbm: Option<f64>,
    noise_dbm: Option<f64>,
    kappa_db: Option<f64>,
    carrier_hz: Option<f64>,
    angle_range_deg: Option<[f64; 2]>,
    distance_range_m: Option<[f64; 2]>,
    gamma_step: Option<f64>,
    music_step_deg: Option<f64>,
    trials: Option<usize>,
    seed: Option<u64>,
    aa_is_denominator: Option<AaIsDenominator>,
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// `(n_tx, n_rx)` for a receive fraction `ς`: `n_rx = ⌈ςN⌉`.
pub fn split_antennas(n_antennas: usize, fraction: f64) -> Result<(usize, usize)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::config("split_fraction", format!("{fraction} is not in (0, 1)")));
    }
    // guard against ς·N landing a hair above an integer
    let n_rx = ((fraction * n_antennas as f64) - 1e-9).ceil() as usize;
    if n_rx == 0 || n_rx >= n_antennas {
        return Err(Error::config(
            "split_fraction",
            format!("{fraction} leaves no transmit or receive antenna out of {n_antennas}"),
        ));
    }
    Ok((n_antennas - n_rx, n_rx))
}

impl SystemConfig {
    /// Desk-scale variant of the reference scenario: 50 trials of 200 blocks.
    pub fn desk() -> Self {
        Self {
            blocks: 200,
            trials: 50,
            ..Self::default()
        }
    }

    pub fn tx_power_watts(&self) -> f64 {
        dbm_to_watts(self.tx_power_dbm)
    }

    pub fn noise_watts(&self) -> f64 {
        dbm_to_watts(self.noise_dbm)
    }

    /// Rician factor as a linear power ratio; infinite means pure LoS.
    pub fn kappa_linear(&self) -> f64 {
        db_to_linear(self.kappa_db)
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// Sensing blocks `⌊γL⌋`.
    pub fn sensing_blocks(&self, gamma: f64) -> usize {
        ((gamma * self.blocks as f64) + 1e-9).floor().min(self.blocks as f64) as usize
    }

    /// Grid `{0, ξ, 2ξ, …, 1}`; 1 is always the last point.
    pub fn gamma_grid(&self) -> Vec<f64> {
        let steps = (1.0 / self.gamma_step - 1e-9).ceil() as usize;
        (0..=steps).map(|u| (u as f64 * self.gamma_step).min(1.0)).collect()
    }

    /// Re-derives the antenna split from `ς`.
    pub fn with_split_fraction(&self, fraction: f64) -> Result<Self> {
        let (n_tx, n_rx) = split_antennas(self.n_antennas, fraction)?;
        let cfg = Self { n_tx, n_rx, ..self.clone() };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every cross-field invariant, naming the offending key.
    pub fn validate(&self) -> Result<()> {
        if self.n_tx == 0 {
            return Err(Error::config("n_tx", "at least one transmit antenna is required"));
        }
        if self.n_tx + self.n_rx != self.n_antennas {
            return Err(Error::config(
                "n_antennas",
                format!("{} != n_tx {} + n_rx {}", self.n_antennas, self.n_tx, self.n_rx),
            ));
        }
        if self.devices == 0 {
            return Err(Error::config("devices", "at least one device is required"));
        }
        if self.n_rx <= self.devices {
            return Err(Error::config(
                "n_rx",
                format!("{} receive antennas cannot resolve {} devices (need n_rx > devices)", self.n_rx, self.devices),
            ));
        }
        if self.blocks == 0 {
            return Err(Error::config("blocks", "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if !(self.gamma_step > 0.0 && self.gamma_step <= 1.0) {
            return Err(Error::config("gamma_step", format!("{} is not in (0, 1]", self.gamma_step)));
        }
        if !(self.music_step_deg > 0.0 && self.music_step_deg <= 10.0) {
            return Err(Error::config("music_step_deg", format!("{} is not in (0, 10]", self.music_step_deg)));
        }
        if !self.tx_power_dbm.is_finite() {
            return Err(Error::config("tx_power_dbm", "must be finite"));
        }
        if !self.noise_dbm.is_finite() && self.noise_dbm != f64::NEG_INFINITY {
            return Err(Error::config("noise_dbm", "must be finite or -inf"));
        }
        if self.kappa_db.is_nan() {
            return Err(Error::config("kappa_db", "must be a number"));
        }
        if !(self.carrier_hz > 0.0 && self.carrier_hz.is_finite()) {
            return Err(Error::config("carrier_hz", "must be positive"));
        }
        let (a0, a1) = self.angle_range_deg;
        if !(a0 <= a1 && a0 >= -90.0 && a1 <= 90.0) {
            return Err(Error::config("angle_range_deg", format!("[{a0}, {a1}] is not an ordered sub-range of [-90, 90]")));
        }
        let (d0, d1) = self.distance_range_m;
        if !(d0 > 0.0 && d0 <= d1 && d1.is_finite()) {
            return Err(Error::config("distance_range_m", format!("[{d0}, {d1}] is not an ordered positive range")));
        }
        Ok(())
    }

    /// Parses TOML text, applying defaults to omitted keys.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let key = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.starts_with("unknown field"))
                .map(str::to_string)
                .unwrap_or_else(|| "<file>".to_string());
            Error::config(key, msg)
        })?;
        let mut cfg = Self::default();
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = raw.$field { cfg.$field = v; })*
            };
        }
        take!(devices, blocks, tx_power_dbm, noise_dbm, kappa_db, carrier_hz, gamma_step, music_step_deg, trials, seed, aa_is_denominator);
        if let Some([a, b]) = raw.angle_range_deg {
            cfg.angle_range_deg = (a, b);
        }
        if let Some([a, b]) = raw.distance_range_m {
            cfg.distance_range_m = (a, b);
        }

        match (raw.n_antennas, raw.n_tx, raw.n_rx, raw.split_fraction) {
            (n, None, None, Some(f)) => {
                cfg.n_antennas = n.unwrap_or(cfg.n_antennas);
                (cfg.n_tx, cfg.n_rx) = split_antennas(cfg.n_antennas, f)?;
            }
            (_, _, _, Some(_)) => {
                return Err(Error::config("split_fraction", "cannot be combined with n_tx or n_rx"));
            }
            (n, t, r, None) => {
                match (t, r) {
                    (Some(t), Some(r)) => {
                        cfg.n_tx = t;
                        cfg.n_rx = r;
                        cfg.n_antennas = n.unwrap_or(t + r);
                    }
                    (Some(t), None) => {
                        cfg.n_antennas = n.unwrap_or(cfg.n_antennas);
                        cfg.n_tx = t;
                        cfg.n_rx = cfg.n_antennas.saturating_sub(t);
                    }
                    (None, Some(r)) => {
                        cfg.n_antennas = n.unwrap_or(cfg.n_antennas);
                        cfg.n_rx = r;
                        cfg.n_tx = cfg.n_antennas.saturating_sub(r);
                    }
                    (None, None) => {
                        if let Some(n) = n {
                            // keep the reference one-third / two-thirds split
                            cfg.n_antennas = n;
                            (cfg.n_tx, cfg.n_rx) = split_antennas(n, 2.0 / 3.0)?;
                        }
                    }
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<SystemConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    SystemConfig::from_toml_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference_defaults() {
        let cfg = SystemConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, SystemConfig::default());
        assert_eq!(cfg.kappa_db, 20.0);
        assert_eq!(cfg.noise_dbm, -70.0);
        assert_eq!(cfg.gamma_step, 0.05);
        assert_eq!(cfg.blocks, 1000);
        assert_eq!(cfg.trials, 500);
        assert_eq!(cfg.angle_range_deg, (-80.0, 80.0));
        assert_eq!(cfg.distance_range_m, (5.0, 15.0));
        assert!((cfg.noise_watts() - 1e-10).abs() < 1e-24);
        assert!((cfg.wavelength() - 0.124917).abs() < 1e-6);
    }

    #[test]
    fn split_fraction_two_thirds() {
        let cfg = SystemConfig::from_toml_str("n_antennas = 36\nsplit_fraction = 0.6666666666666666").unwrap();
        assert_eq!((cfg.n_rx, cfg.n_tx), (24, 12));
        // ς·N = 12.000000000000002 must not round up
        assert_eq!(split_antennas(40, 0.3).unwrap(), (28, 12));
        assert_eq!(split_antennas(40, 0.8).unwrap(), (8, 32));
    }

    #[test]
    fn too_few_receive_antennas() {
        let err = SystemConfig::from_toml_str("n_tx = 10\nn_rx = 2\ndevices = 4").unwrap_err();
        match err {
            Error::Config { key, .. } => assert_eq!(key, "n_rx"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_named() {
        match SystemConfig::from_toml_str("bogus = 3").unwrap_err() {
            Error::Config { key, .. } => assert_eq!(key, "bogus"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inconsistent_antenna_total() {
        let err = SystemConfig::from_toml_str("n_antennas = 30\nn_tx = 12\nn_rx = 24").unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "n_antennas"));
    }

    #[test]
    fn gamma_grid_ends_at_one() {
        let cfg = SystemConfig::default();
        let grid = cfg.gamma_grid();
        assert_eq!(grid.len(), 21);
        assert_eq!(grid[0], 0.0);
        assert_eq!(*grid.last().unwrap(), 1.0);
        let single = SystemConfig { gamma_step: 1.0, ..cfg.clone() };
        assert_eq!(single.gamma_grid(), vec![0.0, 1.0]);
        let desk = SystemConfig::desk();
        assert_eq!(desk.sensing_blocks(0.05), 10);
        assert_eq!(desk.sensing_blocks(0.35), 70);
        assert_eq!(desk.sensing_blocks(1.0), 200);
    }

    #[test]
    fn pure_los_kappa() {
        let cfg = SystemConfig::from_toml_str("kappa_db = inf").unwrap();
        assert!(cfg.kappa_linear().is_infinite());
    }
}
