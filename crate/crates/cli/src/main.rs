//! `stc`: run sense-then-charge experiments from the command line.
//!
//! Without `--config` the desk-scale scenario is used (50 trials of 200
//! blocks); a config file starts from the full reference scenario instead.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use stc_core::config::{load_config, SystemConfig};
use stc_core::harness::{
    emit_plot, run_sweep, write_gamma_search, write_gamma_search_to, write_results, write_results_to, PlotAxes,
    ResultRow, SweepSpec, SweepVariable,
};
use stc_core::protocol::{find_gamma_star, realize, run_stc, trial_stream, StreamPurpose};
use stc_core::sensing::write_spectrum_csv;

#[derive(Parser, Debug)]
#[command(name = "stc", version, about = "Sense-then-charge wireless power transfer simulator")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML scenario file; omitted keys take the reference values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the number of Monte-Carlo trials.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// CSV output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// SVG plot path for sweeps.
    #[arg(long, global = true)]
    plot: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One realization with full diagnostics.
    Trial {
        /// Sensing fraction.
        #[arg(long, default_value_t = 0.15)]
        gamma: f64,
        /// Trial index selecting the realization.
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Where to write the MUSIC spectrum (`theta_deg,music_power`).
        #[arg(long)]
        spectrum: Option<PathBuf>,
    },
    /// Average minimum power versus the sensing fraction.
    SweepGamma {
        /// Comma-separated values; defaults to the configured grid.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
    /// Versus the number of devices, with a `γ*` search per value.
    SweepK {
        #[arg(long, value_delimiter = ',', default_values_t = [2.0, 3.0, 4.0, 5.0, 6.0])]
        values: Vec<f64>,
    },
    /// Versus the transmit power in dBm.
    SweepPower {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true,
              default_values_t = [20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0])]
        values: Vec<f64>,
    },
    /// Versus the receive fraction `ς` of the array.
    SweepSplit {
        #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])]
        values: Vec<f64>,
    },
    /// Grid search for the best sensing fraction.
    GammaStar,
}

fn scenario(common: &Common) -> Result<SystemConfig> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => SystemConfig::desk(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit_rows(rows: &[ResultRow], common: &Common, variable: SweepVariable) -> Result<()> {
    match &common.out {
        Some(path) => write_results(rows, path)?,
        None => write_results_to(rows, std::io::stdout().lock()).context("writing CSV to stdout")?,
    }
    if let Some(path) = &common.plot {
        let axes = PlotAxes {
            title: format!("average minimum power versus {}", variable.label()),
            x_label: variable.label().to_string(),
        };
        emit_plot(rows, &axes, path)?;
    }
    Ok(())
}

fn sweep(common: &Common, variable: SweepVariable, values: Vec<f64>) -> Result<()> {
    let base = scenario(common)?;
    let values = if values.is_empty() { base.gamma_grid() } else { values };
    let rows = run_sweep(&SweepSpec { variable, values, base })?;
    emit_rows(&rows, common, variable)
}

fn trial(common: &Common, gamma: f64, index: usize, spectrum: Option<&Path>) -> Result<()> {
    let cfg = scenario(common)?;
    let (dep, ch) = realize::<f64>(&cfg, index);
    let mut rng = trial_stream(cfg.seed, index, StreamPurpose::Noise);
    let out = run_stc(&cfg, &dep, &ch, gamma, &mut rng)?;

    let mut log = std::io::stderr().lock();
    writeln!(log, "trial {index}, seed {}, gamma {gamma}", cfg.seed)?;
    writeln!(
        log,
        "blocks: {} sensing, {} charging{}",
        out.sensing_blocks,
        out.charging_blocks,
        if out.fallback { " (isotropic fallback)" } else { "" }
    )?;
    for k in 0..dep.devices() {
        writeln!(
            log,
            "device {k}: theta {:.3} deg, d {:.3} m, beta {:.4e}",
            dep.angles[k].to_degrees(),
            dep.distances[k],
            dep.path_gains[k]
        )?;
    }
    if let Some(est) = &out.estimates {
        for (k, (theta, alpha)) in est.angles.iter().zip(&est.coefficients).enumerate() {
            writeln!(log, "estimate {k}: theta {:.3} deg, |alpha| {:.4e}", theta.to_degrees(), alpha.norm())?;
        }
        writeln!(log, "music degraded: {}, ls regularized: {}", est.music_degraded, est.ls_regularized)?;
        if let Some(path) = spectrum {
            write_spectrum_csv(&est.spectrum, path)?;
            writeln!(log, "spectrum written to {}", path.display())?;
        }
    } else if spectrum.is_some() {
        writeln!(log, "no sensing took place, spectrum not written")?;
    }
    if let Some(e) = &out.errors {
        writeln!(
            log,
            "errors: angle {:.4} deg, coefficient {:.4e}, channel {:.4e}",
            e.angle.to_degrees(),
            e.coefficient,
            e.channel
        )?;
    }
    if let Some(sol) = &out.charging {
        writeln!(
            log,
            "beamforming: t* {:.4e}, kkt residual {:.2e}, excess rank {}",
            sol.t_star, sol.kkt_residual, sol.excess_rank
        )?;
    }

    let write = |w: &mut dyn Write| -> std::io::Result<()> {
        writeln!(w, "k,sensing_power,charging_power,total_power")?;
        for k in 0..dep.devices() {
            writeln!(w, "{k},{},{},{}", out.sensing_power[k], out.charging_power[k], out.total_power[k])?;
        }
        w.flush()
    };
    match &common.out {
        Some(path) => {
            let mut f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write(&mut f).with_context(|| format!("writing {}", path.display()))?;
        }
        None => write(&mut std::io::stdout().lock())?,
    }
    Ok(())
}

fn gamma_star(common: &Common) -> Result<()> {
    if common.plot.is_some() {
        bail!("--plot applies to sweeps only");
    }
    let cfg = scenario(common)?;
    let result = find_gamma_star(&cfg)?;
    eprintln!("gamma* = {} (average min power {:.6e})", result.gamma_star, result.best);
    match &common.out {
        Some(path) => write_gamma_search(&result, path)?,
        None => write_gamma_search_to(&result, std::io::stdout().lock()).context("writing CSV to stdout")?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let common = &cli.common;
    match cli.command {
        Command::Trial { gamma, index, spectrum } => trial(common, gamma, index, spectrum.as_deref()),
        Command::SweepGamma { values } => sweep(common, SweepVariable::Gamma, values),
        Command::SweepK { values } => sweep(common, SweepVariable::Devices, values),
        Command::SweepPower { values } => sweep(common, SweepVariable::PowerDbm, values),
        Command::SweepSplit { values } => sweep(common, SweepVariable::SplitFraction, values),
        Command::GammaStar => gamma_star(common),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
