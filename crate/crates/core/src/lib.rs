//! Sense-then-charge wireless power transfer.
//!
//! A dual-function base station first probes unresponsive energy-harvesting
//! devices as radar targets (MUSIC angle estimation plus least-squares
//! reflection coefficients), then charges them with max-min received-power
//! beamforming built from the estimated line-of-sight channels.
//!
//! The numerical core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); the `*64` aliases below are what the simulator and
//! command-line tool use.

pub mod beamforming;
pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod protocol;
pub mod scalar;
pub mod sensing;

pub use error::{Error, Result};
pub use scalar::Real;

pub type CMatrix64 = numerics::CMatrix<f64>;
pub type CMatrix32 = numerics::CMatrix<f32>;
pub type Deployment64 = channel::Deployment<f64>;
pub type ChannelSet64 = channel::ChannelSet<f64>;
pub type SensingDesign64 = sensing::SensingDesign<f64>;
pub type TargetEstimates64 = sensing::TargetEstimates<f64>;
pub type BeamSolution64 = beamforming::BeamSolution<f64>;
pub type TrialOutcome64 = protocol::TrialOutcome<f64>;
