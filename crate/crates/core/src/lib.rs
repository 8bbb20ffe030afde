//! Link-level simulator for uplink multiuser scheduling with hybrid
//! beamforming and low-resolution ADCs: geometric channels, beamspace
//! projection, AQNM rate expressions, schedulers, closed-form ergodic
//! rates, and a Monte Carlo experiment harness.

pub mod analysis;
pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod quantization;
pub mod rates;
pub mod rng;
pub mod schedulers;

pub use config::{AdcBits, CombinerPolicy, Scenario, SystemConfig};
pub use error::{Error, Result};
pub use schedulers::{Algorithm, ScheduleResult, ScheduleStep};
