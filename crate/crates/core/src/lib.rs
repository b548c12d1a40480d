//! Frame-level simulator of a multi-user MIMO downlink in which every
//! scheduled user costs one uplink pilot per fading block.
//!
//! The crate is organised bottom-up:
//!
//! - [`channel`]: Rayleigh block fading and mobility-to-block-length conversion.
//! - [`precoding`]: zero-forcing precoder, SINR and the SM/STC rates.
//! - [`queueing`]: packetised bit queues, Bernoulli arrivals, head-of-line delay.
//! - [`schedulers`]: GAP-rule, T-DCA, PL-DCA, the QQS family and baselines.
//! - [`engine`]: the frame loop, the admission-control capacity estimator and sweeps.
//! - [`analytic`]: closed-form training-DoF and time-sharing rate calculators.
//! - [`config`] and [`output`]: the on-disk config format and CSV/summary writers.

pub mod analytic;
pub mod channel;
pub mod config;
pub mod engine;
pub mod error;
pub mod output;
pub mod precoding;
pub mod queueing;
pub mod rng;
pub mod schedulers;

pub use error::{Result, SimError};
