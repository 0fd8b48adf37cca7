//! Link-level simulation and analysis for a massive MU-MIMO-OFDM uplink whose
//! base station digitizes RF directly with 1-bit converters.
//!
//! The crate has two engines that cross-validate each other:
//!
//! * a Monte Carlo waveform chain ([`txchain`] -> [`quantizer`] -> [`rxchain`])
//!   that synthesizes OFDM frames, upconverts, adds noise and optional dither,
//!   quantizes, down-converts, and zero-forces;
//! * a closed-form engine ([`bussgang`]) that predicts the EVM and PSD of the
//!   quantized chain from the second-order statistics of the RF signal.
//!
//! [`numerics`] holds the shared kernels and seeded random streams;
//! [`channel`] draws frequency-selective Rayleigh channels; [`config`] is the
//! experiment configuration shared by both engines and the harness.

pub mod bussgang;
pub mod channel;
pub mod config;
pub mod error;
pub mod numerics;
pub mod quantizer;
pub mod rxchain;
pub mod txchain;

pub use config::{DitherMode, DitherSpec, ExperimentConfig, QuantizerKind};
pub use error::{Result, SimError};
