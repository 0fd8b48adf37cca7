//! Experiment configuration: every system scalar in one place, plus the
//! derived quantities (bandwidth, oversampling rate, noise power) that the
//! engine and the harness both need.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantizerKind {
    /// Sign quantization of every RF sample.
    OneBit,
    /// Infinite-resolution passthrough baseline.
    Infinite,
}

impl fmt::Display for QuantizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuantizerKind::OneBit => write!(f, "one_bit"),
            QuantizerKind::Infinite => write!(f, "infinite"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DitherMode {
    None,
    UniformBinary,
    Gaussian,
}

impl fmt::Display for DitherMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DitherMode::None => write!(f, "none"),
            DitherMode::UniformBinary => write!(f, "uniform_binary"),
            DitherMode::Gaussian => write!(f, "gaussian"),
        }
    }
}

/// Nonsubtractive dither added in front of the quantizer. `d_0` is the dither
/// power, in the same units as the noise power `N_0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DitherSpec {
    pub mode: DitherMode,
    pub d_0: f64,
}

impl DitherSpec {
    pub fn none() -> Self {
        Self { mode: DitherMode::None, d_0: 0.0 }
    }

    pub fn gaussian(d_0: f64) -> Self {
        Self { mode: DitherMode::Gaussian, d_0 }
    }

    pub fn uniform_binary(d_0: f64) -> Self {
        Self { mode: DitherMode::UniformBinary, d_0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.d_0.is_finite() || self.d_0 < 0.0 {
            return Err(SimError::InvalidArgument(format!("dither power must be >= 0, got {}", self.d_0)));
        }
        if self.mode == DitherMode::None && self.d_0 != 0.0 {
            return Err(SimError::InvalidArgument(
                "dither mode none requires d_0 = 0".into(),
            ));
        }
        Ok(())
    }
}

pub const SUPPORTED_QAM_ORDERS: [u32; 4] = [4, 16, 64, 256];

/// All scalars of one experiment operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Receive antennas at the base station.
    pub b: usize,
    /// Single-antenna transmitters served in the same resource.
    pub u: usize,
    /// Samples per OFDM symbol at the converter rate (transform size).
    pub n: usize,
    /// Occupied subcarrier indices, each in `[0, n)`.
    pub occupied_set: Vec<usize>,
    /// Channel taps.
    pub l: usize,
    /// Carrier frequency in Hz.
    pub f_c: f64,
    /// Converter sampling rate in Hz.
    pub f_s: f64,
    /// Average symbol energy.
    pub e_s: f64,
    /// Operating signal-to-noise ratio `E_s/N_0` in dB.
    pub snr_db: f64,
    pub qam_order: u32,
    pub quantizer: QuantizerKind,
    pub dither: DitherSpec,
    /// Channel realizations per run.
    pub n_channels: usize,
    /// OFDM symbols per channel realization.
    pub n_symbols: usize,
    pub master_seed: u64,
    /// Optional EVM reference lines (label -> percent) used by sweep reports.
    /// These are externally supplied limits, never hard-coded.
    #[serde(default)]
    pub evm_threshold_lines: BTreeMap<String, f64>,
}

impl Default for ExperimentConfig {
    /// The reference operating point used throughout the test suite:
    /// 32 antennas, 4 users, 4096-sample symbols with 9 occupied bins around
    /// DC, 1000-tap channel at 10 GS/s, 2.4 GHz carrier, 16-QAM at 10 dB SNR.
    fn default() -> Self {
        Self {
            b: 32,
            u: 4,
            n: 4096,
            occupied_set: symmetric_occupied_set(4096, 9),
            l: 1000,
            f_c: 2.4e9,
            f_s: 1.0e10,
            e_s: 1.0,
            snr_db: 10.0,
            qam_order: 16,
            quantizer: QuantizerKind::OneBit,
            dither: DitherSpec::none(),
            n_channels: 25,
            n_symbols: 25,
            master_seed: 1,
            evm_threshold_lines: BTreeMap::new(),
        }
    }
}

/// `count` bins centered on DC: `(count-1)/2` negative-frequency bins at the
/// top of the transform, DC, and `count/2` positive bins.
pub fn symmetric_occupied_set(n: usize, count: usize) -> Vec<usize> {
    assert!(count >= 1 && count <= n);
    let neg = count / 2;
    let pos = count - 1 - neg;
    let mut set: Vec<usize> = (0..neg).map(|i| n - neg + i).collect();
    set.extend(0..=pos);
    set
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.u < 1 || self.b < self.u {
            return Err(SimError::InvalidArgument(format!(
                "need b >= u >= 1, got b={} u={}",
                self.b, self.u
            )));
        }
        if self.l < 1 || self.n < self.l {
            return Err(SimError::InvalidArgument(format!(
                "need n >= l >= 1, got n={} l={}",
                self.n, self.l
            )));
        }
        if self.occupied_set.is_empty() {
            return Err(SimError::InvalidArgument("occupied_set must be nonempty".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for &k in &self.occupied_set {
            if k >= self.n {
                return Err(SimError::InvalidArgument(format!(
                    "occupied subcarrier {k} out of range for n={}",
                    self.n
                )));
            }
            if !seen.insert(k) {
                return Err(SimError::InvalidArgument(format!("duplicate occupied subcarrier {k}")));
            }
        }
        if !(self.f_s > 0.0 && self.f_c > 0.0 && self.f_c < self.f_s / 2.0) {
            return Err(SimError::InvalidArgument(format!(
                "need 0 < f_c < f_s/2, got f_c={} f_s={}",
                self.f_c, self.f_s
            )));
        }
        if !(self.e_s > 0.0 && self.e_s.is_finite()) {
            return Err(SimError::InvalidArgument(format!("e_s must be positive, got {}", self.e_s)));
        }
        if !self.snr_db.is_finite() {
            return Err(SimError::InvalidArgument("snr_db must be finite".into()));
        }
        if !SUPPORTED_QAM_ORDERS.contains(&self.qam_order) {
            return Err(SimError::InvalidArgument(format!(
                "qam_order {} not in {:?}",
                self.qam_order, SUPPORTED_QAM_ORDERS
            )));
        }
        self.dither.validate()?;
        if self.n_channels < 1 || self.n_symbols < 1 {
            return Err(SimError::InvalidArgument("trial counts must be >= 1".into()));
        }
        for (label, pct) in &self.evm_threshold_lines {
            if !(pct.is_finite() && *pct > 0.0) {
                return Err(SimError::InvalidArgument(format!(
                    "threshold line {label} must be a positive percent, got {pct}"
                )));
            }
        }
        Ok(())
    }

    /// Number of occupied subcarriers.
    pub fn s(&self) -> usize {
        self.occupied_set.len()
    }

    /// Signal bandwidth `(S/N) f_s` in Hz.
    pub fn bw_hz(&self) -> f64 {
        (self.s() as f64 / self.n as f64) * self.f_s
    }

    /// Oversampling rate `N/S`.
    pub fn osr(&self) -> f64 {
        self.n as f64 / self.s() as f64
    }

    /// Channel delay spread `L/f_s` in seconds.
    pub fn delay_spread_s(&self) -> f64 {
        self.l as f64 / self.f_s
    }

    /// Noise power `N_0 = E_s / 10^(snr/10)`.
    pub fn n_0(&self) -> f64 {
        self.e_s / 10f64.powf(self.snr_db / 10.0)
    }

    /// Per-real-sample variance of noise plus dither, `(N_0 + D_0) / 2`.
    pub fn noise_floor(&self) -> f64 {
        (self.n_0() + self.dither.d_0) / 2.0
    }

    pub fn with_snr(&self, snr_db: f64) -> Self {
        Self { snr_db, ..self.clone() }
    }

    pub fn with_b(&self, b: usize) -> Self {
        Self { b, ..self.clone() }
    }

    pub fn with_dither(&self, dither: DitherSpec) -> Self {
        Self { dither, ..self.clone() }
    }

    pub fn with_quantizer(&self, quantizer: QuantizerKind) -> Self {
        Self { quantizer, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_config_derivations() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.s(), 9);
        assert_eq!(cfg.occupied_set, vec![4092, 4093, 4094, 4095, 0, 1, 2, 3, 4]);
        // BW ~ 21.97 MHz, OSR ~ 455, delay spread 100 ns.
        assert!((cfg.bw_hz() - 21.97265625e6).abs() < 1.0);
        assert!((cfg.osr() - 455.111).abs() < 0.1);
        assert!((cfg.delay_spread_s() - 100e-9).abs() < 1e-15);
        assert!((cfg.n_0() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn symmetric_set_shapes() {
        assert_eq!(symmetric_occupied_set(64, 3), vec![63, 0, 1]);
        assert_eq!(symmetric_occupied_set(64, 1), vec![0]);
        assert_eq!(symmetric_occupied_set(8, 4), vec![6, 7, 0, 1]);
    }

    #[test]
    fn validation_catches_bad_fields() {
        let good = ExperimentConfig::default();
        assert!(good.validate().is_ok());

        let mut c = good.clone();
        c.u = 64;
        assert!(c.validate().is_err());

        let mut c = good.clone();
        c.occupied_set = vec![4096];
        assert!(c.validate().is_err());

        let mut c = good.clone();
        c.occupied_set = vec![0, 0];
        assert!(c.validate().is_err());

        let mut c = good.clone();
        c.f_c = 6e9;
        assert!(c.validate().is_err());

        let mut c = good.clone();
        c.qam_order = 32;
        assert!(c.validate().is_err());

        let mut c = good.clone();
        c.dither = DitherSpec { mode: DitherMode::None, d_0: 1.0 };
        assert!(c.validate().is_err());

        let mut c = good;
        c.l = 8192;
        assert!(c.validate().is_err());
    }
}
