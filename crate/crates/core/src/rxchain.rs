//! Receive side: ideal digital down-conversion, zero-forcing combining, and
//! the empirical metrics (EVM, Welch PSD, constellation export).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::bussgang::Gain;
use crate::channel::ChannelRealization;
use crate::error::{Result, SimError};
use crate::numerics::{dft, pseudo_inverse};
use crate::txchain::{FrequencySymbols, RfFrame};

/// Down-converted frequency-domain samples on the occupied subcarriers:
/// one B-vector per occupied bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BasebandSubcarriers {
    occupied: Vec<usize>,
    b: usize,
    /// Subcarrier-major: `data[k_idx * b + antenna]`.
    data: Vec<Complex64>,
}

impl BasebandSubcarriers {
    pub fn occupied(&self) -> &[usize] {
        &self.occupied
    }

    pub fn b(&self) -> usize {
        self.b
    }

    #[inline]
    pub fn value(&self, k_idx: usize, antenna: usize) -> Complex64 {
        self.data[k_idx * self.b + antenna]
    }

    pub fn subcarrier(&self, k_idx: usize) -> &[Complex64] {
        &self.data[k_idx * self.b..(k_idx + 1) * self.b]
    }

    pub fn from_values(occupied: Vec<usize>, b: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(occupied.len() * b, data.len());
        Self { occupied, b, data }
    }
}

/// Combined symbol estimates: one U-vector per occupied subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolEstimates {
    occupied: Vec<usize>,
    u: usize,
    data: Vec<Complex64>,
}

impl SymbolEstimates {
    pub fn occupied(&self) -> &[usize] {
        &self.occupied
    }

    pub fn u(&self) -> usize {
        self.u
    }

    #[inline]
    pub fn value(&self, k_idx: usize, user: usize) -> Complex64 {
        self.data[k_idx * self.u + user]
    }
}

/// One-sided power spectral density estimate over `[0, f_s/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    pub freq_hz: Vec<f64>,
    pub density_db: Vec<f64>,
    pub antenna_averaged: bool,
}

/// Ideal digital down-conversion of one RF frame:
/// `z_hat_k = sqrt(2/N) sum_n z_n e^{-j2pi (k/N + f_c/f_s) n}` per occupied bin.
pub fn ddc(z: &RfFrame, occupied: &[usize], f_c: f64, f_s: f64, n: usize) -> Result<BasebandSubcarriers> {
    if z.n() != n {
        return Err(SimError::InvalidArgument(format!(
            "frame length {} does not match n={n}",
            z.n()
        )));
    }
    if occupied.is_empty() {
        return Err(SimError::InvalidArgument("ddc needs a nonempty occupied set".into()));
    }
    for &k in occupied {
        if k >= n {
            return Err(SimError::InvalidArgument(format!("subcarrier {k} out of range for n={n}")));
        }
    }
    let b = z.b();
    let ratio = f_c / f_s;
    let carrier: Vec<Complex64> =
        (0..n).map(|i| Complex64::from_polar(1.0, -2.0 * PI * ratio * i as f64)).collect();
    let scale = (2.0 / n as f64).sqrt();
    let mut data = vec![Complex64::default(); occupied.len() * b];
    let mut mixed = vec![Complex64::default(); n];
    for ant in 0..b {
        let row = z.antenna(ant);
        for ((m, &v), w) in mixed.iter_mut().zip(row).zip(&carrier) {
            *m = w * v;
        }
        let spectrum = dft(&mixed)?;
        for (k_idx, &k) in occupied.iter().enumerate() {
            data[k_idx * b + ant] = spectrum[k] * scale;
        }
    }
    Ok(BasebandSubcarriers { occupied: occupied.to_vec(), b, data })
}

/// Zero-forcing combining with perfect channel knowledge:
/// `s_est_k = (G H_hat_k)^+ z_hat_k` per occupied subcarrier.
pub fn zf_combine(
    zbb: &BasebandSubcarriers,
    ch: &ChannelRealization,
    gain: &Gain,
) -> Result<SymbolEstimates> {
    if ch.b() != zbb.b {
        return Err(SimError::InvalidArgument(format!(
            "channel has b={} but frame has b={}",
            ch.b(),
            zbb.b
        )));
    }
    if gain.len() != zbb.b {
        return Err(SimError::InvalidArgument(format!(
            "gain has {} entries but frame has b={}",
            gain.len(),
            zbb.b
        )));
    }
    let u = ch.u();
    let mut data = Vec::with_capacity(zbb.occupied.len() * u);
    for (k_idx, &k) in zbb.occupied.iter().enumerate() {
        let hk = ch.hk(k)?;
        let gh = hk.row_scaled(gain.diag());
        let combiner = pseudo_inverse(&gh).map_err(|e| match e {
            SimError::SingularMatrix { .. } => SimError::SingularMatrix { subcarrier: Some(k) },
            other => other,
        })?;
        data.extend(combiner.mul_vec(zbb.subcarrier(k_idx)));
    }
    Ok(SymbolEstimates { occupied: zbb.occupied.clone(), u, data })
}

/// Pooled EVM in percent over matched (estimate, truth) collections:
/// `100 sqrt(sum ||err||^2 / sum ||truth||^2)`, the sample form of the
/// expectation ratio. The denominator uses the realized symbols.
pub fn empirical_evm(estimates: &[SymbolEstimates], truths: &[FrequencySymbols]) -> Result<f64> {
    if estimates.is_empty() || estimates.len() != truths.len() {
        return Err(SimError::InvalidArgument(format!(
            "need matched nonempty collections, got {} estimates and {} truths",
            estimates.len(),
            truths.len()
        )));
    }
    let mut err = 0.0;
    let mut sig = 0.0;
    for (est, truth) in estimates.iter().zip(truths) {
        if est.occupied != truth.occupied() || est.u != truth.u() {
            return Err(SimError::InvalidArgument("estimate/truth layout mismatch".into()));
        }
        for k_idx in 0..est.occupied.len() {
            for user in 0..est.u {
                let t = truth.value(k_idx, user);
                err += (est.value(k_idx, user) - t).norm_sqr();
                sig += t.norm_sqr();
            }
        }
    }
    if sig <= 0.0 {
        return Err(SimError::InvalidArgument("truth collection has zero energy".into()));
    }
    Ok(100.0 * (err / sig).sqrt())
}

/// Welch-averaged one-sided power densities on the grid `i * f_s / segment_len`.
///
/// Hann window, 50% overlap, segments taken within each frame and averaged
/// over antennas and frames. Linear scale; integrates to the mean-square
/// sample value.
pub fn welch_density(frames: &[RfFrame], segment_len: usize, f_s: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if frames.is_empty() {
        return Err(SimError::InvalidArgument("welch needs at least one frame".into()));
    }
    if !segment_len.is_power_of_two() {
        return Err(SimError::InvalidArgument(format!(
            "segment_len must be a power of two, got {segment_len}"
        )));
    }
    let n = frames[0].n();
    let b = frames[0].b();
    if segment_len > n {
        return Err(SimError::InvalidArgument(format!(
            "segment_len {segment_len} exceeds frame length {n}"
        )));
    }
    if frames.iter().any(|f| f.n() != n || f.b() != b) {
        return Err(SimError::InvalidArgument("inconsistent frame dimensions".into()));
    }
    let window: Vec<f64> = (0..segment_len)
        .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / segment_len as f64).cos()))
        .collect();
    let window_energy: f64 = window.iter().map(|w| w * w).sum();
    let hop = (segment_len / 2).max(1);
    let bins = segment_len / 2 + 1;

    let mut acc = vec![0.0f64; bins];
    let mut segments = 0usize;
    let mut buf = vec![Complex64::default(); segment_len];
    for frame in frames {
        for ant in 0..b {
            let row = frame.antenna(ant);
            let mut start = 0;
            while start + segment_len <= n {
                for (i, v) in buf.iter_mut().enumerate() {
                    *v = Complex64::new(row[start + i] * window[i], 0.0);
                }
                let spectrum = dft(&buf)?;
                for (i, a) in acc.iter_mut().enumerate() {
                    *a += spectrum[i].norm_sqr();
                }
                segments += 1;
                start += hop;
            }
        }
    }
    let base = 1.0 / (segments as f64 * f_s * window_energy);
    let density: Vec<f64> = acc
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let onesided = if i == 0 || i == bins - 1 { 1.0 } else { 2.0 };
            a * base * onesided
        })
        .collect();
    let freq: Vec<f64> = (0..bins).map(|i| i as f64 * f_s / segment_len as f64).collect();
    Ok((freq, density))
}

/// `welch_density` reported in dB.
pub fn empirical_psd(frames: &[RfFrame], segment_len: usize, f_s: f64) -> Result<PsdEstimate> {
    let (freq_hz, density) = welch_density(frames, segment_len, f_s)?;
    let density_db = density.iter().map(|&v| 10.0 * v.max(1e-300).log10()).collect();
    Ok(PsdEstimate { freq_hz, density_db, antenna_averaged: true })
}

/// One exported constellation point. `frame` is the index of the estimate in
/// the input collection; the harness maps it to (trial, symbol).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstellationPoint {
    pub frame: usize,
    pub subcarrier: usize,
    pub user: usize,
    pub value: Complex64,
}

/// Lossless flattening in deterministic (frame, subcarrier, user) order.
pub fn export_constellation(estimates: &[SymbolEstimates]) -> Vec<ConstellationPoint> {
    let mut out = Vec::new();
    for (frame, est) in estimates.iter().enumerate() {
        for (k_idx, &k) in est.occupied.iter().enumerate() {
            for user in 0..est.u {
                out.push(ConstellationPoint { frame, subcarrier: k, user, value: est.value(k_idx, user) });
            }
        }
    }
    out
}
