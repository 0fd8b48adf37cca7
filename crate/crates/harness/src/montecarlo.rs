//! Monte Carlo execution of one operating point: channel draws in a worker
//! pool, full waveform chains per OFDM symbol, pooled EVM, and the analytical
//! EVM over the same channel ensemble when the closed forms apply.

use rayon::prelude::*;
use rfsim_core::bussgang::{self, Gain};
use rfsim_core::channel::{draw_channel, ChannelRealization};
use rfsim_core::config::{DitherMode, DitherSpec};
use rfsim_core::quantizer;
use rfsim_core::rxchain::{ddc, export_constellation, zf_combine};
use rfsim_core::txchain::{add_noise_and_dither, apply_channel, map_qam, upconvert};
use rfsim_core::{ExperimentConfig, QuantizerKind, SimError};

use crate::error::{HarnessError, Result};
use crate::streams::{stream, StreamPurpose};

/// One exported constellation point with its trial/symbol provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstellationRow {
    pub trial: usize,
    pub symbol: usize,
    pub subcarrier: usize,
    pub user: usize,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AnalyticalDiagnostics {
    pub max_imag_trace_ratio: f64,
    pub max_antihermitian: f64,
}

/// Pooled results of one operating point.
#[derive(Debug, Clone)]
pub struct PointOutcome {
    pub evm_empirical_pct: f64,
    /// Normal-approximation half-width over per-channel EVM^2 values; a
    /// diagnostic, only defined for more than one channel.
    pub ci_halfwidth_pct: Option<f64>,
    /// Pooled closed-form EVM over the same channels, when the analytical
    /// engine applies (one-bit chain, no binary dither; noise-enhancement
    /// formula for the infinite-resolution chain).
    pub evm_analytical_pct: Option<f64>,
    pub per_channel_evm2: Vec<f64>,
    pub constellation: Vec<ConstellationRow>,
    pub diagnostics: Option<AnalyticalDiagnostics>,
}

struct TrialOutput {
    err_energy: f64,
    sig_energy: f64,
    analytical_evm2: Option<f64>,
    diagnostics: Option<AnalyticalDiagnostics>,
    constellation: Vec<ConstellationRow>,
}

/// Draws the channel of one trial, with its frequency responses cached.
pub fn trial_channel(cfg: &ExperimentConfig, trial: usize) -> Result<ChannelRealization> {
    let mut rng = stream(cfg.master_seed, StreamPurpose::Channel, trial, 0);
    let mut ch = draw_channel(cfg.b, cfg.u, cfg.l, &mut rng)
        .map_err(|source| trial_error(cfg, trial, source))?;
    ch.cache_freq_responses(&cfg.occupied_set, cfg.n)
        .map_err(|source| trial_error(cfg, trial, source))?;
    Ok(ch)
}

fn trial_error(cfg: &ExperimentConfig, trial: usize, source: SimError) -> HarnessError {
    HarnessError::Trial { trial, seed: cfg.master_seed, source }
}

/// Runs the configured number of channels x symbols. Trials execute in the
/// worker pool and merge in trial order, so the outcome is byte-identical for
/// any worker count.
pub fn run_point(cfg: &ExperimentConfig, capture_constellation: bool) -> Result<PointOutcome> {
    cfg.validate().map_err(HarnessError::Sim)?;
    let analytical_applies = match cfg.quantizer {
        QuantizerKind::OneBit => cfg.dither.mode != DitherMode::UniformBinary,
        QuantizerKind::Infinite => true,
    };
    let trials: Vec<Result<TrialOutput>> = (0..cfg.n_channels)
        .into_par_iter()
        .map(|trial| run_trial(cfg, trial, capture_constellation, analytical_applies))
        .collect();

    let mut err_energy = 0.0;
    let mut sig_energy = 0.0;
    let mut per_channel_evm2 = Vec::with_capacity(cfg.n_channels);
    let mut analytical_acc = 0.0;
    let mut diagnostics: Option<AnalyticalDiagnostics> = None;
    let mut constellation = Vec::new();
    for trial in trials {
        let t = trial?;
        err_energy += t.err_energy;
        sig_energy += t.sig_energy;
        per_channel_evm2.push(t.err_energy / t.sig_energy);
        if let Some(a) = t.analytical_evm2 {
            analytical_acc += a;
        }
        if let Some(d) = t.diagnostics {
            let entry = diagnostics.get_or_insert_with(AnalyticalDiagnostics::default);
            entry.max_imag_trace_ratio = entry.max_imag_trace_ratio.max(d.max_imag_trace_ratio);
            entry.max_antihermitian = entry.max_antihermitian.max(d.max_antihermitian);
        }
        constellation.extend(t.constellation);
    }

    let pooled = err_energy / sig_energy;
    let evm_empirical_pct = 100.0 * pooled.sqrt();
    let ci_halfwidth_pct = confidence_halfwidth(pooled, &per_channel_evm2);
    let evm_analytical_pct = analytical_applies
        .then(|| 100.0 * (analytical_acc / cfg.n_channels as f64).sqrt());
    Ok(PointOutcome {
        evm_empirical_pct,
        ci_halfwidth_pct,
        evm_analytical_pct,
        per_channel_evm2,
        constellation,
        diagnostics,
    })
}

/// 95% half-width on the EVM percentage via a normal approximation over the
/// per-channel EVM^2 samples.
fn confidence_halfwidth(pooled_evm2: f64, per_channel_evm2: &[f64]) -> Option<f64> {
    let c = per_channel_evm2.len();
    if c < 2 {
        return None;
    }
    let mean = per_channel_evm2.iter().sum::<f64>() / c as f64;
    let var = per_channel_evm2.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (c as f64 - 1.0);
    let se = 1.96 * (var / c as f64).sqrt();
    Some(100.0 * ((pooled_evm2 + se).sqrt() - pooled_evm2.sqrt()))
}

fn run_trial(
    cfg: &ExperimentConfig,
    trial: usize,
    capture_constellation: bool,
    analytical_applies: bool,
) -> Result<TrialOutput> {
    let wrap = |source: SimError| trial_error(cfg, trial, source);
    let ch = trial_channel(cfg, trial)?;
    let gain = match cfg.quantizer {
        QuantizerKind::OneBit => bussgang::combiner_gain(&ch, cfg).map_err(wrap)?,
        QuantizerKind::Infinite => Gain::identity(cfg.b),
    };
    let (analytical_evm2, diagnostics) = if analytical_applies {
        match cfg.quantizer {
            QuantizerKind::OneBit => {
                let detail = bussgang::analytical_evm_detailed(&ch, cfg).map_err(wrap)?;
                (
                    Some((detail.evm_pct / 100.0).powi(2)),
                    Some(AnalyticalDiagnostics {
                        max_imag_trace_ratio: detail.imag_trace_ratio,
                        max_antihermitian: detail.antihermitian_max,
                    }),
                )
            }
            QuantizerKind::Infinite => {
                let evm = bussgang::unquantized_zf_evm(&ch, cfg).map_err(wrap)?;
                (Some((evm / 100.0).powi(2)), None)
            }
        }
    } else {
        (None, None)
    };

    let n_0 = cfg.n_0();
    let mut err_energy = 0.0;
    let mut sig_energy = 0.0;
    let mut constellation = Vec::new();
    for symbol in 0..cfg.n_symbols {
        let mut sym_rng = stream(cfg.master_seed, StreamPurpose::Symbols, trial, symbol);
        let symbols =
            map_qam(&mut sym_rng, cfg.qam_order, cfg.e_s, cfg.u, &cfg.occupied_set).map_err(wrap)?;
        let bb = apply_channel(&symbols, &ch, cfg.n).map_err(wrap)?;
        let rf = upconvert(&bb, cfg.f_c, cfg.f_s).map_err(wrap)?;
        let mut y = rf;
        if n_0 > 0.0 {
            let mut noise_rng = stream(cfg.master_seed, StreamPurpose::Noise, trial, symbol);
            y = add_noise_and_dither(&y, n_0, &DitherSpec::none(), &mut noise_rng).map_err(wrap)?;
        }
        if cfg.dither.d_0 > 0.0 {
            let mut dither_rng = stream(cfg.master_seed, StreamPurpose::Dither, trial, symbol);
            y = add_noise_and_dither(&y, 0.0, &cfg.dither, &mut dither_rng).map_err(wrap)?;
        }
        let z = match cfg.quantizer {
            QuantizerKind::OneBit => quantizer::one_bit(&y),
            QuantizerKind::Infinite => quantizer::passthrough(&y),
        };
        let zbb = ddc(&z, &cfg.occupied_set, cfg.f_c, cfg.f_s, cfg.n).map_err(wrap)?;
        let est = zf_combine(&zbb, &ch, &gain).map_err(wrap)?;

        for k_idx in 0..cfg.occupied_set.len() {
            for user in 0..cfg.u {
                let t = symbols.value(k_idx, user);
                err_energy += (est.value(k_idx, user) - t).norm_sqr();
                sig_energy += t.norm_sqr();
            }
        }
        if capture_constellation {
            for p in export_constellation(std::slice::from_ref(&est)) {
                constellation.push(ConstellationRow {
                    trial,
                    symbol,
                    subcarrier: p.subcarrier,
                    user: p.user,
                    re: p.value.re,
                    im: p.value.im,
                });
            }
        }
    }
    Ok(TrialOutput { err_energy, sig_energy, analytical_evm2, diagnostics, constellation })
}
