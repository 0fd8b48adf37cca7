//! Analytical engine for the 1-bit receive chain: second-order statistics of
//! the RF signal, the linear-decomposition gain, the arcsine-law
//! autocovariance, the distortion covariance per occupied subcarrier, and the
//! closed-form EVM and PSD built from them.
//!
//! The lag sums run `m = 0..N-1` exactly as the closed forms state. The
//! one-sided sum leaves a small anti-Hermitian residual in the accumulated
//! distortion covariance; the Hermitian part is used and the residual is
//! surfaced as a diagnostic instead of being silently discarded.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::ChannelRealization;
use crate::config::{DitherMode, ExperimentConfig};
use crate::error::{Result, SimError};
use crate::numerics::{arcsine_clipped, dft, elementwise_arcsine, pseudo_inverse, ComplexGrid, RealGrid};
use crate::rxchain::PsdEstimate;

/// Diagonal linear-decomposition gain with positive entries. `identity` is
/// the infinite-resolution combiner's stand-in.
#[derive(Debug, Clone, PartialEq)]
pub struct Gain {
    diag: Vec<f64>,
}

impl Gain {
    pub fn new(diag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(SimError::InvalidArgument("gain needs at least one entry".into()));
        }
        if diag.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(SimError::DegenerateInput("gain entries must be positive and finite".into()));
        }
        Ok(Self { diag })
    }

    pub fn identity(b: usize) -> Self {
        Self { diag: vec![1.0; b] }
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }
}

/// Lags processed per work unit in the distortion sum. Fixed so that the
/// reduction order (and therefore every output bit) is independent of the
/// worker count.
const LAG_CHUNK: usize = 256;

/// Second-order statistics of the dithered, noisy RF signal for one channel
/// realization. Lag grids are generated on demand from the per-subcarrier
/// Gram terms instead of being stored, keeping memory at O(S B^2).
#[derive(Debug, Clone)]
pub struct SecondOrderStats {
    b: usize,
    n: usize,
    carrier_ratio: f64,
    noise_floor: f64,
    occupied: Vec<usize>,
    thetas: Vec<f64>,
    /// `T_k = (E_s/N) H_hat_k H_hat_k^H` per occupied subcarrier.
    terms: Vec<ComplexGrid>,
    d_y: Vec<f64>,
    gain: Gain,
}

impl SecondOrderStats {
    /// Builds the statistics for the configured operating point. Binary
    /// dither is refused: the closed forms assume Gaussian statistics, and
    /// binary-dither curves come from the Monte Carlo engine.
    pub fn compute(ch: &ChannelRealization, cfg: &ExperimentConfig) -> Result<Self> {
        if cfg.dither.mode == DitherMode::UniformBinary {
            return Err(SimError::UnsupportedMode(
                "analytical statistics are undefined under uniform binary dither".into(),
            ));
        }
        Self::compute_any_dither(ch, cfg)
    }

    /// Same pipeline without the dither-mode gate; used for the combiner gain
    /// in Monte Carlo runs, where the zero-lag substitution is exact for any
    /// zero-mean dither of power `D_0`.
    pub(crate) fn compute_any_dither(ch: &ChannelRealization, cfg: &ExperimentConfig) -> Result<Self> {
        let b = ch.b();
        let n = cfg.n;
        let carrier_ratio = cfg.f_c / cfg.f_s;
        let noise_floor = cfg.noise_floor();
        let scale = cfg.e_s / n as f64;
        let mut terms = Vec::with_capacity(cfg.occupied_set.len());
        let mut thetas = Vec::with_capacity(cfg.occupied_set.len());
        for &k in &cfg.occupied_set {
            let hk = ch.hk(k)?;
            terms.push(hk.matmul(&hk.hermitian()).scale(scale));
            thetas.push(2.0 * PI * (k as f64 / n as f64 + carrier_ratio));
        }
        // Accumulation order matches r_x(0) + noise floor so that the
        // zero-lag diagonal of R_y reproduces d_y bit for bit.
        let mut d_y = vec![0.0f64; b];
        for term in &terms {
            for (p, d) in d_y.iter_mut().enumerate() {
                *d += term.get(p, p).re;
            }
        }
        for d in &mut d_y {
            *d += noise_floor;
        }
        let gain = gain_from_diag(&d_y)?;
        Ok(Self {
            b,
            n,
            carrier_ratio,
            noise_floor,
            occupied: cfg.occupied_set.clone(),
            thetas,
            terms,
            d_y,
            gain,
        })
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn noise_floor(&self) -> f64 {
        self.noise_floor
    }

    pub fn occupied(&self) -> &[usize] {
        &self.occupied
    }

    /// Diagonal of `R_y[0]`.
    pub fn d_y(&self) -> &[f64] {
        &self.d_y
    }

    pub fn gain(&self) -> &Gain {
        &self.gain
    }

    fn theta(&self, k: usize) -> f64 {
        2.0 * PI * (k as f64 / self.n as f64 + self.carrier_ratio)
    }

    /// `R_x[m]`, the RF-signal autocovariance at lag `m`.
    pub fn r_x(&self, m: usize) -> RealGrid {
        let mut out = RealGrid::zeros(self.b, self.b);
        for (term, &theta) in self.terms.iter().zip(&self.thetas) {
            let rot = Complex64::from_polar(1.0, theta * m as f64);
            for (o, t) in out.data_mut().iter_mut().zip(term.data()) {
                *o += t.re * rot.re - t.im * rot.im;
            }
        }
        out
    }

    /// `R_y[m]`: adds the noise-plus-dither floor on the zero-lag diagonal.
    pub fn r_y(&self, m: usize) -> RealGrid {
        let mut out = self.r_x(m);
        if m == 0 {
            for p in 0..self.b {
                let v = out.get(p, p) + self.noise_floor;
                out.set(p, p, v);
            }
        }
        out
    }

    /// `R_z[m]`, the quantized-signal autocovariance via the arcsine law.
    pub fn r_z(&self, m: usize) -> Result<RealGrid> {
        arcsine_autocov(&self.r_y(m), &self.d_y)
    }
}

fn gain_from_diag(d_y: &[f64]) -> Result<Gain> {
    let root = (2.0 / PI).sqrt();
    let diag: Vec<f64> = d_y.iter().map(|d| root / d.sqrt()).collect();
    if diag.iter().any(|v| !v.is_finite()) {
        return Err(SimError::DegenerateInput(
            "zero signal and noise power on an antenna; gain is undefined".into(),
        ));
    }
    Gain::new(diag)
}

/// `R_x[m] = Re{(E_s/N) sum_{k in S} H_hat_k H_hat_k^H e^{j2pi(k/N + f_c/f_s)m}}`
/// for the requested lags.
pub fn autocov_x(
    ch: &ChannelRealization,
    e_s: f64,
    n: usize,
    occupied: &[usize],
    f_c: f64,
    f_s: f64,
    lags: &[usize],
) -> Result<Vec<RealGrid>> {
    if occupied.is_empty() {
        return Err(SimError::InvalidArgument("autocov_x needs a nonempty occupied set".into()));
    }
    let b = ch.b();
    let scale = e_s / n as f64;
    let mut terms = Vec::with_capacity(occupied.len());
    for &k in occupied {
        let hk = ch.hk(k)?;
        terms.push((hk.matmul(&hk.hermitian()).scale(scale), 2.0 * PI * (k as f64 / n as f64 + f_c / f_s)));
    }
    let grids = lags
        .iter()
        .map(|&m| {
            let mut out = RealGrid::zeros(b, b);
            for (term, theta) in &terms {
                let rot = Complex64::from_polar(1.0, theta * m as f64);
                for (o, t) in out.data_mut().iter_mut().zip(term.data()) {
                    *o += t.re * rot.re - t.im * rot.im;
                }
            }
            out
        })
        .collect();
    Ok(grids)
}

/// `R_y` from `R_x`: only the zero lag changes, by `(N_0 + D_0)/2` on the
/// diagonal. `lags` pairs with `r_x` by position.
pub fn autocov_y(lags: &[usize], r_x: &[RealGrid], n_0: f64, d_0: f64) -> Result<Vec<RealGrid>> {
    if !(n_0 >= 0.0) || !(d_0 >= 0.0) {
        return Err(SimError::InvalidArgument(format!(
            "noise and dither powers must be >= 0, got n_0={n_0} d_0={d_0}"
        )));
    }
    if lags.len() != r_x.len() {
        return Err(SimError::InvalidArgument("lags and grids must pair up".into()));
    }
    let floor = (n_0 + d_0) / 2.0;
    Ok(lags
        .iter()
        .zip(r_x)
        .map(|(&m, g)| {
            let mut out = g.clone();
            if m == 0 {
                for p in 0..out.rows() {
                    let v = out.get(p, p) + floor;
                    out.set(p, p, v);
                }
            }
            out
        })
        .collect())
}

/// Closed-form gain `G = sqrt(2/pi) diag(R_y[0])^{-1/2}`.
pub fn bussgang_gain(r_y0: &RealGrid) -> Result<Gain> {
    if r_y0.rows() != r_y0.cols() {
        return Err(SimError::InvalidArgument("bussgang_gain needs a square grid".into()));
    }
    let d_y: Vec<f64> = (0..r_y0.rows()).map(|p| r_y0.get(p, p)).collect();
    if d_y.iter().any(|d| !(*d > 0.0)) {
        return Err(SimError::DegenerateInput(
            "zero signal and noise power on an antenna; gain is undefined".into(),
        ));
    }
    gain_from_diag(&d_y)
}

/// Arcsine law: `R_z[m] = (2/pi) asin(D_y^{-1/2} R_y[m] D_y^{-1/2})`.
///
/// Diagonal entries normalize by plain division so that the zero lag, where
/// `R_y[0]_pp` is the same sum as `D_y_p`, comes out as exactly 1 and
/// `(2 asin(1))/pi` as exactly 1; `asin` would amplify a 1-ulp normalization
/// error near 1 into ~1e-8.
pub fn arcsine_autocov(r_y_m: &RealGrid, d_y: &[f64]) -> Result<RealGrid> {
    if r_y_m.rows() != r_y_m.cols() || r_y_m.rows() != d_y.len() {
        return Err(SimError::InvalidArgument("arcsine_autocov dimension mismatch".into()));
    }
    if d_y.iter().any(|d| !(*d > 0.0)) {
        return Err(SimError::DegenerateInput("d_y entries must be positive".into()));
    }
    let dinv: Vec<f64> = d_y.iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut out = RealGrid::zeros(r_y_m.rows(), r_y_m.cols());
    for p in 0..r_y_m.rows() {
        for q in 0..r_y_m.cols() {
            let x = if p == q {
                r_y_m.get(p, q) / d_y[p]
            } else {
                r_y_m.get(p, q) * dinv[p] * dinv[q]
            };
            out.set(p, q, 2.0 * arcsine_clipped(x)? / PI);
        }
    }
    Ok(out)
}

/// Distortion covariance for one occupied subcarrier, with the anti-Hermitian
/// residual of the one-sided lag sum reported alongside.
#[derive(Debug, Clone)]
pub struct DistortionCov {
    pub subcarrier: usize,
    /// Hermitian part of the accumulated covariance.
    pub cov: ComplexGrid,
    /// Largest entry magnitude of the discarded anti-Hermitian part.
    pub antihermitian_max: f64,
}

/// `C_e,k = (4/pi) sum_m [asin(C_hat[m]) - C_hat[m]] e^{-j2pi(k/N + f_c/f_s)m}`
/// for each requested subcarrier, where `C_hat[m]` is the normalized `R_y[m]`.
///
/// `max_lags` truncates the sum (accuracy/speed knob); the default is the
/// full `N` lags. The lag loop runs as a parallel reduction over fixed-size
/// chunks combined in index order, so results do not depend on thread count.
pub fn distortion_cov_for(
    stats: &SecondOrderStats,
    ks: &[usize],
    max_lags: Option<usize>,
) -> Result<Vec<DistortionCov>> {
    if ks.is_empty() {
        return Err(SimError::InvalidArgument("distortion_cov needs at least one subcarrier".into()));
    }
    let lags = max_lags.unwrap_or(stats.n);
    if lags == 0 || lags > stats.n {
        return Err(SimError::InvalidArgument(format!(
            "lag count must be in 1..={}, got {lags}",
            stats.n
        )));
    }
    let bb = stats.b * stats.b;
    let ks_theta: Vec<f64> = ks.iter().map(|&k| stats.theta(k)).collect();
    let n_chunks = lags.div_ceil(LAG_CHUNK);
    let partials: Vec<Result<Vec<Vec<Complex64>>>> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let m_start = ci * LAG_CHUNK;
            let m_end = (m_start + LAG_CHUNK).min(lags);
            accumulate_lag_chunk(stats, &ks_theta, m_start, m_end)
        })
        .collect();

    let mut acc = vec![vec![Complex64::default(); bb]; ks.len()];
    for partial in partials {
        let partial = partial?;
        for (a, p) in acc.iter_mut().zip(partial) {
            for (x, y) in a.iter_mut().zip(p) {
                *x += y;
            }
        }
    }

    let scale = 4.0 / PI;
    Ok(ks
        .iter()
        .zip(acc)
        .map(|(&k, buf)| {
            let mut raw = ComplexGrid::zeros(stats.b, stats.b);
            raw.data_mut().copy_from_slice(&buf);
            let raw = raw.scale(scale);
            DistortionCov {
                subcarrier: k,
                antihermitian_max: raw.max_antihermitian(),
                cov: raw.hermitian_part(),
            }
        })
        .collect())
}

/// Single-subcarrier form of `distortion_cov_for`.
pub fn distortion_cov(stats: &SecondOrderStats, k: usize) -> Result<DistortionCov> {
    Ok(distortion_cov_for(stats, &[k], None)?.pop().expect("one subcarrier in, one out"))
}

fn accumulate_lag_chunk(
    stats: &SecondOrderStats,
    ks_theta: &[f64],
    m_start: usize,
    m_end: usize,
) -> Result<Vec<Vec<Complex64>>> {
    let b = stats.b;
    let bb = b * b;
    let dinv: Vec<f64> = stats.d_y.iter().map(|d| 1.0 / d.sqrt()).collect();
    // Per-term rotations e^{j theta m}, re-anchored at the chunk start so the
    // iterative phase error stays bounded by the chunk length.
    let mut rot: Vec<Complex64> = stats
        .thetas
        .iter()
        .map(|t| Complex64::from_polar(1.0, t * m_start as f64))
        .collect();
    let step: Vec<Complex64> = stats.thetas.iter().map(|t| Complex64::from_polar(1.0, *t)).collect();
    let mut wrot: Vec<Complex64> = ks_theta
        .iter()
        .map(|t| Complex64::from_polar(1.0, -t * m_start as f64))
        .collect();
    let wstep: Vec<Complex64> = ks_theta.iter().map(|t| Complex64::from_polar(1.0, -*t)).collect();

    let mut work = vec![0.0f64; bb];
    let mut acc = vec![vec![Complex64::default(); bb]; ks_theta.len()];
    for m in m_start..m_end {
        work.fill(0.0);
        for (term, r) in stats.terms.iter().zip(&rot) {
            let td = term.data();
            for (w, t) in work.iter_mut().zip(td) {
                *w += t.re * r.re - t.im * r.im;
            }
        }
        if m == 0 {
            for p in 0..b {
                work[p * b + p] += stats.noise_floor;
            }
        }
        // Normalize, then replace with asin(x) - x. The zero-lag diagonal is
        // exactly 1 by construction; evaluating it through the normalization
        // would let asin amplify the last-ulp rounding.
        for p in 0..b {
            for q in 0..b {
                let i = p * b + q;
                if m == 0 && p == q {
                    work[i] = std::f64::consts::FRAC_PI_2 - 1.0;
                } else {
                    let x = work[i] * dinv[p] * dinv[q];
                    work[i] = arcsine_clipped(x)? - x;
                }
            }
        }
        for (a, w) in acc.iter_mut().zip(&wrot) {
            for (o, f) in a.iter_mut().zip(&work) {
                *o += Complex64::new(f * w.re, f * w.im);
            }
        }
        for (r, s) in rot.iter_mut().zip(&step) {
            *r *= s;
        }
        for (w, s) in wrot.iter_mut().zip(&wstep) {
            *w *= s;
        }
    }
    Ok(acc)
}

/// Combiner gain for the configured operating point, valid for any dither
/// mode: the zero-lag floor `(N_0 + D_0)/2` is exact for any zero-mean dither
/// of power `D_0`, so the Monte Carlo chain uses this with binary dither too.
pub fn combiner_gain(ch: &ChannelRealization, cfg: &ExperimentConfig) -> Result<Gain> {
    Ok(SecondOrderStats::compute_any_dither(ch, cfg)?.gain().clone())
}

/// Identical statistics pipeline with the `N_0 -> N_0 + D_0` zero-lag
/// substitution for nonsubtractive Gaussian dither.
pub fn dithered_stats(ch: &ChannelRealization, cfg: &ExperimentConfig) -> Result<SecondOrderStats> {
    if cfg.dither.mode != DitherMode::Gaussian {
        return Err(SimError::UnsupportedMode(format!(
            "dithered statistics require Gaussian dither, got {}",
            cfg.dither.mode
        )));
    }
    SecondOrderStats::compute(ch, cfg)
}

/// Closed-form EVM with per-subcarrier diagnostics.
#[derive(Debug, Clone)]
pub struct AnalyticalEvm {
    pub evm_pct: f64,
    /// `(subcarrier, Re tr(A (N_eff G^2 + C) A^H))` per occupied bin.
    pub per_subcarrier: Vec<(usize, f64)>,
    /// Largest `|Im tr| / Re tr` over the occupied bins.
    pub imag_trace_ratio: f64,
    /// Largest anti-Hermitian residual over the occupied bins.
    pub antihermitian_max: f64,
}

/// Closed-form EVM for one channel realization at the configured operating
/// point: `100 sqrt(sum_k Re tr(A_k (N_eff G^2 + C_k) A_k^H) / (E_s U S))`
/// with `N_eff = N_0 + D_0`.
pub fn analytical_evm_detailed(ch: &ChannelRealization, cfg: &ExperimentConfig) -> Result<AnalyticalEvm> {
    let stats = SecondOrderStats::compute(ch, cfg)?;
    let covs = distortion_cov_for(&stats, &cfg.occupied_set, None)?;
    let n_eff = cfg.n_0() + cfg.dither.d_0;
    let mut per_subcarrier = Vec::with_capacity(covs.len());
    let mut imag_ratio = 0.0f64;
    let mut anti = 0.0f64;
    for dc in &covs {
        let trace = numerator_trace(ch, dc.subcarrier, stats.gain(), n_eff, Some(&dc.cov))?;
        if !(trace.re > 0.0) {
            return Err(SimError::Domain(format!(
                "nonpositive EVM numerator {} at subcarrier {}",
                trace.re, dc.subcarrier
            )));
        }
        imag_ratio = imag_ratio.max(trace.im.abs() / trace.re);
        anti = anti.max(dc.antihermitian_max);
        per_subcarrier.push((dc.subcarrier, trace.re));
    }
    let numerator: f64 = per_subcarrier.iter().map(|(_, v)| v).sum();
    let denominator = cfg.e_s * cfg.u as f64 * cfg.occupied_set.len() as f64;
    Ok(AnalyticalEvm {
        evm_pct: 100.0 * (numerator / denominator).sqrt(),
        per_subcarrier,
        imag_trace_ratio: imag_ratio,
        antihermitian_max: anti,
    })
}

/// `analytical_evm_detailed` reduced to the percentage.
pub fn analytical_evm(ch: &ChannelRealization, cfg: &ExperimentConfig) -> Result<f64> {
    Ok(analytical_evm_detailed(ch, cfg)?.evm_pct)
}

/// `tr(A_k (N_eff G^2 + C) A_k^H)` where `A_k = (G H_hat_k)^+`. `cov = None`
/// drops the distortion term (the unquantized reduction of the formula).
fn numerator_trace(
    ch: &ChannelRealization,
    k: usize,
    gain: &Gain,
    n_eff: f64,
    cov: Option<&ComplexGrid>,
) -> Result<Complex64> {
    let hk = ch.hk(k)?;
    let gh = hk.row_scaled(gain.diag());
    let combiner = pseudo_inverse(&gh).map_err(|e| match e {
        SimError::SingularMatrix { .. } => SimError::SingularMatrix { subcarrier: Some(k) },
        other => other,
    })?;
    let b = gain.len();
    let mut m = match cov {
        Some(c) => c.clone(),
        None => ComplexGrid::zeros(b, b),
    };
    for p in 0..b {
        let v = m.get(p, p) + n_eff * gain.diag()[p] * gain.diag()[p];
        m.set(p, p, v);
    }
    let am = combiner.matmul(&m);
    let mut trace = Complex64::default();
    for (x, y) in am.data().iter().zip(combiner.data()) {
        trace += x * y.conj();
    }
    Ok(trace)
}

/// Noise-enhancement-only EVM of the unquantized zero-forcing chain:
/// `100 sqrt(N_0 sum_k ||H_hat_k^+||_F^2 / (E_s U S))`.
pub fn unquantized_zf_evm(ch: &ChannelRealization, cfg: &ExperimentConfig) -> Result<f64> {
    let mut acc = 0.0;
    for &k in &cfg.occupied_set {
        let hk = ch.hk(k)?;
        let pinv = pseudo_inverse(hk).map_err(|e| match e {
            SimError::SingularMatrix { .. } => SimError::SingularMatrix { subcarrier: Some(k) },
            other => other,
        })?;
        acc += pinv.frobenius().powi(2);
    }
    let denominator = cfg.e_s * cfg.u as f64 * cfg.occupied_set.len() as f64;
    Ok(100.0 * (cfg.n_0() * acc / denominator).sqrt())
}

/// Antenna-averaged (or single-antenna) diagonal of `R_z[m]` for all lags.
fn quantized_lag_sequence(stats: &SecondOrderStats, antenna: Option<usize>) -> Result<Vec<f64>> {
    if let Some(a) = antenna {
        if a >= stats.b {
            return Err(SimError::InvalidArgument(format!("antenna {a} out of range for b={}", stats.b)));
        }
    }
    let b = stats.b;
    let mut seq = Vec::with_capacity(stats.n);
    let mut rot: Vec<Complex64> = vec![Complex64::new(1.0, 0.0); stats.terms.len()];
    let step: Vec<Complex64> = stats.thetas.iter().map(|t| Complex64::from_polar(1.0, *t)).collect();
    let antennas: Vec<usize> = match antenna {
        Some(a) => vec![a],
        None => (0..b).collect(),
    };
    for m in 0..stats.n {
        if m == 0 {
            // R_z[0] has a unit diagonal exactly.
            seq.push(1.0);
            for (r, s) in rot.iter_mut().zip(&step) {
                *r *= s;
            }
            continue;
        }
        let mut acc = 0.0;
        for &p in &antennas {
            let mut ry = 0.0;
            for (term, r) in stats.terms.iter().zip(&rot) {
                let t = term.get(p, p);
                ry += t.re * r.re - t.im * r.im;
            }
            acc += 2.0 * arcsine_clipped(ry / stats.d_y[p])? / PI;
        }
        seq.push(acc / antennas.len() as f64);
        for (r, s) in rot.iter_mut().zip(&step) {
            *r *= s;
        }
    }
    Ok(seq)
}

/// Transform of a lag sequence onto the uniform grid `i f_s / nfft`,
/// `i = 0..=nfft/2`: `Re{sum_m r[m] e^{-j2pi i m / nfft}}`.
fn lag_spectrum(seq: &[f64], nfft: usize) -> Result<(Vec<usize>, Vec<f64>)> {
    if nfft < seq.len() {
        return Err(SimError::InvalidArgument(format!(
            "PSD grid of {nfft} points cannot hold {} lags",
            seq.len()
        )));
    }
    let mut padded = vec![Complex64::default(); nfft];
    for (p, &v) in padded.iter_mut().zip(seq) {
        *p = Complex64::new(v, 0.0);
    }
    let spectrum = dft(&padded)?;
    let bins: Vec<usize> = (0..=nfft / 2).collect();
    let values = bins.iter().map(|&i| spectrum[i].re).collect();
    Ok((bins, values))
}

/// Analytical PSD of the quantized signal: the transform of `{R_z[m]}`
/// diagonals, antenna-averaged by default, reported in dB relative to the
/// peak on a uniform grid over `[0, f_s/2]`.
pub fn analytical_psd(
    stats: &SecondOrderStats,
    f_s: f64,
    nfft: usize,
    antenna: Option<usize>,
) -> Result<PsdEstimate> {
    let (freq_hz, linear) = analytical_psd_linear(stats, f_s, nfft, antenna)?;
    let peak = linear.iter().fold(f64::MIN, |a, &b| a.max(b));
    if !(peak > 0.0) {
        return Err(SimError::DegenerateInput("analytical PSD has no positive peak".into()));
    }
    // Truncation sidelobes can push deep nulls slightly negative; floor them
    // at -120 dB relative to the peak.
    let density_db = linear
        .iter()
        .map(|&v| 10.0 * (v / peak).max(1e-12).log10())
        .collect();
    Ok(PsdEstimate { freq_hz, density_db, antenna_averaged: antenna.is_none() })
}

/// Linear-scale version of `analytical_psd` (raw transform values).
pub fn analytical_psd_linear(
    stats: &SecondOrderStats,
    f_s: f64,
    nfft: usize,
    antenna: Option<usize>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let seq = quantized_lag_sequence(stats, antenna)?;
    let (bins, values) = lag_spectrum(&seq, nfft)?;
    let freq = bins.iter().map(|&i| i as f64 * f_s / nfft as f64).collect();
    Ok((freq, values))
}

/// Linear-scale decomposition of the quantized-signal PSD into the scaled
/// signal, the scaled noise-plus-dither floor, and the distortion.
#[derive(Debug, Clone)]
pub struct PsdComponents {
    pub freq_hz: Vec<f64>,
    pub total: Vec<f64>,
    pub signal: Vec<f64>,
    pub noise: Vec<f64>,
    pub distortion: Vec<f64>,
}

pub fn analytical_psd_components(stats: &SecondOrderStats, f_s: f64, nfft: usize) -> Result<PsdComponents> {
    let b = stats.b;
    let g = stats.gain().diag();
    let g2_mean = g.iter().map(|v| v * v).sum::<f64>() / b as f64;

    let total_seq = quantized_lag_sequence(stats, None)?;
    // Antenna-averaged diagonal of G R_x[m] G.
    let mut signal_seq = Vec::with_capacity(stats.n);
    let mut rot: Vec<Complex64> = vec![Complex64::new(1.0, 0.0); stats.terms.len()];
    let step: Vec<Complex64> = stats.thetas.iter().map(|t| Complex64::from_polar(1.0, *t)).collect();
    for _m in 0..stats.n {
        let mut acc = 0.0;
        for p in 0..b {
            let mut rx = 0.0;
            for (term, r) in stats.terms.iter().zip(&rot) {
                let t = term.get(p, p);
                rx += t.re * r.re - t.im * r.im;
            }
            acc += g[p] * g[p] * rx;
        }
        signal_seq.push(acc / b as f64);
        for (r, s) in rot.iter_mut().zip(&step) {
            *r *= s;
        }
    }
    let mut noise_seq = vec![0.0; stats.n];
    noise_seq[0] = g2_mean * stats.noise_floor;
    let dist_seq: Vec<f64> = total_seq
        .iter()
        .zip(&signal_seq)
        .zip(&noise_seq)
        .map(|((t, s), w)| t - s - w)
        .collect();

    let (bins, total) = lag_spectrum(&total_seq, nfft)?;
    let (_, signal) = lag_spectrum(&signal_seq, nfft)?;
    let (_, noise) = lag_spectrum(&noise_seq, nfft)?;
    let (_, distortion) = lag_spectrum(&dist_seq, nfft)?;
    let freq_hz = bins.iter().map(|&i| i as f64 * f_s / nfft as f64).collect();
    Ok(PsdComponents { freq_hz, total, signal, noise, distortion })
}
