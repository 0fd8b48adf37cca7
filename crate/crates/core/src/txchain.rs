//! Transmit side: QAM symbol mapping, OFDM modulation, channel application in
//! the frequency domain, RF upconversion, and noise/dither injection.
//!
//! The cyclic prefix is never materialized: all analysis and metrics run on
//! the N retained samples of a single OFDM symbol, where frequency-domain
//! channel application equals the prefix-based linear convolution exactly.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::config::DitherSpec;
use crate::config::{DitherMode, SUPPORTED_QAM_ORDERS};
use crate::error::{Result, SimError};
use crate::numerics::{idft, RandomStream};

/// Per-subcarrier transmit vectors for one OFDM symbol: a `u`-vector of
/// constellation points for every occupied subcarrier, zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySymbols {
    occupied: Vec<usize>,
    u: usize,
    order: u32,
    e_s: f64,
    /// Subcarrier-major: `data[k_idx * u + user]`.
    data: Vec<Complex64>,
}

impl FrequencySymbols {
    pub fn occupied(&self) -> &[usize] {
        &self.occupied
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn e_s(&self) -> f64 {
        self.e_s
    }

    #[inline]
    pub fn value(&self, k_idx: usize, user: usize) -> Complex64 {
        self.data[k_idx * self.u + user]
    }

    /// Total symbol energy `sum_k ||s_hat_k||^2` of this realization.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn from_values(occupied: Vec<usize>, u: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(occupied.len() * u, data.len());
        Self { occupied, u, order: 0, e_s: 0.0, data }
    }
}

/// Complex envelope of one OFDM symbol over the array, antenna-major:
/// `sample(b, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasebandFrame {
    b: usize,
    n: usize,
    data: Vec<Complex64>,
}

impl BasebandFrame {
    pub fn b(&self) -> usize {
        self.b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn sample(&self, b: usize, n: usize) -> Complex64 {
        self.data[b * self.n + n]
    }

    pub fn antenna(&self, b: usize) -> &[Complex64] {
        &self.data[b * self.n..(b + 1) * self.n]
    }
}

/// Which stage of the receive chain a real-valued RF frame represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RfStage {
    PreQuantization,
    PostQuantization,
}

/// One OFDM symbol of real RF samples over the array, antenna-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RfFrame {
    b: usize,
    n: usize,
    stage: RfStage,
    data: Vec<f64>,
}

impl RfFrame {
    pub fn new(b: usize, n: usize, stage: RfStage, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), b * n);
        Self { b, n, stage, data }
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stage(&self) -> RfStage {
        self.stage
    }

    #[inline]
    pub fn sample(&self, b: usize, n: usize) -> f64 {
        self.data[b * self.n + n]
    }

    pub fn antenna(&self, b: usize) -> &[f64] {
        &self.data[b * self.n..(b + 1) * self.n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn map_values(&self, stage: RfStage, f: impl Fn(f64) -> f64) -> Self {
        Self { b: self.b, n: self.n, stage, data: self.data.iter().map(|&v| f(v)).collect() }
    }
}

/// All points of a square Gray-labeled QAM constellation, scaled so the
/// average point energy is exactly `e_s`. Index = symbol label.
pub fn constellation(order: u32, e_s: f64) -> Result<Vec<Complex64>> {
    if !SUPPORTED_QAM_ORDERS.contains(&order) {
        return Err(SimError::InvalidArgument(format!(
            "unsupported QAM order {order}, expected one of {SUPPORTED_QAM_ORDERS:?}"
        )));
    }
    if !(e_s > 0.0 && e_s.is_finite()) {
        return Err(SimError::InvalidArgument(format!("e_s must be positive, got {e_s}")));
    }
    let side = (order as f64).sqrt() as u32;
    let bits_per_axis = side.trailing_zeros();
    // Mean energy of the unscaled +-{1,3,...} grid is 2(order-1)/3.
    let scale = (3.0 * e_s / (2.0 * (order as f64 - 1.0))).sqrt();
    let level = |idx: u32| -> f64 { (2.0 * idx as f64 - (side as f64 - 1.0)) * scale };
    let points = (0..order)
        .map(|label| {
            let gi = label >> bits_per_axis;
            let gq = label & (side - 1);
            Complex64::new(level(gray_to_index(gi)), level(gray_to_index(gq)))
        })
        .collect();
    Ok(points)
}

/// Binary-reflected Gray code to linear index.
fn gray_to_index(g: u32) -> u32 {
    let mut i = g;
    let mut shift = 1;
    while (g >> shift) != 0 {
        i ^= g >> shift;
        shift += 1;
    }
    i
}

/// Uniform i.i.d. QAM draws for every (occupied subcarrier, user) slot.
pub fn map_qam(
    rng: &mut RandomStream,
    order: u32,
    e_s: f64,
    u: usize,
    occupied: &[usize],
) -> Result<FrequencySymbols> {
    let points = constellation(order, e_s)?;
    if u < 1 || occupied.is_empty() {
        return Err(SimError::InvalidArgument("map_qam needs u >= 1 and a nonempty occupied set".into()));
    }
    let mut data = Vec::with_capacity(occupied.len() * u);
    for _ in occupied {
        for _ in 0..u {
            data.push(points[rng.next_index(order) as usize]);
        }
    }
    Ok(FrequencySymbols { occupied: occupied.to_vec(), u, order, e_s, data })
}

/// Per-user OFDM modulation: `s_n = (1/sqrt(N)) sum_{k in S} s_hat_k e^{j2pi kn/N}`.
pub fn ofdm_modulate(symbols: &FrequencySymbols, n: usize) -> Result<Vec<Vec<Complex64>>> {
    for &k in symbols.occupied() {
        if k >= n {
            return Err(SimError::InvalidArgument(format!(
                "occupied subcarrier {k} out of range for n={n}"
            )));
        }
    }
    let root_n = (n as f64).sqrt();
    let mut out = Vec::with_capacity(symbols.u);
    for user in 0..symbols.u {
        let mut spectrum = vec![Complex64::default(); n];
        for (k_idx, &k) in symbols.occupied().iter().enumerate() {
            spectrum[k] = symbols.value(k_idx, user);
        }
        let time = idft(&spectrum)?;
        out.push(time.into_iter().map(|v| v * root_n).collect());
    }
    Ok(out)
}

/// Applies the channel in the frequency domain and synthesizes the received
/// complex envelope per antenna: `x_hat_k = H_hat_k s_hat_k` on occupied bins,
/// then per-antenna OFDM modulation. Equals the cyclic-prefix based linear
/// convolution restricted to the N retained samples.
pub fn apply_channel(
    symbols: &FrequencySymbols,
    ch: &ChannelRealization,
    n: usize,
) -> Result<BasebandFrame> {
    if ch.u() != symbols.u {
        return Err(SimError::InvalidArgument(format!(
            "channel has u={} but symbols have u={}",
            ch.u(),
            symbols.u
        )));
    }
    if n < ch.l() {
        return Err(SimError::InvalidArgument(format!("need n >= l, got n={n} l={}", ch.l())));
    }
    let b = ch.b();
    let root_n = (n as f64).sqrt();
    // Received spectrum per antenna.
    let mut spectra = vec![vec![Complex64::default(); n]; b];
    let mut sk = vec![Complex64::default(); symbols.u];
    for (k_idx, &k) in symbols.occupied().iter().enumerate() {
        if k >= n {
            return Err(SimError::InvalidArgument(format!(
                "occupied subcarrier {k} out of range for n={n}"
            )));
        }
        let hk = ch.hk(k)?;
        for (user, s) in sk.iter_mut().enumerate() {
            *s = symbols.value(k_idx, user);
        }
        let x = hk.mul_vec(&sk);
        for (ant, v) in x.into_iter().enumerate() {
            spectra[ant][k] = v;
        }
    }
    let mut data = Vec::with_capacity(b * n);
    for spectrum in &spectra {
        let time = idft(spectrum)?;
        data.extend(time.into_iter().map(|v| v * root_n));
    }
    Ok(BasebandFrame { b, n, data })
}

/// Real RF samples: `x_rf(b, n) = sqrt(2) Re{ x_bb(b, n) e^{j2pi (f_c/f_s) n} }`.
///
/// The phase reference is n = 0 at the first retained sample.
pub fn upconvert(bb: &BasebandFrame, f_c: f64, f_s: f64) -> Result<RfFrame> {
    if !(f_c > 0.0 && f_c < f_s / 2.0) {
        return Err(SimError::InvalidArgument(format!(
            "carrier must satisfy 0 < f_c < f_s/2, got f_c={f_c} f_s={f_s}"
        )));
    }
    let ratio = f_c / f_s;
    let root2 = std::f64::consts::SQRT_2;
    let phasors: Vec<(f64, f64)> =
        (0..bb.n).map(|i| (2.0 * PI * ratio * i as f64).sin_cos()).collect();
    let mut data = Vec::with_capacity(bb.b * bb.n);
    for ant in 0..bb.b {
        let row = bb.antenna(ant);
        for (v, &(sin, cos)) in row.iter().zip(&phasors) {
            data.push(root2 * (v.re * cos - v.im * sin));
        }
    }
    Ok(RfFrame { b: bb.b, n: bb.n, stage: RfStage::PreQuantization, data })
}

/// Adds white Gaussian noise of per-sample variance `N_0/2` and dither per the
/// spec, drawing everything from the supplied stream in antenna-major order
/// (noise then dither per sample).
pub fn add_noise_and_dither(
    rf: &RfFrame,
    n_0: f64,
    dither: &DitherSpec,
    rng: &mut RandomStream,
) -> Result<RfFrame> {
    if !(n_0 >= 0.0 && n_0.is_finite()) {
        return Err(SimError::InvalidArgument(format!("noise power must be >= 0, got {n_0}")));
    }
    dither.validate()?;
    let noise_sigma = (n_0 / 2.0).sqrt();
    let dither_amp = (dither.d_0 / 2.0).sqrt();
    let mut data = Vec::with_capacity(rf.data.len());
    for &v in &rf.data {
        let mut y = v;
        if n_0 > 0.0 {
            y += noise_sigma * rng.next_standard_normal();
        }
        y += match dither.mode {
            DitherMode::None => 0.0,
            DitherMode::UniformBinary => dither_amp * rng.next_sign(),
            DitherMode::Gaussian => dither_amp * rng.next_standard_normal(),
        };
        data.push(y);
    }
    Ok(RfFrame { b: rf.b, n: rf.n, stage: rf.stage, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::draw_channel;
    use crate::numerics::ComplexGrid;

    fn stream(id: u64) -> RandomStream {
        RandomStream::new(0x7c, id)
    }

    #[test]
    fn qpsk_points_are_normalized() {
        let pts = constellation(4, 1.0).unwrap();
        let q = 1.0 / 2f64.sqrt();
        for p in &pts {
            assert!((p.re.abs() - q).abs() < 1e-15);
            assert!((p.im.abs() - q).abs() < 1e-15);
        }
        // All four quadrants present.
        let mut signs: Vec<(bool, bool)> = pts.iter().map(|p| (p.re > 0.0, p.im > 0.0)).collect();
        signs.sort();
        signs.dedup();
        assert_eq!(signs.len(), 4);
    }

    #[test]
    fn qam16_average_energy_is_exact() {
        let pts = constellation(16, 1.0).unwrap();
        let avg: f64 = pts.iter().map(|p| p.norm_sqr()).sum::<f64>() / 16.0;
        assert!((avg - 1.0).abs() < 1e-14);
        // Scale factor 1/sqrt(10) on the +-{1,3} grid.
        let lvl = 1.0 / 10f64.sqrt();
        for p in &pts {
            let r = p.re.abs() / lvl;
            assert!((r - 1.0).abs() < 1e-12 || (r - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn qam64_average_energy_scales_with_es() {
        let pts = constellation(64, 2.0).unwrap();
        let avg: f64 = pts.iter().map(|p| p.norm_sqr()).sum::<f64>() / 64.0;
        assert!((avg - 2.0).abs() < 1e-13);
        let lvl = (2.0 / 42.0f64).sqrt();
        for p in &pts {
            let r = p.re.abs() / lvl;
            let ok = [1.0, 3.0, 5.0, 7.0].iter().any(|w| (r - w).abs() < 1e-12);
            assert!(ok, "level {r}");
        }
    }

    #[test]
    fn gray_neighbors_differ_in_one_bit() {
        // Adjacent I levels must differ in exactly one bit of the I label.
        let pts = constellation(16, 1.0).unwrap();
        let mut by_axis: Vec<(i64, u32)> = pts
            .iter()
            .enumerate()
            .map(|(label, p)| ((p.re * 1e6).round() as i64, label as u32 >> 2))
            .collect();
        by_axis.sort();
        by_axis.dedup();
        assert_eq!(by_axis.len(), 4);
        for w in by_axis.windows(2) {
            let diff = (w[0].1 ^ w[1].1).count_ones();
            assert_eq!(diff, 1, "labels {:?}", w);
        }
    }

    #[test]
    fn unsupported_order_is_rejected() {
        assert!(matches!(constellation(32, 1.0), Err(SimError::InvalidArgument(_))));
        assert!(matches!(constellation(2, 1.0), Err(SimError::InvalidArgument(_))));
    }

    #[test]
    fn map_qam_draws_lie_on_the_constellation() {
        let mut rng = stream(1);
        let occupied = [0usize, 3, 7];
        let sym = map_qam(&mut rng, 16, 1.0, 4, &occupied).unwrap();
        let points = constellation(16, 1.0).unwrap();
        for k_idx in 0..3 {
            for user in 0..4 {
                let v = sym.value(k_idx, user);
                assert!(points.iter().any(|p| (p - v).norm() < 1e-15));
            }
        }
    }

    #[test]
    fn symbol_second_moment_matches_es() {
        // E[s s^H] = E_s I: diagonal E_s, off-diagonal ~ 0 over many draws.
        let mut rng = stream(2);
        let occupied = [0usize];
        let draws = 100_000;
        let mut diag = 0.0;
        let mut cross = Complex64::default();
        for _ in 0..draws {
            let sym = map_qam(&mut rng, 16, 1.0, 2, &occupied).unwrap();
            let a = sym.value(0, 0);
            let b = sym.value(0, 1);
            diag += a.norm_sqr();
            cross += a * b.conj();
        }
        let diag = diag / draws as f64;
        let cross = cross / draws as f64;
        assert!((diag - 1.0).abs() < 0.02, "diag {diag}");
        assert!(cross.norm() < 0.02, "cross {cross}");
    }

    #[test]
    fn dc_only_modulation_is_constant() {
        let sym = FrequencySymbols {
            occupied: vec![0],
            u: 1,
            order: 4,
            e_s: 1.0,
            data: vec![Complex64::new(3.0, -1.0)],
        };
        let out = ofdm_modulate(&sym, 16).unwrap();
        let want = Complex64::new(3.0, -1.0) / 4.0;
        for v in &out[0] {
            assert!((v - want).norm() < 1e-13);
        }
    }

    #[test]
    fn modulation_preserves_energy() {
        let mut rng = stream(3);
        let occupied: Vec<usize> = vec![60, 61, 62, 63, 0, 1, 2, 3, 4];
        let sym = map_qam(&mut rng, 16, 1.0, 2, &occupied).unwrap();
        let out = ofdm_modulate(&sym, 64).unwrap();
        for (user, time) in out.iter().enumerate() {
            let time_energy: f64 = time.iter().map(|v| v.norm_sqr()).sum();
            let freq_energy: f64 =
                (0..occupied.len()).map(|k| sym.value(k, user).norm_sqr()).sum();
            assert!((time_energy - freq_energy).abs() < 1e-10);
        }
    }

    #[test]
    fn modulation_matches_direct_summation() {
        let mut rng = stream(4);
        let occupied: Vec<usize> = vec![60, 61, 62, 63, 0, 1, 2, 3, 4];
        let n = 64usize;
        let sym = map_qam(&mut rng, 16, 1.0, 1, &occupied).unwrap();
        let out = ofdm_modulate(&sym, n).unwrap();
        for i in 0..n {
            let direct: Complex64 = occupied
                .iter()
                .enumerate()
                .map(|(k_idx, &k)| {
                    let phase = 2.0 * PI * (k as f64) * (i as f64) / n as f64;
                    sym.value(k_idx, 0) * Complex64::from_polar(1.0, phase)
                })
                .sum::<Complex64>()
                / (n as f64).sqrt();
            assert!((out[0][i] - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn modulation_rejects_out_of_range_bins() {
        let sym = FrequencySymbols {
            occupied: vec![64],
            u: 1,
            order: 4,
            e_s: 1.0,
            data: vec![Complex64::new(1.0, 0.0)],
        };
        assert!(ofdm_modulate(&sym, 64).is_err());
    }

    #[test]
    fn identity_channel_reproduces_modulation() {
        let mut rng = stream(5);
        let occupied = [0usize, 1, 15];
        let n = 16usize;
        let b = 2usize;
        let sym = map_qam(&mut rng, 4, 1.0, b, &occupied).unwrap();
        let taps = vec![ComplexGrid::identity(b)];
        let mut ch = ChannelRealization::from_taps(taps).unwrap();
        ch.cache_freq_responses(&occupied, n).unwrap();
        let frame = apply_channel(&sym, &ch, n).unwrap();
        let per_user = ofdm_modulate(&sym, n).unwrap();
        for ant in 0..b {
            for i in 0..n {
                assert!((frame.sample(ant, i) - per_user[ant][i]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn matches_circular_convolution() {
        let (n, l, b, u) = (16usize, 4usize, 2usize, 1usize);
        let mut rng = stream(6);
        let mut ch = draw_channel(b, u, l, &mut rng).unwrap();
        let occupied = [14usize, 15, 0, 1];
        ch.cache_freq_responses(&occupied, n).unwrap();
        let sym = map_qam(&mut rng, 16, 1.0, u, &occupied).unwrap();
        let frame = apply_channel(&sym, &ch, n).unwrap();

        let user_time = ofdm_modulate(&sym, n).unwrap();
        for ant in 0..b {
            for i in 0..n {
                let mut acc = Complex64::default();
                for (tap_idx, tap) in ch.taps().iter().enumerate() {
                    let src = (i + n - tap_idx) % n;
                    acc += tap.get(ant, 0) * user_time[0][src];
                }
                assert!((frame.sample(ant, i) - acc).norm() < 1e-10, "antenna {ant} sample {i}");
            }
        }
    }

    #[test]
    fn channel_application_is_linear() {
        let (n, l, b, u) = (16usize, 2usize, 2usize, 1usize);
        let mut rng = stream(7);
        let ch = draw_channel(b, u, l, &mut rng).unwrap();
        let doubled =
            ChannelRealization::from_taps(ch.taps().iter().map(|t| t.scale(2.0)).collect()).unwrap();
        let occupied = [0usize, 5];
        let mut ch = ch;
        let mut doubled = doubled;
        ch.cache_freq_responses(&occupied, n).unwrap();
        doubled.cache_freq_responses(&occupied, n).unwrap();
        let sym = map_qam(&mut rng, 4, 1.0, u, &occupied).unwrap();
        let a = apply_channel(&sym, &ch, n).unwrap();
        let b2 = apply_channel(&sym, &doubled, n).unwrap();
        for ant in 0..b {
            for i in 0..n {
                assert_eq!(a.sample(ant, i) * 2.0, b2.sample(ant, i));
            }
        }
    }

    #[test]
    fn cyclic_prefix_equivalence() {
        // Explicit CP-prepend -> linear convolution -> CP-discard equals the
        // frequency-domain application on the N retained samples.
        let (n, l, b, u) = (64usize, 8usize, 2usize, 1usize);
        let mut rng = stream(8);
        let mut ch = draw_channel(b, u, l, &mut rng).unwrap();
        let occupied = [62usize, 63, 0, 1, 2];
        ch.cache_freq_responses(&occupied, n).unwrap();
        let sym = map_qam(&mut rng, 16, 1.0, u, &occupied).unwrap();
        let frame = apply_channel(&sym, &ch, n).unwrap();

        let user_time = ofdm_modulate(&sym, n).unwrap();
        // Prepend the CP of L-1 samples, convolve, then discard the prefix.
        let mut extended = Vec::with_capacity(n + l - 1);
        extended.extend_from_slice(&user_time[0][n - (l - 1)..]);
        extended.extend_from_slice(&user_time[0]);
        for ant in 0..b {
            for i in 0..n {
                let pos = i + l - 1; // position in the extended sequence
                let mut acc = Complex64::default();
                for (tap_idx, tap) in ch.taps().iter().enumerate() {
                    acc += tap.get(ant, 0) * extended[pos - tap_idx];
                }
                assert!((frame.sample(ant, i) - acc).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn upconvert_phase_cases() {
        // Constant real envelope, n = 0: phase is zero, so x_rf = sqrt(2) c.
        let c = Complex64::new(0.7, 0.0);
        let bb = BasebandFrame { b: 1, n: 8, data: vec![c; 8] };
        let rf = upconvert(&bb, 1.0e9, 8.0e9).unwrap(); // ratio 1/8
        assert!((rf.sample(0, 0) - 2f64.sqrt() * 0.7).abs() < 1e-14);
        // 2pi (1/8) n = pi/2 at n = 2: x_rf = -sqrt(2) Im{x_bb}.
        let bb = BasebandFrame { b: 1, n: 8, data: vec![Complex64::new(0.3, -0.9); 8] };
        let rf = upconvert(&bb, 1.0e9, 8.0e9).unwrap();
        assert!((rf.sample(0, 2) - 2f64.sqrt() * 0.9).abs() < 1e-13);
        assert_eq!(rf.stage(), RfStage::PreQuantization);
    }

    #[test]
    fn upconvert_rejects_out_of_band_carrier() {
        let bb = BasebandFrame { b: 1, n: 4, data: vec![Complex64::default(); 4] };
        assert!(upconvert(&bb, 5.0e9, 8.0e9).is_err());
        assert!(upconvert(&bb, 0.0, 8.0e9).is_err());
    }

    #[test]
    fn rf_power_matches_envelope_power() {
        // Multi-carrier config: time-average of x_rf^2 ~ average of |x_bb|^2.
        let (n, b, u) = (1024usize, 2usize, 2usize);
        let mut rng = stream(9);
        let mut ch = draw_channel(b, u, 16, &mut rng).unwrap();
        let occupied: Vec<usize> = vec![1020, 1021, 1022, 1023, 0, 1, 2, 3, 4];
        ch.cache_freq_responses(&occupied, n).unwrap();
        let mut bb_power = 0.0;
        let mut rf_power = 0.0;
        for _ in 0..40 {
            let sym = map_qam(&mut rng, 16, 1.0, u, &occupied).unwrap();
            let bb = apply_channel(&sym, &ch, n).unwrap();
            let rf = upconvert(&bb, 0.24e10, 1.0e10).unwrap();
            for ant in 0..b {
                bb_power += bb.antenna(ant).iter().map(|v| v.norm_sqr()).sum::<f64>();
                rf_power += rf.antenna(ant).iter().map(|v| v * v).sum::<f64>();
            }
        }
        let ratio = rf_power / bb_power;
        assert!((ratio - 1.0).abs() < 0.02, "rf/bb power ratio {ratio}");
    }

    #[test]
    fn zero_noise_zero_dither_is_identity() {
        let rf = RfFrame::new(1, 4, RfStage::PreQuantization, vec![0.5, -0.25, 0.0, 2.0]);
        let out = add_noise_and_dither(&rf, 0.0, &DitherSpec::none(), &mut stream(10)).unwrap();
        assert_eq!(out, rf);
    }

    #[test]
    fn noise_variance_calibration() {
        let n = 1_000_000usize;
        let rf = RfFrame::new(1, n, RfStage::PreQuantization, vec![0.0; n]);
        let out = add_noise_and_dither(&rf, 2.0, &DitherSpec::none(), &mut stream(11)).unwrap();
        let var: f64 = out.data().iter().map(|v| v * v).sum::<f64>() / n as f64;
        assert!((var - 1.0).abs() < 0.02, "noise variance {var}");
    }

    #[test]
    fn binary_dither_support_is_two_valued() {
        let n = 1000usize;
        let rf = RfFrame::new(1, n, RfStage::PreQuantization, vec![0.0; n]);
        let out =
            add_noise_and_dither(&rf, 0.0, &DitherSpec::uniform_binary(2.0), &mut stream(12)).unwrap();
        for &v in out.data() {
            assert!(v == 1.0 || v == -1.0, "binary dither value {v}");
        }
    }

    #[test]
    fn negative_powers_are_rejected() {
        let rf = RfFrame::new(1, 2, RfStage::PreQuantization, vec![0.0, 0.0]);
        assert!(add_noise_and_dither(&rf, -1.0, &DitherSpec::none(), &mut stream(13)).is_err());
        let bad = DitherSpec { mode: DitherMode::Gaussian, d_0: -2.0 };
        assert!(add_noise_and_dither(&rf, 0.0, &bad, &mut stream(13)).is_err());
    }
}
