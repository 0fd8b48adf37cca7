//! Frequency-selective Rayleigh channels with uniform power delay profile.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::numerics::{ComplexGrid, RandomStream};

/// One channel draw: the time-domain taps plus cached per-subcarrier
/// frequency responses. Immutable after creation; share read-only.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    taps: Vec<ComplexGrid>,
    freq: BTreeMap<usize, ComplexGrid>,
}

/// Draws `L` independent taps whose entries are circularly-symmetric complex
/// Gaussian with variance `1/L`, so the total per-entry channel power is 1.
pub fn draw_channel(b: usize, u: usize, l: usize, rng: &mut RandomStream) -> Result<ChannelRealization> {
    if u < 1 || b < u {
        return Err(SimError::InvalidArgument(format!("need b >= u >= 1, got b={b} u={u}")));
    }
    if l < 1 {
        return Err(SimError::InvalidArgument(format!("need l >= 1, got l={l}")));
    }
    let sigma = (1.0 / (2.0 * l as f64)).sqrt();
    let taps = (0..l)
        .map(|_| {
            ComplexGrid::from_fn(b, u, |_, _| {
                let re = sigma * rng.next_standard_normal();
                let im = sigma * rng.next_standard_normal();
                Complex64::new(re, im)
            })
        })
        .collect();
    Ok(ChannelRealization { taps, freq: BTreeMap::new() })
}

/// Frequency response at subcarrier `k` of an `N`-bin transform:
/// `H_hat_k = sum_l taps[l] e^{-j2pi k l / N}`.
pub fn freq_response(taps: &[ComplexGrid], k: usize, n: usize) -> Result<ComplexGrid> {
    if taps.is_empty() {
        return Err(SimError::InvalidArgument("freq_response needs at least one tap".into()));
    }
    if k >= n {
        return Err(SimError::InvalidArgument(format!("subcarrier {k} out of range for n={n}")));
    }
    let (b, u) = (taps[0].rows(), taps[0].cols());
    let mut out = ComplexGrid::zeros(b, u);
    for (l, tap) in taps.iter().enumerate() {
        let phase = -2.0 * PI * (k as f64) * (l as f64) / n as f64;
        let w = Complex64::from_polar(1.0, phase);
        for (o, &t) in out.data_mut().iter_mut().zip(tap.data()) {
            *o += t * w;
        }
    }
    Ok(out)
}

impl ChannelRealization {
    pub fn b(&self) -> usize {
        self.taps[0].rows()
    }

    pub fn u(&self) -> usize {
        self.taps[0].cols()
    }

    pub fn l(&self) -> usize {
        self.taps.len()
    }

    pub fn taps(&self) -> &[ComplexGrid] {
        &self.taps
    }

    /// Rebuild a realization from stored taps (fixture load path).
    pub fn from_taps(taps: Vec<ComplexGrid>) -> Result<Self> {
        if taps.is_empty() {
            return Err(SimError::InvalidArgument("channel needs at least one tap".into()));
        }
        let (b, u) = (taps[0].rows(), taps[0].cols());
        if taps.iter().any(|t| t.rows() != b || t.cols() != u) {
            return Err(SimError::InvalidArgument("inconsistent tap dimensions".into()));
        }
        Ok(Self { taps, freq: BTreeMap::new() })
    }

    /// Computes and caches `H_hat_k` for the given subcarriers.
    pub fn cache_freq_responses(&mut self, ks: &[usize], n: usize) -> Result<()> {
        for &k in ks {
            if !self.freq.contains_key(&k) {
                let h = freq_response(&self.taps, k, n)?;
                self.freq.insert(k, h);
            }
        }
        Ok(())
    }

    /// Cached frequency response at `k`.
    pub fn hk(&self, k: usize) -> Result<&ComplexGrid> {
        self.freq.get(&k).ok_or_else(|| {
            SimError::InvalidArgument(format!("frequency response for subcarrier {k} not cached"))
        })
    }

    pub fn cached_subcarriers(&self) -> impl Iterator<Item = usize> + '_ {
        self.freq.keys().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(id: u64) -> RandomStream {
        RandomStream::new(0xc4a2, id)
    }

    #[test]
    fn single_tap_has_unit_entry_variance() {
        let mut rng = stream(0);
        let mut acc = 0.0;
        let draws = 10_000;
        for _ in 0..draws {
            let ch = draw_channel(1, 1, 1, &mut rng).unwrap();
            acc += ch.taps()[0].get(0, 0).norm_sqr();
        }
        let var = acc / draws as f64;
        assert!((var - 1.0).abs() < 0.03, "per-entry variance {var}");
    }

    #[test]
    fn fixed_seed_reproduces_taps() {
        let a = draw_channel(4, 2, 3, &mut stream(7)).unwrap();
        let b = draw_channel(4, 2, 3, &mut stream(7)).unwrap();
        for (x, y) in a.taps().iter().zip(b.taps()) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn total_power_is_normalized_for_long_channels() {
        let mut rng = stream(1);
        let draws = 100;
        let (b, u, l) = (32, 4, 1000);
        let mut acc = 0.0;
        for _ in 0..draws {
            let ch = draw_channel(b, u, l, &mut rng).unwrap();
            let total: f64 = ch.taps().iter().map(|t| t.data().iter().map(|v| v.norm_sqr()).sum::<f64>()).sum();
            acc += total / (b * u) as f64;
        }
        let per_entry = acc / draws as f64;
        assert!((per_entry - 1.0).abs() < 0.03, "total per-entry power {per_entry}");
    }

    #[test]
    fn rejects_bad_dimensions() {
        let mut rng = stream(2);
        assert!(draw_channel(0, 0, 1, &mut rng).is_err());
        assert!(draw_channel(2, 4, 1, &mut rng).is_err());
        assert!(draw_channel(4, 2, 0, &mut rng).is_err());
    }

    #[test]
    fn single_tap_response_is_flat() {
        let ch = draw_channel(3, 2, 1, &mut stream(3)).unwrap();
        for k in [0usize, 1, 17, 63] {
            let h = freq_response(ch.taps(), k, 64).unwrap();
            assert_eq!(&h, &ch.taps()[0]);
        }
    }

    #[test]
    fn two_identity_taps_add_at_dc() {
        let taps = vec![ComplexGrid::identity(2), ComplexGrid::identity(2)];
        let h = freq_response(&taps, 0, 8).unwrap();
        assert!(h.sub(&ComplexGrid::identity(2).scale(2.0)).max_abs() < 1e-15);
    }

    #[test]
    fn matches_zero_padded_dft_per_entry() {
        use crate::numerics::dft;
        let (l, n) = (16usize, 64usize);
        let ch = draw_channel(2, 2, l, &mut stream(4)).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let mut padded = vec![Complex64::default(); n];
                for (i, tap) in ch.taps().iter().enumerate() {
                    padded[i] = tap.get(r, c);
                }
                let spec = dft(&padded).unwrap();
                for k in 0..n {
                    let h = freq_response(ch.taps(), k, n).unwrap();
                    assert!((h.get(r, c) - spec[k]).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn response_is_linear_in_taps() {
        let ch = draw_channel(2, 1, 4, &mut stream(5)).unwrap();
        let doubled: Vec<ComplexGrid> = ch.taps().iter().map(|t| t.scale(2.0)).collect();
        for k in [0usize, 3, 9] {
            let h = freq_response(ch.taps(), k, 16).unwrap();
            let h2 = freq_response(&doubled, k, 16).unwrap();
            // Scaling by 2 is exact in floating point.
            assert_eq!(h.scale(2.0), h2);
        }
    }

    #[test]
    fn cache_and_lookup() {
        let mut ch = draw_channel(2, 1, 4, &mut stream(6)).unwrap();
        assert!(ch.hk(3).is_err());
        ch.cache_freq_responses(&[3, 5], 16).unwrap();
        let direct = freq_response(ch.taps(), 3, 16).unwrap();
        assert_eq!(ch.hk(3).unwrap(), &direct);
        assert!(freq_response(ch.taps(), 16, 16).is_err());
    }

    #[test]
    fn ensemble_tap_covariance_is_isotropic() {
        // vec(H_l) entries: variance 1/L each, uncorrelated across entries.
        let (b, u, l) = (2usize, 2usize, 4usize);
        let mut rng = stream(8);
        let draws = 10_000;
        let dim = b * u;
        let mut second = vec![0.0f64; dim * dim];
        for _ in 0..draws {
            let ch = draw_channel(b, u, l, &mut rng).unwrap();
            let v: Vec<Complex64> = ch.taps()[0].data().to_vec();
            for i in 0..dim {
                for j in 0..dim {
                    second[i * dim + j] += (v[i] * v[j].conj()).re;
                }
            }
        }
        let scale = 1.0 / draws as f64;
        for i in 0..dim {
            for j in 0..dim {
                let got = second[i * dim + j] * scale;
                let want = if i == j { 1.0 / l as f64 } else { 0.0 };
                assert!(
                    (got - want).abs() < 0.05 / l as f64,
                    "cov({i},{j}) = {got}, want {want}"
                );
            }
        }
    }
}
