//! Deterministic numeric kernels shared by the whole pipeline: transforms,
//! pseudo-inverse, the entry-wise arcsine, and seeded random streams.

mod grid;
mod rng;

pub use grid::{ComplexGrid, Grid, RealGrid};
pub use rng::RandomStream;

use std::cell::RefCell;
use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Result, SimError};

/// Normalized correlations may overshoot [-1, 1] by at most this much before
/// the arcsine refuses them as a covariance bug.
pub const ARCSINE_CLIP_TOLERANCE: f64 = 1e-9;

/// A Cholesky pivot below `RANK_TOLERANCE` times the largest pivot marks the
/// matrix as rank deficient. Channel matrices here are generic Gaussian
/// draws; near-singularity indicates a bug or a pathological input and must
/// surface rather than be regularized away.
pub const RANK_TOLERANCE: f64 = 1e-12;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized forward transform: `X_k = sum_n x_n e^{-j2pi kn/N}`.
///
/// All normalization factors live in the callers.
pub fn dft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    if x.is_empty() {
        return Err(SimError::InvalidArgument("dft input must be nonempty".into()));
    }
    let mut buf = x.to_vec();
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(buf.len());
        fft.process(&mut buf);
    });
    Ok(buf)
}

/// Inverse transform with the `1/N` factor: `x_n = (1/N) sum_k X_k e^{+j2pi kn/N}`.
pub fn idft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    if x.is_empty() {
        return Err(SimError::InvalidArgument("idft input must be nonempty".into()));
    }
    let mut buf = x.to_vec();
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_inverse(buf.len());
        fft.process(&mut buf);
    });
    let scale = 1.0 / buf.len() as f64;
    for v in &mut buf {
        *v *= scale;
    }
    Ok(buf)
}

/// Pseudo-inverse `A^+ = (A^H A)^{-1} A^H` of a tall full-column-rank matrix,
/// via the normal equations and a Cholesky factorization of `A^H A`.
pub fn pseudo_inverse(a: &ComplexGrid) -> Result<ComplexGrid> {
    if a.rows() < a.cols() {
        return Err(SimError::InvalidArgument(format!(
            "pseudo_inverse needs a tall matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let gram = a.hermitian().matmul(a);
    let chol = Cholesky::factor(&gram)?;
    // Solve (A^H A) X = A^H column by column.
    let ah = a.hermitian();
    let u = a.cols();
    let b = a.rows();
    let mut out = ComplexGrid::zeros(u, b);
    let mut col = vec![Complex64::default(); u];
    for c in 0..b {
        for r in 0..u {
            col[r] = ah.get(r, c);
        }
        let x = chol.solve(&col);
        for r in 0..u {
            out.set(r, c, x[r]);
        }
    }
    Ok(out)
}

/// Lower-triangular Cholesky factor of a Hermitian positive-definite grid.
struct Cholesky {
    l: ComplexGrid,
}

impl Cholesky {
    fn factor(m: &ComplexGrid) -> Result<Self> {
        assert_eq!(m.rows(), m.cols());
        let n = m.rows();
        let mut l = ComplexGrid::zeros(n, n);
        let mut pivot_max = 0.0f64;
        for j in 0..n {
            let mut d = m.get(j, j).re;
            for k in 0..j {
                d -= l.get(j, k).norm_sqr();
            }
            pivot_max = pivot_max.max(d);
            if !(d > 0.0) || d < RANK_TOLERANCE * pivot_max {
                return Err(SimError::SingularMatrix { subcarrier: None });
            }
            let dj = d.sqrt();
            l.set(j, j, Complex64::new(dj, 0.0));
            for i in j + 1..n {
                let mut s = m.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k).conj();
                }
                l.set(i, j, s / dj);
            }
        }
        Ok(Self { l })
    }

    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.l.rows();
        assert_eq!(b.len(), n);
        // Forward: L y = b
        let mut y = vec![Complex64::default(); n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l.get(i, k) * y[k];
            }
            y[i] = s / self.l.get(i, i);
        }
        // Backward: L^H x = y
        let mut x = vec![Complex64::default(); n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l.get(k, i).conj() * x[k];
            }
            x[i] = s / self.l.get(i, i);
        }
        x
    }
}

/// Scalar arcsine with the clip tolerance applied.
#[inline]
pub fn arcsine_clipped(x: f64) -> Result<f64> {
    let a = x.abs();
    if a <= 1.0 {
        Ok(x.asin())
    } else if a <= 1.0 + ARCSINE_CLIP_TOLERANCE {
        Ok(FRAC_PI_2.copysign(x))
    } else {
        Err(SimError::Domain(format!("arcsine argument {x} exceeds 1 beyond clip tolerance")))
    }
}

/// Entry-wise arcsine (radians) of a real square grid with entries in [-1, 1].
pub fn elementwise_arcsine(m: &RealGrid) -> Result<RealGrid> {
    if m.rows() != m.cols() {
        return Err(SimError::InvalidArgument(format!(
            "elementwise_arcsine needs a square grid, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let mut out = RealGrid::zeros(m.rows(), m.cols());
    for (o, &v) in out.data_mut().iter_mut().zip(m.data()) {
        *o = arcsine_clipped(v)?;
    }
    Ok(out)
}
