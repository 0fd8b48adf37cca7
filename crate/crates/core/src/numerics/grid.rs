//! Dense row-major matrices over `f64` and `Complex64`.
//!
//! Only the kernels the pipeline needs; this is not a general linear-algebra
//! layer. Dimension mismatches are programming errors and panic via `assert!`.

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Complex-valued matrix; holds channel responses, Gram terms, distortion
/// covariances, and combiner matrices.
pub type ComplexGrid = Grid<Complex64>;

/// Real-valued matrix; holds RF autocovariances and their arcsine images.
pub type RealGrid = Grid<f64>;

impl<T: Copy + Default> Grid<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "grid dimensions must be >= 1");
        Self { rows, cols, data: vec![T::default(); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(rows >= 1 && cols >= 1, "grid dimensions must be >= 1");
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn map<U: Copy + Default>(&self, f: impl Fn(T) -> U) -> Grid<U> {
        Grid { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }
}

impl RealGrid {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| v * a)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Grid {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl ComplexGrid {
    pub fn identity(n: usize) -> Self {
        let mut g = Self::zeros(n, n);
        for i in 0..n {
            g.set(i, i, Complex64::new(1.0, 0.0));
        }
        g
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == Complex64::default() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let v = out.get(r, c) + a * rhs.get(k, c);
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "mul_vec dimension mismatch");
        (0..self.rows)
            .map(|r| {
                let row = &self.data[r * self.cols..(r + 1) * self.cols];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| v * a)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Grid {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Grid {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// `diag(d) * self` (scales row `r` by `d[r]`).
    pub fn row_scaled(&self, d: &[f64]) -> Self {
        assert_eq!(self.rows, d.len(), "row_scaled dimension mismatch");
        Self::from_fn(self.rows, self.cols, |r, c| self.get(r, c) * d[r])
    }

    /// Entry-wise real parts.
    pub fn real(&self) -> RealGrid {
        self.map(|v| v.re)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hermitian part `(M + M^H) / 2`.
    pub fn hermitian_part(&self) -> Self {
        assert_eq!(self.rows, self.cols, "hermitian_part needs a square grid");
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self.get(r, c) + self.get(c, r).conj()) * 0.5
        })
    }

    /// Largest entry magnitude of the anti-Hermitian part `(M - M^H) / 2`.
    pub fn max_antihermitian(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut m = 0.0f64;
        for r in 0..self.rows {
            for c in 0..self.cols {
                m = m.max(((self.get(r, c) - self.get(c, r).conj()) * 0.5).norm());
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matmul_against_hand_computed_product() {
        let a = ComplexGrid::from_fn(2, 2, |r, cc| c((r * 2 + cc) as f64, 1.0));
        let b = ComplexGrid::identity(2);
        assert_eq!(a.matmul(&b), a);

        // [1, i; 0, 2] * [i; 1] = [2i; 2]
        let m = ComplexGrid::from_fn(2, 2, |r, cc| match (r, cc) {
            (0, 0) => c(1.0, 0.0),
            (0, 1) => c(0.0, 1.0),
            (1, 0) => c(0.0, 0.0),
            _ => c(2.0, 0.0),
        });
        let v = m.mul_vec(&[c(0.0, 1.0), c(1.0, 0.0)]);
        assert_eq!(v, vec![c(0.0, 2.0), c(2.0, 0.0)]);
    }

    #[test]
    fn hermitian_conjugates_and_transposes() {
        let a = ComplexGrid::from_fn(2, 3, |r, cc| c(r as f64, cc as f64));
        let ah = a.hermitian();
        assert_eq!(ah.rows(), 3);
        assert_eq!(ah.cols(), 2);
        assert_eq!(ah.get(2, 1), c(1.0, -2.0));
    }

    #[test]
    fn hermitian_part_splits_exactly() {
        let m = ComplexGrid::from_fn(2, 2, |r, cc| c((r as f64) + 2.0 * (cc as f64), (r + cc + 1) as f64));
        let h = m.hermitian_part();
        // Hermitian part must equal its own conjugate transpose.
        assert_eq!(h, h.hermitian());
        let resid = m.max_antihermitian();
        assert!(resid > 0.0);
        // h + antihermitian part reconstructs m on the (0,1) entry.
        let anti = (m.get(0, 1) - m.get(1, 0).conj()) * 0.5;
        assert_eq!(h.get(0, 1) + anti, m.get(0, 1));
    }
}
