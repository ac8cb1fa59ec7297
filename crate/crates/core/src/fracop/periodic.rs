//! Circulant discretization on the one-dimensional torus.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::stencil::Stencil;
use crate::error::{invalid, Result};
use crate::scalar::{from_usize, lit, Real};
use crate::series::hurwitz_zeta;

/// `I_j = Σ_{ρ=1}^{n-1} C_ρ (φ_{j+ρ} - φ_j)` with all periodic images folded into `C_ρ`.
#[derive(Clone)]
pub struct PeriodicOperator<T: Real> {
    period: T,
    coeffs: Vec<T>,
    symbol: Vec<T>,
    fft: Arc<dyn Fft<T>>,
    ifft: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for PeriodicOperator<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicOperator")
            .field("period", &self.period)
            .field("n", &self.coeffs.len())
            .finish()
    }
}

impl<T: Real> PeriodicOperator<T> {
    /// `g` is the (constant) kernel density, `r` the split radius.
    pub fn new(s: T, g: T, period: T, n: usize, r: T) -> Result<Self> {
        if n < 8 {
            return Err(invalid("n", format!("need at least 8 points, got {n}")));
        }
        let h = period / from_usize(n);
        let inner = (r / h).round().to_usize().unwrap_or(0);
        if inner < 2 {
            return Err(invalid("r", "split radius is below two grid spacings"));
        }
        let stencil = Stencil::new(s, h, inner);
        let sigma = T::one() + s + s;
        let nt = from_usize::<T>(n);

        // One-sided folded weights by residue class.
        let mut one_sided = vec![T::zero(); n];
        for m in 1..=inner {
            one_sided[m % n] = one_sided[m % n] + stencil.near[m];
        }
        let far_scale = h.powf(-(s + s)) * nt.powf(-sigma);
        for (rho, w) in one_sided.iter_mut().enumerate() {
            let first = inner + 1;
            let offset = (rho + n - first % n) % n;
            let m0 = first + offset;
            *w = *w + far_scale * hurwitz_zeta(sigma, from_usize::<T>(m0) / nt);
        }
        let mut coeffs = vec![T::zero(); n];
        for rho in 1..n {
            coeffs[rho] = g * (one_sided[rho] + one_sided[n - rho]);
        }

        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let mut buf: Vec<Complex<T>> = coeffs.iter().map(|&c| Complex::new(c, T::zero())).collect();
        fft.process(&mut buf);
        let total: T = coeffs.iter().copied().sum();
        let mut symbol: Vec<T> = buf.iter().map(|z| z.re - total).collect();
        symbol[0] = T::zero();
        Ok(Self {
            period,
            coeffs,
            symbol,
            fft,
            ifft,
        })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn period(&self) -> T {
        self.period
    }

    /// `C_ρ`, with `C_0 = 0`.
    pub fn coefficients(&self) -> &[T] {
        &self.coeffs
    }

    /// Eigenvalue of the discrete operator on the `k`-th Fourier mode.
    pub fn symbol(&self) -> &[T] {
        &self.symbol
    }

    /// `Σ_ρ C_ρ`: the magnitude of the diagonal entry, used for CFL bounds.
    pub fn diagonal(&self) -> T {
        self.coeffs.iter().copied().sum()
    }

    /// O(n²) evaluation, exactly equivariant under grid shifts.
    pub fn apply_direct(&self, values: &[T]) -> Vec<T> {
        let n = self.len();
        assert_eq!(values.len(), n);
        (0..n)
            .map(|j| {
                let vj = values[j];
                let mut acc = T::zero();
                for rho in 1..n {
                    acc = acc + self.coeffs[rho] * (values[(j + rho) % n] - vj);
                }
                acc
            })
            .collect()
    }

    /// FFT evaluation through the discrete symbol.
    pub fn apply(&self, values: &[T]) -> Vec<T> {
        let n = self.len();
        assert_eq!(values.len(), n);
        // constants are annihilated; removing the mean keeps them exact
        let mean = values.iter().copied().sum::<T>() / from_usize(n);
        let mut buf: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v - mean, T::zero())).collect();
        self.fft.process(&mut buf);
        for (z, &l) in buf.iter_mut().zip(&self.symbol) {
            *z = *z * l;
        }
        self.ifft.process(&mut buf);
        let scale = T::one() / from_usize(n);
        buf.iter().map(|z| z.re * scale).collect()
    }
}

/// Whole-space `-(-Δ)^s` on `q`-periodic samples: mode `k` is multiplied by `-|2πk/q|^{2s}`.
pub fn spectral_apply<T: Real>(values: &[T], period: T, s: T) -> Vec<T> {
    let n = values.len();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let mean = values.iter().copied().sum::<T>() / from_usize(n);
    let mut buf: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v - mean, T::zero())).collect();
    fft.process(&mut buf);
    let two_pi = lit::<T>(2.0) * T::PI();
    for (k, z) in buf.iter_mut().enumerate() {
        let freq = if 2 * k <= n { k } else { n - k };
        let m = if freq == 0 {
            T::zero()
        } else {
            -(two_pi * from_usize::<T>(freq) / period).powf(s + s)
        };
        *z = *z * m;
    }
    ifft.process(&mut buf);
    let scale = T::one() / from_usize(n);
    buf.iter().map(|z| z.re * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c1(s: f64) -> f64 {
        use crate::fracop::kernel::{fractional_laplacian_constant, FractionalOrder};
        fractional_laplacian_constant(1, FractionalOrder::new(s).unwrap())
    }

    #[test]
    fn direct_and_fft_agree() {
        let n = 64;
        let op = PeriodicOperator::new(0.4, 1.0, 2.0, n, 0.2).unwrap();
        let v: Vec<f64> = (0..n).map(|j| ((j * 7919) % 31) as f64 / 31.0).collect();
        let a = op.apply(&v);
        let b = op.apply_direct(&v);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn cosine_eigenvalue_converges() {
        for &s in &[0.3, 0.5, 0.75] {
            let q = 1.0;
            let n = 1024;
            let op = PeriodicOperator::new(s, c1(s), q, n, 0.05).unwrap();
            let exact = -(2.0 * PI / q).powf(2.0 * s);
            let rel = (op.symbol()[1] - exact).abs() / exact.abs();
            assert!(rel < 1e-4, "s={s}: {rel}");
        }
    }

    #[test]
    fn coefficients_positive_and_symmetric() {
        let op = PeriodicOperator::<f64>::new(0.7, 0.3, 1.0, 32, 0.1).unwrap();
        let c = op.coefficients();
        for rho in 1..32 {
            assert!(c[rho] > 0.0);
            assert!((c[rho] - c[32 - rho]).abs() < 1e-14);
        }
    }

    #[test]
    fn spectral_cosine() {
        let n = 128;
        let v: Vec<f64> = (0..n).map(|j| (2.0 * PI * 3.0 * j as f64 / n as f64).cos()).collect();
        // period 2, mode k = 3 → wavenumber 3π
        let out = spectral_apply(&v, 2.0, 0.35);
        let m = -(3.0 * PI).powf(0.7);
        for (o, x) in out.iter().zip(&v) {
            assert!((o - m * x).abs() < 1e-11);
        }
    }
}
