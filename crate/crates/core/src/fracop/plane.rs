//! Two-dimensional lattice quadrature on the square torus (smoke-test accuracy).

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::kernel::AnisotropyKernel;
use crate::error::{invalid, Result};
use crate::scalar::{from_usize, lit, Real};

/// Circulant operator on `n × n` nodes (x fastest).
///
/// Lattice offsets `z ≠ 0` with `|z| ≤ R_img` get the midpoint weight `h² g(θ)|z|^{-2-2s}`;
/// the disc of radius `h/√π` around the origin is integrated against the local Hessian and
/// the region beyond `R_img` sees the field mean.
#[derive(Clone)]
pub struct PlaneOperator<T: Real> {
    n: usize,
    coeffs: Vec<T>,
    tail: T,
    symbol: Vec<T>,
    fft: Arc<dyn Fft<T>>,
    ifft: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for PlaneOperator<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PlaneOperator").field("n", &self.n).finish()
    }
}

fn transpose<T: Copy>(buf: &mut [T], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

fn fft2<T: Real>(buf: &mut [Complex<T>], n: usize, plan: &Arc<dyn Fft<T>>) {
    plan.process(buf);
    transpose(buf, n);
    plan.process(buf);
    transpose(buf, n);
}

impl<T: Real> PlaneOperator<T> {
    pub fn new(s: T, kernel: &AnisotropyKernel<T>, period: T, n: usize, images: usize) -> Result<Self> {
        if kernel.dimension() != 2 {
            return Err(invalid("g", "planar operator needs a two-dimensional kernel"));
        }
        if n < 8 {
            return Err(invalid("n", format!("need at least 8 points, got {n}")));
        }
        let h = period / from_usize(n);
        let two_s = s + s;
        let reach = images.max(1) * n;
        let r_img = from_usize::<T>(reach) * h;
        let mut coeffs = vec![T::zero(); n * n];
        let idx = |a: i64, b: i64| {
            let nn = n as i64;
            (b.rem_euclid(nn) as usize) * n + a.rem_euclid(nn) as usize
        };
        let reach = reach as i64;
        for b in -reach..=reach {
            for a in -reach..=reach {
                if a == 0 && b == 0 {
                    continue;
                }
                let (zx, zy) = (lit::<T>(a as f64) * h, lit::<T>(b as f64) * h);
                let r = (zx * zx + zy * zy).sqrt();
                if r > r_img {
                    continue;
                }
                let w = h * h * kernel.eval(zy.atan2(zx)) * r.powf(-lit::<T>(2.0) - two_s);
                let k = idx(a, b);
                coeffs[k] = coeffs[k] + w;
            }
        }
        // Origin disc: ½ ∫ zᵀ H z g(θ) |z|^{-2-2s} dz = κ (Hxx Mcc + 2 Hxy Mcs + Hyy Mss)
        let rho = h / T::PI().sqrt();
        let kappa = rho.powf(lit::<T>(2.0) - two_s) / (lit::<T>(2.0) * (lit::<T>(2.0) - two_s));
        let mcc = kernel.angular_moment(|t| t.cos() * t.cos());
        let mss = kernel.angular_moment(|t| t.sin() * t.sin());
        let mcs = kernel.angular_moment(|t| t.cos() * t.sin());
        let h2 = h * h;
        let mut add = |a: i64, b: i64, w: T| {
            for (sa, sb) in [(a, b), (-a, -b)] {
                let k = idx(sa, sb);
                coeffs[k] = coeffs[k] + w;
            }
        };
        add(1, 0, kappa * mcc / h2);
        add(0, 1, kappa * mss / h2);
        add(1, 1, kappa * mcs / (lit::<T>(2.0) * h2));
        add(1, -1, -kappa * mcs / (lit::<T>(2.0) * h2));
        coeffs[0] = T::zero();

        let gbar = kernel.angular_moment(|_| T::one());
        let tail = gbar * r_img.powf(-two_s) / two_s;

        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let mut buf: Vec<Complex<T>> = coeffs.iter().map(|&c| Complex::new(c, T::zero())).collect();
        fft2(&mut buf, n, &fft);
        let total: T = coeffs.iter().copied().sum();
        let mut symbol: Vec<T> = buf.iter().map(|z| z.re - total - tail).collect();
        symbol[0] = T::zero();
        Ok(Self {
            n,
            coeffs,
            tail,
            symbol,
            fft,
            ifft,
        })
    }

    pub fn symbol(&self) -> &[T] {
        &self.symbol
    }

    pub fn diagonal(&self) -> T {
        self.coeffs.iter().copied().sum::<T>() + self.tail
    }

    pub fn apply(&self, values: &[T]) -> Vec<T> {
        let n = self.n;
        assert_eq!(values.len(), n * n);
        let mean = values.iter().copied().sum::<T>() / from_usize(n * n);
        let mut buf: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v - mean, T::zero())).collect();
        fft2(&mut buf, n, &self.fft);
        for (z, &l) in buf.iter_mut().zip(&self.symbol) {
            *z = *z * l;
        }
        fft2(&mut buf, n, &self.ifft);
        let scale = T::one() / from_usize(n * n);
        buf.iter().map(|z| z.re * scale).collect()
    }

    /// O(n⁴) reference evaluation.
    pub fn apply_direct(&self, values: &[T]) -> Vec<T> {
        let n = self.n;
        let mean = values.iter().copied().sum::<T>() / from_usize(n * n);
        (0..n * n)
            .map(|j| {
                let (jx, jy) = (j % n, j / n);
                let v = values[j];
                let mut acc = self.tail * (mean - v);
                for k in 1..n * n {
                    let (kx, ky) = (k % n, k / n);
                    let other = values[((jy + ky) % n) * n + (jx + kx) % n];
                    acc = acc + self.coeffs[k] * (other - v);
                }
                acc
            })
            .collect()
    }
}
