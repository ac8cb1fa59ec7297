//! One-dimensional quadrature weights for `∫_0^∞ D(z) z^{-1-2s} dz` with `D` sampled at `z = m·h`.

use crate::scalar::{from_usize, lit, Real};

/// Weights `k_m` (without the kernel constant) so that
/// `∫_0^∞ D(z) z^{-1-2s} dz ≈ Σ_{m≥1} k_m D(mh)` for even second differences
/// `D(z) = φ(x+z) + φ(x-z) - 2φ(x)`.
///
/// Inside `[0, Mh]` the smooth quotient `G = D/z²` is interpolated linearly (with
/// `G(0) := G(h)`) and integrated exactly against `z^{1-2s}`, which keeps second order
/// despite the singular weight. Beyond `Mh` a trapezoid rule on `D z^{-1-2s}` is used.
#[derive(Debug, Clone)]
pub struct Stencil<T> {
    pub h: T,
    pub s: T,
    /// Number of inner cells.
    pub inner: usize,
    /// `k_1 ..= k_M` at indices `1..=M` (index 0 is unused and zero).
    pub near: Vec<T>,
}

impl<T: Real> Stencil<T> {
    pub fn new(s: T, h: T, inner: usize) -> Self {
        assert!(inner >= 2);
        let e = T::one() - (s + s);
        // ∫_a^b z^p dz
        let moment = |p: T, a: T, b: T| (b.powf(p + T::one()) - a.powf(p + T::one())) / (p + T::one());
        let mut wg = vec![T::zero(); inner + 1];
        for m in 0..inner {
            let a = from_usize::<T>(m) * h;
            let b = a + h;
            let m0 = moment(e, a, b);
            let m1 = moment(e + T::one(), a, b);
            // G ≈ G_m (b - z)/h + G_{m+1} (z - a)/h
            wg[m] = wg[m] + (b * m0 - m1) / h;
            wg[m + 1] = wg[m + 1] + (m1 - a * m0) / h;
        }
        let mut near = vec![T::zero(); inner + 1];
        for m in 1..=inner {
            let z = from_usize::<T>(m) * h;
            near[m] = wg[m] / (z * z);
        }
        near[1] = near[1] + wg[0] / (h * h);
        near[inner] = near[inner] + lit::<T>(0.5) * h * (from_usize::<T>(inner) * h).powf(-T::one() - s - s);
        Self { h, s, inner, near }
    }

    /// Outer trapezoid weight `h (mh)^{-1-2s}` for `m > M`.
    #[inline]
    pub fn far(&self, m: usize) -> T {
        self.h * (from_usize::<T>(m) * self.h).powf(-T::one() - self.s - self.s)
    }

    #[inline]
    pub fn weight(&self, m: usize) -> T {
        if m == 0 {
            T::zero()
        } else if m <= self.inner {
            self.near[m]
        } else {
            self.far(m)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_are_positive() {
        for &s in &[0.1, 0.3, 0.5, 0.75, 0.95] {
            let st = Stencil::new(s, 0.01, 20);
            for m in 1..100 {
                assert!(st.weight(m) > 0.0, "s={s} m={m}");
            }
        }
    }

    #[test]
    fn integrates_quadratic_difference_exactly_near() {
        // D(z) = z² on [0, Mh]: G ≡ 1 so the inner rule is exact.
        let (s, h, m) = (0.4f64, 0.05, 10);
        let st = Stencil::new(s, h, m);
        let approx: f64 = (1..=m).map(|k| st.near[k] * (k as f64 * h).powi(2)).sum::<f64>()
            - 0.5 * h * (m as f64 * h).powf(1.0 - 2.0 * s);
        let r = m as f64 * h;
        let exact = r.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s);
        assert!((approx - exact).abs() < 1e-13, "{approx} vs {exact}");
    }

    #[test]
    fn second_order_on_gaussian_difference() {
        // D(z) = 2(exp(-z²) - 1) is the even difference of exp(-x²) at 0.
        let s = 0.3f64;
        let reference = {
            let st = Stencil::new(s, 1e-4, 2000);
            sum(&st, 2_000_000)
        };
        fn sum(st: &Stencil<f64>, n: usize) -> f64 {
            let s = st.s;
            let mut acc = 0.0;
            for m in (1..=n).rev() {
                let z = m as f64 * st.h;
                let w = if m == n { 0.5 } else { 1.0 };
                acc += w * st.weight(m) * 2.0 * ((-z * z).exp() - 1.0);
            }
            let zmax = n as f64 * st.h;
            // -2 ∫_{zmax}^∞ z^{-1-2s}
            acc - 2.0 * zmax.powf(-2.0 * s) / (2.0 * s)
        }
        let e1 = (sum(&Stencil::new(s, 0.02, 10), 1000) - reference).abs();
        let e2 = (sum(&Stencil::new(s, 0.01, 20), 2000) - reference).abs();
        let order = (e1 / e2).log2();
        assert!(order > 1.8, "order {order} ({e1}, {e2})");
    }
}
