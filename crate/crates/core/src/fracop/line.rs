//! Truncated-line discretization with ghost padding and a power-law far field.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::stencil::Stencil;
use crate::error::{invalid, Result};
use crate::grid::TailModel;
use crate::quad::adaptive;
use crate::scalar::{from_usize, lit, Real};

/// Operator on the `n + 1` window nodes of `[-R, R]`.
///
/// The window is extended by `pad` ghost nodes on each side whose values come from the
/// tail model; the lattice sum runs over the extended grid (half weight on its two end
/// nodes) and the remainder beyond `R_ext` is integrated against the tail law.
#[derive(Clone)]
pub struct LineOperator<T: Real> {
    s: T,
    g: T,
    half_width: T,
    n: usize,
    pad: usize,
    beta: T,
    kernel_hat: Vec<Complex<T>>,
    fft: Arc<dyn Fft<T>>,
    ifft: Arc<dyn Fft<T>>,
    /// `Σ_e c_{|e-i|} b_e` per window node.
    diag: Vec<T>,
    /// `g ∫_{R_ext}^∞ (y ∓ x)^{-1-2s} dy`
    j0_plus: Vec<T>,
    j0_minus: Vec<T>,
    /// `g ∫_{R_ext}^∞ y^{-β} (y ∓ x)^{-1-2s} dy`
    j1_plus: Vec<T>,
    j1_minus: Vec<T>,
}

impl<T: Real> std::fmt::Debug for LineOperator<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LineOperator")
            .field("half_width", &self.half_width)
            .field("n", &self.n)
            .field("pad", &self.pad)
            .finish()
    }
}

impl<T: Real> LineOperator<T> {
    pub fn new(s: T, g: T, half_width: T, n: usize, r: T, beta: T) -> Result<Self> {
        if n < 8 {
            return Err(invalid("n", format!("need at least 8 points, got {n}")));
        }
        if !(beta + s + s > T::zero()) {
            return Err(invalid("tail.beta", "tail law is not integrable against the kernel (need beta > -2s)"));
        }
        let h = lit::<T>(2.0) * half_width / from_usize(n);
        let inner = (r / h).round().to_usize().unwrap_or(0);
        if inner < 2 {
            return Err(invalid("r", "split radius is below two grid spacings"));
        }
        let stencil = Stencil::new(s, h, inner);
        let pad = inner + 2;
        let n_ext = n + 1 + 2 * pad;
        let len = (2 * n_ext).next_power_of_two();

        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(len);
        let ifft = planner.plan_fft_inverse(len);
        let mut kernel_hat = vec![Complex::new(T::zero(), T::zero()); len];
        for m in 1..n_ext {
            let w = g * stencil.weight(m);
            kernel_hat[m].re = w;
            kernel_hat[len - m].re = w;
        }
        fft.process(&mut kernel_hat);

        let r_ext = half_width + from_usize::<T>(pad) * h;
        let two_s = s + s;
        let mut op = Self {
            s,
            g,
            half_width,
            n,
            pad,
            beta,
            kernel_hat,
            fft,
            ifft,
            diag: vec![],
            j0_plus: vec![],
            j0_minus: vec![],
            j1_plus: vec![],
            j1_minus: vec![],
        };
        let ones = vec![T::one(); n_ext];
        op.diag = op.convolve(&ones);

        let nodes: Vec<T> = (0..=n).map(|j| -half_width + from_usize::<T>(j) * h).collect();
        let tail_integral = |x: T, sign: T| {
            // ∫_{R_ext}^∞ y^{-β} (y - sign·x)^{-1-2s} dy with y = sign·x + d v^{-1/(2s)}
            let d = r_ext - sign * x;
            let f = |v: T| {
                if v <= T::zero() {
                    return T::zero();
                }
                let y = sign * x + d * v.powf(-T::one() / two_s);
                y.powf(-beta)
            };
            let tol = lit::<T>(1e-13) * r_ext.powf(-beta).max(T::one());
            let val = adaptive(f, T::zero(), T::one(), tol, 200).value;
            g * d.powf(-two_s) / two_s * val
        };
        op.j0_plus = nodes.iter().map(|&x| g * (r_ext - x).powf(-two_s) / two_s).collect();
        op.j0_minus = nodes.iter().map(|&x| g * (r_ext + x).powf(-two_s) / two_s).collect();
        op.j1_plus = nodes.iter().map(|&x| tail_integral(x, T::one())).collect();
        op.j1_minus = nodes.iter().map(|&x| tail_integral(x, -T::one())).collect();
        Ok(op)
    }

    pub fn spacing(&self) -> T {
        lit::<T>(2.0) * self.half_width / from_usize(self.n)
    }

    pub fn order(&self) -> T {
        self.s
    }

    pub fn kernel_constant(&self) -> T {
        self.g
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    /// Number of ghost nodes on each side.
    pub fn pad(&self) -> usize {
        self.pad
    }

    /// Largest diagonal magnitude including the far-field mass, for CFL bounds.
    pub fn diagonal_bound(&self) -> T {
        self.diag
            .iter()
            .zip(self.j0_plus.iter().zip(&self.j0_minus))
            .fold(T::zero(), |m, (d, (a, b))| m.max(*d + *a + *b))
    }

    /// Σ_e c_{|e-i|} b_e u_e for every window node `i` (extended input of length n+1+2·pad).
    fn convolve(&self, extended: &[T]) -> Vec<T> {
        let len = self.kernel_hat.len();
        let last = extended.len() - 1;
        let mut buf = vec![Complex::new(T::zero(), T::zero()); len];
        for (e, &u) in extended.iter().enumerate() {
            let b = if e == 0 || e == last { lit(0.5) } else { T::one() };
            buf[e].re = b * u;
        }
        self.fft.process(&mut buf);
        for (z, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *z = *z * *k;
        }
        self.ifft.process(&mut buf);
        let scale = T::one() / from_usize(len);
        (0..=self.n).map(|j| buf[j + self.pad].re * scale).collect()
    }

    fn extend(&self, values: &[T], tail: &TailModel<T>) -> Vec<T> {
        let h = self.spacing();
        let mut ext = Vec::with_capacity(values.len() + 2 * self.pad);
        for e in 0..self.pad {
            let x = -self.half_width - from_usize::<T>(self.pad - e) * h;
            ext.push(tail.eval(x));
        }
        ext.extend_from_slice(values);
        for e in 1..=self.pad {
            let x = self.half_width + from_usize::<T>(e) * h;
            ext.push(tail.eval(x));
        }
        ext
    }

    fn far_field(&self, j: usize, v: T, tail: &TailModel<T>) -> T {
        (tail.c_plus - v) * self.j0_plus[j] + tail.a_plus * self.j1_plus[j] + (tail.c_minus - v) * self.j0_minus[j]
            - tail.a_minus * self.j1_minus[j]
    }

    fn check_tail(&self, tail: &TailModel<T>) {
        assert!(
            (tail.beta - self.beta).abs() <= lit::<T>(1e-12) * self.beta.abs().max(T::one()),
            "tail exponent differs from the one the operator was built for"
        );
    }

    pub fn apply(&self, values: &[T], tail: &TailModel<T>) -> Vec<T> {
        assert_eq!(values.len(), self.n + 1);
        self.check_tail(tail);
        let ext = self.extend(values, tail);
        let conv = self.convolve(&ext);
        values
            .iter()
            .enumerate()
            .map(|(j, &v)| conv[j] - self.diag[j] * v + self.far_field(j, v, tail))
            .collect()
    }

    /// O(n²) reference evaluation of the same discrete operator.
    pub fn apply_direct(&self, values: &[T], tail: &TailModel<T>) -> Vec<T> {
        assert_eq!(values.len(), self.n + 1);
        self.check_tail(tail);
        let ext = self.extend(values, tail);
        let h = self.spacing();
        let r = self.spacing() * from_usize(self.pad.saturating_sub(2));
        let stencil = Stencil::new(self.s, h, (r / h).round().to_usize().unwrap_or(2));
        let last = ext.len() - 1;
        (0..=self.n)
            .map(|j| {
                let i = j + self.pad;
                let v = ext[i];
                let mut acc = T::zero();
                for (e, &u) in ext.iter().enumerate() {
                    if e == i {
                        continue;
                    }
                    let b = if e == 0 || e == last { lit(0.5) } else { T::one() };
                    acc = acc + self.g * b * stencil.weight(e.abs_diff(i)) * (u - v);
                }
                acc + self.far_field(j, v, tail)
            })
            .collect()
    }

    /// Constant part and window-node coefficient of the affine map `φ_j ↦ I_j` for
    /// the diagonal entry: `I_j = (off-diagonal terms) - diag_j φ_j`.
    pub fn diagonal_entries(&self) -> Vec<T> {
        self.diag
            .iter()
            .zip(self.j0_plus.iter().zip(&self.j0_minus))
            .map(|(d, (a, b))| *d + *a + *b)
            .collect()
    }
}
