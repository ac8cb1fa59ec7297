//! Periodic misfit potential `W` and periodic forcing `σ`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::{lit, Real};

/// Trigonometric potential
/// `W(v) = Σ_k a_k (1 - cos 2πkv) + Σ_k b_k sin 2πkv` (`k ≥ 1`).
///
/// With no sine coefficients the potential is even. Sine terms are accepted only when
/// they keep `W'(0) = 0`, i.e. `Σ k b_k = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPotential<T> {
    pub cos: Vec<T>,
    #[serde(default)]
    pub sin: Vec<T>,
}

fn trig_derivative<T: Real>(phase: T, order: usize, is_sin: bool) -> T {
    // d^m/dθ^m cos θ = cos(θ + mπ/2), sin θ likewise.
    let shift = T::FRAC_PI_2() * lit((order % 4) as f64);
    if is_sin {
        (phase + shift).sin()
    } else {
        (phase + shift).cos()
    }
}

impl<T: Real> PeriodicPotential<T> {
    pub fn new(cos: Vec<T>, sin: Vec<T>) -> Result<Self> {
        if cos.iter().chain(&sin).any(|c| !c.is_finite()) {
            return Err(invalid("potential", "coefficients must be finite"));
        }
        let slope: T = sin
            .iter()
            .enumerate()
            .map(|(k, b)| *b * lit((k + 1) as f64))
            .sum();
        if slope.abs() > lit(1e-12) {
            return Err(invalid("potential.sin", "sine terms must satisfy Σ k b_k = 0 so that W'(0) = 0"));
        }
        Ok(Self { cos, sin })
    }

    /// `W(v) = (1 - cos 2πv) / (4π²)`, for which `W''(0) = 1`.
    pub fn standard() -> Self {
        let four_pi2 = lit::<T>(4.0) * T::PI() * T::PI();
        Self {
            cos: vec![T::one() / four_pi2],
            sin: vec![],
        }
    }

    /// Potential with identically vanishing derivative.
    pub fn flat() -> Self {
        Self {
            cos: vec![],
            sin: vec![],
        }
    }

    pub fn is_even(&self) -> bool {
        self.sin.iter().all(|b| *b == T::zero())
    }

    pub fn is_flat(&self) -> bool {
        self.is_even() && self.cos.iter().all(|a| *a == T::zero())
    }

    /// The `order`-th derivative of `W` at `v` (`order ≤ 4`).
    pub fn eval(&self, v: T, order: usize) -> Result<T> {
        if order > 4 {
            return Err(invalid("order", format!("derivative order {order} exceeds 4")));
        }
        Ok(self.eval_unchecked(v, order))
    }

    pub(crate) fn eval_unchecked(&self, v: T, order: usize) -> T {
        let two_pi = T::PI() + T::PI();
        let mut acc = T::zero();
        for (k, a) in self.cos.iter().enumerate() {
            let w = two_pi * lit((k + 1) as f64);
            let phase = w * v;
            if order == 0 {
                acc = acc + *a * (T::one() - phase.cos());
            } else {
                acc = acc - *a * w.powi(order as i32) * trig_derivative(phase, order, false);
            }
        }
        for (k, b) in self.sin.iter().enumerate() {
            let w = two_pi * lit((k + 1) as f64);
            acc = acc + *b * w.powi(order as i32) * trig_derivative(w * v, order, true);
        }
        acc
    }

    #[inline]
    pub fn value(&self, v: T) -> T {
        self.eval_unchecked(v, 0)
    }

    #[inline]
    pub fn d1(&self, v: T) -> T {
        self.eval_unchecked(v, 1)
    }

    #[inline]
    pub fn d2(&self, v: T) -> T {
        self.eval_unchecked(v, 2)
    }

    /// `α = W''(0)`.
    pub fn alpha(&self) -> T {
        self.d2(T::zero())
    }

    /// `‖W^(order)‖∞` over one period by dense sampling plus golden-section refinement.
    pub fn sup_norm(&self, order: usize) -> T {
        sup_periodic(|v| self.eval_unchecked(v, order).abs())
    }

    /// Conditions needed by the layer and hull constructions: `W ≥ 0` with zeros exactly
    /// on the integers, `α > 0`, and evenness when `s < 1/2`.
    pub fn validate_for_layer(&self, s: T) -> Result<()> {
        let alpha = self.alpha();
        if !(alpha > T::zero()) {
            return Err(invalid("potential", "W''(0) must be positive"));
        }
        if s < lit(0.5) && !self.is_even() {
            return Err(invalid("potential", "W must be even when s < 1/2"));
        }
        let samples = 4096;
        for j in 1..samples {
            let v = lit::<T>(j as f64 / samples as f64);
            if !(self.value(v) > T::zero()) {
                return Err(invalid(
                    "potential",
                    format!("W must be positive off the integers (W({v}) = {})", self.value(v)),
                ));
            }
        }
        Ok(())
    }
}

/// Sup of a 1-periodic function: 2^14 samples, then golden-section search around the best
/// sample until the bracket is below 1e-12.
pub(crate) fn sup_periodic<T: Real>(f: impl Fn(T) -> T) -> T {
    let samples = 1usize << 14;
    let h = T::one() / lit(samples as f64);
    let (mut best_j, mut best) = (0usize, T::neg_infinity());
    for j in 0..samples {
        let v = f(lit::<T>(j as f64) * h);
        if v > best {
            best = v;
            best_j = j;
        }
    }
    let center = lit::<T>(best_j as f64) * h;
    best.max(golden_max(&f, center - h, center + h))
}

fn golden_max<T: Real>(f: &impl Fn(T) -> T, mut a: T, mut b: T) -> T {
    let ratio = lit::<T>(0.618_033_988_749_894_8);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < lit(1e-12) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wave {
    Cos,
    Sin,
}

/// One mode `amplitude · wave(2π(kt·t + kx·x))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcingMode<T> {
    pub amplitude: T,
    pub kt: i32,
    pub kx: i32,
    pub wave: Wave,
}

/// Forcing `σ(t, x) = constant + Σ modes`, 1-periodic in `t` and in `x`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Forcing<T> {
    #[serde(default)]
    pub constant: T,
    #[serde(default)]
    pub modes: Vec<ForcingMode<T>>,
}

impl<T: Real> Forcing<T> {
    pub fn zero() -> Self {
        Self {
            constant: T::zero(),
            modes: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.constant == T::zero() && self.modes.iter().all(|m| m.amplitude == T::zero())
    }

    pub fn eval(&self, t: T, x: T) -> T {
        let two_pi = T::PI() + T::PI();
        self.modes.iter().fold(self.constant, |acc, m| {
            let phase = two_pi * (lit::<T>(m.kt as f64) * t + lit::<T>(m.kx as f64) * x);
            acc + m.amplitude
                * match m.wave {
                    Wave::Cos => phase.cos(),
                    Wave::Sin => phase.sin(),
                }
        })
    }

    /// `σ(t, -x) = σ(t, x)` for all `(t, x)`.
    pub fn is_even_in_x(&self) -> bool {
        self.sampled_symmetry(T::one())
    }

    /// `σ(t, -x) = -σ(t, x)` for all `(t, x)`.
    pub fn is_odd_in_x(&self) -> bool {
        self.sampled_symmetry(-T::one())
    }

    fn sampled_symmetry(&self, sign: T) -> bool {
        let m = 17;
        (0..m).all(|i| {
            (0..m).all(|j| {
                let t = lit::<T>(i as f64 / m as f64);
                let x = lit::<T>(j as f64 / m as f64 + 0.013);
                (self.eval(t, -x) - sign * self.eval(t, x)).abs() < lit(1e-12)
            })
        })
    }

    /// `‖σ‖∞` over the unit cell: 256² samples, then coordinate golden-section refinement.
    pub fn sup_norm(&self) -> T {
        if self.modes.is_empty() {
            return self.constant.abs();
        }
        let m = 256;
        let h = T::one() / lit(m as f64);
        let (mut bt, mut bx, mut best) = (T::zero(), T::zero(), T::neg_infinity());
        for i in 0..m {
            for j in 0..m {
                let (t, x) = (lit::<T>(i as f64) * h, lit::<T>(j as f64) * h);
                let v = self.eval(t, x).abs();
                if v > best {
                    best = v;
                    bt = t;
                    bx = x;
                }
            }
        }
        let mut width = h;
        for _ in 0..40 {
            let prev = best;
            let fx = |x: T| self.eval(bt, x).abs();
            bx = golden_argmax(&fx, bx - width, bx + width);
            let ft = |t: T| self.eval(t, bx).abs();
            bt = golden_argmax(&ft, bt - width, bt + width);
            best = best.max(self.eval(bt, bx).abs());
            width = width * lit(0.5);
            if (best - prev).abs() < lit(1e-12) && width < lit(1e-6) {
                break;
            }
        }
        best
    }
}

fn golden_argmax<T: Real>(f: &impl Fn(T) -> T, mut a: T, mut b: T) -> T {
    let ratio = lit::<T>(0.618_033_988_749_894_8);
    for _ in 0..100 {
        if (b - a).abs() < lit(1e-12) {
            break;
        }
        let c = b - ratio * (b - a);
        let d = a + ratio * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    (a + b) * lit(0.5)
}

/// `(‖W'‖∞, ‖σ‖∞)`, the constants bounding the drift of the cell problem.
pub fn sup_norms<T: Real>(w: &PeriodicPotential<T>, sigma: &Forcing<T>) -> (T, T) {
    (w.sup_norm(1), sigma.sup_norm())
}
