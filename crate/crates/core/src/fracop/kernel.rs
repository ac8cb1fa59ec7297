use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::{gamma, lit, Real};

/// Order `s ∈ (0, 1)` of the operator.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FractionalOrder<T>(T);

impl<T: Real> FractionalOrder<T> {
    pub fn new(s: T) -> Result<Self> {
        if s > T::zero() && s < T::one() {
            Ok(Self(s))
        } else {
            Err(invalid("s", format!("order must lie in the open interval (0, 1), got {s}")))
        }
    }

    #[inline]
    pub fn get(self) -> T {
        self.0
    }

    /// `2s`
    #[inline]
    pub fn two_s(self) -> T {
        self.0 + self.0
    }
}

/// `C(N, s) = 4^s Γ(N/2 + s) / (π^{N/2} |Γ(-s)|)`: with `g ≡ C(N, s)` the operator is `-(-Δ)^s`.
pub fn fractional_laplacian_constant<T: Real>(dim: usize, s: FractionalOrder<T>) -> T {
    let s = s.get();
    let half_n = lit::<T>(dim as f64 * 0.5);
    // |Γ(-s)| = Γ(1-s)/s
    let abs_gamma_neg = gamma(T::one() - s) / s;
    lit::<T>(4.0).powf(s) * gamma(half_n + s) / (T::PI().powf(half_n) * abs_gamma_neg)
}

/// Angular density `g` of the Lévy measure `g(z/|z|) |z|^{-N-2s} dz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dim", rename_all = "snake_case")]
pub enum AnisotropyKernel<T> {
    /// `N = 1`: `g` is a positive constant (the values at ±1 coincide by evenness).
    Line { g: T },
    /// `N = 2`: `g(θ) = c0 + Σ_k (a_k cos 2kθ + b_k sin 2kθ)`; only even harmonics so that
    /// `g(θ + π) = g(θ)`.
    Plane { c0: T, cos: Vec<T>, sin: Vec<T> },
}

impl<T: Real> AnisotropyKernel<T> {
    pub fn fractional_laplacian(dim: usize, s: FractionalOrder<T>) -> Self {
        let c = fractional_laplacian_constant(dim, s);
        match dim {
            1 => Self::Line { g: c },
            2 => Self::Plane {
                c0: c,
                cos: vec![],
                sin: vec![],
            },
            _ => panic!("only dimensions 1 and 2 are supported"),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::Line { .. } => 1,
            Self::Plane { .. } => 2,
        }
    }

    /// `g` at angle `theta` (ignored in 1D).
    pub fn eval(&self, theta: T) -> T {
        match self {
            Self::Line { g } => *g,
            Self::Plane { c0, cos, sin } => {
                let mut acc = *c0;
                for (k, a) in cos.iter().enumerate() {
                    acc = acc + *a * (lit::<T>(2.0 * (k + 1) as f64) * theta).cos();
                }
                for (k, b) in sin.iter().enumerate() {
                    acc = acc + *b * (lit::<T>(2.0 * (k + 1) as f64) * theta).sin();
                }
                acc
            }
        }
    }

    pub fn is_isotropic(&self) -> bool {
        match self {
            Self::Line { .. } => true,
            Self::Plane { cos, sin, .. } => cos.iter().chain(sin).all(|c| *c == T::zero()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Line { g } => {
                if !(*g > T::zero()) || !g.is_finite() {
                    return Err(invalid("g", "kernel constant must be positive"));
                }
            }
            Self::Plane { .. } => {
                let m = 720;
                for j in 0..m {
                    let theta = T::PI() * lit((2 * j) as f64 / m as f64);
                    if !(self.eval(theta) > T::zero()) {
                        return Err(invalid("g", "angular density must be positive everywhere"));
                    }
                }
            }
        }
        Ok(())
    }

    /// `∫_0^{2π} g(θ) w(θ) dθ` by the trapezoid rule, exact for the trigonometric weights used.
    pub(crate) fn angular_moment(&self, w: impl Fn(T) -> T) -> T {
        let m = 256;
        let dt = (T::PI() + T::PI()) / lit(m as f64);
        (0..m)
            .map(|j| {
                let th = dt * lit(j as f64);
                self.eval(th) * w(th)
            })
            .sum::<T>()
            * dt
    }
}

/// Radius separating the compensated inner integral from the plain outer one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SplitRadius<T>(T);

impl<T: Real> SplitRadius<T> {
    pub fn new(r: T) -> Result<Self> {
        if r > T::zero() && r.is_finite() {
            Ok(Self(r))
        } else {
            Err(invalid("r", "split radius must be positive"))
        }
    }

    #[inline]
    pub fn get(self) -> T {
        self.0
    }

    /// Number of grid spacings inside the radius; at least two are required.
    pub fn cells(self, h: T) -> Result<usize> {
        let m = (self.0 / h).round().to_usize().unwrap_or(0);
        if m < 2 {
            return Err(invalid(
                "r",
                format!("split radius {} is below two grid spacings ({})", self.0, h + h),
            ));
        }
        Ok(m)
    }
}
