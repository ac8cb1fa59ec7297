//! Cubic spline interpolation on uniform grids.

use crate::scalar::{from_usize, lit, Real};

/// Natural cubic spline through uniformly spaced samples `y_j = f(x0 + j·h)`.
#[derive(Debug, Clone)]
pub struct UniformSpline<T> {
    x0: T,
    h: T,
    y: Vec<T>,
    m: Vec<T>,
}

impl<T: Real> UniformSpline<T> {
    pub fn new(x0: T, h: T, y: Vec<T>) -> Self {
        let n = y.len();
        assert!(n >= 3, "spline needs at least three samples");
        // Tridiagonal system for the interior second derivatives, natural ends.
        let mut m = vec![T::zero(); n];
        let mut c = vec![T::zero(); n];
        let mut d = vec![T::zero(); n];
        let six_h2 = lit::<T>(6.0) / (h * h);
        for i in 1..n - 1 {
            let rhs = (y[i + 1] - y[i] - y[i] + y[i - 1]) * six_h2;
            let denom = lit::<T>(4.0) - c[i - 1];
            c[i] = T::one() / denom;
            d[i] = (rhs - d[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        Self { x0, h, y, m }
    }

    pub fn x_min(&self) -> T {
        self.x0
    }

    pub fn x_max(&self) -> T {
        self.x0 + self.h * from_usize(self.y.len() - 1)
    }

    fn locate(&self, x: T) -> (usize, T) {
        let t = (x - self.x0) / self.h;
        let last = self.y.len() - 2;
        let j = if t <= T::zero() {
            0
        } else {
            t.floor().to_usize().unwrap_or(last).min(last)
        };
        (j, t - from_usize(j))
    }

    pub fn eval(&self, x: T) -> T {
        let (j, t) = self.locate(x);
        let u = T::one() - t;
        let h2 = self.h * self.h / lit(6.0);
        u * self.y[j]
            + t * self.y[j + 1]
            + h2 * ((u * u * u - u) * self.m[j] + (t * t * t - t) * self.m[j + 1])
    }

    pub fn derivative(&self, x: T) -> T {
        let (j, t) = self.locate(x);
        let u = T::one() - t;
        let three = lit::<T>(3.0);
        (self.y[j + 1] - self.y[j]) / self.h
            + self.h / lit(6.0)
                * (-(three * u * u - T::one()) * self.m[j] + (three * t * t - T::one()) * self.m[j + 1])
    }
}
