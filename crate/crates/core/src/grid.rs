//! Sampled fields on uniform periodic or truncated-line grids.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::{from_usize, lit, Real};

/// Power-law continuation of a line field outside its window:
/// `c± + a±·sign(x)·|x|^(-beta)` for `x > R` (plus side) and `x < -R` (minus side).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailModel<T> {
    pub c_minus: T,
    pub c_plus: T,
    pub a_minus: T,
    pub a_plus: T,
    pub beta: T,
}

impl<T: Real> TailModel<T> {
    pub fn constant(c_minus: T, c_plus: T) -> Self {
        Self {
            c_minus,
            c_plus,
            a_minus: T::zero(),
            a_plus: T::zero(),
            beta: T::one(),
        }
    }

    pub fn zero() -> Self {
        Self::constant(T::zero(), T::zero())
    }

    pub fn eval(&self, x: T) -> T {
        if x < T::zero() {
            self.c_minus - self.a_minus * (-x).powf(-self.beta)
        } else {
            self.c_plus + self.a_plus * x.powf(-self.beta)
        }
    }

    /// Derivative of the tail law.
    pub fn derivative(&self, x: T) -> T {
        let b = self.beta;
        if x < T::zero() {
            -self.a_minus * b * (-x).powf(-b - T::one())
        } else {
            -self.a_plus * b * x.powf(-b - T::one())
        }
    }

    /// Least-squares amplitudes `a±` for a prescribed `beta` from samples `(x, value)`
    /// on each side; `c±` are kept.
    pub fn fit_amplitudes(&mut self, samples: impl IntoIterator<Item = (T, T)>) {
        let (mut nm, mut dm, mut np, mut dp) = (T::zero(), T::zero(), T::zero(), T::zero());
        for (x, v) in samples {
            let basis = x.abs().powf(-self.beta);
            if x < T::zero() {
                // v = c- - a- * basis
                nm = nm + (self.c_minus - v) * basis;
                dm = dm + basis * basis;
            } else if x > T::zero() {
                np = np + (v - self.c_plus) * basis;
                dp = dp + basis * basis;
            }
        }
        if dm > T::zero() {
            self.a_minus = nm / dm;
        }
        if dp > T::zero() {
            self.a_plus = np / dp;
        }
    }

    /// Symmetric fit: one amplitude shared by both sides.
    pub fn fit_symmetric(&mut self, samples: impl IntoIterator<Item = (T, T)>) {
        let (mut num, mut den) = (T::zero(), T::zero());
        for (x, v) in samples {
            let basis = x.abs().powf(-self.beta);
            let r = if x < T::zero() {
                self.c_minus - v
            } else {
                v - self.c_plus
            };
            num = num + r * basis;
            den = den + basis * basis;
        }
        if den > T::zero() {
            self.a_minus = num / den;
            self.a_plus = self.a_minus;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry<T> {
    /// `n` nodes `x_j = j·q/n` on a torus of period `q`.
    Periodic { period: T, n: usize },
    /// `n + 1` nodes `x_j = -R + j·2R/n` (both ends included) with a tail model outside.
    Line {
        half_width: T,
        n: usize,
        tail: TailModel<T>,
    },
    /// `n × n` nodes on the square torus of side `period`, row-major with x fastest.
    Periodic2 { period: T, n: usize },
}

impl<T: Real> Geometry<T> {
    pub fn spacing(&self) -> T {
        match self {
            Geometry::Periodic { period, n } | Geometry::Periodic2 { period, n } => {
                *period / from_usize(*n)
            }
            Geometry::Line { half_width, n, .. } => lit::<T>(2.0) * *half_width / from_usize(*n),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Geometry::Periodic { n, .. } => *n,
            Geometry::Line { n, .. } => *n + 1,
            Geometry::Periodic2 { n, .. } => *n * *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn resolution(&self) -> usize {
        match self {
            Geometry::Periodic { n, .. }
            | Geometry::Line { n, .. }
            | Geometry::Periodic2 { n, .. } => *n,
        }
    }

    /// Coordinate of node `j` (1D geometries only).
    pub fn node(&self, j: usize) -> T {
        match self {
            Geometry::Periodic { .. } => from_usize::<T>(j) * self.spacing(),
            Geometry::Line { half_width, .. } => -*half_width + from_usize::<T>(j) * self.spacing(),
            Geometry::Periodic2 { n, .. } => from_usize::<T>(j % *n) * self.spacing(),
        }
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.len()).map(|j| self.node(j)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.resolution();
        if n < 8 {
            return Err(invalid("n", format!("need at least 8 points, got {n}")));
        }
        match self {
            Geometry::Periodic { period, .. } | Geometry::Periodic2 { period, .. } => {
                if !(*period > T::zero()) {
                    return Err(invalid("period", "must be positive"));
                }
            }
            Geometry::Line {
                half_width, tail, ..
            } => {
                if !(*half_width > T::zero()) {
                    return Err(invalid("half_width", "must be positive"));
                }
                if !tail.beta.is_finite() {
                    return Err(invalid("tail.beta", "must be finite"));
                }
            }
        }
        Ok(())
    }
}

/// Uniform sample of a function together with its grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField<T> {
    pub geometry: Geometry<T>,
    pub values: Vec<T>,
}

impl<T: Real> GridField<T> {
    pub fn new(geometry: Geometry<T>, values: Vec<T>) -> Result<Self> {
        geometry.validate()?;
        if values.len() != geometry.len() {
            return Err(invalid(
                "values",
                format!("expected {} samples, got {}", geometry.len(), values.len()),
            ));
        }
        Ok(Self { geometry, values })
    }

    pub fn periodic(period: T, n: usize, f: impl Fn(T) -> T) -> Result<Self> {
        let geometry = Geometry::Periodic { period, n };
        let values = (0..n).map(|j| f(geometry.node(j))).collect();
        Self::new(geometry, values)
    }

    pub fn line(half_width: T, n: usize, tail: TailModel<T>, f: impl Fn(T) -> T) -> Result<Self> {
        let geometry = Geometry::Line {
            half_width,
            n,
            tail,
        };
        let values = (0..=n).map(|j| f(geometry.node(j))).collect();
        Self::new(geometry, values)
    }

    pub fn periodic2(period: T, n: usize, f: impl Fn(T, T) -> T) -> Result<Self> {
        let geometry = Geometry::Periodic2 { period, n };
        let h = geometry.spacing();
        let mut values = Vec::with_capacity(n * n);
        for iy in 0..n {
            for ix in 0..n {
                values.push(f(from_usize::<T>(ix) * h, from_usize::<T>(iy) * h));
            }
        }
        Self::new(geometry, values)
    }

    pub fn spacing(&self) -> T {
        self.geometry.spacing()
    }

    pub fn nodes(&self) -> Vec<T> {
        self.geometry.nodes()
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }

    pub fn sup_norm(&self) -> T {
        crate::scalar::sup_abs(&self.values)
    }

    pub fn with_values(&self, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            geometry: self.geometry.clone(),
            values,
        }
    }

    pub fn tail(&self) -> Option<&TailModel<T>> {
        match &self.geometry {
            Geometry::Line { tail, .. } => Some(tail),
            _ => None,
        }
    }

    /// Value at an arbitrary coordinate of a line field: window samples inside,
    /// tail model outside.
    pub fn line_value(&self, x: T) -> Option<T> {
        match &self.geometry {
            Geometry::Line {
                half_width, tail, ..
            } => {
                if x.abs() > *half_width {
                    Some(tail.eval(x))
                } else {
                    let h = self.spacing();
                    let t = (x + *half_width) / h;
                    let j = t.floor().to_usize()?.min(self.values.len() - 2);
                    let w = t - from_usize(j);
                    Some(self.values[j] * (T::one() - w) + self.values[j + 1] * w)
                }
            }
            _ => None,
        }
    }

    /// Every other node; `None` when the resolution is odd or would drop below 8.
    pub fn coarsen(&self) -> Option<Self> {
        let n = self.geometry.resolution();
        if !n.is_multiple_of(2) || n / 2 < 8 {
            return None;
        }
        let geometry = match &self.geometry {
            Geometry::Periodic { period, .. } => Geometry::Periodic {
                period: *period,
                n: n / 2,
            },
            Geometry::Line {
                half_width, tail, ..
            } => Geometry::Line {
                half_width: *half_width,
                n: n / 2,
                tail: *tail,
            },
            Geometry::Periodic2 { period, .. } => {
                let values = (0..n / 2)
                    .flat_map(|iy| (0..n / 2).map(move |ix| (ix, iy)))
                    .map(|(ix, iy)| self.values[2 * iy * n + 2 * ix])
                    .collect();
                return Some(Self {
                    geometry: Geometry::Periodic2 {
                        period: *period,
                        n: n / 2,
                    },
                    values,
                });
            }
        };
        let values = self.values.iter().step_by(2).copied().collect();
        Some(Self { geometry, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_nodes_are_symmetric() {
        let g = Geometry::<f64>::Line {
            half_width: 4.0,
            n: 16,
            tail: TailModel::zero(),
        };
        let x = g.nodes();
        assert_eq!(x.len(), 17);
        assert_eq!(x[8], 0.0);
        for j in 0..=16 {
            assert!((x[j] + x[16 - j]).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_short_fields() {
        let err = GridField::periodic(1.0, 4, |x: f64| x).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument { field: "n", .. }));
        let geom = Geometry::Periodic { period: 1.0, n: 8 };
        assert!(GridField::new(geom, vec![0.0; 7]).is_err());
    }

    #[test]
    fn tail_fit_recovers_amplitudes() {
        let truth = TailModel {
            c_minus: 0.0,
            c_plus: 1.0,
            a_minus: -0.3,
            a_plus: 0.7,
            beta: 1.5,
        };
        let samples: Vec<_> = (0..40)
            .map(|k| {
                let x = if k < 20 { -10.0 - k as f64 } else { 10.0 + k as f64 };
                (x, truth.eval(x))
            })
            .collect();
        let mut fit = TailModel {
            a_minus: 0.0,
            a_plus: 0.0,
            ..truth
        };
        fit.fit_amplitudes(samples);
        assert!((fit.a_minus + 0.3).abs() < 1e-12);
        assert!((fit.a_plus - 0.7).abs() < 1e-12);
    }

    #[test]
    fn non_finite_values_are_reported() {
        let mut f = GridField::periodic(1.0, 8, |x: f64| x).unwrap();
        f.values[3] = f64::NAN;
        assert!(matches!(f.check_finite(), Err(Error::NonFinite { index: 3 })));
    }
}
