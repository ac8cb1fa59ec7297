//! Adaptive evaluation of the 1D operator on functions known in closed form.

use crate::quad::adaptive;
use crate::scalar::{lit, Real};

/// `∫_0^∞ D(z) z^{-1-2s} dz` where `D(z) = O(z²)` at the origin and bounded at infinity.
///
/// `breaks` are distances where `D` is less smooth; they split the half line into pieces.
/// The first piece is mapped with `z = a t^{1/(1-s)}`, the last with `z = b v^{-1/(2s)}`, so
/// both endpoint behaviours become regular for the Gauss-Kronrod rule.
/// Oscillatory `D` converges slowly in the last piece.
pub fn singular_integral<T: Real>(d: impl Fn(T) -> T, s: T, breaks: &[T], tol: T) -> T {
    let mut cuts: Vec<T> = breaks.iter().copied().filter(|b| *b > T::zero() && b.is_finite()).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() <= lit::<T>(1e-14) * b.abs());
    if cuts.is_empty() {
        cuts.push(T::one());
    }
    let two_s = s + s;
    let pieces = T::one() + lit(cuts.len() as f64);
    let tol = tol / pieces;
    let max_iv = 2000;

    let a = cuts[0];
    // Below z1 the difference quotient D(z)/z² is taken as constant: sampling closer to
    // the origin only adds cancellation noise.
    let z1 = a.min(T::one()) * lit(1e-4);
    let model = d(z1) / (z1 * z1) * z1.powf(lit::<T>(2.0) - two_s) / (lit::<T>(2.0) - two_s);
    let p = T::one() / (T::one() - s);
    let t0 = (z1 / a).powf(T::one() / p);
    let near = adaptive(
        |t: T| {
            let z = a * t.powf(p);
            // dz = a p t^{p-1} dt
            d(z) * z.powf(-T::one() - two_s) * a * p * t.powf(p - T::one())
        },
        t0,
        T::one(),
        tol,
        max_iv,
    )
    .value
        + model;

    let mut mid = T::zero();
    for w in cuts.windows(2) {
        mid = mid + adaptive(|z: T| d(z) * z.powf(-T::one() - two_s), w[0], w[1], tol, max_iv).value;
    }

    let b = *cuts.last().unwrap();
    let far = adaptive(
        |v: T| {
            if v <= T::zero() {
                return T::zero();
            }
            d(b * v.powf(-T::one() / two_s))
        },
        T::zero(),
        T::one(),
        tol * two_s * b.powf(two_s),
        max_iv,
    )
    .value
        * b.powf(-two_s)
        / two_s;
    near + mid + far
}

/// `I[f](x) = g ∫_0^∞ (f(x+z) + f(x-z) - 2f(x)) z^{-1-2s} dz`.
///
/// `kinks` are absolute coordinates where `f` loses smoothness.
pub fn apply_pointwise<T: Real>(f: impl Fn(T) -> T, x: T, s: T, g: T, kinks: &[T], tol: T) -> T {
    let fx = f(x);
    let breaks: Vec<T> = kinks.iter().map(|k| (*k - x).abs()).collect();
    g * singular_integral(|z| f(x + z) + f(x - z) - fx - fx, s, &breaks, tol / g.max(lit(1e-300)))
}

/// `g ∫_R (f(x+z) - f(x))(q(x+z) - q(x)) |z|^{-1-2s} dz`, the bilinear remainder of the
/// product rule `I[fq] = f I[q] + q I[f] + B(f, q)`.
pub fn bilinear_pointwise<T: Real>(
    f: impl Fn(T) -> T,
    q: impl Fn(T) -> T,
    x: T,
    s: T,
    g: T,
    kinks: &[T],
    tol: T,
) -> T {
    let (fx, qx) = (f(x), q(x));
    let breaks: Vec<T> = kinks.iter().map(|k| (*k - x).abs()).collect();
    g * singular_integral(
        |z| (f(x + z) - fx) * (q(x + z) - qx) + (f(x - z) - fx) * (q(x - z) - qx),
        s,
        &breaks,
        tol / g.max(lit(1e-300)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn arctan_closed_form() {
        let f = |x: f64| 0.5 + x.atan() / PI;
        for &x in &[-3.0, -0.4, 0.0, 0.9, 7.5] {
            let v = apply_pointwise(f, x, 0.5, 1.0 / PI, &[], 1e-12);
            let exact = -x / (PI * (1.0 + x * x));
            assert!((v - exact).abs() < 1e-9, "x={x}: {v} vs {exact}");
        }
    }

    #[test]
    fn cosine_eigenfunction() {
        // I[cos(kx)] = -|k|^{2s} cos(kx) with g = C(1, s)
        let s = 0.3;
        let g = crate::fracop::kernel::fractional_laplacian_constant(
            1,
            crate::fracop::kernel::FractionalOrder::new(s).unwrap(),
        );
        let k = 2.0;
        let x = 0.3;
        let v = apply_pointwise(|y: f64| (k * y).cos(), x, s, g, &[], 1e-11);
        let exact = -k.powf(2.0 * s) * (k * x).cos();
        assert!((v - exact).abs() < 1e-4, "{v} vs {exact}");
    }

    #[test]
    fn bilinear_vanishes_for_constant_factor() {
        let b = bilinear_pointwise(|_| 2.0, |x: f64| (-x * x).exp(), 0.3, 0.4, 1.0, &[], 1e-12);
        assert_eq!(b, 0.0);
    }
}
