//! One-dimensional quadrature rules: Gauss-Legendre and adaptive Gauss-Kronrod (7/15).

use crate::scalar::{lit, Real};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(order: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![0.0f64; order];
    let mut weights = vec![0.0f64; order];
    let n = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (
        nodes.into_iter().map(lit).collect(),
        weights.into_iter().map(lit).collect(),
    )
}

/// Fixed-order Gauss-Legendre integral of `f` over `[a, b]`.
pub fn gauss_legendre_integrate<T: Real>(f: impl Fn(T) -> T, a: T, b: T, order: usize) -> T {
    let (x, w) = gauss_legendre::<T>(order);
    let half = (b - a) * lit(0.5);
    let mid = (a + b) * lit(0.5);
    x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| wi * f(mid + half * xi))
        .sum::<T>()
        * half
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<T: Real>(f: &impl Fn(T) -> T, a: T, b: T) -> (T, T) {
    let half = (b - a) * lit(0.5);
    let mid = (a + b) * lit(0.5);
    let fc = f(mid);
    let mut kron = fc * lit(WGK[7]);
    let mut gauss = fc * lit(WG[3]);
    for j in 0..7 {
        let dx = half * lit(XGK[j]);
        let pair = f(mid - dx) + f(mid + dx);
        kron = kron + pair * lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * lit(WG[j / 2]);
        }
    }
    let integral = kron * half;
    let err = ((kron - gauss) * half).abs();
    (integral, err)
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]` to absolute tolerance `tol`,
/// bisecting the interval with the largest error estimate first.
pub fn adaptive<T: Real>(f: impl Fn(T) -> T, a: T, b: T, tol: T, max_intervals: usize) -> Integral<T> {
    let (v0, e0) = kronrod15(&f, a, b);
    let mut intervals = vec![(a, b, v0, e0)];
    let mut evaluations = 15;
    loop {
        let total_err: T = intervals.iter().map(|iv| iv.3).sum();
        if total_err <= tol || intervals.len() >= max_intervals {
            break;
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, iv)| {
                if iv.3 > acc.1 {
                    (i, iv.3)
                } else {
                    acc
                }
            });
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let mid = (lo + hi) * lit(0.5);
        if !(mid > lo && mid < hi) {
            break;
        }
        let (vl, el) = kronrod15(&f, lo, mid);
        let (vr, er) = kronrod15(&f, mid, hi);
        evaluations += 30;
        intervals.push((lo, mid, vl, el));
        intervals.push((mid, hi, vr, er));
    }
    let mut value = T::zero();
    let mut error = T::zero();
    for iv in &intervals {
        value = value + iv.2;
        error = error + iv.3;
    }
    Integral {
        value,
        error,
        evaluations,
    }
}

/// Composite trapezoid weights for `n` uniformly spaced samples with spacing `h`.
pub fn trapezoid<T: Real>(values: &[T], h: T) -> T {
    match values.len() {
        0 | 1 => T::zero(),
        n => {
            let inner: T = values[1..n - 1].iter().copied().sum();
            (inner + (values[0] + values[n - 1]) * lit(0.5)) * h
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for order in [1usize, 2, 5, 12, 33] {
            let (x, w) = gauss_legendre::<f64>(order);
            let wsum: f64 = w.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "order {order}");
            let deg = 2 * order - 1;
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((approx - exact).abs() < 1e-12, "order {order}");
            let even = 2 * order - 2;
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(even as i32)).sum();
            assert!((approx - 2.0 / (even as f64 + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let r = adaptive(|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-10, 500);
        assert!((r.value - 2.0).abs() < 1e-8, "{}", r.value);
        let r = adaptive(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-13, 100);
        assert!((r.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn trapezoid_is_exact_on_linear() {
        let v: Vec<f64> = linspace(0.0, 1.0, 11);
        assert!((trapezoid(&v, 0.1) - 0.5).abs() < 1e-15);
    }
}
