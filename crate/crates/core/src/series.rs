//! Power-law lattice sums with Euler-Maclaurin tail closure.
//!
//! All sums here are of the form `Σ_k f(k)` with `f(t) = (t + a)^(-σ)` or differences of two
//! such terms. The first `N` terms are summed directly; the remainder is replaced by its
//! integral, the half endpoint term and Bernoulli corrections up to `B_14`.

use crate::scalar::{from_usize, lit, Real};

const BERNOULLI: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

const DIRECT_TERMS: usize = 24;

/// `d^m/dt^m (t + a)^(-σ)` at `t`.
fn power_derivative<T: Real>(sigma: T, shifted: T, m: usize) -> T {
    let mut coef = T::one();
    for j in 0..m {
        coef = coef * -(sigma + from_usize(j));
    }
    coef * shifted.powf(-sigma - from_usize(m))
}

/// Euler-Maclaurin correction terms for `Σ_{k≥N} f(k)` beyond the integral:
/// `f(N)/2 - Σ_j B_2j/(2j)! f^(2j-1)(N)`, for `f(t) = (t+a)^(-σ)` at `shifted = N + a`.
fn em_corrections<T: Real>(sigma: T, shifted: T) -> T {
    let mut acc = shifted.powf(-sigma) * lit(0.5);
    let mut fact = 1.0f64;
    for (j, b) in BERNOULLI.iter().enumerate() {
        let order = 2 * j + 2;
        fact *= ((order - 1) * order) as f64;
        acc = acc - lit::<T>(b / fact) * power_derivative(sigma, shifted, order - 1);
    }
    acc
}

/// `(x^(1-σ) - y^(1-σ)) / (1-σ)`, continuous through `σ = 1` where it equals `ln(x/y)`.
fn power_antiderivative_difference<T: Real>(sigma: T, x: T, y: T) -> T {
    let eps = T::one() - sigma;
    let (lx, ly) = (x.ln(), y.ln());
    if eps.abs() < lit(1e-12) {
        return lx - ly;
    }
    // exp(eps·ly)·expm1(eps·(lx-ly))/eps
    (eps * ly).exp() * (eps * (lx - ly)).exp_m1() / eps
}

/// Hurwitz zeta `ζ(σ, a) = Σ_{k≥0} (k + a)^(-σ)` for `a > 0`, `σ ≠ 1`, analytically
/// continued to `0 < σ < 1`.
pub fn hurwitz_zeta<T: Real>(sigma: T, a: T) -> T {
    assert!(a > T::zero(), "hurwitz_zeta requires a > 0");
    assert!((sigma - T::one()).abs() > lit(1e-14), "hurwitz_zeta has a pole at σ = 1");
    let n = DIRECT_TERMS;
    let mut direct = T::zero();
    for k in (0..n).rev() {
        direct = direct + (from_usize::<T>(k) + a).powf(-sigma);
    }
    let shifted = from_usize::<T>(n) + a;
    direct + shifted.powf(T::one() - sigma) / (sigma - T::one()) + em_corrections(sigma, shifted)
}

/// `Σ_{k≥start} (k + a)^(-σ)` for `σ > 1`.
pub fn power_tail<T: Real>(sigma: T, a: T, start: usize) -> T {
    debug_assert!(sigma > T::one());
    let mut direct = T::zero();
    for k in (start..start + DIRECT_TERMS).rev() {
        direct = direct + (from_usize::<T>(k) + a).powf(-sigma);
    }
    let shifted = from_usize::<T>(start + DIRECT_TERMS) + a;
    direct + shifted.powf(T::one() - sigma) / (sigma - T::one()) + em_corrections(sigma, shifted)
}

/// Paired sum `Σ_{k≥start} [(k + γ)^(-σ) - (k - γ)^(-σ)]` for `σ > 0` and `start > |γ|`.
///
/// Each bracket decays like `k^(-1-σ)`, so the series converges for every `σ > 0`
/// even though its two halves diverge when `σ ≤ 1`.
pub fn paired_difference_from<T: Real>(sigma: T, gamma: T, start: usize) -> T {
    assert!(from_usize::<T>(start) > gamma.abs());
    let mut direct = T::zero();
    for k in (start..start + DIRECT_TERMS).rev() {
        let k = from_usize::<T>(k);
        direct = direct + ((k + gamma).powf(-sigma) - (k - gamma).powf(-sigma));
    }
    let n = from_usize::<T>(start + DIRECT_TERMS);
    // ∫_N^∞ [(t+γ)^(-σ) - (t-γ)^(-σ)] dt
    let integral = power_antiderivative_difference(sigma, n - gamma, n + gamma);
    direct + integral + em_corrections(sigma, n + gamma) - em_corrections(sigma, n - gamma)
}

pub fn paired_difference<T: Real>(sigma: T, gamma: T) -> T {
    paired_difference_from(sigma, gamma, 1)
}

/// Sums of the lattice `{x - i : i ∈ Z, i ≠ i0}` seen from `x = i0 + γ`, `γ ∈ (-1/2, 1/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSums<T> {
    /// `Σ_{i≠i0} (x-i)/|x-i|^(1+2s)`
    pub signed: T,
    /// `Σ_{i<i0} |x-i|^(-1-2s) = Σ_{k≥1} (k+γ)^(-1-2s)`
    pub left: T,
    /// `Σ_{i>i0} |x-i|^(-1-2s) = Σ_{k≥1} (k-γ)^(-1-2s)`
    pub right: T,
}

/// Limits of the three lattice sums as the symmetric truncation `|i| ≤ n` grows.
pub fn lattice_sums<T: Real>(gamma: T, s: T) -> LatticeSums<T> {
    let two_s = s + s;
    LatticeSums {
        signed: paired_difference(two_s, gamma),
        left: hurwitz_zeta(T::one() + two_s, T::one() + gamma),
        right: hurwitz_zeta(T::one() + two_s, T::one() - gamma),
    }
}

/// Direct partial sums over `|i - i0| ≤ n` (the brute-force counterpart of [`lattice_sums`]).
pub fn lattice_partial_sums(gamma: f64, s: f64, n: usize) -> LatticeSums<f64> {
    let mut signed = 0.0;
    let mut left = 0.0;
    let mut right = 0.0;
    for k in (1..=n).rev() {
        let k = k as f64;
        let (a, b) = (k + gamma, k - gamma);
        signed += a.powf(-2.0 * s) - b.powf(-2.0 * s);
        left += a.powf(-1.0 - 2.0 * s);
        right += b.powf(-1.0 - 2.0 * s);
    }
    LatticeSums {
        signed,
        left,
        right,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zeta_matches_known_values() {
        assert!((hurwitz_zeta(2.0, 1.0) - PI * PI / 6.0).abs() < 1e-14);
        assert!((hurwitz_zeta(4.0, 1.0) - PI.powi(4) / 90.0).abs() < 1e-14);
        // ζ(2, 1/2) = π²/2
        assert!((hurwitz_zeta(2.0, 0.5) - PI * PI / 2.0).abs() < 1e-13);
        // ζ(1/2) = -1.4603545088095868
        assert!((hurwitz_zeta::<f64>(0.5, 1.0) + 1.460_354_508_809_586_8).abs() < 1e-12);
        // ζ(3) (Apéry)
        assert!((hurwitz_zeta::<f64>(3.0, 1.0) - 1.202_056_903_159_594_3).abs() < 1e-14);
    }

    #[test]
    fn zeta_shift_recurrence() {
        for &(sigma, a) in &[(0.6, 0.3), (1.5, 0.7), (2.2, 1.9), (0.2, 2.5)] {
            let lhs = hurwitz_zeta(sigma, a) - hurwitz_zeta(sigma, a + 1.0);
            let rhs = f64::powf(a, -sigma);
            assert!((lhs - rhs).abs() < 1e-12 * rhs.max(1.0), "σ={sigma} a={a}");
        }
    }

    #[test]
    fn paired_difference_agrees_with_zeta_difference() {
        for &(sigma, g) in &[(0.6, 0.25), (1.5, -0.4), (2.5, 0.5)] {
            let z: f64 = hurwitz_zeta(sigma, 1.0 + g) - hurwitz_zeta(sigma, 1.0 - g);
            assert!((paired_difference(sigma, g) - z).abs() < 1e-12);
        }
    }

    #[test]
    fn paired_difference_at_sigma_one_is_digamma_difference() {
        // Σ_k [1/(k+γ) - 1/(k-γ)] = ψ(1-γ) - ψ(1+γ); at γ = 1/2: ψ(1/2) - ψ(3/2) = -2.
        assert!((paired_difference::<f64>(1.0, 0.5) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn power_tail_matches_zeta() {
        let t: f64 = power_tail(2.5, 0.3, 7);
        let z = hurwitz_zeta(2.5, 7.3);
        assert!((t - z).abs() < 1e-14);
    }
}
