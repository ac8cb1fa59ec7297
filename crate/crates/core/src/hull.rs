//! Hull-function ansatz built from shifted layers and correctors, its nonlinear residual,
//! the lattice series behind it and the product rule for `I[ψτ]`.

use serde::{Deserialize, Serialize};

use crate::cell::{hbar_run, HbarOptions, Slope, Q_MAX};
use crate::error::{invalid, Error, Result};
use crate::fracop::{apply_pointwise, bilinear_pointwise, PeriodicOperator};
use crate::grid::{Geometry, GridField};
use crate::layer::{CorrectorPsi, LayerSolution, Profile};
use crate::series::{hurwitz_zeta, lattice_sums, paired_difference_from, power_tail, LatticeSums};
use crate::{Field, Potential};

/// Smooth cutoff: 1 on `[-R, R]`, 0 outside `[-2R, 2R]`, quintic smoothstep in between (C²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub radius: f64,
}

fn smoothstep(t: f64) -> f64 {
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

fn smoothstep_d1(t: f64) -> f64 {
    30.0 * t * t * (1.0 - t) * (1.0 - t)
}

impl Cutoff {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid("radius", "cutoff radius must be positive"));
        }
        Ok(Self { radius })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (x.abs() - self.radius) / self.radius;
        if t <= 0.0 {
            1.0
        } else if t >= 1.0 {
            0.0
        } else {
            1.0 - smoothstep(t)
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let t = (x.abs() - self.radius) / self.radius;
        if t <= 0.0 || t >= 1.0 {
            0.0
        } else {
            -smoothstep_d1(t) / self.radius * x.signum()
        }
    }

    /// Points where `τ` is only C².
    pub fn kinks(&self) -> [f64; 4] {
        let r = self.radius;
        [-2.0 * r, -r, r, 2.0 * r]
    }

    /// `∫ τ = 3R`.
    pub fn mass(&self) -> f64 {
        3.0 * self.radius
    }
}

/// The three limits of the lattice sums around `x = i0 + γ`, `γ ∈ (-1/2, 1/2]`: the signed
/// sum `Σ (x-i)/|x-i|^{1+2s}` and the one-sided sums `Σ (i±γ)^{-1-2s}`.
///
/// Direct terms plus an Euler-Maclaurin closure; `tol` is checked against the change
/// produced by moving the closure one term further out.
pub fn claim1_series(gamma: f64, s: f64, tol: f64) -> Result<LatticeSums<f64>> {
    if !(gamma > -0.5 && gamma <= 0.5) {
        return Err(invalid("gamma", "must lie in (-1/2, 1/2]"));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid("s", "must lie in (0, 1)"));
    }
    if !(tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    let sums = lattice_sums(gamma, s);
    let two_s = 2.0 * s;
    let shifted = (1.0 + gamma).powf(-two_s) - (1.0 - gamma).powf(-two_s) + paired_difference_from(two_s, gamma, 2);
    let err = (shifted - sums.signed).abs();
    if err > tol {
        return Err(Error::Unconverged {
            what: "lattice series",
            residual: err,
            tol,
            history: vec![err],
        });
    }
    Ok(sums)
}

/// `φ - H` (or `ψ`) on the whole line: spline inside the window; outside, the odd part of the
/// fitted tail keeps its exponent while the even part continues with exponent `1 + 2s`.
#[derive(Debug, Clone)]
struct Deviation {
    profile: Profile,
    heaviside: bool,
    half_width: f64,
    beta: f64,
    odd: f64,
    even: f64,
    even_beta: f64,
}

impl Deviation {
    /// `summed` marks profiles that enter an infinite lattice sum.
    fn new(profile: Profile, heaviside: bool, s: f64, summed: bool, what: &'static str) -> Result<Self> {
        let tail = *profile.tail();
        let odd = 0.5 * (tail.a_plus + tail.a_minus);
        let mut even = 0.5 * (tail.a_plus - tail.a_minus);
        let even_beta = 1.0 + 2.0 * s;
        if s < 0.5 && summed {
            if even.abs() > 1e-6 * odd.abs().max(1e-300) && even.abs() > 1e-12 {
                return Err(Error::Degenerate {
                    what,
                    detail: format!(
                        "tail is not odd (even amplitude {even:.3e}); the lattice sum diverges for s < 1/2"
                    ),
                });
            }
            even = 0.0;
        }
        Ok(Self {
            half_width: profile.half_width(),
            profile,
            heaviside,
            beta: tail.beta,
            odd,
            even,
            even_beta,
        })
    }

    fn eval(&self, z: f64) -> f64 {
        let r = self.half_width;
        if z.abs() <= r {
            let h = if self.heaviside && z >= 0.0 { 1.0 } else { 0.0 };
            return self.profile.value(z) - h;
        }
        let az = z.abs();
        self.odd * z.signum() * az.powf(-self.beta) + self.even * r.powf(-self.beta) * (r / az).powf(self.even_beta)
    }

    fn derivative(&self, z: f64) -> f64 {
        let r = self.half_width;
        if z.abs() <= r {
            return self.profile.derivative(z);
        }
        let az = z.abs();
        -self.odd * self.beta * az.powf(-self.beta - 1.0)
            - self.even * self.even_beta * r.powf(-self.beta) * (r / az).powf(self.even_beta) / az * z.signum()
    }

    /// `Σ_{k>n} [dev((k+γ)/d) + dev((γ-k)/d)]`, assuming `(n+1/2)/d` lies beyond the window.
    fn closure(&self, gamma: f64, d: f64, n: usize) -> f64 {
        let start = n + 1;
        let odd = self.odd * d.powf(self.beta) * paired_difference_from(self.beta, gamma, start);
        let even = if self.even == 0.0 {
            0.0
        } else {
            let r = self.half_width;
            self.even
                * r.powf(self.even_beta - self.beta)
                * d.powf(self.even_beta)
                * (power_tail(self.even_beta, gamma, start) + power_tail(self.even_beta, -gamma, start))
        };
        odd + even
    }

    /// Envelope constants `sup |f'| |z|^{1+2s}` and `sup |even part| |z|^{1+2s}` over `|z| ≥ 1`.
    fn envelope(&self, s: f64, h: f64) -> (f64, f64) {
        let p = 1.0 + 2.0 * s;
        let r = self.half_width;
        let mut kd: f64 = 0.0;
        let mut ke: f64 = 0.0;
        let m = (r / h).round() as usize;
        for j in 0..=m {
            let z = (1.0 + (r - 1.0) * j as f64 / m as f64).min(r);
            let w = z.powf(p);
            kd = kd.max(self.derivative(z).abs() * w).max(self.derivative(-z).abs() * w);
            ke = ke.max(0.5 * (self.eval(z) + self.eval(-z)).abs() * w);
        }
        // beyond the window the odd derivative behaves like |z|^{-1-β}, the even part like |z|^{-1-2s}
        let far = self.odd.abs() * self.beta * r.powf(p - 1.0 - self.beta);
        let far_even = self.even.abs() * r.powf(-self.beta) * r.powf(p);
        (kd.max(far), ke.max(far_even))
    }
}

/// Sampled hull ansatz `h(x)`: `δ^{2s}L0/α + Σ φ(x_i) - n + δ^{2s} Σ ψ(x_i)[τ(x_i)]` with
/// `x_i = (x - i)/(δ|p0|)`.
#[derive(Debug, Clone)]
pub struct HullAnsatz {
    pub delta: f64,
    pub p0: f64,
    pub l0: f64,
    pub s: f64,
    pub alpha: f64,
    pub kernel_constant: f64,
    /// Terms summed directly on each side of the nearest lattice point.
    pub n: usize,
    /// `R = 1/(2δ|p0|)` for `s < 1/2`.
    pub cutoff: Option<Cutoff>,
    /// `h(x) - x` on one period, `x_j = j/m`.
    pub h_minus_x: Field,
    /// `sup |h_n - h_{2n}|` over the samples.
    pub cauchy_change: f64,
    pub potential: Potential,
    c0: f64,
    phi: Deviation,
    psi: Option<(Deviation, f64)>,
}

/// Serializable summary of an ansatz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzDump {
    pub delta: f64,
    pub p0: f64,
    pub l0: f64,
    pub s: f64,
    pub n: usize,
    pub cutoff_radius: Option<f64>,
    pub cauchy_change: f64,
    pub deviation_bound: f64,
    pub x: Vec<f64>,
    pub h: Vec<f64>,
}

impl HullAnsatz {
    fn scale(&self) -> f64 {
        self.delta * self.p0.abs()
    }

    fn weight(&self) -> f64 {
        self.delta.powf(2.0 * self.s)
    }

    /// `h(x) - x` with `n` direct terms on each side.
    fn deviation_with(&self, x: f64, n: usize) -> f64 {
        let d = self.scale();
        let i0 = (x - 0.5).ceil();
        let gamma = x - i0;
        let phi = &self.phi;
        let mut acc = self.weight() * self.l0 / self.alpha + phi.eval(gamma / d) + if gamma >= 0.0 { 1.0 } else { 0.0 }
            - gamma;
        let mut pairs = 0.0;
        for k in (1..=n).rev() {
            let k = k as f64;
            pairs += phi.eval((gamma + k) / d) + phi.eval((gamma - k) / d);
        }
        acc += pairs + phi.closure(gamma, d, n);
        if let Some((psi, scale)) = &self.psi {
            let sum = match &self.cutoff {
                Some(tau) => (-1..=1)
                    .map(|k| {
                        let z = (gamma - k as f64) / d;
                        psi.eval(z) * tau.eval(z)
                    })
                    .sum::<f64>(),
                None => {
                    let mut sum = 0.0;
                    for k in (1..=n).rev() {
                        let k = k as f64;
                        sum += psi.eval((gamma + k) / d) + psi.eval((gamma - k) / d);
                    }
                    sum + psi.eval(gamma / d) + psi.closure(gamma, d, n)
                }
            };
            acc += self.weight() * scale * sum;
        }
        acc
    }

    /// `h(x) - x` at any `x`.
    pub fn deviation(&self, x: f64) -> f64 {
        self.deviation_with(x, self.n)
    }

    pub fn eval(&self, x: f64) -> f64 {
        x + self.deviation(x)
    }

    /// Bound on `|h - x|` assembled from the envelope constants of `φ'`, `ψ'` and of the even
    /// parts of `φ - H` and `ψ` (pairs of lattice terms are controlled by the mean value theorem).
    pub fn deviation_bound(&self) -> f64 {
        let s = self.s;
        let d = self.scale();
        let h = self.h_minus_x.spacing().min(0.05);
        let zeta = hurwitz_zeta(1.0 + 2.0 * s, 0.5);
        let pair_sum = |dev: &Deviation| {
            let (kd, ke) = dev.envelope(s, h);
            d.powf(2.0 * s) * zeta * (kd + 2.0 * ke * d)
        };
        let mut c = (self.weight() * self.l0 / self.alpha).abs() + 1.5 + pair_sum(&self.phi);
        if let Some((psi, scale)) = &self.psi {
            let sup = sup_on_line(psi);
            let sum = if self.cutoff.is_some() {
                3.0 * sup
            } else {
                sup + pair_sum(psi)
            };
            c += self.weight() * scale.abs() * sum;
        }
        c
    }

    pub fn dump(&self) -> AnsatzDump {
        let x = self.h_minus_x.nodes();
        let h = x.iter().zip(&self.h_minus_x.values).map(|(x, v)| x + v).collect();
        AnsatzDump {
            delta: self.delta,
            p0: self.p0,
            l0: self.l0,
            s: self.s,
            n: self.n,
            cutoff_radius: self.cutoff.map(|c| c.radius),
            cauchy_change: self.cauchy_change,
            deviation_bound: self.deviation_bound(),
            x,
            h,
        }
    }

    /// Default drift `λ̄ = δ^{1+2s} c0 |p0| L0`.
    pub fn lambda_bar(&self) -> f64 {
        self.delta.powf(1.0 + 2.0 * self.s) * self.c0 * self.p0.abs() * self.l0
    }
}

fn sup_on_line(dev: &Deviation) -> f64 {
    let r = dev.half_width;
    let m = 4000;
    (0..=m)
        .map(|j| dev.eval(-r + 2.0 * r * j as f64 / m as f64).abs())
        .fold(0.0, f64::max)
}

/// Samples per unit period used by [`build_ansatz`] unless overridden.
pub const DEFAULT_SAMPLES: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzOptions {
    pub n: usize,
    pub samples: usize,
    pub cauchy_tol: f64,
}

impl Default for AnsatzOptions {
    fn default() -> Self {
        Self {
            n: 16,
            samples: DEFAULT_SAMPLES,
            cauchy_tol: 1e-8,
        }
    }
}

/// Builds the ansatz for `(δ, p0, L0)` from a layer and (when `L0 ≠ 0`) a corrector solved for
/// some `L0'`; `ψ` is rescaled by `L0/L0'`.
pub fn build_ansatz(
    delta: f64,
    p0: f64,
    l0: f64,
    layer: &LayerSolution,
    psi: Option<&CorrectorPsi>,
    opts: &AnsatzOptions,
) -> Result<HullAnsatz> {
    if !(p0 != 0.0 && p0.is_finite()) {
        return Err(invalid("p0", "must be nonzero"));
    }
    if !(delta > 0.0) || 1.0 / (delta * p0.abs()) < 2.0 {
        return Err(invalid("delta", "need δ > 0 and 1/(δ|p0|) ≥ 2"));
    }
    if !l0.is_finite() {
        return Err(invalid("l0", "must be finite"));
    }
    if !opts.samples.is_power_of_two() || opts.samples < 64 {
        return Err(invalid("samples", "must be a power of two (at least 64)"));
    }
    let s = layer.s;
    let d = delta * p0.abs();
    let phi = Deviation::new(layer.profile(), true, s, true, "layer")?;
    let psi = if l0 == 0.0 {
        None
    } else {
        let psi = psi.ok_or_else(|| invalid("psi", "a corrector is required when L0 ≠ 0"))?;
        if psi.l0 == 0.0 {
            return Err(invalid("psi", "corrector was solved for L0 = 0 and cannot be rescaled"));
        }
        Some((Deviation::new(psi.profile(), false, s, s >= 0.5, "corrector")?, l0 / psi.l0))
    };
    let cutoff = if s < 0.5 { Some(Cutoff::new(1.0 / (2.0 * d))?) } else { None };
    // direct terms must reach past the layer window so the closure only sees tail laws
    let n = opts.n.max((layer.half_width() * d).ceil() as usize + 1);
    let m = opts.samples;
    let mut ansatz = HullAnsatz {
        delta,
        p0,
        l0,
        s,
        alpha: layer.alpha(),
        kernel_constant: layer.kernel_constant,
        n,
        cutoff,
        h_minus_x: GridField::periodic(1.0, m, |_| 0.0)?,
        cauchy_change: 0.0,
        potential: layer.potential.clone(),
        c0: layer.c0,
        phi,
        psi,
    };
    let x = ansatz.h_minus_x.nodes();
    let values: Vec<f64> = x.iter().map(|&x| ansatz.deviation_with(x, n)).collect();
    let change = x
        .iter()
        .zip(&values)
        .map(|(&x, v)| (ansatz.deviation_with(x, 2 * n) - v).abs())
        .fold(0.0, f64::max);
    if !(change < opts.cauchy_tol) {
        return Err(Error::Unconverged {
            what: "ansatz partial sums",
            residual: change,
            tol: opts.cauchy_tol,
            history: vec![change],
        });
    }
    ansatz.cauchy_change = change;
    ansatz.h_minus_x = ansatz.h_minus_x.with_values(values);
    ansatz.h_minus_x.check_finite()?;
    Ok(ansatz)
}

/// Nonlinear residual on two periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlResidual {
    pub lambda: f64,
    pub residual: Field,
    pub sup: f64,
    /// `sup / δ^{2s}`.
    pub scaled_sup: f64,
}

/// `NL[h] = λh' - δ^{2s}L0 - δ^{2s}|p0|^{2s} I[h] + W'(h)` on `[0, 2)`; `I[h] = I[h - x]`
/// because `I` kills affine functions and `h - x` is 1-periodic.
pub fn nl_residual(ansatz: &HullAnsatz, lambda: Option<f64>) -> Result<NlResidual> {
    let v = &ansatz.h_minus_x.values;
    if v.iter().any(|v| !v.is_finite()) || ansatz.deviation_bound().is_nan() {
        return Err(Error::Degenerate {
            what: "ansatz tail",
            detail: "h - x is not bounded".into(),
        });
    }
    let m = v.len();
    let step = 1.0 / m as f64;
    let s = ansatz.s;
    let op = PeriodicOperator::new(s, ansatz.kernel_constant, 1.0, m, 8.0 * step)?;
    let lap = op.apply(v);
    let lambda = lambda.unwrap_or_else(|| ansatz.lambda_bar());
    let w2s = ansatz.delta.powf(2.0 * s);
    let p2s = ansatz.p0.abs().powf(2.0 * s);
    let at = |j: isize| v[j.rem_euclid(m as isize) as usize];
    let values: Vec<f64> = (0..m)
        .map(|j| {
            let ji = j as isize;
            let dv = (8.0 * (at(ji + 1) - at(ji - 1)) - (at(ji + 2) - at(ji - 2))) / (12.0 * step);
            let h = j as f64 * step + v[j];
            lambda * (1.0 + dv) - w2s * ansatz.l0 - w2s * p2s * lap[j] + ansatz.potential.d1(h)
        })
        .collect();
    let sup = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut two = values.clone();
    two.extend_from_slice(&values);
    let residual = GridField::new(Geometry::Periodic { period: 2.0, n: 2 * m }, two)?;
    Ok(NlResidual {
        lambda,
        residual,
        sup,
        scaled_sup: sup / w2s,
    })
}

/// `B(f, q)(x) = g ∫ (f(y) - f(x))(q(y) - q(x)) |x - y|^{-1-2s} dy` by adaptive quadrature.
///
/// The integral is evaluated at `tol` and `tol/10`; disagreement beyond `10·tol` means the
/// singularity at `x` was not resolved.
pub fn bilinear_form_b(
    f: impl Fn(f64) -> f64,
    q: impl Fn(f64) -> f64,
    x: f64,
    s: f64,
    g: f64,
    kinks: &[f64],
    tol: f64,
) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    let coarse = bilinear_pointwise(&f, &q, x, s, g, kinks, tol);
    let fine = bilinear_pointwise(&f, &q, x, s, g, kinks, tol / 10.0);
    if !fine.is_finite() || (coarse - fine).abs() > 10.0 * tol {
        return Err(Error::Degenerate {
            what: "bilinear form",
            detail: format!("quadrature at x = {x} did not settle ({coarse} vs {fine})"),
        });
    }
    Ok(fine)
}

/// Both sides of `I[ψτ] = τI[ψ] + ψI[τ] + B(ψ, τ)` at one point, each by its own quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductIdentity {
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub b: f64,
}

pub fn product_identity(psi: &CorrectorPsi, tau: &Cutoff, s: f64, g: f64, x: f64, tol: f64) -> Result<ProductIdentity> {
    let p = psi.profile();
    let r = p.half_width();
    let mut kinks = vec![-r, r];
    kinks.extend_from_slice(&tau.kinks());
    let f = |y: f64| p.value(y);
    let t = |y: f64| tau.eval(y);
    let lhs = apply_pointwise(|y| f(y) * t(y), x, s, g, &kinks, tol);
    let i_psi = apply_pointwise(f, x, s, g, &kinks, tol);
    let i_tau = apply_pointwise(t, x, s, g, &kinks, tol);
    let b = bilinear_form_b(f, t, x, s, g, &kinks, tol)?;
    Ok(ProductIdentity {
        x,
        lhs,
        rhs: t(x) * i_psi + f(x) * i_tau + b,
        b,
    })
}

/// `Σ_{i≠i0} (φ - H)(x_i)^{2k-1}` at `x = i0 + γ` (limit of symmetric partial sums).
pub fn claim2_sum(layer: &LayerSolution, delta: f64, p0: f64, gamma: f64, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(invalid("k", "must be at least 1"));
    }
    if !(gamma > -0.5 && gamma <= 0.5) {
        return Err(invalid("gamma", "must lie in (-1/2, 1/2]"));
    }
    let dev = Deviation::new(layer.profile(), true, layer.s, true, "layer")?;
    let d = delta * p0.abs();
    let power = (2 * k - 1) as i32;
    let n = (layer.half_width() * d).ceil() as usize + 1;
    let mut sum = 0.0;
    for j in (1..=n).rev() {
        let j = j as f64;
        sum += dev.eval((gamma + j) / d).powi(power) + dev.eval((gamma - j) / d).powi(power);
    }
    // beyond the window the odd law dominates; its odd power pairs like the first power
    let beta = dev.beta * power as f64;
    Ok(sum + dev.odd.powi(power) * d.powf(beta) * paired_difference_from(beta, gamma, n + 1))
}

/// `Σ_{i≠i0,i0±1} |I[τ](x_i)|` at `x = i0 + γ`, with `τ` of radius `1/(2δ|p0|)`.
///
/// Far terms use `I[τ](z) ≈ g·3R·|z|^{-1-2s}` (τ vanishes near `z`).
pub fn cutoff_operator_sum(delta: f64, p0: f64, gamma: f64, s: f64, g: f64, tol: f64) -> Result<f64> {
    if !(gamma > -0.5 && gamma <= 0.5) {
        return Err(invalid("gamma", "must lie in (-1/2, 1/2]"));
    }
    let d = delta * p0.abs();
    let tau = Cutoff::new(1.0 / (2.0 * d))?;
    let kinks = tau.kinks();
    let direct = 40usize;
    let mut sum = 0.0;
    for k in 2..=direct {
        for z in [(gamma + k as f64) / d, (gamma - k as f64) / d] {
            sum += apply_pointwise(|y| tau.eval(y), z, s, g, &kinks, tol).abs();
        }
    }
    let p = 1.0 + 2.0 * s;
    let far = g * tau.mass() * d.powf(p) * (power_tail(p, gamma, direct + 1) + power_tail(p, -gamma, direct + 1));
    Ok(sum + far)
}

/// Sweep settings for [`orowan_check`]; the grid of each run is `q · points_per_unit` nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrowanOptions {
    pub hbar: HbarOptions,
    pub points_per_unit: usize,
    pub rel_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrowanRow {
    pub delta: f64,
    pub lambda: f64,
    pub ratio: f64,
    pub target: f64,
    pub abs_err: f64,
    pub uncertainty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrowanReport {
    pub s: f64,
    pub p0: f64,
    pub l0: f64,
    pub target: f64,
    pub rows: Vec<OrowanRow>,
    /// Deltas whose drift could not be computed, with the reason.
    pub failures: Vec<(f64, String)>,
    pub final_rel_err: f64,
    pub nonincreasing: bool,
    pub passed: bool,
}

impl OrowanReport {
    pub fn partial(&self) -> bool {
        !self.failures.is_empty()
    }
}

/// Ratios `H̄(δp0, δ^{2s}L0)/δ^{1+2s}` from the cell problem against `c0|p0|L0`.
///
/// `δp0` is replaced by its best rational approximation with denominator at most [`Q_MAX`].
pub fn orowan_check(delta_list: &[f64], p0: f64, l0: f64, c0: f64, opts: &OrowanOptions) -> Result<OrowanReport> {
    if delta_list.is_empty() || delta_list.windows(2).any(|w| w[1] >= w[0]) || delta_list.iter().any(|d| !(*d > 0.0)) {
        return Err(invalid("delta_list", "must be positive and strictly decreasing"));
    }
    if opts.points_per_unit < 8 {
        return Err(invalid("points_per_unit", "need at least 8"));
    }
    let s = opts.hbar.s;
    let target = c0 * p0.abs() * l0;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &delta in delta_list {
        let p = Slope::approximate(delta * p0, Q_MAX)?;
        let mut hopts = opts.hbar.clone();
        hopts.n = (p.den as usize * opts.points_per_unit).max(16);
        let l = delta.powf(2.0 * s) * l0;
        let scale = delta.powf(1.0 + 2.0 * s);
        match hbar_run(p, l, &hopts) {
            Ok(run) if run.converged => {
                let ratio = run.lambda / scale;
                rows.push(OrowanRow {
                    delta,
                    lambda: run.lambda,
                    ratio,
                    target,
                    abs_err: (ratio - target).abs(),
                    uncertainty: run.uncertainty / scale,
                });
            }
            Ok(run) => failures.push((delta, format!("unconverged drift (uncertainty {:.3e})", run.uncertainty))),
            Err(e) => failures.push((delta, e.to_string())),
        }
    }
    let nonincreasing = rows
        .windows(2)
        .all(|w| w[1].abs_err <= w[0].abs_err + 2.0 * (w[0].uncertainty + w[1].uncertainty) + 1e-12);
    let last = rows.last();
    let final_rel_err = match last {
        Some(r) if target != 0.0 => r.abs_err / target.abs(),
        Some(r) => r.abs_err,
        None => f64::INFINITY,
    };
    let final_ok = match last {
        Some(r) if target != 0.0 => r.abs_err <= opts.rel_tol * target.abs(),
        Some(r) => r.abs_err <= 2.0 * r.uncertainty + 1e-9,
        None => false,
    };
    Ok(OrowanReport {
        s,
        p0,
        l0,
        target,
        passed: failures.is_empty() && nonincreasing && final_ok,
        rows,
        failures,
        final_rel_err,
        nonincreasing,
    })
}
