//! Cell problem `∂τ w = I[w] + L - W'(w + p·y) + σ(τ, y)`, `w(0) = 0`, and the effective
//! Hamiltonian `H̄(p, L)` read off its long-time drift.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fracop::{PeriodicOperator, PlaneOperator};
use crate::grid::{Geometry, GridField};
use crate::potential::sup_norms;
use crate::{Field, Kernel, Potential, Sigma};

/// Largest denominator used when a real slope is replaced by a rational one.
pub const Q_MAX: u64 = 64;

/// Rational slope `p = num/den` in lowest terms, `den ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Slope {
    pub num: i64,
    pub den: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Slope {
    pub fn new(num: i64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(invalid("p_den", "denominator must be positive"));
        }
        let g = gcd(num.unsigned_abs(), den).max(1);
        Ok(Self {
            num: num / g as i64,
            den: den / g,
        })
    }

    pub fn integer(p: i64) -> Self {
        Self { num: p, den: 1 }
    }

    /// Best continued-fraction convergent with denominator at most `q_max`.
    pub fn approximate(p: f64, q_max: u64) -> Result<Self> {
        if !p.is_finite() {
            return Err(invalid("p", "slope must be finite"));
        }
        let (mut h0, mut h1) = (0i64, 1i64);
        let (mut k0, mut k1) = (1i64, 0i64);
        let mut x = p;
        for _ in 0..64 {
            let a = x.floor();
            let (h2, k2) = (a as i64 * h1 + h0, a as i64 * k1 + k0);
            if k2 as u64 > q_max {
                break;
            }
            (h0, h1, k0, k1) = (h1, h2, k1, k2);
            let frac = x - a;
            if frac.abs() < 1e-12 || (h1 as f64 / k1 as f64 - p).abs() < 1e-14 {
                break;
            }
            x = 1.0 / frac;
        }
        Self::new(h1, k1 as u64)
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn neg(&self) -> Self {
        Self {
            num: -self.num,
            den: self.den,
        }
    }
}

/// One run of the cell problem on a `q`-periodic grid, `q` the denominator of `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellProblemSpec {
    pub s: f64,
    pub g: f64,
    pub potential: Potential,
    #[serde(default)]
    pub forcing: Sigma,
    pub slope: Slope,
    pub l: f64,
    pub horizon: f64,
    /// Nodes per period `q`.
    pub n: usize,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Fixed step, bypassing the CFL rule (the comparison check still runs).
    #[serde(default)]
    pub dt: Option<f64>,
    /// Times at which the whole field is kept.
    #[serde(default)]
    pub checkpoints: Vec<f64>,
}

fn default_cfl() -> f64 {
    0.9
}

impl CellProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(invalid("s", "must lie in (0, 1)"));
        }
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(invalid("g", "kernel constant must be positive"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invalid("horizon", "must be positive"));
        }
        if self.n < 16 {
            return Err(invalid("n", "need at least 16 nodes"));
        }
        if !(self.cfl > 0.0) {
            return Err(invalid("cfl", "must be positive"));
        }
        if !self.l.is_finite() {
            return Err(invalid("l", "must be finite"));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(invalid("dt", "must be positive"));
            }
        }
        if self.slope.den == 0 {
            return Err(invalid("p_den", "denominator must be positive"));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        self.slope.den as f64
    }
}

/// Spatial mean, max and min of `w` after every step, plus stored checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellTrajectory {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub max: Vec<f64>,
    pub min: Vec<f64>,
    pub checkpoints: Vec<(f64, Field)>,
    pub dt: f64,
    pub n: usize,
}

impl CellTrajectory {
    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    fn record(&mut self, t: f64, w: &[f64]) {
        let n = w.len() as f64;
        self.times.push(t);
        self.mean.push(w.iter().sum::<f64>() / n);
        self.max.push(w.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        self.min.push(w.iter().copied().fold(f64::INFINITY, f64::min));
    }
}

/// One explicit Euler step `w + dt·(I[w] + L - W'(w + p·y) + σ)`.
///
/// Monotone when `dt·(|diag I| + ‖W''‖∞) ≤ 1`.
pub fn cell_step(
    op: &PeriodicOperator<f64>,
    w: &[f64],
    y: &[f64],
    spec: &CellProblemSpec,
    t: f64,
    dt: f64,
) -> Vec<f64> {
    let lap = op.apply(w);
    let p = spec.slope.value();
    let forced = !spec.forcing.is_zero();
    w.iter()
        .zip(&lap)
        .zip(y)
        .map(|((&wi, &li), &yi)| {
            let sigma = if forced { spec.forcing.eval(t, yi) } else { 0.0 };
            wi + dt * (li + spec.l - spec.potential.d1(wi + p * yi) + sigma)
        })
        .collect()
}

fn step_count(horizon: f64, dt: f64) -> usize {
    (horizon / dt - 1e-9).ceil().max(1.0) as usize
}

/// Largest step for which the update is monotone, scaled by `cfl`.
pub fn cfl_step(diagonal: f64, potential: &Potential, cfl: f64) -> f64 {
    cfl / (diagonal + potential.sup_norm(2))
}

/// Runs the cell problem from `w(0) = 0` (or `initial`) to the horizon.
pub fn solve_cell_evolution(spec: &CellProblemSpec) -> Result<CellTrajectory> {
    solve_cell_from(spec, None)
}

pub fn solve_cell_from(spec: &CellProblemSpec, initial: Option<&[f64]>) -> Result<CellTrajectory> {
    spec.validate()?;
    let q = spec.period();
    let n = spec.n;
    let h = q / n as f64;
    let op = PeriodicOperator::new(spec.s, spec.g, q, n, 2.0 * h)?;
    let nominal = spec.dt.unwrap_or_else(|| cfl_step(op.diagonal(), &spec.potential, spec.cfl));
    let steps = step_count(spec.horizon, nominal);
    let dt = spec.horizon / steps as f64;
    let y: Vec<f64> = (0..n).map(|j| j as f64 * h).collect();
    let mut w = match initial {
        Some(w0) if w0.len() != n => return Err(invalid("initial", "length must match the grid")),
        Some(w0) => w0.to_vec(),
        None => vec![0.0; n],
    };
    if let Some(j) = w.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: j });
    }
    let (dw, ds) = sup_norms(&spec.potential, &spec.forcing);
    let k = dw + ds;
    let lo0 = w.iter().copied().fold(f64::INFINITY, f64::min);
    let hi0 = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut checkpoints: Vec<f64> = spec.checkpoints.iter().copied().filter(|c| *c <= spec.horizon).collect();
    checkpoints.sort_by(|a, b| a.total_cmp(b));
    let mut pending = checkpoints.into_iter().peekable();
    let mut traj = CellTrajectory {
        times: Vec::with_capacity(steps + 1),
        mean: Vec::with_capacity(steps + 1),
        max: Vec::with_capacity(steps + 1),
        min: Vec::with_capacity(steps + 1),
        checkpoints: Vec::new(),
        dt,
        n,
    };
    let geometry = Geometry::Periodic { period: q, n };
    traj.record(0.0, &w);
    for step in 1..=steps {
        let t0 = (step - 1) as f64 * dt;
        while pending.peek().is_some_and(|c| *c <= t0 + 0.5 * dt) {
            let c = pending.next().unwrap();
            traj.checkpoints.push((c, GridField::new(geometry.clone(), w.clone())?));
        }
        w = cell_step(&op, &w, &y, spec, t0, dt);
        let t = step as f64 * dt;
        let slack = 1e-9 * (1.0 + t * (spec.l.abs() + k));
        let (lo, hi) = (lo0 + t * (spec.l - k) - slack, hi0 + t * (spec.l + k) + slack);
        for &v in &w {
            if !(v >= lo && v <= hi) {
                return Err(Error::CflViolation {
                    step,
                    value: v,
                    bound: if v > hi { hi } else { lo },
                });
            }
        }
        traj.record(t, &w);
    }
    for c in pending {
        traj.checkpoints.push((c, GridField::new(geometry.clone(), w.clone())?));
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRunResult {
    pub lambda: f64,
    pub uncertainty: f64,
    /// `sup_τ sup_y |w - λτ|`.
    pub c_obs: f64,
    pub fit_window: (f64, f64),
    pub horizon: f64,
    pub converged: bool,
}

fn ls_slope(t: &[f64], v: &[f64]) -> Option<f64> {
    let m = t.len() as f64;
    if t.len() < 2 {
        return None;
    }
    let tm = t.iter().sum::<f64>() / m;
    let vm = v.iter().sum::<f64>() / m;
    let (mut num, mut den) = (0.0, 0.0);
    for (ti, vi) in t.iter().zip(v) {
        num += (ti - tm) * (vi - vm);
        den += (ti - tm) * (ti - tm);
    }
    (den > 0.0).then(|| num / den)
}

fn window_slope(traj: &CellTrajectory, a: f64, b: f64) -> Result<f64> {
    let lo = traj.times.partition_point(|t| *t < a - 1e-12);
    let hi = traj.times.partition_point(|t| *t <= b + 1e-12);
    ls_slope(&traj.times[lo..hi], &traj.mean[lo..hi])
        .ok_or_else(|| invalid("fit_window", format!("window [{a}, {b}] holds fewer than two samples")))
}

/// Least-squares slope of the spatial mean on the fit window (default `[T/2, T]`); the
/// uncertainty is the spread between the slopes on its two halves.
pub fn estimate_lambda(traj: &CellTrajectory, fit_window: Option<(f64, f64)>, tol: f64) -> Result<CellRunResult> {
    let horizon = traj.horizon();
    let (a, b) = fit_window.unwrap_or((0.5 * horizon, horizon));
    if !(a >= 0.0 && a < b && b <= horizon + 1e-9) {
        return Err(invalid("fit_window", "must be an interval inside the trajectory"));
    }
    let lambda = window_slope(traj, a, b)?;
    let mid = 0.5 * (a + b);
    let uncertainty = (window_slope(traj, a, mid)? - window_slope(traj, mid, b)?).abs();
    let c_obs = traj
        .times
        .iter()
        .zip(traj.max.iter().zip(&traj.min))
        .map(|(t, (hi, lo))| (hi - lambda * t).abs().max((lo - lambda * t).abs()))
        .fold(0.0, f64::max);
    Ok(CellRunResult {
        lambda,
        uncertainty,
        c_obs,
        fit_window: (a, b),
        horizon,
        converged: uncertainty <= tol,
    })
}

/// Everything but the arguments of `H̄(p, L)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbarOptions {
    pub s: f64,
    pub g: f64,
    pub potential: Potential,
    #[serde(default)]
    pub forcing: Sigma,
    pub horizon: f64,
    pub n: usize,
    pub tol: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub workers: Option<usize>,
}

impl HbarOptions {
    pub fn spec(&self, p: Slope, l: f64) -> CellProblemSpec {
        CellProblemSpec {
            s: self.s,
            g: self.g,
            potential: self.potential.clone(),
            forcing: self.forcing.clone(),
            slope: p,
            l,
            horizon: self.horizon,
            n: self.n,
            cfl: self.cfl,
            dt: None,
            checkpoints: Vec::new(),
        }
    }
}

/// Run result whether or not it met the tolerance.
pub fn hbar_run(p: Slope, l: f64, opts: &HbarOptions) -> Result<CellRunResult> {
    let traj = solve_cell_evolution(&opts.spec(p, l))?;
    estimate_lambda(&traj, None, opts.tol)
}

/// `H̄(p, L)`; an unconverged drift is an error.
pub fn hbar(p: Slope, l: f64, opts: &HbarOptions) -> Result<f64> {
    let run = hbar_run(p, l, opts)?;
    if !run.converged {
        return Err(Error::Unconverged {
            what: "cell drift",
            residual: run.uncertainty,
            tol: opts.tol,
            history: vec![run.uncertainty],
        });
    }
    Ok(run.lambda)
}

/// `H̄1(p) = H̄(p, 0)`.
pub fn hbar1(p: Slope, opts: &HbarOptions) -> Result<f64> {
    hbar(p, 0.0, opts)
}

/// `H̄2(L) = H̄(0, L)`.
pub fn hbar2(l: f64, opts: &HbarOptions) -> Result<f64> {
    hbar(Slope::integer(0), l, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbarEntry {
    pub p: Slope,
    pub l: f64,
    pub result: Option<CellRunResult>,
    pub error: Option<String>,
}

impl HbarEntry {
    pub fn lambda(&self) -> Option<f64> {
        self.result.as_ref().map(|r| r.lambda)
    }

    fn usable(&self) -> Option<&CellRunResult> {
        self.result.as_ref()
    }
}

/// A property of `H̄` checked pairwise on the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub property: String,
    pub checked_pairs: usize,
    pub failures: Vec<String>,
}

impl PropertyCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbarTable {
    pub p_list: Vec<Slope>,
    pub l_list: Vec<f64>,
    /// Row-major in `p`, then `L`.
    pub entries: Vec<HbarEntry>,
    pub horizon: f64,
    pub n: usize,
    pub partial: bool,
    pub checks: Vec<PropertyCheck>,
}

/// CSV row of the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbarRow {
    pub p_num: i64,
    pub p_den: u64,
    #[serde(rename = "L")]
    pub l: f64,
    pub lambda: f64,
    pub uncertainty: f64,
    #[serde(rename = "C_obs")]
    pub c_obs: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub n: usize,
}

impl HbarTable {
    pub fn get(&self, p: Slope, l: f64) -> Option<&HbarEntry> {
        self.entries.iter().find(|e| e.p == p && e.l == l)
    }

    pub fn rows(&self) -> Vec<HbarRow> {
        self.entries
            .iter()
            .map(|e| {
                let r = e.result.as_ref();
                HbarRow {
                    p_num: e.p.num,
                    p_den: e.p.den,
                    l: e.l,
                    lambda: r.map_or(f64::NAN, |r| r.lambda),
                    uncertainty: r.map_or(f64::NAN, |r| r.uncertainty),
                    c_obs: r.map_or(f64::NAN, |r| r.c_obs),
                    t: self.horizon,
                    n: self.n,
                }
            })
            .collect()
    }

    /// Rebuilds a table from CSV rows; property checks are recomputed.
    pub fn from_rows(rows: &[HbarRow], potential: &Potential, forcing: &Sigma) -> Result<Self> {
        let first = rows.first().ok_or_else(|| invalid("rows", "table is empty"))?;
        let mut p_list: Vec<Slope> = Vec::new();
        let mut l_list: Vec<f64> = Vec::new();
        let mut entries = Vec::with_capacity(rows.len());
        for r in rows {
            let p = Slope::new(r.p_num, r.p_den)?;
            if !p_list.contains(&p) {
                p_list.push(p);
            }
            if !l_list.contains(&r.l) {
                l_list.push(r.l);
            }
            let ok = r.lambda.is_finite();
            entries.push(HbarEntry {
                p,
                l: r.l,
                result: ok.then_some(CellRunResult {
                    lambda: r.lambda,
                    uncertainty: r.uncertainty,
                    c_obs: r.c_obs,
                    fit_window: (0.5 * r.t, r.t),
                    horizon: r.t,
                    converged: true,
                }),
                error: (!ok).then(|| "missing value".to_string()),
            });
        }
        let partial = entries.iter().any(|e| e.result.is_none());
        let mut table = Self {
            p_list,
            l_list,
            entries,
            horizon: first.t,
            n: first.n,
            partial,
            checks: Vec::new(),
        };
        table.checks = table_checks(&table, potential, forcing);
        Ok(table)
    }
}

const CHECK_FLOOR: f64 = 1e-9;

fn table_checks(table: &HbarTable, potential: &Potential, forcing: &Sigma) -> Vec<PropertyCheck> {
    let mut checks = Vec::new();
    let mut l_sorted = table.l_list.clone();
    l_sorted.sort_by(|a, b| a.total_cmp(b));

    let mut mono = PropertyCheck {
        property: "nondecreasing in L".into(),
        checked_pairs: 0,
        failures: Vec::new(),
    };
    for &p in &table.p_list {
        for pair in l_sorted.windows(2) {
            let (Some(a), Some(b)) = (
                table.get(p, pair[0]).and_then(HbarEntry::usable),
                table.get(p, pair[1]).and_then(HbarEntry::usable),
            ) else {
                continue;
            };
            mono.checked_pairs += 1;
            let slack = 2.0 * (a.uncertainty + b.uncertainty) + CHECK_FLOOR;
            if b.lambda < a.lambda - slack {
                mono.failures.push(format!(
                    "p = {}/{}: H̄({}) = {} > H̄({}) = {}",
                    p.num, p.den, pair[0], a.lambda, pair[1], b.lambda
                ));
            }
        }
    }
    checks.push(mono);

    if forcing.is_even_in_x() {
        let mut even = PropertyCheck {
            property: "even in p".into(),
            checked_pairs: 0,
            failures: Vec::new(),
        };
        for &p in table.p_list.iter().filter(|p| p.num > 0) {
            for &l in &table.l_list {
                let (Some(a), Some(b)) = (
                    table.get(p, l).and_then(HbarEntry::usable),
                    table.get(p.neg(), l).and_then(HbarEntry::usable),
                ) else {
                    continue;
                };
                even.checked_pairs += 1;
                let slack = 2.0 * (a.uncertainty + b.uncertainty) + CHECK_FLOOR;
                if (a.lambda - b.lambda).abs() > slack {
                    even.failures.push(format!(
                        "L = {l}: H̄({}/{}) = {} vs H̄(-p) = {}",
                        p.num, p.den, a.lambda, b.lambda
                    ));
                }
            }
        }
        checks.push(even);
    }

    if potential.is_even() && forcing.is_odd_in_x() {
        let mut odd = PropertyCheck {
            property: "odd in L".into(),
            checked_pairs: 0,
            failures: Vec::new(),
        };
        for &p in &table.p_list {
            for &l in table.l_list.iter().filter(|l| **l >= 0.0) {
                let (Some(a), Some(b)) = (
                    table.get(p, l).and_then(HbarEntry::usable),
                    table.get(p, -l).and_then(HbarEntry::usable),
                ) else {
                    continue;
                };
                odd.checked_pairs += 1;
                let slack = 2.0 * (a.uncertainty + b.uncertainty) + CHECK_FLOOR;
                if (a.lambda + b.lambda).abs() > slack {
                    odd.failures.push(format!(
                        "p = {}/{}: H̄({l}) = {} vs H̄(-L) = {}",
                        p.num, p.den, a.lambda, b.lambda
                    ));
                }
            }
        }
        checks.push(odd);
    }
    checks
}

/// Every `(p, L)` pair, solved on a pool of `opts.workers` threads and merged in input order.
pub fn hbar_table(p_list: &[Slope], l_list: &[f64], opts: &HbarOptions) -> Result<HbarTable> {
    if p_list.is_empty() || l_list.is_empty() {
        return Err(invalid("table", "p and L lists must be nonempty"));
    }
    let keys: Vec<(Slope, f64)> = p_list.iter().flat_map(|&p| l_list.iter().map(move |&l| (p, l))).collect();
    let solve = |&(p, l): &(Slope, f64)| {
        let (result, error) = match hbar_run(p, l, opts) {
            Ok(r) if r.converged => (Some(r), None),
            Ok(r) => {
                let msg = format!("unconverged: uncertainty {:.3e} above {:.3e}", r.uncertainty, opts.tol);
                (Some(r), Some(msg))
            }
            Err(e) => (None, Some(e.to_string())),
        };
        HbarEntry { p, l, result, error }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.unwrap_or(0))
        .build()
        .map_err(|e| invalid("workers", e.to_string()))?;
    let entries: Vec<HbarEntry> = pool.install(|| keys.par_iter().map(solve).collect());
    let partial = entries.iter().any(|e| e.error.is_some());
    let mut table = HbarTable {
        p_list: p_list.to_vec(),
        l_list: l_list.to_vec(),
        entries,
        horizon: opts.horizon,
        n: opts.n,
        partial,
        checks: Vec::new(),
    };
    table.checks = table_checks(&table, &opts.potential, &opts.forcing);
    Ok(table)
}

/// Two-dimensional cell problem for `p = (p1, p2)` on the square torus of side `lcm(q1, q2)`,
/// without forcing.
#[derive(Debug, Clone, PartialEq)]
pub struct CellPlaneSpec {
    pub s: f64,
    pub kernel: Kernel,
    pub potential: Potential,
    pub slope: [Slope; 2],
    pub l: f64,
    pub horizon: f64,
    pub n: usize,
    pub cfl: f64,
}

pub fn solve_cell_plane(spec: &CellPlaneSpec) -> Result<CellTrajectory> {
    let [a, b] = spec.slope;
    let q = (a.den / gcd(a.den, b.den) * b.den) as f64;
    let n = spec.n;
    let h = q / n as f64;
    let op = PlaneOperator::new(spec.s, &spec.kernel, q, n, 4)?;
    let steps = step_count(spec.horizon, cfl_step(op.diagonal(), &spec.potential, spec.cfl));
    let dt = spec.horizon / steps as f64;
    let (p1, p2) = (a.value(), b.value());
    let py: Vec<f64> = (0..n * n).map(|k| p1 * (k % n) as f64 * h + p2 * (k / n) as f64 * h).collect();
    let mut w = vec![0.0; n * n];
    let mut traj = CellTrajectory {
        times: Vec::new(),
        mean: Vec::new(),
        max: Vec::new(),
        min: Vec::new(),
        checkpoints: Vec::new(),
        dt,
        n,
    };
    traj.record(0.0, &w);
    for step in 1..=steps {
        let lap = op.apply(&w);
        for k in 0..w.len() {
            w[k] += dt * (lap[k] + spec.l - spec.potential.d1(w[k] + py[k]));
        }
        if let Some(j) = w.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: j });
        }
        traj.record(step as f64 * dt, &w);
    }
    traj.checkpoints
        .push((spec.horizon, GridField::new(Geometry::Periodic2 { period: q, n }, w)?));
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(p: Slope, l: f64, w: Potential) -> CellProblemSpec {
        CellProblemSpec {
            s: 0.5,
            g: 1.0 / std::f64::consts::PI,
            potential: w,
            forcing: Sigma::zero(),
            slope: p,
            l,
            horizon: 5.0,
            n: 64,
            cfl: 0.9,
            dt: None,
            checkpoints: vec![1.0, 2.5],
        }
    }

    #[test]
    fn slope_reduction_and_convergents() {
        assert_eq!(Slope::new(6, 4).unwrap(), Slope { num: 3, den: 2 });
        assert_eq!(Slope::new(-2, 10).unwrap(), Slope { num: -1, den: 5 });
        assert_eq!(Slope::approximate(0.05, Q_MAX).unwrap(), Slope { num: 1, den: 20 });
        let pi = Slope::approximate(std::f64::consts::PI, Q_MAX).unwrap();
        assert_eq!((pi.num, pi.den), (22, 7));
        assert_eq!(Slope::approximate(-0.5, Q_MAX).unwrap(), Slope { num: -1, den: 2 });
        assert!(Slope::new(1, 0).is_err());
    }

    #[test]
    fn flat_potential_drifts_at_l() {
        let spec = base(Slope::new(1, 3).unwrap(), 0.7, Potential::flat());
        let traj = solve_cell_evolution(&spec).unwrap();
        for (t, (hi, lo)) in traj.times.iter().zip(traj.max.iter().zip(&traj.min)) {
            assert!((hi - 0.7 * t).abs() < 1e-8 * (1.0 + t));
            assert!((lo - 0.7 * t).abs() < 1e-8 * (1.0 + t));
        }
        assert_eq!(traj.checkpoints.len(), 2);
        let run = estimate_lambda(&traj, None, 1e-6).unwrap();
        assert!((run.lambda - 0.7).abs() < 1e-10);
        assert!(run.c_obs < 1e-9);
        assert!(run.converged);
    }

    #[test]
    fn rest_state_stays() {
        let traj = solve_cell_evolution(&base(Slope::integer(0), 0.0, Potential::standard())).unwrap();
        assert!(traj.max.iter().chain(&traj.min).all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn oversized_step_is_caught() {
        let mut spec = base(Slope::integer(1), 0.3, Potential::standard());
        spec.dt = Some(0.5);
        spec.horizon = 50.0;
        assert!(matches!(solve_cell_evolution(&spec), Err(Error::CflViolation { .. })));
    }

    #[test]
    fn plane_smoke() {
        let kernel = Kernel::fractional_laplacian(2, crate::Order::new(0.5).unwrap());
        let spec = CellPlaneSpec {
            s: 0.5,
            kernel,
            potential: Potential::flat(),
            slope: [Slope::new(1, 2).unwrap(), Slope::integer(0)],
            l: 0.4,
            horizon: 1.0,
            n: 16,
            cfl: 0.9,
        };
        let traj = solve_cell_plane(&spec).unwrap();
        assert!((traj.mean.last().unwrap() - 0.4).abs() < 1e-10);
    }
}
