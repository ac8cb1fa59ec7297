//! The ε-problems under both scalings, the effective equations driven by a tabulated `H̄`,
//! and the comparison between the two as ε decreases.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cell::HbarTable;
use crate::error::{invalid, Error, Result};
use crate::fracop::PeriodicOperator;
use crate::grid::{Geometry, GridField};
use crate::potential::sup_norms;
use crate::{Field, Potential, Sigma};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `∂t u = ε^{2s-1} I[u] - W'(u/ε) + σ(t/ε, x/ε)`, `s ≥ 1/2`.
    Supercritical,
    /// `∂t u = I[u] - W'(u/ε^{2s}) + σ(t/ε^{2s}, x/ε)`, `s ≤ 1/2`.
    Subcritical,
    /// `s = 1/2`, where the two scalings coincide.
    Critical,
}

/// `∂t u = ε^{a_op} I[u] - W'(u/ε^{a_w}) + σ(t/ε^{a_t}, x/ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub a_op: f64,
    pub a_w: f64,
    pub a_t: f64,
}

impl Branch {
    pub fn check(self, s: f64) -> Result<()> {
        let ok = match self {
            Branch::Supercritical => s >= 0.5,
            Branch::Subcritical => s <= 0.5,
            Branch::Critical => s == 0.5,
        };
        if ok && s > 0.0 && s < 1.0 {
            Ok(())
        } else {
            Err(invalid("branch", format!("{self:?} branch is inconsistent with s = {s}")))
        }
    }

    pub fn scaling(self, s: f64) -> Scaling {
        match self {
            Branch::Supercritical | Branch::Critical => Scaling {
                a_op: 2.0 * s - 1.0,
                a_w: 1.0,
                a_t: 1.0,
            },
            Branch::Subcritical => Scaling {
                a_op: 0.0,
                a_w: 2.0 * s,
                a_t: 2.0 * s,
            },
        }
    }
}

/// `u0(x) = slope·x + Σ a_k cos(2πkx/P) + b_k sin(2πkx/P)`, `k ≥ 1`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InitialDatum {
    #[serde(default)]
    pub slope: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl InitialDatum {
    /// The periodic part.
    pub fn remainder(&self, x: f64, period: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * x / period;
        let c: f64 = self.cos.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * w).cos()).sum();
        let s: f64 = self.sin.iter().enumerate().map(|(k, b)| b * ((k + 1) as f64 * w).sin()).sum();
        c + s
    }

    pub fn eval(&self, x: f64, period: f64) -> f64 {
        self.slope * x + self.remainder(x, period)
    }
}

fn default_period() -> f64 {
    1.0
}

fn default_checkpoints() -> usize {
    10
}

fn default_cfl() -> f64 {
    0.9
}

fn default_max_steps() -> usize {
    2_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsProblemSpec {
    pub branch: Branch,
    pub eps: f64,
    pub s: f64,
    pub g: f64,
    pub potential: Potential,
    #[serde(default)]
    pub forcing: Sigma,
    pub initial: InitialDatum,
    pub horizon: f64,
    #[serde(default = "default_period")]
    pub period: f64,
    pub n: usize,
    /// Number of evenly spaced checkpoints on `(0, T]`.
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

/// The periodic part `u - slope·x` at each checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub slope: f64,
    pub times: Vec<f64>,
    pub remainders: Vec<Field>,
    pub dt: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> Option<&Field> {
        self.remainders.last()
    }
}

fn common_checks(s: f64, branch: Branch, horizon: f64, period: f64, n: usize, checkpoints: usize, cfl: f64) -> Result<()> {
    branch.check(s)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid("horizon", "must be positive"));
    }
    if !(period > 0.0 && period.is_finite()) {
        return Err(invalid("period", "must be positive"));
    }
    if n < 16 {
        return Err(invalid("n", "need at least 16 nodes"));
    }
    if checkpoints == 0 {
        return Err(invalid("checkpoints", "need at least one"));
    }
    if !(cfl > 0.0) {
        return Err(invalid("cfl", "must be positive"));
    }
    Ok(())
}

/// Step count: a multiple of the checkpoint count with step at most `dt_max`.
fn schedule(horizon: f64, dt_max: f64, checkpoints: usize, max_steps: usize) -> Result<(usize, f64)> {
    let per = (horizon / (checkpoints as f64 * dt_max) - 1e-9).ceil().max(1.0);
    let needed = per * checkpoints as f64;
    if !needed.is_finite() || needed > max_steps as f64 {
        return Err(Error::StepBudget {
            budget: max_steps,
            needed: if needed.is_finite() { needed as usize } else { usize::MAX },
        });
    }
    let steps = needed as usize;
    Ok((steps, horizon / steps as f64))
}

impl EpsProblemSpec {
    pub fn validate(&self) -> Result<()> {
        common_checks(self.s, self.branch, self.horizon, self.period, self.n, self.checkpoints, self.cfl)?;
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(invalid("eps", "must lie in (0, 1]"));
        }
        if !(self.g > 0.0) {
            return Err(invalid("g", "kernel constant must be positive"));
        }
        let cells = self.period / self.eps;
        if self.forcing.modes.iter().any(|m| m.kx != 0) && (cells - cells.round()).abs() > 1e-9 {
            return Err(invalid("eps", "period/ε must be an integer when σ depends on x"));
        }
        Ok(())
    }
}

/// Explicit monotone stepping of the ε-problem on `u = slope·x + v`, `v` periodic.
pub fn solve_eps_problem(spec: &EpsProblemSpec) -> Result<Trajectory> {
    spec.validate()?;
    let Scaling { a_op, a_w, a_t } = spec.branch.scaling(spec.s);
    let (n, period, eps) = (spec.n, spec.period, spec.eps);
    let h = period / n as f64;
    let op = PeriodicOperator::new(spec.s, spec.g, period, n, 2.0 * h)?;
    let op_scale = eps.powf(a_op);
    let w_scale = eps.powf(a_w);
    let t_scale = eps.powf(a_t);
    let dt_max = spec.cfl / (op_scale * op.diagonal() + spec.potential.sup_norm(2) / w_scale);
    let (steps, dt) = schedule(spec.horizon, dt_max, spec.checkpoints, spec.max_steps)?;
    let x: Vec<f64> = (0..n).map(|j| j as f64 * h).collect();
    let slope = spec.initial.slope;
    let mut v: Vec<f64> = x.iter().map(|&x| spec.initial.remainder(x, period)).collect();
    let forced = !spec.forcing.is_zero();
    let geometry = Geometry::Periodic { period, n };
    let per = steps / spec.checkpoints;
    let mut traj = Trajectory {
        slope,
        times: Vec::new(),
        remainders: Vec::new(),
        dt,
        steps,
    };
    for step in 1..=steps {
        let t = (step - 1) as f64 * dt;
        let lap = op.apply(&v);
        for j in 0..n {
            let u = slope * x[j] + v[j];
            let sigma = if forced { spec.forcing.eval(t / t_scale, x[j] / eps) } else { 0.0 };
            v[j] += dt * (op_scale * lap[j] - spec.potential.d1(u / w_scale) + sigma);
        }
        if step % per == 0 {
            if let Some(j) = v.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { index: j });
            }
            traj.times.push(spec.horizon * (step / per) as f64 / spec.checkpoints as f64);
            traj.remainders.push(GridField::new(geometry.clone(), v.clone())?);
        }
    }
    Ok(traj)
}

/// `‖W'‖∞ + ‖σ‖∞ + ε^{a_op}‖I[u0]‖∞`: rate bound for `|u^ε(t) - u0|`.
pub fn envelope_rate(spec: &EpsProblemSpec) -> Result<f64> {
    let Scaling { a_op, .. } = spec.branch.scaling(spec.s);
    let h = spec.period / spec.n as f64;
    let op = PeriodicOperator::new(spec.s, spec.g, spec.period, spec.n, 2.0 * h)?;
    let v0: Vec<f64> = (0..spec.n).map(|j| spec.initial.remainder(j as f64 * h, spec.period)).collect();
    let lap = op.apply(&v0).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let (dw, ds) = sup_norms(&spec.potential, &spec.forcing);
    Ok(dw + ds + spec.eps.powf(a_op) * lap)
}

/// One-variable restriction of `H̄`: `H̄1(p) = H̄(p, 0)` or `H̄2(L) = H̄(0, L)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hamiltonian1 {
    Constant { value: f64 },
    Linear { slope: f64, intercept: f64 },
    /// Piecewise linear through sorted nodes; evaluation outside them is an error.
    Table { x: Vec<f64>, y: Vec<f64> },
}

impl Hamiltonian1 {
    pub fn table(mut points: Vec<(f64, f64)>) -> Result<Self> {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        points.dedup_by(|a, b| a.0 == b.0);
        if points.len() < 2 {
            return Err(invalid("table", "need at least two distinct nodes"));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(invalid("table", "nodes must be finite"));
        }
        let (x, y) = points.into_iter().unzip();
        Ok(Self::Table { x, y })
    }

    /// `H̄1` from the `L = 0` entries of a table.
    pub fn h1_from_table(table: &HbarTable) -> Result<Self> {
        let pts = table
            .entries
            .iter()
            .filter(|e| e.l == 0.0)
            .filter_map(|e| e.lambda().map(|l| (e.p.value(), l)))
            .collect();
        Self::table(pts)
    }

    /// `H̄2` from the `p = 0` entries, clamped to be nondecreasing.
    pub fn h2_from_table(table: &HbarTable) -> Result<Self> {
        let pts = table
            .entries
            .iter()
            .filter(|e| e.p.num == 0)
            .filter_map(|e| e.lambda().map(|l| (e.l, l)))
            .collect();
        Ok(Self::table(pts)?.monotone())
    }

    /// Running maximum of the node values.
    pub fn monotone(self) -> Self {
        match self {
            Self::Table { x, mut y } => {
                for k in 1..y.len() {
                    y[k] = y[k].max(y[k - 1]);
                }
                Self::Table { x, y }
            }
            Self::Linear { slope, intercept } => Self::Linear {
                slope: slope.max(0.0),
                intercept,
            },
            other => other,
        }
    }

    pub fn eval(&self, v: f64) -> Result<f64> {
        match self {
            Self::Constant { value } => Ok(*value),
            Self::Linear { slope, intercept } => Ok(intercept + slope * v),
            Self::Table { x, y } => {
                let (lo, hi) = (x[0], x[x.len() - 1]);
                if !(v >= lo - 1e-12 && v <= hi + 1e-12) {
                    return Err(Error::Extrapolation { value: v, lo, hi });
                }
                let k = x.partition_point(|xk| *xk <= v).clamp(1, x.len() - 1);
                let t = ((v - x[k - 1]) / (x[k] - x[k - 1])).clamp(0.0, 1.0);
                Ok(y[k - 1] + t * (y[k] - y[k - 1]))
            }
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            Self::Constant { .. } => 0.0,
            Self::Linear { slope, .. } => slope.abs(),
            Self::Table { x, y } => x
                .windows(2)
                .zip(y.windows(2))
                .map(|(x, y)| ((y[1] - y[0]) / (x[1] - x[0])).abs())
                .fold(0.0, f64::max),
        }
    }

    pub fn sup_abs(&self, range: (f64, f64)) -> f64 {
        match self {
            Self::Constant { value } => value.abs(),
            Self::Linear { slope, intercept } => (intercept + slope * range.0).abs().max((intercept + slope * range.1).abs()),
            Self::Table { y, .. } => y.iter().fold(0.0, |a, v| a.max(v.abs())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveProblemSpec {
    pub branch: Branch,
    pub s: f64,
    pub g: f64,
    pub hamiltonian: Hamiltonian1,
    pub initial: InitialDatum,
    pub horizon: f64,
    #[serde(default = "default_period")]
    pub period: f64,
    pub n: usize,
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

/// `∂t u = H̄1(u_x)` by Lax-Friedrichs (s ≥ 1/2) or `∂t u = H̄2(I[u])` by explicit steps
/// with a nondecreasing `H̄2` (s < 1/2); at `s = 1/2` the branch decides.
pub fn solve_effective(spec: &EffectiveProblemSpec) -> Result<Trajectory> {
    common_checks(spec.s, spec.branch, spec.horizon, spec.period, spec.n, spec.checkpoints, spec.cfl)?;
    let (n, period) = (spec.n, spec.period);
    let h = period / n as f64;
    let slope = spec.initial.slope;
    let x: Vec<f64> = (0..n).map(|j| j as f64 * h).collect();
    let mut v: Vec<f64> = x.iter().map(|&x| spec.initial.remainder(x, period)).collect();
    let geometry = Geometry::Periodic { period, n };
    let ham = &spec.hamiltonian;
    let first_order = spec.branch != Branch::Subcritical;
    let op = if first_order {
        None
    } else {
        if !(spec.g > 0.0) {
            return Err(invalid("g", "kernel constant must be positive"));
        }
        Some(PeriodicOperator::new(spec.s, spec.g, period, n, 2.0 * h)?)
    };
    let lip = ham.lipschitz();
    let alpha = lip.max(1e-12);
    let dt_max = match &op {
        None => spec.cfl * h / alpha,
        Some(op) => spec.cfl / (alpha * op.diagonal()),
    };
    let (steps, dt) = schedule(spec.horizon, dt_max, spec.checkpoints, spec.max_steps)?;
    let per = steps / spec.checkpoints;
    let mut traj = Trajectory {
        slope,
        times: Vec::new(),
        remainders: Vec::new(),
        dt,
        steps,
    };
    let mut rate = vec![0.0; n];
    for step in 1..=steps {
        match &op {
            None => {
                for j in 0..n {
                    let (jm, jp) = ((j + n - 1) % n, (j + 1) % n);
                    let pm = slope + (v[j] - v[jm]) / h;
                    let pp = slope + (v[jp] - v[j]) / h;
                    rate[j] = ham.eval(0.5 * (pm + pp))? + 0.5 * alpha * (pp - pm);
                }
            }
            Some(op) => {
                let lap = op.apply(&v);
                for j in 0..n {
                    rate[j] = ham.eval(lap[j])?;
                }
            }
        }
        for j in 0..n {
            v[j] += dt * rate[j];
        }
        if step % per == 0 {
            traj.times.push(spec.horizon * (step / per) as f64 / spec.checkpoints as f64);
            traj.remainders.push(GridField::new(geometry.clone(), v.clone())?);
        }
    }
    Ok(traj)
}

/// `[t0, t1] × [x0, x1]` over which errors are measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Compact {
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub x1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub branch: Branch,
    pub eps_list: Vec<f64>,
    pub errors: Vec<f64>,
    pub compact: Compact,
    /// Grid of each ε-run, then of the effective run.
    pub grids: Vec<usize>,
    pub decreasing: bool,
}

/// `sup |a - b|` over checkpoints in `[t0, T]`, on the nodes of the coarser grid.
pub fn compact_error(a: &Trajectory, b: &Trajectory, t0: f64) -> Result<f64> {
    if a.times.len() != b.times.len() || a.times.iter().zip(&b.times).any(|(s, t)| (s - t).abs() > 1e-12) {
        return Err(invalid("checkpoints", "trajectories do not share checkpoint times"));
    }
    if (a.slope - b.slope).abs() > 1e-15 {
        return Err(invalid("initial", "trajectories have different linear parts"));
    }
    let mut err: f64 = 0.0;
    for ((t, fa), fb) in a.times.iter().zip(&a.remainders).zip(&b.remainders) {
        if *t < t0 - 1e-12 {
            continue;
        }
        let (na, nb) = (fa.values.len(), fb.values.len());
        let (fine, coarse) = if na >= nb { (fa, fb) } else { (fb, fa) };
        let stride = fine.values.len() / coarse.values.len();
        if stride * coarse.values.len() != fine.values.len() {
            return Err(invalid("n", "grid sizes must divide one another"));
        }
        for (j, c) in coarse.values.iter().enumerate() {
            err = err.max((fine.values[j * stride] - c).abs());
        }
    }
    Ok(err)
}

/// Solves the ε-problem for each ε (concurrently) and the effective problem once, and
/// measures `e(ε)` on `[0.1T, T] × [0, P)`.
pub fn convergence_report(
    eps_list: &[f64],
    template: &EpsProblemSpec,
    effective: &EffectiveProblemSpec,
) -> Result<ConvergenceReport> {
    if eps_list.len() < 2 || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("eps_list", "need at least two strictly decreasing values"));
    }
    if template.branch != effective.branch || template.s != effective.s {
        return Err(invalid("branch", "ε-problem and effective problem disagree on branch or s"));
    }
    if template.horizon != effective.horizon
        || template.checkpoints != effective.checkpoints
        || template.period != effective.period
        || template.initial != effective.initial
    {
        return Err(invalid("effective", "horizon, checkpoints, period and initial datum must match"));
    }
    let limit = solve_effective(effective)?;
    let runs: Vec<Result<Trajectory>> = eps_list
        .par_iter()
        .map(|&eps| {
            let mut spec = template.clone();
            spec.eps = eps;
            solve_eps_problem(&spec)
        })
        .collect();
    let t0 = 0.1 * template.horizon;
    let mut errors = Vec::with_capacity(runs.len());
    for run in runs {
        errors.push(compact_error(&run?, &limit, t0)?);
    }
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    let mut grids = vec![template.n; eps_list.len()];
    grids.push(effective.n);
    Ok(ConvergenceReport {
        branch: template.branch,
        eps_list: eps_list.to_vec(),
        errors,
        compact: Compact {
            t0,
            t1: template.horizon,
            x0: 0.0,
            x1: template.period,
        },
        grids,
        decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracop::fractional_laplacian_constant;
    use crate::Order;

    fn spec(branch: Branch, s: f64, eps: f64) -> EpsProblemSpec {
        EpsProblemSpec {
            branch,
            eps,
            s,
            g: fractional_laplacian_constant(1, Order::new(s).unwrap()),
            potential: Potential::standard(),
            forcing: Sigma::zero(),
            initial: InitialDatum {
                slope: 0.0,
                cos: vec![],
                sin: vec![0.5],
            },
            horizon: 0.2,
            period: 1.0,
            n: 64,
            checkpoints: 4,
            cfl: 0.9,
            max_steps: 1_000_000,
        }
    }

    #[test]
    fn scalings_coincide_at_half() {
        assert_eq!(Branch::Supercritical.scaling(0.5), Branch::Subcritical.scaling(0.5));
        assert!(Branch::Supercritical.check(0.3).is_err());
        assert!(Branch::Critical.check(0.5).is_ok());
    }

    #[test]
    fn linear_datum_without_forces_is_stationary() {
        let mut sp = spec(Branch::Supercritical, 0.75, 0.25);
        sp.potential = Potential::flat();
        sp.initial = InitialDatum {
            slope: 0.7,
            ..Default::default()
        };
        let traj = solve_eps_problem(&sp).unwrap();
        assert!(traj.last().unwrap().values.iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn table_interpolation_and_extrapolation() {
        let h = Hamiltonian1::table(vec![(1.0, 2.0), (-1.0, 0.0), (0.0, 1.5)]).unwrap();
        assert!((h.eval(0.5).unwrap() - 1.75).abs() < 1e-15);
        assert!(matches!(h.eval(1.5), Err(Error::Extrapolation { .. })));
        assert!((h.lipschitz() - 1.5).abs() < 1e-15);
        let m = Hamiltonian1::table(vec![(0.0, 1.0), (1.0, 0.5), (2.0, 2.0)]).unwrap().monotone();
        assert_eq!(m.eval(1.0).unwrap(), 1.0);
    }

    #[test]
    fn step_budget_reported() {
        let mut sp = spec(Branch::Supercritical, 0.75, 0.01);
        sp.max_steps = 10;
        assert!(matches!(solve_eps_problem(&sp), Err(Error::StepBudget { .. })));
    }
}
