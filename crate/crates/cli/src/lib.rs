//! Batch front end: JSON run configs in, deterministic JSON/CSV results (each with a
//! `.meta.json` sidecar) out.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

use peierls::cell::{hbar_run, hbar_table, HbarOptions, HbarRow, HbarTable, Slope};
use peierls::homog::{
    convergence_report, Branch, ConvergenceReport, EffectiveProblemSpec, EpsProblemSpec, Hamiltonian1, InitialDatum,
};
use peierls::hull::{build_ansatz, nl_residual, orowan_check, AnsatzDump, AnsatzOptions, OrowanOptions};
use peierls::layer::{
    check_corrector_decay, check_layer_decay, solve_corrector_psi, solve_layer, CorrectorPsi, DecayReport,
    LayerSolution,
};
use serde::{Deserialize, Serialize};

pub use config::{Command, RunConfig};
pub use error::{CliError, Result};
use output::{read_csv, read_json, Check, Sink, Status};

/// Files written and checks that failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerResult {
    pub layer: LayerSolution,
    pub decay: DecayReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectorResult {
    pub corrector: CorrectorPsi,
    pub decay: DecayReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzRow {
    pub delta: f64,
    pub lambda: f64,
    pub sup: f64,
    pub scaled_sup: f64,
    pub cauchy_change: f64,
    pub deviation_bound: f64,
    pub sup_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzRecord {
    pub ansatz: AnsatzDump,
    pub lambda: f64,
    pub residual: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrowanCsvRow {
    #[serde(rename = "δ")]
    pub delta: f64,
    pub lambda: f64,
    pub ratio: f64,
    pub target: f64,
    pub abs_err: f64,
}

const LAYER_TAG: &str = "layer profile φ: I[φ] = W'(φ), φ(-∞) = 0, φ(0) = 1/2, φ(+∞) = 1";
const CORRECTOR_TAG: &str = "corrector ψ: I[ψ] = W''(φ)ψ + (L0/α)(W''(φ) - α) + cφ'";
const HBAR_TAG: &str = "effective Hamiltonian H̄(p, L): long-time drift of ∂τw = I[w] + L - W'(w + p·y) + σ";
const HOMOG_TAG: &str = "homogenization error e(ε) = sup |u^ε - u^0| over [0.1T, T] × one period";
const ANSATZ_TAG: &str = "hull ansatz residual NL[h] = λh' - δ^{2s}L0 - δ^{2s}|p0|^{2s} I[h] + W'(h)";
const OROWAN_TAG: &str = "drift ratio H̄(δp0, δ^{2s}L0)/δ^{1+2s} against c0|p0|L0";

/// Runs one config; `out` and `workers` override the config's output directory and pool size.
pub fn run(config: &RunConfig, out: Option<&Path>, workers: Option<usize>) -> Result<Outcome> {
    config.validate()?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let workers = workers.or(config.numeric.workers);
    if workers == Some(0) {
        return Err(CliError::Field {
            field: "workers".into(),
            reason: "must be at least 1".into(),
        });
    }
    let mut sink = Sink::new(&dir, config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Field {
            field: "workers".into(),
            reason: e.to_string(),
        })?;
    let failures = pool.install(|| dispatch(config, workers, &mut sink))?;
    Ok(Outcome {
        files: sink.written,
        failures,
    })
}

fn dispatch(c: &RunConfig, workers: Option<usize>, sink: &mut Sink) -> Result<Vec<String>> {
    match c.command {
        Command::Layer => cmd_layer(c, sink),
        Command::Corrector => cmd_corrector(c, sink),
        Command::Hbar => cmd_hbar(c, sink),
        Command::HbarTable => cmd_hbar_table(c, workers, sink),
        Command::Homogenize => cmd_homogenize(c, workers, sink),
        Command::AnsatzResidual => cmd_ansatz(c, sink),
        Command::Orowan => cmd_orowan(c, workers, sink),
    }
}

fn failed(checks: &[Check]) -> Vec<String> {
    checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect()
}

fn status_of(checks: &[Check]) -> Status {
    if checks.iter().all(|c| c.passed) {
        Status::Ok
    } else {
        Status::Failure
    }
}

fn layer_tol(c: &RunConfig) -> f64 {
    c.numeric
        .layer_tol
        .unwrap_or(if c.potential.is_even() { 1e-9 } else { 5e-8 })
}

fn corrector_tol(c: &RunConfig) -> f64 {
    c.numeric
        .corrector_tol
        .unwrap_or(if c.operator.s < 0.5 { 1e-3 } else { 1e-6 })
}

fn solve_layer_for(c: &RunConfig) -> Result<LayerSolution> {
    let n = &c.numeric;
    Ok(solve_layer(
        c.order(),
        &c.potential,
        n.half_width.unwrap_or(40.0),
        n.layer_n.unwrap_or(4096),
        n.flow_time.unwrap_or(200.0),
        layer_tol(c),
    )?)
}

/// Saved layer when `inputs.layer` is set, otherwise a fresh solve.
fn layer_for(c: &RunConfig) -> Result<LayerSolution> {
    match &c.inputs.layer {
        Some(path) => {
            let saved: LayerResult = read_json(path, "layer solution", "layer")?;
            if saved.layer.s != c.operator.s || saved.layer.potential != c.potential {
                return Err(CliError::BadInput {
                    path: path.clone(),
                    message: "saved layer was solved for a different s or potential".into(),
                });
            }
            Ok(saved.layer)
        }
        None => solve_layer_for(c),
    }
}

fn corrector_for(c: &RunConfig, layer: &LayerSolution, l0: f64) -> Result<CorrectorPsi> {
    match &c.inputs.corrector {
        Some(path) => {
            let saved: CorrectorResult = read_json(path, "corrector solution", "corrector")?;
            Ok(saved.corrector)
        }
        None => Ok(solve_corrector_psi(c.order(), &c.potential, l0, layer, corrector_tol(c))?),
    }
}

fn cmd_layer(c: &RunConfig, sink: &mut Sink) -> Result<Vec<String>> {
    let layer = solve_layer_for(c)?;
    let decay = check_layer_decay(&layer, c.numeric.decay_window);
    let checks = vec![Check::new(
        "monotone",
        decay.monotone,
        format!("c0 = {}", layer.c0),
    )];
    let result = LayerResult { layer, decay };
    sink.json("layer.json", &result, LAYER_TAG, layer_tol(c), status_of(&checks), &checks)?;
    Ok(failed(&checks))
}

fn cmd_corrector(c: &RunConfig, sink: &mut Sink) -> Result<Vec<String>> {
    let layer = layer_for(c)?;
    let l0 = c.numeric.l0.unwrap_or(1.0);
    let psi = solve_corrector_psi(c.order(), &c.potential, l0, &layer, corrector_tol(c))?;
    let decay = check_corrector_decay(&psi, c.operator.s, c.numeric.decay_window);
    let result = CorrectorResult { corrector: psi, decay };
    sink.json("corrector.json", &result, CORRECTOR_TAG, corrector_tol(c), Status::Ok, &[])?;
    Ok(Vec::new())
}

fn hbar_options(c: &RunConfig, workers: Option<usize>) -> HbarOptions {
    let n = &c.numeric;
    HbarOptions {
        s: c.operator.s,
        g: c.g(),
        potential: c.potential.clone(),
        forcing: c.forcing.clone(),
        horizon: n.horizon.unwrap_or(200.0),
        n: n.n.unwrap_or(512),
        tol: n.tol.unwrap_or(1e-3),
        cfl: n.cfl.unwrap_or(0.9),
        workers,
    }
}

fn cmd_hbar(c: &RunConfig, sink: &mut Sink) -> Result<Vec<String>> {
    let opts = hbar_options(c, None);
    let p = c.numeric.p.map(|p| p.resolve()).transpose()?.unwrap_or(Slope::integer(0));
    let l = c.numeric.l.unwrap_or(0.0);
    let run = hbar_run(p, l, &opts)?;
    let row = HbarRow {
        p_num: p.num,
        p_den: p.den,
        l,
        lambda: run.lambda,
        uncertainty: run.uncertainty,
        c_obs: run.c_obs,
        t: opts.horizon,
        n: opts.n,
    };
    let checks = vec![Check::new(
        "drift converged",
        run.converged,
        format!("uncertainty {:e} (tolerance {:e})", run.uncertainty, opts.tol),
    )];
    let status = if run.converged { Status::Ok } else { Status::Unconverged };
    sink.csv("hbar.csv", &[row], HBAR_TAG, opts.tol, status, &checks)?;
    Ok(failed(&checks))
}

fn table_checks(table: &HbarTable) -> Vec<Check> {
    let mut checks: Vec<Check> = table
        .checks
        .iter()
        .map(|p| {
            let detail = if p.passed() {
                format!("{} pairs", p.checked_pairs)
            } else {
                p.failures.join("; ")
            };
            Check::new(p.property.clone(), p.passed(), detail)
        })
        .collect();
    let errors: Vec<String> = table
        .entries
        .iter()
        .filter_map(|e| e.error.as_ref().map(|m| format!("p = {}/{}, L = {}: {m}", e.p.num, e.p.den, e.l)))
        .collect();
    checks.push(Check::new("all entries converged", errors.is_empty(), errors.join("; ")));
    checks
}

fn write_table(sink: &mut Sink, name: &str, table: &HbarTable, tol: f64) -> Result<Vec<Check>> {
    let checks = table_checks(table);
    let status = if table.partial {
        Status::Unconverged
    } else {
        status_of(&checks)
    };
    sink.csv(name, &table.rows(), HBAR_TAG, tol, status, &checks)?;
    Ok(checks)
}

fn cmd_hbar_table(c: &RunConfig, workers: Option<usize>, sink: &mut Sink) -> Result<Vec<String>> {
    let opts = hbar_options(c, workers);
    let n = &c.numeric;
    let p_list: Vec<Slope> = match &n.p_list {
        Some(list) => list.iter().map(|p| p.resolve()).collect::<peierls::Result<_>>()?,
        None => vec![Slope::integer(-1), Slope::integer(0), Slope::integer(1)],
    };
    let l_list = n.l_list.clone().unwrap_or_else(|| vec![-1.0, 0.0, 1.0]);
    let table = hbar_table(&p_list, &l_list, &opts)?;
    let checks = write_table(sink, "hbar_table.csv", &table, opts.tol)?;
    Ok(failed(&checks))
}

fn default_branch(s: f64) -> Branch {
    if s > 0.5 {
        Branch::Supercritical
    } else if s < 0.5 {
        Branch::Subcritical
    } else {
        Branch::Critical
    }
}

fn cmd_homogenize(c: &RunConfig, workers: Option<usize>, sink: &mut Sink) -> Result<Vec<String>> {
    let n = &c.numeric;
    let s = c.operator.s;
    let branch = n.branch.unwrap_or_else(|| default_branch(s));
    let first_order = branch != Branch::Subcritical;
    let mut opts = hbar_options(c, workers);
    opts.horizon = n.horizon.unwrap_or(100.0);
    opts.n = n.n.unwrap_or(256);
    opts.tol = n.tol.unwrap_or(1e-2);
    let table = match &c.inputs.hbar_table {
        Some(path) => {
            let rows: Vec<HbarRow> = read_csv(path, "H̄ table", "hbar-table")?;
            HbarTable::from_rows(&rows, &c.potential, &c.forcing)?
        }
        None => {
            let (p_list, l_list): (Vec<Slope>, Vec<f64>) = if first_order {
                let ps = match &n.p_list {
                    Some(list) => list.iter().map(|p| p.resolve()).collect::<peierls::Result<_>>()?,
                    None => (-16..=16).map(|k| Slope::new(k, 4)).collect::<peierls::Result<_>>()?,
                };
                (ps, vec![0.0])
            } else {
                let ls = n
                    .l_list
                    .clone()
                    .unwrap_or_else(|| (-12..=12).map(|k| k as f64 * 0.25).collect());
                (vec![Slope::integer(0)], ls)
            };
            let table = hbar_table(&p_list, &l_list, &opts)?;
            write_table(sink, "homogenize_hbar.csv", &table, opts.tol)?;
            table
        }
    };
    let hamiltonian = if first_order {
        Hamiltonian1::h1_from_table(&table)?
    } else {
        Hamiltonian1::h2_from_table(&table)?
    };
    let initial = n.initial.clone().unwrap_or(InitialDatum {
        slope: 0.0,
        cos: vec![],
        sin: vec![0.5],
    });
    let horizon = n.eps_horizon.unwrap_or(1.0);
    let checkpoints = n.checkpoints.unwrap_or(10);
    let cfl = n.cfl.unwrap_or(0.9);
    let template = EpsProblemSpec {
        branch,
        eps: 1.0,
        s,
        g: c.g(),
        potential: c.potential.clone(),
        forcing: c.forcing.clone(),
        initial: initial.clone(),
        horizon,
        period: 1.0,
        n: n.eps_n.unwrap_or(1024),
        checkpoints,
        cfl,
        max_steps: 50_000_000,
    };
    let effective = EffectiveProblemSpec {
        branch,
        s,
        g: c.g(),
        hamiltonian,
        initial,
        horizon,
        period: 1.0,
        n: n.effective_n.unwrap_or(256),
        checkpoints,
        cfl,
        max_steps: 50_000_000,
    };
    let eps_list = n.eps_list.clone().unwrap_or_else(|| vec![0.5, 0.25, 0.125]);
    let report: ConvergenceReport = convergence_report(&eps_list, &template, &effective)?;
    let checks = vec![Check::new(
        "e(ε) decreasing",
        report.decreasing,
        format!("{:?}", report.errors),
    )];
    sink.json("homogenization.json", &report, HOMOG_TAG, opts.tol, status_of(&checks), &checks)?;
    Ok(failed(&checks))
}

fn cmd_ansatz(c: &RunConfig, sink: &mut Sink) -> Result<Vec<String>> {
    let n = &c.numeric;
    let layer = layer_for(c)?;
    let l0 = n.l0.unwrap_or(1.0);
    let p0 = n.p0.unwrap_or(1.0);
    let psi = if l0 != 0.0 { Some(corrector_for(c, &layer, l0)?) } else { None };
    let deltas = n.delta_list.clone().unwrap_or_else(|| vec![0.2, 0.1, 0.05]);
    let opts = AnsatzOptions {
        n: n.n_terms.unwrap_or(16),
        samples: n.samples.unwrap_or(4096),
        ..AnsatzOptions::default()
    };
    let mut rows = Vec::new();
    for (k, &delta) in deltas.iter().enumerate() {
        let ansatz = build_ansatz(delta, p0, l0, &layer, psi.as_ref(), &opts)?;
        let nl = nl_residual(&ansatz, None)?;
        rows.push(AnsatzRow {
            delta,
            lambda: nl.lambda,
            sup: nl.sup,
            scaled_sup: nl.scaled_sup,
            cauchy_change: ansatz.cauchy_change,
            deviation_bound: ansatz.deviation_bound(),
            sup_deviation: ansatz.h_minus_x.sup_norm(),
        });
        let record = AnsatzRecord {
            ansatz: ansatz.dump(),
            lambda: nl.lambda,
            residual: nl.residual.values,
        };
        sink.json(&format!("ansatz_{k}.json"), &record, ANSATZ_TAG, opts.cauchy_tol, Status::Ok, &[])?;
    }
    let min_reduction = n.min_reduction.unwrap_or(2.0);
    let mut checks = Vec::new();
    if rows.len() >= 2 {
        let reduction = rows[0].scaled_sup / rows[rows.len() - 1].scaled_sup;
        checks.push(Check::new(
            "sup|NL|/δ^{2s} reduction",
            reduction >= min_reduction,
            format!("factor {reduction:.3} (required {min_reduction})"),
        ));
    }
    let bounded = rows.iter().all(|r| r.sup_deviation <= r.deviation_bound);
    checks.push(Check::new("|h - x| ≤ C", bounded, String::new()));
    sink.csv("ansatz_residual.csv", &rows, ANSATZ_TAG, opts.cauchy_tol, status_of(&checks), &checks)?;
    Ok(failed(&checks))
}

fn cmd_orowan(c: &RunConfig, workers: Option<usize>, sink: &mut Sink) -> Result<Vec<String>> {
    let n = &c.numeric;
    let layer = layer_for(c)?;
    let mut hbar = hbar_options(c, workers);
    hbar.tol = n.tol.unwrap_or(1e-3);
    let opts = OrowanOptions {
        hbar,
        points_per_unit: n.points_per_unit.unwrap_or(32),
        rel_tol: n.rel_tol.unwrap_or(0.15),
    };
    let deltas = n.delta_list.clone().unwrap_or_else(|| vec![0.2, 0.1, 0.05]);
    let report = orowan_check(&deltas, n.p0.unwrap_or(1.0), n.l0.unwrap_or(1.0), layer.c0, &opts)?;
    let rows: Vec<OrowanCsvRow> = report
        .rows
        .iter()
        .map(|r| OrowanCsvRow {
            delta: r.delta,
            lambda: r.lambda,
            ratio: r.ratio,
            target: r.target,
            abs_err: r.abs_err,
        })
        .collect();
    let mut checks = vec![
        Check::new("error nonincreasing in δ", report.nonincreasing, String::new()),
        Check::new(
            "final relative error",
            report.final_rel_err <= opts.rel_tol,
            format!("{:.4} (tolerance {})", report.final_rel_err, opts.rel_tol),
        ),
    ];
    if report.partial() {
        let detail = report
            .failures
            .iter()
            .map(|(d, m)| format!("δ = {d}: {m}"))
            .collect::<Vec<_>>()
            .join("; ");
        checks.push(Check::new("all drifts converged", false, detail));
    }
    let status = if report.partial() {
        Status::Unconverged
    } else {
        status_of(&checks)
    };
    sink.csv("orowan.csv", &rows, OROWAN_TAG, opts.rel_tol, status, &checks)?;
    Ok(failed(&checks))
}
