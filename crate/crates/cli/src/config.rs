use std::path::{Path, PathBuf};

use peierls::cell::{Slope, Q_MAX};
use peierls::fracop::fractional_laplacian_constant;
use peierls::homog::{Branch, InitialDatum};
use peierls::{Order, Potential, Sigma};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Layer,
    Corrector,
    Hbar,
    HbarTable,
    Homogenize,
    AnsatzResidual,
    Orowan,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Layer => "layer",
            Command::Corrector => "corrector",
            Command::Hbar => "hbar",
            Command::HbarTable => "hbar-table",
            Command::Homogenize => "homogenize",
            Command::AnsatzResidual => "ansatz-residual",
            Command::Orowan => "orowan",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorBlock {
    pub s: f64,
    /// Kernel constant; defaults to the normalization `C(1, s)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
}

/// A slope given either as a number (replaced by a convergent with denominator ≤ 64) or as
/// an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SlopeSpec {
    Fraction { num: i64, den: u64 },
    Real(f64),
}

impl SlopeSpec {
    pub fn resolve(self) -> peierls::Result<Slope> {
        match self {
            SlopeSpec::Fraction { num, den } => Slope::new(num, den),
            SlopeSpec::Real(p) => Slope::approximate(p, Q_MAX),
        }
    }
}

/// Numerical settings; each command reads the fields it needs and falls back to defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numeric {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layer_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flow_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layer_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_window: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrector_tol: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<SlopeSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_list: Option<Vec<SlopeSpec>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_list: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cfl: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_list: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialDatum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<usize>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_list: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_terms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_reduction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points_per_unit: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

/// Saved artifacts reused instead of being recomputed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layer: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrector: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hbar_table: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

fn standard_potential() -> Potential {
    Potential::standard()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub operator: OperatorBlock,
    #[serde(default = "standard_potential")]
    pub potential: Potential,
    #[serde(default)]
    pub forcing: Sigma,
    #[serde(default)]
    pub numeric: Numeric,
    #[serde(default)]
    pub inputs: Inputs,
    #[serde(default)]
    pub output: OutputBlock,
}

fn field(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Field {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn positive(name: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(field(name, format!("must be positive, got {x}"))),
        _ => Ok(()),
    }
}

fn decreasing(name: &str, v: &Option<Vec<f64>>) -> Result<()> {
    if let Some(list) = v {
        if list.is_empty() || list.iter().any(|x| !(*x > 0.0)) || list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(field(name, "must be a nonempty, positive, strictly decreasing list"));
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Schema {
            path: origin.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text, path)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.operator.s;
        if !(s > 0.0 && s < 1.0) {
            return Err(field("operator.s", format!("must lie in (0, 1), got {s}")));
        }
        positive("operator.g", self.operator.g)?;
        Potential::new(self.potential.cos.clone(), self.potential.sin.clone())
            .map_err(|e| field("potential", e.to_string()))?;
        let n = &self.numeric;
        for (name, v) in [
            ("numeric.half_width", n.half_width),
            ("numeric.flow_time", n.flow_time),
            ("numeric.layer_tol", n.layer_tol),
            ("numeric.corrector_tol", n.corrector_tol),
            ("numeric.horizon", n.horizon),
            ("numeric.tol", n.tol),
            ("numeric.cfl", n.cfl),
            ("numeric.eps_horizon", n.eps_horizon),
            ("numeric.p0", n.p0.map(f64::abs)),
            ("numeric.rel_tol", n.rel_tol),
            ("numeric.min_reduction", n.min_reduction),
        ] {
            positive(name, v)?;
        }
        decreasing("numeric.eps_list", &n.eps_list)?;
        decreasing("numeric.delta_list", &n.delta_list)?;
        if let Some(eps) = &n.eps_list {
            if eps.iter().any(|e| *e > 1.0) {
                return Err(field("numeric.eps_list", "ε must lie in (0, 1]"));
            }
        }
        if let Some(b) = n.branch {
            b.check(s).map_err(|e| field("numeric.branch", e.to_string()))?;
        }
        if n.workers == Some(0) {
            return Err(field("numeric.workers", "must be at least 1"));
        }
        if let Some(p) = n.p {
            p.resolve().map_err(|e| field("numeric.p", e.to_string()))?;
        }
        for p in n.p_list.iter().flatten() {
            p.resolve().map_err(|e| field("numeric.p_list", e.to_string()))?;
        }
        let layer_based = matches!(
            self.command,
            Command::Layer | Command::Corrector | Command::AnsatzResidual | Command::Orowan
        );
        if layer_based {
            if let Some(g) = self.operator.g {
                if (g - self.normalization()).abs() > 1e-12 * g {
                    return Err(field(
                        "operator.g",
                        "layer and corrector solvers use the normalization constant C(1, s); omit g",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> Order {
        Order::new(self.operator.s).expect("validated")
    }

    pub fn normalization(&self) -> f64 {
        fractional_laplacian_constant(1, self.order())
    }

    pub fn g(&self) -> f64 {
        self.operator.g.unwrap_or_else(|| self.normalization())
    }

    /// SHA-256 of the config without its output block.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputBlock::default();
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}
