use std::io::Write;
use std::path::{Path, PathBuf};

use peierls::{Potential, Sigma};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Failure,
    Unconverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub s: f64,
    pub g: f64,
    pub normalization_constant: f64,
    pub potential: Potential,
    pub forcing: Sigma,
}

/// Sidecar written next to every result file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub file: String,
    pub quantity: String,
    pub command: String,
    pub config_hash: String,
    pub tolerance: f64,
    pub constants: Constants,
    pub status: Status,
    pub checks: Vec<Check>,
    pub version: String,
}

/// Writes results atomically (temp file in the target directory, then rename).
pub struct Sink {
    dir: PathBuf,
    hash: String,
    command: String,
    constants: Constants,
    pub written: Vec<PathBuf>,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io(dir))?;
    tmp.write_all(bytes).map_err(io(path))?;
    tmp.flush().map_err(io(path))?;
    tmp.persist(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

impl Sink {
    pub fn new(dir: &Path, config: &RunConfig) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash: config.hash(),
            command: config.command.name().to_string(),
            constants: Constants {
                s: config.operator.s,
                g: config.g(),
                normalization_constant: config.normalization(),
                potential: config.potential.clone(),
                forcing: config.forcing.clone(),
            },
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn meta(&mut self, name: &str, quantity: &str, tolerance: f64, status: Status, checks: &[Check]) -> Result<()> {
        let meta = Meta {
            file: name.to_string(),
            quantity: quantity.to_string(),
            command: self.command.clone(),
            config_hash: self.hash.clone(),
            tolerance,
            constants: self.constants.clone(),
            status,
            checks: checks.to_vec(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        let path = self.dir.join(format!("{name}.meta.json"));
        let mut bytes = serde_json::to_vec_pretty(&meta).expect("meta serializes");
        bytes.push(b'\n');
        write_atomic(&path, &bytes)?;
        self.written.push(path);
        Ok(())
    }

    pub fn json<T: Serialize>(
        &mut self,
        name: &str,
        value: &T,
        quantity: &str,
        tolerance: f64,
        status: Status,
        checks: &[Check],
    ) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut bytes = serde_json::to_vec_pretty(value).expect("result serializes");
        bytes.push(b'\n');
        write_atomic(&path, &bytes)?;
        self.written.push(path.clone());
        self.meta(name, quantity, tolerance, status, checks)?;
        Ok(path)
    }

    pub fn csv<T: Serialize>(
        &mut self,
        name: &str,
        rows: &[T],
        quantity: &str,
        tolerance: f64,
        status: Status,
        checks: &[Check],
    ) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(|e| CliError::BadInput {
                path: path.clone(),
                message: e.to_string(),
            })?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::BadInput {
            path: path.clone(),
            message: e.to_string(),
        })?;
        write_atomic(&path, &bytes)?;
        self.written.push(path.clone());
        self.meta(name, quantity, tolerance, status, checks)?;
        Ok(path)
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &'static str, producer: &'static str) -> Result<T> {
    if !path.exists() {
        return Err(CliError::MissingInput {
            what,
            path: path.to_path_buf(),
            producer,
        });
    }
    let text = std::fs::read_to_string(path).map_err(io(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::BadInput {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path, what: &'static str, producer: &'static str) -> Result<Vec<T>> {
    if !path.exists() {
        return Err(CliError::MissingInput {
            what,
            path: path.to_path_buf(),
            producer,
        });
    }
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::BadInput {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    r.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| CliError::BadInput {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
}
