//! JSON run configuration. All keys are required unless marked optional;
//! unknown keys are rejected.

use std::path::{Path, PathBuf};

use curl_lambda::neumann::BieSolver;
use curl_lambda::{Point, Shape, C64};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub domain: DomainConfig,
    pub lambda: Complex,
    pub source: SourceConfig,
    pub eval: EvalConfig,
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub medium: Option<MediumConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neumann: Option<NeumannConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex> for C64 {
    fn from(c: Complex) -> C64 {
        C64::new(c.re, c.im)
    }
}

fn origin() -> Point {
    [0.0; 3]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainConfig {
    Ball {
        #[serde(default = "origin")]
        center: Point,
        radius: f64,
        n: usize,
    },
    Box {
        lo: Point,
        hi: Point,
        n: usize,
    },
    Ellipsoid {
        #[serde(default = "origin")]
        center: Point,
        semiaxes: Point,
        n: usize,
    },
}

impl DomainConfig {
    pub fn shape(&self) -> Shape {
        match self {
            DomainConfig::Ball { center, radius, .. } => Shape::Ball {
                center: *center,
                radius: *radius,
            },
            DomainConfig::Box { lo, hi, .. } => Shape::Box { lo: *lo, hi: *hi },
            DomainConfig::Ellipsoid { center, semiaxes, .. } => Shape::Ellipsoid {
                center: *center,
                semiaxes: *semiaxes,
            },
        }
    }

    pub fn n(&self) -> usize {
        match self {
            DomainConfig::Ball { n, .. } | DomainConfig::Box { n, .. } | DomainConfig::Ellipsoid { n, .. } => *n,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SourceConfig {
    Builtin(BuiltinSource),
    Csv(CsvSource),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinSource {
    pub builtin: String,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSource {
    pub csv: PathBuf,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub n: usize,
    pub margin: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vtk: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub omega: f64,
    /// `[re, im]`.
    pub eps: [f64; 2],
    pub mu: [f64; 2],
    #[serde(default)]
    pub beta: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeumannConfig {
    pub mesh_level: usize,
    /// Field whose normal trace is the boundary data `φ₀`.
    pub boundary: SourceConfig,
    #[serde(default)]
    pub solver: BieSolver,
    /// File name of the exported boundary mesh.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_off: Option<PathBuf>,
}

pub fn c2(v: [f64; 2]) -> C64 {
    C64::new(v[0], v[1])
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("invalid config {}: {e}", path.display())))
    }

    pub fn medium(&self) -> Result<MediumConfig, CliError> {
        self.medium
            .ok_or_else(|| CliError::Input("this command needs a `medium` block".into()))
    }

    pub fn neumann(&self) -> Result<&NeumannConfig, CliError> {
        self.neumann
            .as_ref()
            .ok_or_else(|| CliError::Input("this command needs a `neumann` block".into()))
    }
}
