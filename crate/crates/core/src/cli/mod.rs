//! Command-line layer: scene configuration, reports, plots and
//! re-verification of report artifacts.
//!
//! Every command is a plain function returning its output as a string (or
//! a set of files), so the binary in `main.rs` only parses flags and maps
//! [`CliError`] to exit codes.

mod json;
mod plot;
mod report;
mod verify;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::surface::{FramedPair, Scene, SurfaceConfig, MAX_GRID, MIN_GRID};

pub use json::{from_json, to_json};
pub use plot::{permutohedron_svg, portrait_svg, PlotFiles};
pub use report::{
    build_report, cmd_analyze, cmd_normalize, cmd_plot, cmd_plot_values, cmd_project, cmd_project_values,
    CriticalPointEntry, EdgeEntry, HomotopyReport, HomotopySample, KktSummary, ProjectReport,
    Report,
};
pub use verify::{random_suite, seed_from_env, verify_report, verify_report_json, CheckLine, SuiteOutcome, SEED_VAR};

/// Failure of a command, carrying its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed arguments, values or configuration.
    #[error("{0}")]
    Usage(String),
    /// The pipeline rejected the input.
    #[error(transparent)]
    Analysis(#[from] Error),
    /// Verification of a report found violations.
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for usage errors, 3 for analysis and verification failures, 4 for
    /// I/O errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Analysis(_) | CliError::Verification(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Optional tolerance overrides in a [`SceneConfig`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_kkt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_ext: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_capture: Option<f64>,
}

/// The tolerances a report was produced with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tie_tol: f64,
    pub tol_kkt: f64,
    pub delta_ext: f64,
    pub r_capture: f64,
    pub tol_crit: f64,
    pub max_arc: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let s = SurfaceConfig::default();
        Self {
            tie_tol: s.tie_tol,
            tol_kkt: 1e-9,
            delta_ext: s.delta_ext,
            r_capture: s.r_capture,
            tol_crit: s.tol_crit,
            max_arc: s.max_arc,
        }
    }
}

impl Tolerances {
    pub fn surface_config(&self) -> SurfaceConfig {
        SurfaceConfig {
            delta_ext: self.delta_ext,
            r_capture: self.r_capture,
            tol_crit: self.tol_crit,
            tie_tol: self.tie_tol,
            max_arc: self.max_arc,
        }
    }
}

fn default_scene() -> String {
    "two_cosines".into()
}

fn default_grid() -> usize {
    256
}

/// Scene selection and numerical settings, read from one JSON document.
///
/// ```json
/// {"scene": "two_cosines", "params": {"a": 3, "b": 1}, "grid_n": 256,
///  "tolerances": {"delta_ext": 0.1}}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    #[serde(default = "default_scene")]
    pub scene: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default = "default_grid")]
    pub grid_n: usize,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            scene: default_scene(),
            params: BTreeMap::new(),
            grid_n: default_grid(),
            tolerances: ToleranceOverrides::default(),
        }
    }
}

impl SceneConfig {
    pub fn new(scene: &str, params: &[(&str, f64)], grid_n: usize) -> Self {
        Self {
            scene: scene.into(),
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            grid_n,
            tolerances: ToleranceOverrides::default(),
        }
    }

    /// Parse a JSON document.
    pub fn from_json_str(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid scene config: {e}")))
    }

    /// Parse `arg` as inline JSON when it starts with `{`, otherwise read it
    /// as a file path.
    pub fn from_arg(arg: &str) -> CliResult<Self> {
        if arg.trim_start().starts_with('{') {
            return Self::from_json_str(arg);
        }
        let path = Path::new(arg);
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json_str(&text)
    }

    /// Check the invariants and build the scene.
    pub fn scene(&self) -> CliResult<Scene> {
        if !(MIN_GRID..=MAX_GRID).contains(&self.grid_n) {
            return Err(CliError::Usage(format!(
                "grid_n = {} outside [{MIN_GRID}, {MAX_GRID}]",
                self.grid_n
            )));
        }
        Scene::from_name(&self.scene, &self.params).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn pair(&self) -> CliResult<FramedPair> {
        Ok(FramedPair::new(self.scene()?, self.grid_n)?)
    }

    /// Defaults with the overrides applied; every value must be positive.
    pub fn tolerances(&self) -> CliResult<Tolerances> {
        let mut t = Tolerances::default();
        let o = &self.tolerances;
        for (slot, value, name) in [
            (&mut t.tie_tol, o.tie_tol, "tie_tol"),
            (&mut t.tol_kkt, o.tol_kkt, "tol_kkt"),
            (&mut t.delta_ext, o.delta_ext, "delta_ext"),
            (&mut t.r_capture, o.r_capture, "r_capture"),
        ] {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::Usage(format!("{name} must be positive, got {v}")));
                }
                *slot = v;
            }
        }
        Ok(t)
    }
}

/// Parse a comma-separated list of reals.
pub fn parse_values(text: &str) -> CliResult<Vec<f64>> {
    let values: Vec<f64> = text
        .split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Usage(format!("cannot parse {s:?} as a finite real")))
        })
        .collect::<CliResult<_>>()?;
    if values.is_empty() {
        return Err(CliError::Usage("empty value list".into()));
    }
    Ok(values)
}
