//! Reports of the analysis and normalization pipeline, and the commands
//! that produce them.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::json::to_json;
use super::plot::{permutohedron_svg, portrait_svg, PlotFiles};
use super::{CliError, CliResult, SceneConfig, Tolerances};
use crate::permutohedron::OrderedPartition;
use crate::projection::{kkt_verify, project};
use crate::reparam::{face_of_scaled, homotopy_from_report, normalize_with_eps, NormalizationReport};
use crate::surface::{analyze, normalize_analyzed, verdict_from, Analysis, FramedPair, SpecialnessVerdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointEntry {
    pub position: [f64; 2],
    pub index: u8,
    pub value: f64,
}

/// A traced separatrix; endpoints are 1-based positions in
/// `critical_points`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub from: usize,
    pub to: usize,
    pub ascending: bool,
    pub length: f64,
}

/// Multipliers and stationarity residual of the projection certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktSummary {
    pub lambda: f64,
    pub lambda_k: Vec<f64>,
    pub residual: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopySample {
    pub t: f64,
    /// Saddle values `(1-t)·(2/ε)c' + t·c` of `f_t`.
    pub values: Vec<f64>,
    /// Open face of `values` in `(2/(q+1))·P^{q-1}` (1-based), if inside.
    pub face: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyReport {
    pub samples: Vec<HomotopySample>,
    /// All samples lie in one open face.
    pub constant_face: bool,
}

/// Full report of `analyze` or `normalize`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    /// The configuration, with scene parameters made explicit.
    pub scene: SceneConfig,
    /// Numbers of minima, saddles and maxima.
    pub p: usize,
    pub q: usize,
    pub r: usize,
    pub critical_points: Vec<CriticalPointEntry>,
    pub saddle_distances: Vec<Vec<f64>>,
    /// `ε` used for the normalization, after the separatrix safeguard.
    pub epsilon: f64,
    /// `ε` from the distance formula alone.
    pub epsilon_formula: f64,
    pub c: Vec<f64>,
    pub c_prime: Vec<f64>,
    pub scaled_values: Vec<f64>,
    /// Face of `c'` in `(ε/(q+1))·P^{q-1}`, 1-based blocks.
    pub face: Vec<Vec<usize>>,
    /// `(t_0, t_1, …, t_s, t_{s+1})`.
    pub t_offsets: Vec<f64>,
    /// Absent when there are no saddles.
    pub kkt: Option<KktSummary>,
    pub special_before: SpecialnessVerdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub special_after: Option<SpecialnessVerdict>,
    pub separatrix_edges: Vec<EdgeEntry>,
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homotopy: Option<HomotopyReport>,
}

/// Output of `project`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectReport {
    pub c: Vec<f64>,
    pub kappa: f64,
    pub c_prime: Vec<f64>,
    pub face: Vec<Vec<usize>>,
    /// `(t_1, …, t_s)`.
    pub t_offsets: Vec<f64>,
    pub kkt: KktSummary,
}

/// Intermediate products shared by the report and the plots.
pub(crate) struct Run {
    pub pair: FramedPair,
    pub analysis: Analysis,
    pub normalization: NormalizationReport,
    pub report: Report,
}

fn kkt_summary(c: &[f64], kappa: f64, norm: &NormalizationReport, tol: f64) -> Option<KktSummary> {
    let p = norm.diffeo.projection()?;
    let check = kkt_verify(c, kappa, p, tol);
    Some(KktSummary {
        lambda: p.lambda,
        lambda_k: p.lambda_k.clone(),
        residual: check.residual,
        ok: check.ok,
    })
}

fn homotopy(
    norm: &NormalizationReport,
    c: &[f64],
    samples: usize,
    tie_tol: f64,
) -> CliResult<HomotopyReport> {
    if samples < 2 {
        return Err(CliError::Usage(format!(
            "--homotopy-samples needs at least 2 samples, got {samples}"
        )));
    }
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = i as f64 / (samples - 1) as f64;
        let values = homotopy_from_report(norm, c, t)?;
        let face = face_of_scaled(&values, tie_tol).map(|f| f.to_one_based());
        out.push(HomotopySample { t, values, face });
    }
    let constant_face = out[0].face.is_some() && out.iter().all(|s| s.face == out[0].face);
    Ok(HomotopyReport {
        samples: out,
        constant_face,
    })
}

pub(crate) fn run(config: &SceneConfig, normalize: bool, homotopy_samples: Option<usize>) -> CliResult<Run> {
    let tolerances = config.tolerances()?;
    let pair = config.pair()?;
    let surface = tolerances.surface_config();
    let analysis = analyze(&pair, &surface)?;
    let (normalization, special_after) = if normalize {
        let (_, norm, verdict) = normalize_analyzed(&pair, &analysis, &surface)?;
        (norm, Some(verdict))
    } else {
        (normalize_with_eps(&analysis.c, analysis.eps)?, None)
    };
    let c = analysis.c.clone();
    let q = c.len();
    let kappa = analysis.eps / (q as f64 + 1.0);
    let (p, _, r) = analysis.counts();
    let homotopy = match homotopy_samples {
        Some(n) if normalize => Some(homotopy(&normalization, &c, n, tolerances.tie_tol)?),
        Some(_) => return Err(CliError::Usage("--homotopy-samples requires normalize".into())),
        None => None,
    };

    let mut scene = config.clone();
    scene.params = pair.scene().params();
    let report = Report {
        scene,
        p,
        q,
        r,
        critical_points: analysis
            .critical_points
            .iter()
            .map(|cp| CriticalPointEntry {
                position: cp.position,
                index: cp.index,
                value: cp.value,
            })
            .collect(),
        saddle_distances: analysis.distances.clone(),
        epsilon: analysis.eps,
        epsilon_formula: analysis.eps_formula,
        c_prime: normalization.c_prime.clone(),
        scaled_values: normalization.scaled_values.clone(),
        face: normalization.face.to_one_based(),
        t_offsets: normalization.diffeo.offsets().to_vec(),
        kkt: kkt_summary(&c, kappa, &normalization, tolerances.tol_kkt),
        special_before: verdict_from(&c, &analysis.graph, tolerances.tie_tol),
        special_after,
        separatrix_edges: analysis
            .graph
            .edges
            .iter()
            .map(|e| EdgeEntry {
                from: e.from + 1,
                to: e.to + 1,
                ascending: e.ascending,
                length: e.length,
            })
            .collect(),
        tolerances,
        homotopy,
        c,
    };
    Ok(Run {
        pair,
        analysis,
        normalization,
        report,
    })
}

/// Analyze a scene and report its specialness.
pub fn build_report(config: &SceneConfig, normalize: bool, homotopy_samples: Option<usize>) -> CliResult<Report> {
    Ok(run(config, normalize, homotopy_samples)?.report)
}

/// The `analyze` command: the report as deterministic JSON.
pub fn cmd_analyze(config: &SceneConfig) -> CliResult<String> {
    to_json(&build_report(config, false, None)?)
}

/// The `normalize` command: the report including `special_after` and,
/// when requested, the homotopy samples.
pub fn cmd_normalize(config: &SceneConfig, homotopy_samples: Option<usize>) -> CliResult<String> {
    to_json(&build_report(config, true, homotopy_samples)?)
}

/// Projection of `c` onto `κ·P^{q-1}` with its certificate.
pub fn cmd_project_values(c: &[f64], kappa: f64) -> CliResult<ProjectReport> {
    if c.is_empty() {
        return Err(CliError::Usage("empty value list".into()));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(CliError::Usage(format!("--kappa must be positive, got {kappa}")));
    }
    let p = project(c, kappa)?;
    let check = kkt_verify(c, kappa, &p, 1e-9);
    Ok(ProjectReport {
        c: c.to_vec(),
        kappa,
        face: p.face.to_one_based(),
        t_offsets: p.offsets.clone(),
        kkt: KktSummary {
            lambda: p.lambda,
            lambda_k: p.lambda_k.clone(),
            residual: check.residual,
            ok: check.ok,
        },
        c_prime: p.c_prime,
    })
}

/// The `project` command on a comma-separated value list.
pub fn cmd_project(values: &str, kappa: f64) -> CliResult<String> {
    to_json(&cmd_project_values(&super::parse_values(values)?, kappa)?)
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn prepare_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// The `plot` command for a scene: `portrait.svg` and, for two or three
/// saddles, `permutohedron.svg` in `out_dir`.
pub fn cmd_plot(config: &SceneConfig, out_dir: &Path) -> CliResult<PlotFiles> {
    let run = run(config, false, None)?;
    prepare_dir(out_dir)?;
    let mut files = PlotFiles::default();
    let portrait = out_dir.join("portrait.svg");
    write_file(&portrait, &portrait_svg(&run.pair, &run.analysis))?;
    files.written.push(portrait);
    let q = run.analysis.c.len();
    if (2..=3).contains(&q) {
        let kappa = 2.0 / (q as f64 + 1.0);
        let svg = permutohedron_svg(
            &run.analysis.c,
            &run.normalization.scaled_values,
            kappa,
            &run.normalization.face,
            ["c", "(2/ε)c′"],
        )?;
        let path = out_dir.join("permutohedron.svg");
        write_file(&path, &svg)?;
        files.written.push(path);
    }
    Ok(files)
}

/// The `plot` command for a value list: `permutohedron.svg` showing `c`,
/// its projection onto `κ·P^{q-1}` and the face, for `q ∈ {2, 3}`.
pub fn cmd_plot_values(values: &[f64], kappa: f64, out_dir: &Path) -> CliResult<PlotFiles> {
    let projected = cmd_project_values(values, kappa)?;
    let q = values.len();
    if !(2..=3).contains(&q) {
        return Err(CliError::Usage(format!(
            "permutohedron plots need 2 or 3 values, got {q}"
        )));
    }
    let face = OrderedPartition::from_one_based(q, &projected.face)?;
    let svg = permutohedron_svg(values, &projected.c_prime, kappa, &face, ["c", "c′"])?;
    prepare_dir(out_dir)?;
    let path: PathBuf = out_dir.join("permutohedron.svg");
    write_file(&path, &svg)?;
    Ok(PlotFiles { written: vec![path] })
}
