//! Analysis, specialness and normalization of framed pairs.

use serde::{Deserialize, Serialize};

use super::critical::{find_critical_points, CriticalPoint};
use super::distance::saddle_distances;
use super::separatrix::{trace_separatrices, SeparatrixGraph};
use super::{FramedPair, SurfaceConfig};
use crate::error::Result;
use crate::permutohedron::{ascending_order, membership, open_face_of, prefix_bound, OrderedPartition};
use crate::reparam::{epsilon, normalize_with_eps, NormalizationReport};

/// Everything the normalization consumes, read off a concrete pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub critical_points: Vec<CriticalPoint>,
    /// Saddle values in saddle order.
    pub c: Vec<f64>,
    pub distances: Vec<Vec<f64>>,
    pub graph: SeparatrixGraph,
    /// `ε` after the separatrix safeguard.
    pub eps: f64,
    /// `ε` from the distance formula alone.
    pub eps_formula: f64,
}

impl Analysis {
    /// Counts of minima, saddles and maxima.
    pub fn counts(&self) -> (usize, usize, usize) {
        let count = |k| self.critical_points.iter().filter(|c| c.index == k).count();
        (count(0), count(1), count(2))
    }
}

fn saddle_values(cps: &[CriticalPoint]) -> Vec<f64> {
    cps.iter().filter(|c| c.is_saddle()).map(|c| c.value).collect()
}

/// Critical points, saddle distances, separatrices and `ε`.
///
/// The formula value of `ε` is further capped by a third of every nonzero
/// value gap between separatrix-connected saddles.
pub fn analyze(pair: &FramedPair, config: &SurfaceConfig) -> Result<Analysis> {
    let critical_points = find_critical_points(pair, config)?;
    let c = saddle_values(&critical_points);
    let distances = saddle_distances(pair, &critical_points, config)?;
    let graph = trace_separatrices(pair, &critical_points, config)?;
    let eps_formula = epsilon(&c, &distances)?;
    let mut eps = eps_formula;
    for &(i, j) in &graph.saddle_saddle_pairs {
        let gap = (c[i] - c[j]).abs();
        if gap > 0.0 {
            eps = eps.min(gap / 3.0);
        }
    }
    Ok(Analysis {
        critical_points,
        c,
        distances,
        graph,
        eps,
        eps_formula,
    })
}

/// Result of checking both conditions of specialness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecialnessVerdict {
    /// Saddle values lie in `(2/(q+1))·P^{q-1}`.
    pub condition_i: bool,
    /// Signed distance of the saddle values to the boundary of that
    /// polytope (negative outside). Absent when there are no saddles.
    pub margin: Option<f64>,
    /// No separatrix joins two saddles of one face block. Absent when
    /// condition (i) fails and the face is undefined.
    pub condition_ii: Option<bool>,
    /// Offending saddle pairs, 1-based.
    pub violations: Vec<(usize, usize)>,
    /// Face of the saddle values, 1-based blocks.
    pub face: Option<OrderedPartition>,
    pub special: bool,
}

/// Signed margin inside the hyperplane `Σc = 0`: each sorted prefix slack
/// divided by the norm of its facet normal; off the hyperplane, minus the
/// distance to it.
fn signed_margin(c: &[f64], kappa: f64) -> f64 {
    let q = c.len();
    let qf = q as f64;
    let total: f64 = c.iter().sum();
    let off_plane = total.abs() / qf.sqrt();
    if q == 1 {
        return -off_plane;
    }
    let order = ascending_order(c);
    let mut sum = 0.0;
    let mut inner = f64::INFINITY;
    for (m, &j) in order.iter().enumerate().take(q - 1) {
        sum += c[j];
        let size = (m + 1) as f64;
        let norm = (size * (qf - size) / qf).sqrt();
        inner = inner.min((sum - prefix_bound(kappa, q, m + 1)) / norm);
    }
    if off_plane > 1e-12 {
        inner.min(-off_plane)
    } else {
        inner
    }
}

/// Specialness from saddle values and the saddle-saddle connections.
pub fn verdict_from(c: &[f64], graph: &SeparatrixGraph, tol: f64) -> SpecialnessVerdict {
    let q = c.len();
    if q == 0 {
        return SpecialnessVerdict {
            condition_i: true,
            margin: None,
            condition_ii: Some(true),
            violations: vec![],
            face: Some(OrderedPartition::single_block(0)),
            special: true,
        };
    }
    let kappa = 2.0 / (q as f64 + 1.0);
    let margin = signed_margin(c, kappa);
    let condition_i = membership(c, kappa, tol).unwrap_or(false);
    if !condition_i {
        return SpecialnessVerdict {
            condition_i,
            margin: Some(margin),
            condition_ii: None,
            violations: vec![],
            face: None,
            special: false,
        };
    }
    let face = open_face_of(c, kappa, tol).expect("membership already checked");
    let violations: Vec<(usize, usize)> = graph
        .saddle_saddle_pairs
        .iter()
        .filter(|&&(i, j)| face.block_of(i) == face.block_of(j))
        .map(|&(i, j)| (i + 1, j + 1))
        .collect();
    let condition_ii = violations.is_empty();
    SpecialnessVerdict {
        condition_i,
        margin: Some(margin),
        condition_ii: Some(condition_ii),
        violations,
        face: Some(face),
        special: condition_ii,
    }
}

/// Specialness of a pair. Needs critical points and separatrices, not
/// distances.
pub fn is_special(pair: &FramedPair, config: &SurfaceConfig) -> Result<SpecialnessVerdict> {
    let cps = find_critical_points(pair, config)?;
    let graph = trace_separatrices(pair, &cps, config)?;
    Ok(verdict_from(&saddle_values(&cps), &graph, config.tie_tol))
}

/// The normalization `(f, α) ↦ (2/ε)(h⁻¹∘f, α)`, its value-level report and
/// the verdict on the composed pair.
pub fn normalize_pair(
    pair: &FramedPair,
    config: &SurfaceConfig,
) -> Result<(FramedPair, NormalizationReport, SpecialnessVerdict)> {
    let analysis = analyze(pair, config)?;
    normalize_analyzed(pair, &analysis, config)
}

pub(crate) fn normalize_analyzed(
    pair: &FramedPair,
    analysis: &Analysis,
    config: &SurfaceConfig,
) -> Result<(FramedPair, NormalizationReport, SpecialnessVerdict)> {
    let report = normalize_with_eps(&analysis.c, analysis.eps)?;
    let out = pair.compose(report.diffeo.clone(), 2.0 / report.eps);
    let verdict = is_special(&out, config)?;
    Ok((out, report, verdict))
}
