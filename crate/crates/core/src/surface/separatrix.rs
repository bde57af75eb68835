//! Separatrices: kernel curves of `α` leaving each saddle.
//!
//! With the rotated-differential framing these are gradient trajectories of
//! `f`. Each saddle launches four of them, two ascending along the
//! positive-curvature eigenvector and two descending along the other, and
//! each is integrated in flat arc length with step-doubling RK4.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::critical::CriticalPoint;
use super::scene::{chart_distance, wrap_delta, Scene};
use super::{FramedPair, SurfaceConfig};
use crate::error::{Error, Result};

const STEP_TOL: f64 = 1e-11;
const H_MIN: f64 = 1e-7;
const H_MAX: f64 = 0.002;
/// Offset from the saddle along the eigenvector where integration begins.
const LAUNCH: f64 = 1e-3;
/// Trajectories captured by an extremum are followed until this close.
const FINAL_RADIUS: f64 = 1e-6;

/// A traced separatrix from the saddle `from` to the critical point `to`
/// (indices into the critical point list).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixEdge {
    pub from: usize,
    pub to: usize,
    pub ascending: bool,
    /// Unwrapped chart coordinates, starting at the saddle.
    pub polyline: Vec<[f64; 2]>,
    /// Length under `√(df² + α²)`.
    pub length: f64,
    /// Accumulated `∫α` along the polyline.
    pub alpha_integral: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SeparatrixGraph {
    pub edges: Vec<SeparatrixEdge>,
    /// Unordered saddle pairs `(i, j)`, `i < j`, numbered among the saddles
    /// (0-based), joined by a traced separatrix.
    pub saddle_saddle_pairs: BTreeSet<(usize, usize)>,
}

fn direction(scene: &Scene, x: [f64; 2], sign: f64) -> Option<[f64; 2]> {
    let g = scene.gradient(x[0], x[1]);
    let n = g[0].hypot(g[1]);
    (n > 0.0).then(|| [sign * g[0] / n, sign * g[1] / n])
}

fn rk4(scene: &Scene, x: [f64; 2], h: f64, sign: f64) -> Option<[f64; 2]> {
    let k1 = direction(scene, x, sign)?;
    let k2 = direction(scene, [x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1]], sign)?;
    let k3 = direction(scene, [x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1]], sign)?;
    let k4 = direction(scene, [x[0] + h * k3[0], x[1] + h * k3[1]], sign)?;
    Some([
        x[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        x[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ])
}

/// One accepted adaptive step; returns the new point, the step used and the
/// proposal for the next step.
fn adaptive_step(scene: &Scene, x: [f64; 2], mut h: f64, h_cap: f64, sign: f64) -> Option<([f64; 2], f64, f64)> {
    h = h.min(h_cap);
    loop {
        let full = rk4(scene, x, h, sign)?;
        let half = rk4(scene, rk4(scene, x, 0.5 * h, sign)?, 0.5 * h, sign)?;
        let err = (full[0] - half[0]).hypot(full[1] - half[1]);
        if err <= STEP_TOL || h <= H_MIN {
            let grow = if err > 0.0 {
                (0.9 * (STEP_TOL / err).powf(0.2)).clamp(0.2, 2.0)
            } else {
                2.0
            };
            return Some((half, h, (h * grow).min(H_MAX)));
        }
        h = (h * (0.9 * (STEP_TOL / err).powf(0.2)).max(0.2)).max(H_MIN);
    }
}

/// Point `target` shifted by whole periods to lie next to `near`.
fn unwrap_near(scene: &Scene, target: [f64; 2], near: [f64; 2]) -> [f64; 2] {
    let t = scene.is_torus();
    [
        near[0] + wrap_delta(target[0] - near[0], t),
        near[1] + wrap_delta(target[1] - near[1], t),
    ]
}

fn trace_one(
    pair: &FramedPair,
    cps: &[CriticalPoint],
    origin: usize,
    dir: [f64; 2],
    sign: f64,
    config: &SurfaceConfig,
) -> Result<(usize, Vec<[f64; 2]>)> {
    let scene = pair.scene();
    let start = cps[origin].position;
    let label = || {
        format!(
            "{} along ({:.3}, {:.3})",
            if sign > 0.0 { "ascending" } else { "descending" },
            dir[0],
            dir[1]
        )
    };
    let incomplete = || Error::TracingIncomplete {
        saddle: origin + 1,
        direction: label(),
    };

    let mut polyline = vec![start, [start[0] + LAUNCH * dir[0], start[1] + LAUNCH * dir[1]]];
    let mut x = polyline[1];
    let mut h = 1e-3;
    let mut arc = LAUNCH;
    let mut captured: Option<usize> = None;

    loop {
        if captured.is_none() {
            captured = cps
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != origin)
                .find(|(_, cp)| chart_distance(scene, x, cp.position) < config.r_capture)
                .map(|(k, _)| k);
        }
        if let Some(k) = captured {
            let target = unwrap_near(scene, cps[k].position, x);
            let dist = (target[0] - x[0]).hypot(target[1] - x[1]);
            if cps[k].is_saddle() || dist <= FINAL_RADIUS {
                polyline.push(target);
                return Ok((k, polyline));
            }
            // approach the extremum with steps no longer than half the gap
            let Some((next, used, proposal)) = adaptive_step(scene, x, h, 0.5 * dist, sign) else {
                polyline.push(target);
                return Ok((k, polyline));
            };
            let next_dist = (target[0] - next[0]).hypot(target[1] - next[1]);
            if next_dist >= dist {
                polyline.push(target);
                return Ok((k, polyline));
            }
            x = next;
            arc += used;
            h = proposal;
            polyline.push(x);
            continue;
        }
        if arc > config.max_arc {
            return Err(incomplete());
        }
        let (next, used, proposal) =
            adaptive_step(scene, x, h, 0.5 * config.r_capture, sign).ok_or_else(incomplete)?;
        x = next;
        arc += used;
        h = proposal;
        polyline.push(x);
    }
}

/// Metric length and `∫α` of a polyline, midpoint rule per segment.
pub(crate) fn polyline_measures(pair: &FramedPair, polyline: &[[f64; 2]]) -> (f64, f64) {
    let mut length = 0.0;
    let mut alpha = 0.0;
    for w in polyline.windows(2) {
        let (du, dv) = (w[1][0] - w[0][0], w[1][1] - w[0][1]);
        let (mu, mv) = (0.5 * (w[0][0] + w[1][0]), 0.5 * (w[0][1] + w[1][1]));
        length += pair.metric_norm(mu, mv, du, dv);
        alpha += pair.alpha_pairing(mu, mv, du, dv);
    }
    (length, alpha)
}

/// Trace the four separatrices of every saddle in `cps`.
pub fn trace_separatrices(
    pair: &FramedPair,
    cps: &[CriticalPoint],
    config: &SurfaceConfig,
) -> Result<SeparatrixGraph> {
    let saddle_number: Vec<Option<usize>> = {
        let mut next = 0;
        cps.iter()
            .map(|cp| {
                cp.is_saddle().then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    };
    let mut graph = SeparatrixGraph::default();
    for (origin, cp) in cps.iter().enumerate() {
        let Some([up, down]) = cp.hessian_eigvecs else {
            continue;
        };
        let launches = [
            (up, 1.0),
            ([-up[0], -up[1]], 1.0),
            (down, -1.0),
            ([-down[0], -down[1]], -1.0),
        ];
        for (dir, sign) in launches {
            let (to, polyline) = trace_one(pair, cps, origin, dir, sign, config)?;
            let (length, alpha_integral) = polyline_measures(pair, &polyline);
            if let (Some(a), Some(b)) = (saddle_number[origin], saddle_number[to]) {
                graph.saddle_saddle_pairs.insert((a.min(b), a.max(b)));
            }
            graph.edges.push(SeparatrixEdge {
                from: origin,
                to,
                ascending: sign > 0.0,
                polyline,
                length,
                alpha_integral,
            });
        }
    }
    Ok(graph)
}
