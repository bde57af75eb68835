//! Critical point search: grid sign-change seeds refined by Newton's method.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::scene::{chart_distance, Scene, TAU};
use super::{FramedPair, SurfaceConfig};
use crate::error::{Error, Result};

const NEWTON_ITERS: usize = 60;
const DEGENERATE_DET: f64 = 1e-10;
const DEDUP_RADIUS: f64 = 1e-6;

/// A nondegenerate critical point. `index` is 0 (minimum), 1 (saddle) or 2
/// (maximum).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub position: [f64; 2],
    pub index: u8,
    pub value: f64,
    /// Unit Hessian eigenvectors for saddles: the first for the positive
    /// eigenvalue (ascending), the second for the negative one.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hessian_eigvecs: Option<[[f64; 2]; 2]>,
}

impl CriticalPoint {
    pub fn is_saddle(&self) -> bool {
        self.index == 1
    }

    pub fn is_extremum(&self) -> bool {
        self.index != 1
    }
}

/// Eigenvalues (ascending) and unit eigenvectors of a symmetric 2×2 matrix.
pub(crate) fn sym_eigen(h: [[f64; 2]; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let (a, b, d) = (h[0][0], h[0][1], h[1][1]);
    let mean = 0.5 * (a + d);
    let rad = (0.5 * (a - d)).hypot(b);
    let (l1, l2) = (mean - rad, mean + rad);
    let theta = 0.5 * (2.0 * b).atan2(a - d);
    // eigenvector of l2 is (cos θ, sin θ)
    let v2 = [theta.cos(), theta.sin()];
    let v1 = [-v2[1], v2[0]];
    ([l1, l2], [v1, v2])
}

fn canonical_angle(x: f64) -> f64 {
    let mut r = x.rem_euclid(TAU);
    if TAU - r < 1e-9 {
        r = 0.0;
    }
    if r.abs() < 1e-13 {
        r = 0.0;
    }
    r
}

fn newton(scene: &Scene, start: [f64; 2], tol: f64) -> Option<[f64; 2]> {
    let mut x = start;
    for _ in 0..NEWTON_ITERS {
        let g = scene.gradient(x[0], x[1]);
        if g[0].hypot(g[1]) <= tol {
            return Some(x);
        }
        let h = scene.hessian(x[0], x[1]);
        let det = h[0][0] * h[1][1] - h[0][1] * h[0][1];
        if det.abs() < 1e-300 {
            return None;
        }
        let mut step = [
            (h[1][1] * g[0] - h[0][1] * g[1]) / det,
            (-h[0][1] * g[0] + h[0][0] * g[1]) / det,
        ];
        let len = step[0].hypot(step[1]);
        if len > 0.5 {
            step = [step[0] * 0.5 / len, step[1] * 0.5 / len];
        }
        x = [x[0] - step[0], x[1] - step[1]];
    }
    let g = scene.gradient(x[0], x[1]);
    (g[0].hypot(g[1]) <= tol).then_some(x)
}

fn stub_points(pair: &FramedPair) -> Vec<CriticalPoint> {
    [([0.0, 0.0], 0u8), ([PI, 0.0], 2u8)]
        .into_iter()
        .map(|(position, index)| CriticalPoint {
            position,
            index,
            value: pair.value(position[0], position[1]),
            hessian_eigvecs: None,
        })
        .collect()
}

/// All critical points of `pair`, sorted by index, then position.
///
/// Seeds are grid cells where both gradient components change sign over the
/// cell corners. The Euler relation `#min - #saddle + #max = χ` is checked.
pub fn find_critical_points(pair: &FramedPair, config: &SurfaceConfig) -> Result<Vec<CriticalPoint>> {
    let scene = pair.scene();
    if scene.is_stub() {
        return Ok(stub_points(pair));
    }
    let n = pair.grid_n();
    let (hu, hv) = pair.spacing();
    let grads: Vec<[f64; 2]> = (0..n * n)
        .map(|k| scene.gradient((k / n) as f64 * hu, (k % n) as f64 * hv))
        .collect();
    let at = |i: usize, j: usize| grads[(i % n) * n + (j % n)];

    let mut found: Vec<[f64; 2]> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let corners = [at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)];
            let straddles = |c: usize| {
                let lo = corners.iter().map(|g| g[c]).fold(f64::INFINITY, f64::min);
                let hi = corners.iter().map(|g| g[c]).fold(f64::NEG_INFINITY, f64::max);
                lo <= 0.0 && hi >= 0.0
            };
            if !(straddles(0) && straddles(1)) {
                continue;
            }
            let seed = [(i as f64 + 0.5) * hu, (j as f64 + 0.5) * hv];
            let x = newton(scene, seed, config.tol_crit).ok_or_else(|| {
                Error::NotMorse(format!(
                    "Newton refinement did not converge from seed ({:.6}, {:.6})",
                    seed[0], seed[1]
                ))
            })?;
            let x = [canonical_angle(x[0]), canonical_angle(x[1])];
            if !found
                .iter()
                .any(|&y| chart_distance(scene, x, y) < DEDUP_RADIUS)
            {
                found.push(x);
            }
        }
    }

    let mut points = Vec::with_capacity(found.len());
    for x in found {
        let h = scene.hessian(x[0], x[1]);
        let det = h[0][0] * h[1][1] - h[0][1] * h[0][1];
        let scale = h[0][0].abs().max(h[1][1].abs()).max(h[0][1].abs()).max(1.0);
        if det.abs() < DEGENERATE_DET * scale * scale {
            return Err(Error::NotMorse(format!(
                "degenerate Hessian at ({:.6}, {:.6})",
                x[0], x[1]
            )));
        }
        let (vals, vecs) = sym_eigen(h);
        let index = vals.iter().filter(|&&l| l < 0.0).count() as u8;
        points.push(CriticalPoint {
            position: x,
            index,
            value: pair.value(x[0], x[1]),
            hessian_eigvecs: (index == 1).then_some([vecs[1], vecs[0]]),
        });
    }
    points.sort_by(|a, b| {
        a.index
            .cmp(&b.index)
            .then(a.position[0].total_cmp(&b.position[0]))
            .then(a.position[1].total_cmp(&b.position[1]))
    });

    let count = |k: u8| points.iter().filter(|p| p.index == k).count() as i64;
    let euler = count(0) - count(1) + count(2);
    if euler != scene.euler_characteristic() {
        return Err(Error::NotMorse(format!(
            "found {} minima, {} saddles, {} maxima; Euler characteristic {euler} ≠ {}",
            count(0),
            count(1),
            count(2),
            scene.euler_characteristic()
        )));
    }
    Ok(points)
}
