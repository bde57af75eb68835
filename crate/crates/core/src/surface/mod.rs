//! Framed Morse pairs `(f, α)` on concrete surfaces.
//!
//! The companion form is the rotated differential `α = -f_v du + f_u dv`,
//! so `df ∧ α = |∇f|² du∧dv` and the kernel of `α` is spanned by `∇f`.
//! Separatrices are therefore gradient trajectories, and the quadratic form
//! `df² + α²` is `|∇f|²` times the flat metric. After normalization the
//! field becomes `g ∘ f` for an increasing `g` and `α` is rescaled, which
//! makes the form anisotropic; [`FramedPair`] tracks both.

mod critical;
mod distance;
mod pipeline;
mod scene;
mod separatrix;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::reparam::IntervalDiffeo;

pub use critical::{find_critical_points, CriticalPoint};
pub use distance::saddle_distances;
pub use pipeline::{
    analyze, is_special, normalize_pair, verdict_from, Analysis, SpecialnessVerdict,
};
pub(crate) use pipeline::normalize_analyzed;
pub use scene::{Scene, SCENE_NAMES, TAU};
pub use separatrix::{trace_separatrices, SeparatrixEdge, SeparatrixGraph};

pub const MIN_GRID: usize = 64;
pub const MAX_GRID: usize = 4096;

/// Numerical radii and tolerances of the surface backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceConfig {
    /// Radius of the disks around extrema removed from the distance graph.
    pub delta_ext: f64,
    /// A traced trajectory ends once it is this close to a critical point.
    pub r_capture: f64,
    /// Gradient norm accepted at a refined critical point.
    pub tol_crit: f64,
    /// Face tolerance for specialness checks.
    pub tie_tol: f64,
    /// Trajectories longer than this (flat arc length) are abandoned.
    pub max_arc: f64,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        Self {
            delta_ext: 0.15,
            r_capture: 0.05,
            tol_crit: 1e-10,
            tie_tol: 1e-9,
            max_arc: 60.0,
        }
    }
}

/// One reparametrization `x ↦ scale · h⁻¹(x)` applied to the field values,
/// with `α` multiplied by `scale`.
#[derive(Debug, Clone, PartialEq)]
struct ValueMap {
    diffeo: IntervalDiffeo,
    scale: f64,
}

impl ValueMap {
    fn apply(&self, x: f64) -> f64 {
        self.scale * self.diffeo.inverse(x)
    }

    /// Value and derivative at `x`.
    fn apply_with_derivative(&self, x: f64) -> (f64, f64) {
        let t = self.diffeo.inverse(x);
        (self.scale * t, self.scale / self.diffeo.derivative(t))
    }
}

/// A scene sampled on an `n × n` grid, possibly composed with value
/// reparametrizations.
#[derive(Debug, Clone, PartialEq)]
pub struct FramedPair {
    scene: Scene,
    grid_n: usize,
    maps: Arc<Vec<ValueMap>>,
}

impl FramedPair {
    pub fn new(scene: Scene, grid_n: usize) -> Result<Self> {
        if !(MIN_GRID..=MAX_GRID).contains(&grid_n) {
            return Err(invalid(format!(
                "grid_n = {grid_n} outside [{MIN_GRID}, {MAX_GRID}]"
            )));
        }
        Ok(Self {
            scene,
            grid_n,
            maps: Arc::new(Vec::new()),
        })
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn grid_n(&self) -> usize {
        self.grid_n
    }

    /// Whether the field has been composed with a reparametrization.
    pub fn is_composed(&self) -> bool {
        !self.maps.is_empty()
    }

    /// `(scale · h⁻¹ ∘ f, scale · α)`.
    pub fn compose(&self, diffeo: IntervalDiffeo, scale: f64) -> Self {
        let mut maps = (*self.maps).clone();
        maps.push(ValueMap { diffeo, scale });
        Self {
            scene: self.scene.clone(),
            grid_n: self.grid_n,
            maps: Arc::new(maps),
        }
    }

    /// Field value.
    pub fn value(&self, u: f64, v: f64) -> f64 {
        self.maps
            .iter()
            .fold(self.scene.value(u, v), |x, m| m.apply(x))
    }

    /// Derivative `g'` of the composed value map at base value `x`, and `g(x)`.
    fn value_map(&self, x: f64) -> (f64, f64) {
        self.maps.iter().fold((x, 1.0), |(y, dy), m| {
            let (y2, d) = m.apply_with_derivative(y);
            (y2, dy * d)
        })
    }

    /// Product of the `α` scale factors.
    fn alpha_scale(&self) -> f64 {
        self.maps.iter().map(|m| m.scale).product()
    }

    pub fn gradient(&self, u: f64, v: f64) -> [f64; 2] {
        let g = self.scene.gradient(u, v);
        if self.maps.is_empty() {
            return g;
        }
        let (_, d) = self.value_map(self.scene.value(u, v));
        [d * g[0], d * g[1]]
    }

    /// Coefficients `(-s f_v, s f_u)` of `α = α_u du + α_v dv`.
    pub fn alpha(&self, u: f64, v: f64) -> [f64; 2] {
        let g = self.scene.gradient(u, v);
        let s = self.alpha_scale();
        [-s * g[1], s * g[0]]
    }

    /// `√(df(Δ)² + α(Δ)²)` at `(u, v)`.
    pub fn metric_norm(&self, u: f64, v: f64, du: f64, dv: f64) -> f64 {
        let g = self.scene.gradient(u, v);
        let along = g[0] * du + g[1] * dv;
        let across = -g[1] * du + g[0] * dv;
        if self.maps.is_empty() {
            return along.hypot(across);
        }
        let (_, d) = self.value_map(self.scene.value(u, v));
        (d * along).hypot(self.alpha_scale() * across)
    }

    /// `α(Δ)` at `(u, v)`.
    pub fn alpha_pairing(&self, u: f64, v: f64, du: f64, dv: f64) -> f64 {
        let a = self.alpha(u, v);
        a[0] * du + a[1] * dv
    }

    /// Grid spacing per axis.
    pub fn spacing(&self) -> (f64, f64) {
        let (du, dv) = self.scene.domain();
        let n = self.grid_n as f64;
        ((du[1] - du[0]) / n, (dv[1] - dv[0]) / n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reparam::build_diffeo;

    #[test]
    fn rotated_form_wedge_is_gradient_square() {
        let pair = FramedPair::new(Scene::TwoCosines { a: 3.0, b: 1.0 }, 64).unwrap();
        for &(u, v) in &[(0.4, 1.3), (2.2, 5.0)] {
            let g = pair.gradient(u, v);
            let a = pair.alpha(u, v);
            let wedge = g[0] * a[1] - g[1] * a[0];
            assert!((wedge - (g[0] * g[0] + g[1] * g[1])).abs() < 1e-15);
            assert!(pair.alpha_pairing(u, v, g[0], g[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn composed_gradient_matches_finite_differences() {
        let pair = FramedPair::new(Scene::TwoCosines { a: 3.0, b: 1.0 }, 64).unwrap();
        let eps = 1.0 / 6.0;
        let composed = pair.compose(build_diffeo(&[0.5, -0.5], eps).unwrap(), 2.0 / eps);
        let (u, v) = (0.7, 2.9);
        let h = 1e-6;
        let g = composed.gradient(u, v);
        let fu = (composed.value(u + h, v) - composed.value(u - h, v)) / (2.0 * h);
        let fv = (composed.value(u, v + h) - composed.value(u, v - h)) / (2.0 * h);
        assert!((g[0] - fu).abs() < 1e-5 * g[0].abs().max(1.0));
        assert!((g[1] - fv).abs() < 1e-5 * g[1].abs().max(1.0));
    }

    #[test]
    fn grid_bounds() {
        assert!(FramedPair::new(Scene::SphereHeight, 32).is_err());
        assert!(FramedPair::new(Scene::SphereHeight, 8192).is_err());
        assert!(FramedPair::new(Scene::SphereHeight, 64).is_ok());
    }
}
