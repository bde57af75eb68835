//! Analytic scalar fields used as test surfaces.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{invalid, Result};

pub const TAU: f64 = 2.0 * PI;

/// A named analytic field `f(u, v)` with value range `[-1, 1]`, a single
/// minimum at `-1` and a single maximum at `+1`.
#[derive(Debug, Clone, PartialEq)]
pub enum Scene {
    /// `f = (a cos u + b cos v)/(a + b)` on the flat torus.
    TwoCosines { a: f64, b: f64 },
    /// `f = (a cos u + b cos v + g cos(u - v) - g)/(a + b)` on the flat
    /// torus. Its gradient flow is not separable.
    CoupledCosines { a: f64, b: f64, g: f64 },
    /// Height function of the round sphere in the polar chart
    /// `(u, v) = (polar angle, azimuth)`, `f = -cos u`. A stand-in for the
    /// saddle-free case; critical points sit on the chart singularities and
    /// are supplied directly.
    SphereHeight,
}

/// Names accepted by [`Scene::from_name`].
pub const SCENE_NAMES: [&str; 3] = ["two_cosines", "coupled_cosines", "sphere_height"];

fn param(params: &BTreeMap<String, f64>, key: &str, default: f64) -> Result<f64> {
    let v = params.get(key).copied().unwrap_or(default);
    if !v.is_finite() {
        return Err(invalid(format!("parameter {key} must be finite")));
    }
    Ok(v)
}

impl Scene {
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let allowed: &[&str] = match name {
            "two_cosines" => &["a", "b"],
            "coupled_cosines" => &["a", "b", "g"],
            "sphere_height" => &[],
            other => {
                return Err(invalid(format!(
                    "unknown scene {other:?}; expected one of {SCENE_NAMES:?}"
                )))
            }
        };
        if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(invalid(format!("scene {name} has no parameter {k:?}")));
        }
        let scene = match name {
            "two_cosines" => Scene::TwoCosines {
                a: param(params, "a", 1.0)?,
                b: param(params, "b", 1.0)?,
            },
            "coupled_cosines" => Scene::CoupledCosines {
                a: param(params, "a", 2.0)?,
                b: param(params, "b", 1.0)?,
                g: param(params, "g", 0.25)?,
            },
            _ => Scene::SphereHeight,
        };
        scene.validate()?;
        Ok(scene)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Scene::TwoCosines { a, b } => {
                if !(a > 0.0 && b > 0.0) {
                    return Err(invalid("two_cosines needs a > 0 and b > 0"));
                }
            }
            Scene::CoupledCosines { a, b, g } => {
                if !(a > 0.0 && b > 0.0) {
                    return Err(invalid("coupled_cosines needs a > 0 and b > 0"));
                }
                // below this bound the four lattice points are the only critical points, all nondegenerate
                if !(g.abs() < 0.5 * a.min(b) * a.max(b) / (a + b)) {
                    return Err(invalid(format!(
                        "coupled_cosines needs |g| < ab/(2(a+b)) = {}",
                        0.5 * a * b / (a + b)
                    )));
                }
            }
            Scene::SphereHeight => {}
        }
        Ok(())
    }

    /// The scenes exercised by the test suites.
    pub fn registry() -> Vec<Scene> {
        vec![
            Scene::TwoCosines { a: 1.0, b: 1.0 },
            Scene::TwoCosines { a: 3.0, b: 1.0 },
            Scene::CoupledCosines {
                a: 2.0,
                b: 1.0,
                g: 0.25,
            },
            Scene::SphereHeight,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scene::TwoCosines { .. } => "two_cosines",
            Scene::CoupledCosines { .. } => "coupled_cosines",
            Scene::SphereHeight => "sphere_height",
        }
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        match *self {
            Scene::TwoCosines { a, b } => {
                m.insert("a".into(), a);
                m.insert("b".into(), b);
            }
            Scene::CoupledCosines { a, b, g } => {
                m.insert("a".into(), a);
                m.insert("b".into(), b);
                m.insert("g".into(), g);
            }
            Scene::SphereHeight => {}
        }
        m
    }

    /// Whether the critical points are supplied rather than computed.
    pub fn is_stub(&self) -> bool {
        matches!(self, Scene::SphereHeight)
    }

    /// Whether both coordinates are `2π`-periodic.
    pub fn is_torus(&self) -> bool {
        !self.is_stub()
    }

    pub fn euler_characteristic(&self) -> i64 {
        if self.is_torus() {
            0
        } else {
            2
        }
    }

    /// Coordinate ranges `([u_min, u_max], [v_min, v_max])`.
    pub fn domain(&self) -> ([f64; 2], [f64; 2]) {
        if self.is_torus() {
            ([0.0, TAU], [0.0, TAU])
        } else {
            ([0.0, PI], [0.0, TAU])
        }
    }

    pub fn value(&self, u: f64, v: f64) -> f64 {
        match *self {
            Scene::TwoCosines { a, b } => (a * u.cos() + b * v.cos()) / (a + b),
            Scene::CoupledCosines { a, b, g } => {
                (a * u.cos() + b * v.cos() + g * (u - v).cos() - g) / (a + b)
            }
            Scene::SphereHeight => -u.cos(),
        }
    }

    pub fn gradient(&self, u: f64, v: f64) -> [f64; 2] {
        match *self {
            Scene::TwoCosines { a, b } => {
                let n = a + b;
                [-a * u.sin() / n, -b * v.sin() / n]
            }
            Scene::CoupledCosines { a, b, g } => {
                let n = a + b;
                let s = (u - v).sin();
                [(-a * u.sin() - g * s) / n, (-b * v.sin() + g * s) / n]
            }
            Scene::SphereHeight => [u.sin(), 0.0],
        }
    }

    /// `[[f_uu, f_uv], [f_uv, f_vv]]`
    pub fn hessian(&self, u: f64, v: f64) -> [[f64; 2]; 2] {
        match *self {
            Scene::TwoCosines { a, b } => {
                let n = a + b;
                [[-a * u.cos() / n, 0.0], [0.0, -b * v.cos() / n]]
            }
            Scene::CoupledCosines { a, b, g } => {
                let n = a + b;
                let c = (u - v).cos();
                let uv = g * c / n;
                [[(-a * u.cos() - g * c) / n, uv], [uv, (-b * v.cos() - g * c) / n]]
            }
            Scene::SphereHeight => [[u.cos(), 0.0], [0.0, 0.0]],
        }
    }
}

/// Difference `x - y` reduced to `(-π, π]` on periodic axes.
pub(crate) fn wrap_delta(d: f64, periodic: bool) -> f64 {
    if !periodic {
        return d;
    }
    let r = (d + PI).rem_euclid(TAU) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

/// Euclidean distance on the flat torus (or plane, for the chart scene).
pub(crate) fn chart_distance(scene: &Scene, p: [f64; 2], q: [f64; 2]) -> f64 {
    let t = scene.is_torus();
    wrap_delta(p[0] - q[0], t).hypot(wrap_delta(p[1] - q[1], t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        for scene in Scene::registry() {
            for &(u, v) in &[(0.3, 1.1), (2.0, -0.7), (4.4, 5.9)] {
                let h = 1e-6;
                let g = scene.gradient(u, v);
                let fu = (scene.value(u + h, v) - scene.value(u - h, v)) / (2.0 * h);
                let fv = (scene.value(u, v + h) - scene.value(u, v - h)) / (2.0 * h);
                assert!((g[0] - fu).abs() < 1e-8 && (g[1] - fv).abs() < 1e-8, "{scene:?}");
                let hs = scene.hessian(u, v);
                let gu = scene.gradient(u + h, v);
                let gm = scene.gradient(u - h, v);
                assert!((hs[0][0] - (gu[0] - gm[0]) / (2.0 * h)).abs() < 1e-7);
                assert!((hs[0][1] - (gu[1] - gm[1]) / (2.0 * h)).abs() < 1e-7);
                let gv = scene.gradient(u, v + h);
                let gw = scene.gradient(u, v - h);
                assert!((hs[1][1] - (gv[1] - gw[1]) / (2.0 * h)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn from_name_checks_parameters() {
        let mut p = BTreeMap::new();
        p.insert("a".to_string(), 3.0);
        assert_eq!(
            Scene::from_name("two_cosines", &p).unwrap(),
            Scene::TwoCosines { a: 3.0, b: 1.0 }
        );
        p.insert("z".to_string(), 1.0);
        assert!(Scene::from_name("two_cosines", &p).is_err());
        assert!(Scene::from_name("klein_bottle", &BTreeMap::new()).is_err());
        let mut g = BTreeMap::new();
        g.insert("g".to_string(), 0.9);
        assert!(Scene::from_name("coupled_cosines", &g).is_err());
    }

    #[test]
    fn wrap_delta_reduces() {
        assert!((wrap_delta(TAU - 0.1, true) + 0.1).abs() < 1e-12);
        assert_eq!(wrap_delta(TAU - 0.1, false), TAU - 0.1);
        assert_eq!(wrap_delta(PI, true), PI);
    }
}
