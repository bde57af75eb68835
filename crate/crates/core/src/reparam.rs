//! Smooth steps and the interval diffeomorphism that moves projected saddle
//! values back onto the original ones.
//!
//! For saddle values `c ∈ (-1, 1)^q` and a scale `ε`, let `c'` be the
//! projection of `c` onto `(ε/(q+1))·P^{q-1}` with face `(J_1, …, J_s)` and
//! offsets `t_1 ≤ … ≤ t_s`. With `t_0 = -1 + ε/2` and `t_{s+1} = 1 - ε/2`,
//!
//! ```text
//! h(t) = t + t_0 + Σ_{k=0}^{s} (t_{k+1} - t_k) · I_{a_k, b_k}(t),
//! a_k = (r_k/(q+1) - 1/2)·ε,   b_k = ((r_k + 1)/(q+1) - 1/2)·ε,
//! ```
//!
//! where `r_k = |J_1| + … + |J_k|`. Each step `I_{a,b}` is flat outside the
//! middle third of `[a, b]`, so `h` is a translation `t ↦ t + t_k` near the
//! projected values of block `k` and near both endpoints.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::permutohedron::{membership, open_face_of, OrderedPartition, DEFAULT_TOL};
use crate::projection::{project, ProjectionResult};

/// Offset gaps below this are treated as zero: the adjacent blocks are
/// merged and their step term dropped.
pub const MERGE_GAP: f64 = 1e-12;

/// Default value tolerance of [`IntervalDiffeo::inverse`].
pub const INVERSE_TOL: f64 = 1e-13;

/// Slack allowed on the range precondition `|c_j| ≤ 1 - 3ε`.
const RANGE_SLACK: f64 = 1e-12;

fn bump(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

fn bump_derivative(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp() / (x * x)
    } else {
        0.0
    }
}

/// Smooth nondecreasing step `I_{a,b}`: identically 0 on `(-∞, (2a+b)/3]`,
/// identically 1 on `[(a+2b)/3, ∞)`.
///
/// Built from `φ(x) = exp(-1/x)` as `φ(x) / (φ(x) + φ(1-x))` on the middle
/// third, which also makes it symmetric: `I(a + b - t) = 1 - I(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothStep {
    a: f64,
    b: f64,
}

impl SmoothStep {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(invalid(format!("smooth step needs a < b, got a = {a}, b = {b}")));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Interval on which the step is not locally constant.
    pub fn transition(&self) -> (f64, f64) {
        ((2.0 * self.a + self.b) / 3.0, (self.a + 2.0 * self.b) / 3.0)
    }

    /// Position in the transition interval, measured from its midpoint so
    /// that the midpoint maps to exactly 1/2.
    fn local(&self, t: f64) -> (f64, f64) {
        let mid = 0.5 * (self.a + self.b);
        let width = (self.b - self.a) / 3.0;
        (0.5 + (t - mid) / width, width)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (x, _) = self.local(t);
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let (p, r) = (bump(x), bump(1.0 - x));
        p / (p + r)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let (x, width) = self.local(t);
        if x <= 0.0 || x >= 1.0 {
            return 0.0;
        }
        let (p, r) = (bump(x), bump(1.0 - x));
        let (dp, dr) = (bump_derivative(x), bump_derivative(1.0 - x));
        let denom = p + r;
        (dp * r + p * dr) / (denom * denom) / width
    }
}

/// `I_{a,b}(t)`.
pub fn smooth_step_eval(step: &SmoothStep, t: f64) -> f64 {
    step.eval(t)
}

/// `ε = ⅓·min{1, min_{j₁<j₂} d_{j₁j₂}, 1 - max_j |c_j|}`.
pub fn epsilon(c: &[f64], d: &[Vec<f64>]) -> Result<f64> {
    let q = c.len();
    for (j, &cj) in c.iter().enumerate() {
        if !(cj.abs() < 1.0) {
            return Err(invalid(format!(
                "saddle value c_{} = {cj} is not inside (-1, 1)",
                j + 1
            )));
        }
    }
    let mut m: f64 = 1.0;
    if q >= 2 {
        if d.len() != q || d.iter().any(|row| row.len() != q) {
            return Err(invalid(format!("distance matrix must be {q}×{q}")));
        }
        for i in 0..q {
            for k in (i + 1)..q {
                let dik = d[i][k];
                if !(dik > 0.0) || !dik.is_finite() {
                    return Err(invalid(format!(
                        "distance d_{},{} = {dik} must be positive",
                        i + 1,
                        k + 1
                    )));
                }
                if (dik - d[k][i]).abs() > 1e-12 * dik.max(1.0) {
                    return Err(invalid("distance matrix is not symmetric"));
                }
                m = m.min(dik);
            }
        }
    }
    let gap = 1.0 - c.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    Ok(m.min(gap) / 3.0)
}

/// One translated segment of `h`: a step of height `jump` over `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct StepTerm {
    step: SmoothStep,
    jump: f64,
}

/// The diffeomorphism `h_{c,ε}: [-ε/2, ε/2] → [-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalDiffeo {
    eps: f64,
    c_values: Vec<f64>,
    /// `None` when there are no saddles.
    projection: Option<ProjectionResult>,
    /// `(t_0, t_1, …, t_s, t_{s+1})`
    t: Vec<f64>,
    terms: Vec<StepTerm>,
}

impl IntervalDiffeo {
    /// Assemble `h_{c,ε}` without the `F¹` range checks. Requires
    /// `|c_j| < 1 - ε` so that `t_0 < t_1` and `t_s < t_{s+1}`.
    fn assemble(c: &[f64], eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 2.0) {
            return Err(invalid(format!("eps = {eps} out of range")));
        }
        let q = c.len();
        let t_first = -1.0 + eps / 2.0;
        let t_last = 1.0 - eps / 2.0;

        let (projection, mut offsets, sizes) = if q == 0 {
            (None, vec![], vec![])
        } else {
            let p = project(c, eps / (q as f64 + 1.0))?;
            let offsets = p.offsets.clone();
            let sizes = p.face.cumulative_sizes();
            (Some(p), offsets, sizes)
        };

        for k in 1..offsets.len() {
            if offsets[k] - offsets[k - 1] < MERGE_GAP {
                offsets[k] = offsets[k - 1];
            }
        }

        let mut t = Vec::with_capacity(offsets.len() + 2);
        t.push(t_first);
        t.extend(offsets);
        t.push(t_last);
        if t.windows(2).any(|w| w[0] > w[1]) || t[0] >= t[1] || t[t.len() - 2] >= t[t.len() - 1] {
            return Err(invalid(format!(
                "offsets {t:?} violate t_0 < t_1 ≤ … ≤ t_s < t_(s+1); saddle values too close to ±1"
            )));
        }

        // r_0 = 0, r_1, …, r_s = q
        let mut r = Vec::with_capacity(sizes.len() + 1);
        r.push(0);
        r.extend(sizes);
        let n = q as f64 + 1.0;
        let mut terms = Vec::new();
        for k in 0..r.len() {
            let jump = t[k + 1] - t[k];
            if jump == 0.0 {
                continue;
            }
            let a = (r[k] as f64 / n - 0.5) * eps;
            let b = ((r[k] as f64 + 1.0) / n - 0.5) * eps;
            terms.push(StepTerm {
                step: SmoothStep::new(a, b)?,
                jump,
            });
        }

        Ok(Self {
            eps,
            c_values: c.to_vec(),
            projection,
            t,
            terms,
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn q(&self) -> usize {
        self.c_values.len()
    }

    pub fn c_values(&self) -> &[f64] {
        &self.c_values
    }

    pub fn c_prime(&self) -> &[f64] {
        self.projection.as_ref().map_or(&[], |p| p.c_prime.as_slice())
    }

    pub fn projection(&self) -> Option<&ProjectionResult> {
        self.projection.as_ref()
    }

    pub fn face(&self) -> OrderedPartition {
        self.projection
            .as_ref()
            .map_or_else(|| OrderedPartition::single_block(0), |p| p.face.clone())
    }

    /// Offsets `(t_0, t_1, …, t_s, t_{s+1})`.
    pub fn offsets(&self) -> &[f64] {
        &self.t
    }

    /// Domain `[-ε/2, ε/2]`.
    pub fn domain(&self) -> (f64, f64) {
        (-self.eps / 2.0, self.eps / 2.0)
    }

    /// Radius `ε/(3(q+1))` of the neighborhoods on which `h' ≡ 1`.
    pub fn flat_radius(&self) -> f64 {
        self.eps / (3.0 * (self.q() as f64 + 1.0))
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut y = t + self.t[0];
        for term in &self.terms {
            y += term.jump * term.step.eval(t);
        }
        y
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let mut dy = 1.0;
        for term in &self.terms {
            dy += term.jump * term.step.derivative(t);
        }
        dy
    }

    /// `h⁻¹(y)` to within [`INVERSE_TOL`] in value.
    pub fn inverse(&self, y: f64) -> f64 {
        self.inverse_with_tol(y, INVERSE_TOL)
    }

    /// Bisection for `h(t) = y`; `y` is clamped to `[-1, 1]`.
    pub fn inverse_with_tol(&self, y: f64, tol: f64) -> f64 {
        let (mut lo, mut hi) = self.domain();
        if y <= self.eval(lo) {
            return lo;
        }
        if y >= self.eval(hi) {
            return hi;
        }
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            let v = self.eval(mid);
            if (v - y).abs() <= tol || mid <= lo || mid >= hi {
                break;
            }
            if v < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        mid
    }
}

/// `h_{c,ε}`, checking `ε ∈ (0, 1/3]` and `|c_j| ≤ 1 - 3ε`.
pub fn build_diffeo(c: &[f64], eps: f64) -> Result<IntervalDiffeo> {
    if !(eps > 0.0 && eps <= 1.0 / 3.0 + RANGE_SLACK) {
        return Err(invalid(format!("eps must lie in (0, 1/3], got {eps}")));
    }
    let bound = 1.0 - 3.0 * eps + RANGE_SLACK;
    for (j, &cj) in c.iter().enumerate() {
        if !(cj.abs() <= bound) {
            return Err(invalid(format!(
                "saddle value c_{} = {cj} violates |c| ≤ 1 - 3ε = {}",
                j + 1,
                1.0 - 3.0 * eps
            )));
        }
    }
    IntervalDiffeo::assemble(c, eps)
}

/// `h⁻¹(y)` with `|h(result) - y| ≤ tol` whenever the bisection can reach it.
pub fn invert_diffeo(h: &IntervalDiffeo, y: f64, tol: f64) -> f64 {
    h.inverse_with_tol(y, tol)
}

/// Saddle values after normalization, with the data that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationReport {
    pub eps: f64,
    pub c_prime: Vec<f64>,
    /// `(2/ε)·c'`, a point of `(2/(q+1))·P^{q-1}`.
    pub scaled_values: Vec<f64>,
    pub face: OrderedPartition,
    pub diffeo: IntervalDiffeo,
}

/// Normalize saddle values with the `ε` derived from `c` and `d`.
pub fn normalize_saddle_values(c: &[f64], d: &[Vec<f64>]) -> Result<NormalizationReport> {
    let eps = epsilon(c, d)?;
    normalize_with_eps(c, eps)
}

/// Normalize saddle values at a given `ε` (which callers may have reduced
/// below the formula value).
pub fn normalize_with_eps(c: &[f64], eps: f64) -> Result<NormalizationReport> {
    let diffeo = build_diffeo(c, eps)?;
    let c_prime = diffeo.c_prime().to_vec();
    let scaled_values: Vec<f64> = c_prime.iter().map(|x| 2.0 / eps * x).collect();
    let face = diffeo.face();
    let q = c.len();
    if q > 0 {
        let kappa = 2.0 / (q as f64 + 1.0);
        debug_assert!(membership(&scaled_values, kappa, DEFAULT_TOL).unwrap_or(false));
    }
    Ok(NormalizationReport {
        eps,
        c_prime,
        scaled_values,
        face,
        diffeo,
    })
}

/// The unit-interval diffeomorphism `H(c, κ) = h_{c,κ} ∘ m_{κ/2}`, where
/// `m_{κ/2}(t) = κt/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitDiffeo {
    kappa: f64,
    inner: IntervalDiffeo,
}

impl UnitDiffeo {
    pub fn eval(&self, t: f64) -> f64 {
        self.inner.eval(self.kappa * t / 2.0)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.kappa / 2.0 * self.inner.derivative(self.kappa * t / 2.0)
    }

    pub fn inverse(&self, y: f64) -> f64 {
        2.0 / self.kappa * self.inner.inverse(y)
    }

    pub fn interval(&self) -> &IntervalDiffeo {
        &self.inner
    }
}

/// `H(c, κ)` for `κ ∈ (0, 1)` and `c ∈ (-1+κ, 1-κ)^q`.
pub fn compose_unit(c: &[f64], kappa: f64) -> Result<UnitDiffeo> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(invalid(format!("kappa must lie in (0, 1), got {kappa}")));
    }
    if let Some(j) = c.iter().position(|x| !(x.abs() < 1.0 - kappa)) {
        return Err(invalid(format!(
            "c_{} = {} is outside (-1+κ, 1-κ)",
            j + 1,
            c[j]
        )));
    }
    Ok(UnitDiffeo {
        kappa,
        inner: IntervalDiffeo::assemble(c, kappa)?,
    })
}

/// Saddle values of `f_t = (1-t)·(2/ε)(h⁻¹∘f) + t·f`: `(1-t)·(2/ε)c' + t·c`.
pub fn homotopy_values(c: &[f64], d: &[Vec<f64>], t: f64) -> Result<Vec<f64>> {
    let report = normalize_saddle_values(c, d)?;
    homotopy_from_report(&report, c, t)
}

pub fn homotopy_from_report(report: &NormalizationReport, c: &[f64], t: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid(format!("homotopy parameter t = {t} is outside [0, 1]")));
    }
    Ok(report
        .scaled_values
        .iter()
        .zip(c)
        .map(|(s, x)| (1.0 - t) * s + t * x)
        .collect())
}

/// Open face of `((q+1)/2)·values` in `P^{q-1}`, i.e. the face of `values`
/// in `(2/(q+1))·P^{q-1}`. `None` when the point is outside.
pub fn face_of_scaled(values: &[f64], tol: f64) -> Option<OrderedPartition> {
    let q = values.len();
    if q == 0 {
        return Some(OrderedPartition::single_block(0));
    }
    open_face_of(values, 2.0 / (q as f64 + 1.0), tol).ok()
}
