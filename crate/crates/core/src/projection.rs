//! Euclidean projection onto `κ·P^{q-1}` with a Kuhn–Tucker certificate.
//!
//! Sort `c` ascending to `z`, subtract the sorted vertex `w_i = κ(i - (q+1)/2)`
//! and fit a nondecreasing sequence `y` to `z - w` by pooling adjacent
//! violators. The projection is `z - y` put back in the original order.
//! Every pool boundary is a tight prefix constraint, so `c - c'` is constant
//! on each block of the resulting face and the pooled values are the
//! block offsets `t_1 ≤ … ≤ t_s`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::permutohedron::{
    ascending_order, membership, membership_by_subsets, ordered_partitions, prefix_bound,
    OrderedPartition, DEFAULT_TOL,
};

/// Largest `q` accepted by [`brute_force_project`].
pub const BRUTE_FORCE_MAX_Q: usize = 6;

/// Nearest point of `κ·P^{q-1}` together with its optimality certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub c_prime: Vec<f64>,
    pub face: OrderedPartition,
    /// `t_k = c_j - c'_j` for `j ∈ J_k`.
    pub offsets: Vec<f64>,
    /// Multiplier of the sum constraint; equals `t_s`.
    pub lambda: f64,
    /// Multipliers of the prefix constraints `J_1 ∪ … ∪ J_k`, `k < s`.
    pub lambda_k: Vec<f64>,
}

/// Projection with the default face tolerance.
pub fn project(c: &[f64], kappa: f64) -> Result<ProjectionResult> {
    project_with_tol(c, kappa, DEFAULT_TOL)
}

pub fn project_with_tol(c: &[f64], kappa: f64, tie_tol: f64) -> Result<ProjectionResult> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(invalid(format!("kappa must be positive, got {kappa}")));
    }
    if c.is_empty() || c.iter().any(|x| !x.is_finite()) {
        return Err(invalid("projection input must be a non-empty finite vector"));
    }
    let q = c.len();
    let order = ascending_order(c);

    if membership(c, kappa, 0.0)? {
        let face = face_from_pools(c, kappa, tie_tol, &order, &[q]);
        let s = face.len();
        return Ok(ProjectionResult {
            c_prime: c.to_vec(),
            face,
            offsets: vec![0.0; s],
            lambda: 0.0,
            lambda_k: vec![0.0; s - 1],
        });
    }

    let residual: Vec<f64> = order
        .iter()
        .enumerate()
        .map(|(i, &j)| c[j] - kappa * ((i + 1) as f64 - (q as f64 + 1.0) / 2.0))
        .collect();
    let (fit, pool_ends) = pool_adjacent_violators(&residual);

    let mut c_prime = vec![0.0; q];
    for (i, &j) in order.iter().enumerate() {
        c_prime[j] = c[j] - fit[i];
    }

    let face = face_from_pools(&c_prime, kappa, tie_tol, &order, &pool_ends);

    // each face block sits inside one pool; read its offset there
    let mut offsets = Vec::with_capacity(face.len());
    let mut pos = 0;
    for block in face.blocks() {
        offsets.push(fit[pos]);
        pos += block.len();
    }
    let (lambda, lambda_k) = multipliers(&offsets);
    Ok(ProjectionResult {
        c_prime,
        face,
        offsets,
        lambda,
        lambda_k,
    })
}

/// `λ = t_s`, `λ_k = t_{k+1} - t_k`.
fn multipliers(offsets: &[f64]) -> (f64, Vec<f64>) {
    let lambda = offsets.last().copied().unwrap_or(0.0);
    let lambda_k = offsets.windows(2).map(|w| w[1] - w[0]).collect();
    (lambda, lambda_k)
}

/// Nondecreasing least-squares fit. Returns the fitted values and the
/// exclusive end position of every pool.
fn pool_adjacent_violators(y: &[f64]) -> (Vec<f64>, Vec<usize>) {
    // (sum, count, value)
    let mut pools: Vec<(f64, usize, f64)> = Vec::with_capacity(y.len());
    for &v in y {
        pools.push((v, 1, v));
        while pools.len() > 1 {
            let n = pools.len();
            if pools[n - 2].2 <= pools[n - 1].2 {
                break;
            }
            let (s2, c2, _) = pools.pop().unwrap();
            let last = pools.last_mut().unwrap();
            last.0 += s2;
            last.1 += c2;
            last.2 = last.0 / last.1 as f64;
        }
    }
    let mut fit = Vec::with_capacity(y.len());
    let mut ends = Vec::with_capacity(pools.len());
    for &(_, count, value) in &pools {
        fit.extend(std::iter::repeat_n(value, count));
        ends.push(fit.len());
    }
    (fit, ends)
}

/// Face of `x` read along `order`: cut at every pool end and at every other
/// prefix whose constraint is tight within `tol`.
fn face_from_pools(
    x: &[f64],
    kappa: f64,
    tol: f64,
    order: &[usize],
    pool_ends: &[usize],
) -> OrderedPartition {
    let q = x.len();
    let mut blocks = Vec::new();
    let mut current = Vec::new();
    let mut sum = 0.0;
    for (i, &j) in order.iter().enumerate() {
        current.push(j);
        sum += x[j];
        let m = i + 1;
        let tight = (sum - prefix_bound(kappa, q, m)).abs() <= tol;
        if m == q || pool_ends.contains(&m) || tight {
            blocks.push(std::mem::take(&mut current));
        }
    }
    OrderedPartition::new(q, blocks).expect("pools partition the ground set")
}

/// Outcome of [`kkt_verify`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub ok: bool,
    /// Max-norm of the stationarity residual.
    pub residual: f64,
    pub violations: Vec<String>,
}

/// Check a projection certificate against the optimality conditions of
/// `min ½|c - x|²` over `κ·P^{q-1}`.
pub fn kkt_verify(c: &[f64], kappa: f64, result: &ProjectionResult, tol: f64) -> KktReport {
    let mut violations = Vec::new();
    let q = c.len();
    let face = &result.face;
    let s = face.len();
    let fail = |violations: Vec<String>| KktReport {
        ok: false,
        residual: f64::INFINITY,
        violations,
    };

    if result.c_prime.len() != q || face.q() != q {
        violations.push(format!("dimension mismatch: q = {q}"));
        return fail(violations);
    }
    if result.offsets.len() != s || result.lambda_k.len() != s.saturating_sub(1) {
        violations.push(format!(
            "certificate shape: {} offsets and {} prefix multipliers for {s} blocks",
            result.offsets.len(),
            result.lambda_k.len()
        ));
        return fail(violations);
    }

    match membership(&result.c_prime, kappa, tol) {
        Ok(true) => {}
        Ok(false) => violations.push("c_prime is outside the polytope".into()),
        Err(e) => violations.push(format!("membership check failed: {e}")),
    }

    // stationarity: (c' - c) + λ·1 - Σ_k λ_k·1_{J_1 ∪ … ∪ J_k} = 0
    let mut prefix_weight = vec![0.0; q];
    let mut acc: f64 = result.lambda_k.iter().sum();
    for (k, block) in face.blocks().iter().enumerate() {
        for &j in block {
            prefix_weight[j] = acc;
        }
        if k < result.lambda_k.len() {
            acc -= result.lambda_k[k];
        }
    }
    let residual = (0..q)
        .map(|j| (result.c_prime[j] - c[j] + result.lambda - prefix_weight[j]).abs())
        .fold(0.0, f64::max);
    if !(residual <= tol) {
        violations.push(format!("stationarity residual {residual:e} exceeds {tol:e}"));
    }

    for (k, &l) in result.lambda_k.iter().enumerate() {
        if l < -tol {
            violations.push(format!("lambda_{} = {l:e} is negative", k + 1));
        }
    }

    // complementary slackness on the prefix constraints of the face
    let sizes = face.cumulative_sizes();
    let mut prefix_sum = 0.0;
    for (k, block) in face.blocks().iter().enumerate().take(s.saturating_sub(1)) {
        prefix_sum += block.iter().map(|&j| result.c_prime[j]).sum::<f64>();
        let slack = prefix_sum - prefix_bound(kappa, q, sizes[k]);
        if result.lambda_k[k] > tol && slack.abs() > tol {
            violations.push(format!(
                "lambda_{} = {:e} on an inactive constraint (slack {slack:e})",
                k + 1,
                result.lambda_k[k]
            ));
        }
    }

    // offsets must agree with the multipliers and with c - c'
    let mut tail = 0.0;
    for k in (0..s).rev() {
        let expected = result.lambda - tail;
        if (result.offsets[k] - expected).abs() > tol {
            violations.push(format!(
                "offset t_{} = {} does not match the multipliers ({expected})",
                k + 1,
                result.offsets[k]
            ));
        }
        for &j in &face.blocks()[k] {
            let d = c[j] - result.c_prime[j];
            if (d - result.offsets[k]).abs() > tol {
                violations.push(format!(
                    "c - c' = {d} at index {} differs from t_{} = {}",
                    j + 1,
                    k + 1,
                    result.offsets[k]
                ));
            }
        }
        if k > 0 {
            tail += result.lambda_k[k - 1];
        }
    }
    if result.offsets.windows(2).any(|w| w[0] > w[1] + tol) {
        violations.push("offsets are not nondecreasing".into());
    }

    KktReport {
        ok: violations.is_empty(),
        residual,
        violations,
    }
}

/// Projection by enumerating every face: project `c` onto the affine hull
/// of each closed face, keep the candidates inside the polytope, return the
/// nearest. Exponential in `q`; refuses `q > 6`.
pub fn brute_force_project(c: &[f64], kappa: f64) -> Result<Vec<f64>> {
    let q = c.len();
    if q > BRUTE_FORCE_MAX_Q {
        return Err(Error::TooLarge {
            q,
            max: BRUTE_FORCE_MAX_Q,
        });
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(invalid(format!("kappa must be positive, got {kappa}")));
    }
    if q == 0 || c.iter().any(|x| !x.is_finite()) {
        return Err(invalid("projection input must be a non-empty finite vector"));
    }
    let scale = c.iter().fold(kappa * q as f64, |m, x| m.max(x.abs()));
    let tol = 1e-11 * scale.max(1.0);

    let mut best: Option<(f64, Vec<f64>)> = None;
    for face in ordered_partitions(q) {
        // affine hull: Σ_{j ∈ J_k} x_j = W_{r_k} - W_{r_{k-1}}
        let mut x = vec![0.0; q];
        let mut used = 0;
        for block in face.blocks() {
            let n = block.len();
            let target = prefix_bound(kappa, q, used + n) - prefix_bound(kappa, q, used);
            let mean = block.iter().map(|&j| c[j]).sum::<f64>() / n as f64;
            for &j in block {
                x[j] = c[j] - mean + target / n as f64;
            }
            used += n;
        }
        if !membership_by_subsets(&x, kappa, tol)? {
            continue;
        }
        let dist: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().is_none_or(|(d, _)| dist < *d) {
            best = Some((dist, x));
        }
    }
    // the vertex faces always produce admissible candidates
    Ok(best.expect("some face candidate lies in the polytope").1)
}
