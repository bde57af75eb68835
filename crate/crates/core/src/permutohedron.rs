//! Vertices, faces and membership for scaled permutohedra `κ·P^{q-1}`.
//!
//! `P^{q-1}` is the convex hull of all coordinate permutations of
//! `(1 - (q+1)/2, …, q - (q+1)/2)`. Its open faces are in bijection with
//! ordered partitions `(J_1, …, J_s)` of the ground set: a point lies in the
//! face of `J` when the sum over `J_1 ∪ … ∪ J_k` is as small as the polytope
//! allows for every `k < s` and no other subset constraint is tight.
//!
//! Indices are 0-based in this API. [`OrderedPartition`] serializes with
//! 1-based indices.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// Default absolute tolerance for active-constraint detection.
pub const DEFAULT_TOL: f64 = 1e-9;

/// An ordered partition `(J_1, …, J_s)` of `{0, …, q-1}`.
///
/// Blocks are non-empty, pairwise disjoint, cover the ground set, and keep
/// their indices in ascending order, so two partitions are equal exactly when
/// they describe the same face.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderedPartition {
    q: usize,
    blocks: Vec<Vec<usize>>,
}

impl OrderedPartition {
    pub fn new(q: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; q];
        let mut blocks = blocks;
        for block in &mut blocks {
            if block.is_empty() {
                return Err(invalid("ordered partition has an empty block"));
            }
            block.sort_unstable();
            for &j in block.iter() {
                if j >= q {
                    return Err(invalid(format!("index {j} out of range for q = {q}")));
                }
                if seen[j] {
                    return Err(invalid(format!("index {j} appears twice")));
                }
                seen[j] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(invalid("ordered partition does not cover the ground set"));
        }
        if q > 0 && blocks.is_empty() {
            return Err(invalid("ordered partition has no blocks"));
        }
        Ok(Self { q, blocks })
    }

    /// The one-block partition `({0, …, q-1})`, the face of the relative interior.
    pub fn single_block(q: usize) -> Self {
        let blocks = if q == 0 { vec![] } else { vec![(0..q).collect()] };
        Self { q, blocks }
    }

    /// The chain of singletons `({ρ_1}, …, {ρ_q})`, the face of the vertex `P_ρ`.
    pub fn singletons(rho: &[usize]) -> Result<Self> {
        Self::new(rho.len(), rho.iter().map(|&j| vec![j]).collect())
    }

    /// Build from 1-based blocks, as they appear in reports.
    pub fn from_one_based(q: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut zero = Vec::with_capacity(blocks.len());
        for block in blocks {
            let mut b = Vec::with_capacity(block.len());
            for &j in block {
                if j == 0 {
                    return Err(invalid("1-based index 0 in ordered partition"));
                }
                b.push(j - 1);
            }
            zero.push(b);
        }
        Self::new(q, zero)
    }

    pub fn to_one_based(&self) -> Vec<Vec<usize>> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|j| j + 1).collect())
            .collect()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Number of blocks `s`.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Cumulative block sizes `r_1 < … < r_s = q`.
    pub fn cumulative_sizes(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .scan(0, |acc, b| {
                *acc += b.len();
                Some(*acc)
            })
            .collect()
    }

    /// Index of the block containing `j`.
    pub fn block_of(&self, j: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(&j))
    }

    /// The permutation `ρ` of the face: blocks concatenated in order.
    pub fn rho(&self) -> Vec<usize> {
        self.blocks.iter().flatten().copied().collect()
    }

    /// Merge consecutive blocks: `cuts` lists the retained boundaries
    /// `k_1 < … < k_{u-1}` (block counts), each in `1..s`.
    pub fn coarsen(&self, cuts: &[usize]) -> Result<Self> {
        let s = self.blocks.len();
        let mut bounds: Vec<usize> = cuts.to_vec();
        if bounds.windows(2).any(|w| w[0] >= w[1]) || bounds.iter().any(|&k| k == 0 || k >= s) {
            return Err(invalid("coarsening cuts must be increasing and inside 1..s"));
        }
        bounds.push(s);
        let mut out = Vec::with_capacity(bounds.len());
        let mut start = 0;
        for end in bounds {
            out.push(self.blocks[start..end].concat());
            start = end;
        }
        Self::new(self.q, out)
    }

    /// Prefix unions `J_1 ∪ … ∪ J_k` for `k = 1, …, s-1`, as membership masks.
    fn prefix_masks(&self) -> Vec<Vec<bool>> {
        let mut mask = vec![false; self.q];
        let mut out = Vec::with_capacity(self.blocks.len().saturating_sub(1));
        for block in self.blocks.iter().take(self.blocks.len().saturating_sub(1)) {
            for &j in block {
                mask[j] = true;
            }
            out.push(mask.clone());
        }
        out
    }
}

impl fmt::Display for OrderedPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, block) in self.blocks.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{")?;
            for (i, j) in block.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", j + 1)?;
            }
            write!(f, "}}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for OrderedPartition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OrderedPartition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let blocks = Vec::<Vec<usize>>::deserialize(deserializer)?;
        let q = blocks.iter().map(Vec::len).sum();
        Self::from_one_based(q, &blocks).map_err(serde::de::Error::custom)
    }
}

/// Sum of the `m` smallest coordinates of `κ·P^{q-1}`: `κ·Σ_{i=1}^{m} (i - (q+1)/2)`.
pub fn prefix_bound(kappa: f64, q: usize, m: usize) -> f64 {
    let (m, q) = (m as f64, q as f64);
    kappa * m * (m - q) / 2.0
}

/// The vertex `P_ρ`: coordinate `ρ_k` equals `k - (q+1)/2`.
pub fn vertex(rho: &[usize]) -> Result<Vec<f64>> {
    let q = rho.len();
    let mut out = vec![f64::NAN; q];
    for (k, &j) in rho.iter().enumerate() {
        if j >= q || !out[j].is_nan() {
            return Err(invalid(format!("{rho:?} is not a permutation of 0..{q}")));
        }
        out[j] = (k + 1) as f64 - (q as f64 + 1.0) / 2.0;
    }
    Ok(out)
}

/// Indices sorted by ascending value; ties keep ascending index order.
pub(crate) fn ascending_order(c: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..c.len()).collect();
    order.sort_by(|&a, &b| c[a].total_cmp(&c[b]).then(a.cmp(&b)));
    order
}

/// Group indices by value: sorted ascending, consecutive values within
/// `tie_tol` share a block.
pub fn partition_from_values(c: &[f64], tie_tol: f64) -> OrderedPartition {
    let order = ascending_order(c);
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for j in order {
        match blocks.last_mut() {
            Some(block) if c[j] - last <= tie_tol => block.push(j),
            _ => blocks.push(vec![j]),
        }
        last = c[j];
    }
    for block in &mut blocks {
        block.sort_unstable();
    }
    OrderedPartition {
        q: c.len(),
        blocks,
    }
}

fn check_args(c: &[f64], kappa: f64) -> Result<()> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(invalid(format!("kappa must be positive, got {kappa}")));
    }
    if c.is_empty() {
        return Err(invalid("empty vector"));
    }
    if c.iter().any(|x| !x.is_finite()) {
        return Err(invalid("non-finite coordinate"));
    }
    Ok(())
}

/// Slack `S_m - W_m` of each sorted prefix constraint, for `m = 1, …, q-1`,
/// where `S_m` is the sum of the `m` smallest entries and `W_m` its bound.
fn prefix_slacks(c: &[f64], kappa: f64, order: &[usize]) -> Vec<f64> {
    let q = c.len();
    let mut sum = 0.0;
    let mut out = Vec::with_capacity(q.saturating_sub(1));
    for (m, &j) in order.iter().enumerate().take(q.saturating_sub(1)) {
        sum += c[j];
        out.push(sum - prefix_bound(kappa, q, m + 1));
    }
    out
}

/// Whether `c ∈ κ·P^{q-1}` up to `tol`.
///
/// Among subsets of a fixed size the `m` smallest entries minimize the sum,
/// so the `2^q - 2` subset constraints reduce to `q - 1` sorted prefix sums.
pub fn membership(c: &[f64], kappa: f64, tol: f64) -> Result<bool> {
    check_args(c, kappa)?;
    let total: f64 = c.iter().sum();
    if total.abs() > tol {
        return Ok(false);
    }
    let order = ascending_order(c);
    Ok(prefix_slacks(c, kappa, &order).iter().all(|&s| s >= -tol))
}

/// Membership by direct enumeration of all `2^q - 2` subset constraints.
/// Exponential; intended as an independent check of [`membership`] for
/// small `q`.
pub fn membership_by_subsets(c: &[f64], kappa: f64, tol: f64) -> Result<bool> {
    check_args(c, kappa)?;
    let q = c.len();
    if q >= 32 {
        return Err(invalid("subset enumeration supports q < 32"));
    }
    let total: f64 = c.iter().sum();
    if total.abs() > tol {
        return Ok(false);
    }
    let full = (1u32 << q) - 1;
    for mask in 1..full {
        let mut sum = 0.0;
        for (j, x) in c.iter().enumerate() {
            if mask & (1 << j) != 0 {
                sum += x;
            }
        }
        let size = mask.count_ones() as usize;
        if -sum + prefix_bound(kappa, q, size) > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Signed distance-like margin of `c` to the boundary of `κ·P^{q-1}` inside
/// the hyperplane `Σc = 0`: the smallest prefix slack. Positive inside,
/// zero on the boundary, negative outside. `+∞` for `q = 1`.
pub fn boundary_margin(c: &[f64], kappa: f64) -> Result<f64> {
    check_args(c, kappa)?;
    let order = ascending_order(c);
    Ok(prefix_slacks(c, kappa, &order)
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

/// The ordered partition of the open face of `κ·P^{q-1}` containing `c`.
pub fn open_face_of(c: &[f64], kappa: f64, tol: f64) -> Result<OrderedPartition> {
    if !membership(c, kappa, tol)? {
        return Err(Error::NotInPolytope {
            q: c.len(),
            kappa,
            tol,
        });
    }
    let order = ascending_order(c);
    let slacks = prefix_slacks(c, kappa, &order);
    let mut blocks = Vec::new();
    let mut current = Vec::new();
    for (m, &j) in order.iter().enumerate() {
        current.push(j);
        if m + 1 == c.len() || slacks[m].abs() <= tol {
            current.sort_unstable();
            blocks.push(std::mem::take(&mut current));
        }
    }
    Ok(OrderedPartition {
        q: c.len(),
        blocks,
    })
}

/// Whether `fine` is obtained from `coarse` by splitting blocks, i.e. every
/// block of `coarse` is a union of consecutive blocks of `fine`. Reflexive.
pub fn refines(fine: &OrderedPartition, coarse: &OrderedPartition) -> bool {
    if fine.q != coarse.q {
        return false;
    }
    let fine_prefixes = fine.prefix_masks();
    coarse
        .prefix_masks()
        .iter()
        .all(|p| fine_prefixes.contains(p))
}

/// All `q!` permutations of `0..q`, in lexicographic order.
pub fn permutations(q: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..q).collect();
    loop {
        out.push(current.clone());
        // next lexicographic permutation
        let Some(i) = (1..q).rev().find(|&i| current[i - 1] < current[i]) else {
            break;
        };
        let j = (i..q).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
    }
    out
}

/// Every ordered partition of `0..q` (the ordered Bell number of them).
pub fn ordered_partitions(q: usize) -> Vec<OrderedPartition> {
    fn rec(remaining: u32, prefix: &mut Vec<Vec<usize>>, q: usize, out: &mut Vec<OrderedPartition>) {
        if remaining == 0 {
            out.push(OrderedPartition {
                q,
                blocks: prefix.clone(),
            });
            return;
        }
        // enumerate non-empty submasks of `remaining`
        let mut sub = remaining;
        while sub != 0 {
            let block: Vec<usize> = (0..q).filter(|&j| sub & (1 << j) != 0).collect();
            prefix.push(block);
            rec(remaining & !sub, prefix, q, out);
            prefix.pop();
            sub = (sub - 1) & remaining;
        }
    }
    assert!(q < 32, "ordered_partitions supports q < 32");
    let mut out = Vec::new();
    if q == 0 {
        out.push(OrderedPartition::single_block(0));
        return out;
    }
    rec((1u32 << q) - 1, &mut Vec::new(), q, &mut out);
    out
}
