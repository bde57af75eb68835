//! Saddle-to-saddle distances under `√(df² + α²)` on a grid graph.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::critical::CriticalPoint;
use super::scene::chart_distance;
use super::{FramedPair, SurfaceConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, ties by node id
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NEIGHBORS: [(isize, isize); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

struct Graph {
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl Graph {
    fn dijkstra(&self, source: usize) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.adjacency.len()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Entry {
            dist: 0.0,
            node: source,
        });
        while let Some(Entry { dist: d, node }) = heap.pop() {
            if d > dist[node] {
                continue;
            }
            for &(next, w) in &self.adjacency[node] {
                let nd = d + w;
                if nd < dist[next] {
                    dist[next] = nd;
                    heap.push(Entry { dist: nd, node: next });
                }
            }
        }
        dist
    }
}

fn build_graph(pair: &FramedPair, cps: &[CriticalPoint], config: &SurfaceConfig) -> (Graph, Vec<usize>) {
    let scene = pair.scene();
    let n = pair.grid_n();
    let (hu, hv) = pair.spacing();
    let (du, dv) = scene.domain();
    let periodic = scene.is_torus();
    let node_pos = |i: usize, j: usize| [du[0] + i as f64 * hu, dv[0] + j as f64 * hv];
    let extrema: Vec<[f64; 2]> = cps.iter().filter(|c| c.is_extremum()).map(|c| c.position).collect();
    let removed = |p: [f64; 2]| extrema.iter().any(|&e| chart_distance(scene, p, e) < config.delta_ext);

    let grid_nodes = n * n;
    let saddles: Vec<[f64; 2]> = cps.iter().filter(|c| c.is_saddle()).map(|c| c.position).collect();
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); grid_nodes + saddles.len()];
    let alive: Vec<bool> = (0..grid_nodes).map(|k| !removed(node_pos(k / n, k % n))).collect();

    let weight = |p: [f64; 2], d: [f64; 2]| {
        pair.metric_norm(p[0] + 0.5 * d[0], p[1] + 0.5 * d[1], d[0], d[1])
    };

    for i in 0..n {
        for j in 0..n {
            let k = i * n + j;
            if !alive[k] {
                continue;
            }
            let p = node_pos(i, j);
            for &(di, dj) in &NEIGHBORS {
                let (ni, nj) = (i as isize + di, j as isize + dj);
                let (ni, nj) = if periodic {
                    (ni.rem_euclid(n as isize) as usize, nj.rem_euclid(n as isize) as usize)
                } else if ni < 0 || nj < 0 || ni >= n as isize || nj >= n as isize {
                    continue;
                } else {
                    (ni as usize, nj as usize)
                };
                let m = ni * n + nj;
                if !alive[m] {
                    continue;
                }
                let w = weight(p, [di as f64 * hu, dj as f64 * hv]);
                adjacency[k].push((m, w));
            }
        }
    }

    // each saddle joins the corners of the grid cell containing it
    let mut saddle_nodes = Vec::with_capacity(saddles.len());
    for (s, &pos) in saddles.iter().enumerate() {
        let node = grid_nodes + s;
        saddle_nodes.push(node);
        let fi = ((pos[0] - du[0]) / hu).floor() as isize;
        let fj = ((pos[1] - dv[0]) / hv).floor() as isize;
        for (ci, cj) in [(fi, fj), (fi + 1, fj), (fi, fj + 1), (fi + 1, fj + 1)] {
            let (gi, gj) = if periodic {
                (ci.rem_euclid(n as isize) as usize, cj.rem_euclid(n as isize) as usize)
            } else {
                (ci.clamp(0, n as isize - 1) as usize, cj.clamp(0, n as isize - 1) as usize)
            };
            let m = gi * n + gj;
            if !alive[m] {
                continue;
            }
            let corner = [du[0] + ci as f64 * hu, dv[0] + cj as f64 * hv];
            let w = weight(pos, [corner[0] - pos[0], corner[1] - pos[1]]);
            adjacency[node].push((m, w));
            adjacency[m].push((node, w));
        }
    }
    (Graph { adjacency }, saddle_nodes)
}

/// Symmetric matrix of shortest-path distances between saddles (in the
/// order they appear in `cps`). Grid vertices within `delta_ext` of an
/// extremum are removed, since the form degenerates there. Empty for fewer
/// than two saddles.
pub fn saddle_distances(
    pair: &FramedPair,
    cps: &[CriticalPoint],
    config: &SurfaceConfig,
) -> Result<Vec<Vec<f64>>> {
    let q = cps.iter().filter(|c| c.is_saddle()).count();
    if q < 2 {
        return Ok(Vec::new());
    }
    let (graph, saddle_nodes) = build_graph(pair, cps, config);
    let mut d = vec![vec![0.0; q]; q];
    for i in 0..q - 1 {
        let dist = graph.dijkstra(saddle_nodes[i]);
        for k in (i + 1)..q {
            let v = dist[saddle_nodes[k]];
            if !v.is_finite() {
                return Err(Error::Disconnected(format!(
                    "saddles {} and {} are not connected with delta_ext = {}",
                    i + 1,
                    k + 1,
                    config.delta_ext
                )));
            }
            d[i][k] = v;
            d[k][i] = v;
        }
    }
    Ok(d)
}
