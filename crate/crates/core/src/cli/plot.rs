//! SVG figures: the phase portrait of a scene and the permutohedron with
//! the saddle-value point and its projection.
//!
//! Coordinates are written with two decimals, so the bytes depend only on
//! the inputs.

use std::fmt::Write;
use std::path::PathBuf;

use super::CliResult;
use crate::permutohedron::{permutations, refines, vertex, OrderedPartition};
use crate::surface::{Analysis, FramedPair};

/// Files written by a plot command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlotFiles {
    pub written: Vec<PathBuf>,
}

const SIZE: f64 = 600.0;
const MARGIN: f64 = 20.0;
const MAX_CONTOUR_GRID: usize = 192;

const PORTRAIT_STYLE: &str = "\
.frame{fill:#fcfcf8;stroke:#444;stroke-width:1}\
.level{fill:none;stroke:#9ab;stroke-width:0.6}\
.saddle-level{fill:none;stroke:#357;stroke-width:1.4}\
.separatrix{fill:none;stroke-width:1.2}\
.ascending{stroke:#c33}\
.descending{stroke:#33c}\
.cp{stroke:#000;stroke-width:0.8}\
.min{fill:#36c}\
.saddle{fill:#fc3}\
.max{fill:#c36}";

const POLYTOPE_STYLE: &str = "\
.polytope{fill:#eef2f6;stroke:#357;stroke-width:1.5}\
.vertex{fill:#357}\
.face{fill:none;stroke:#e80;stroke-width:4;opacity:0.8}\
.face-point{fill:#e80}\
.point{stroke:#000;stroke-width:0.8}\
.c{fill:#c33}\
.c-prime{fill:#3a3}\
.link{stroke:#666;stroke-dasharray:4 3;stroke-width:1}\
text{font-family:sans-serif;font-size:13px}";

fn header(out: &mut String, style: &str, title: &str) {
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    )
    .unwrap();
    writeln!(out, "<title>{title}</title>").unwrap();
    writeln!(out, "<style>{style}</style>").unwrap();
}

/// Maps chart coordinates to the canvas, `v` pointing up.
struct Canvas {
    u0: f64,
    v0: f64,
    su: f64,
    sv: f64,
}

impl Canvas {
    fn new(domain: ([f64; 2], [f64; 2])) -> Self {
        let (du, dv) = domain;
        let span = SIZE - 2.0 * MARGIN;
        Self {
            u0: du[0],
            v0: dv[0],
            su: span / (du[1] - du[0]),
            sv: span / (dv[1] - dv[0]),
        }
    }

    fn point(&self, p: [f64; 2]) -> (f64, f64) {
        (
            MARGIN + (p[0] - self.u0) * self.su,
            SIZE - MARGIN - (p[1] - self.v0) * self.sv,
        )
    }
}

/// Contour segments of the sampled field at `level` by marching squares.
/// `values[i][j]` is the sample at `(u_i, v_j)`.
fn marching_squares(values: &[Vec<f64>], nodes: &[f64], nodes_v: &[f64], level: f64) -> Vec<[[f64; 2]; 2]> {
    let mut segments = Vec::new();
    let interp = |pa: [f64; 2], fa: f64, pb: [f64; 2], fb: f64| {
        let t = (level - fa) / (fb - fa);
        [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])]
    };
    for i in 0..nodes.len() - 1 {
        for j in 0..nodes_v.len() - 1 {
            // corners counter-clockwise from (i, j)
            let p = [
                [nodes[i], nodes_v[j]],
                [nodes[i + 1], nodes_v[j]],
                [nodes[i + 1], nodes_v[j + 1]],
                [nodes[i], nodes_v[j + 1]],
            ];
            let f = [values[i][j], values[i + 1][j], values[i + 1][j + 1], values[i][j + 1]];
            let above: Vec<bool> = f.iter().map(|&x| x >= level).collect();
            let case = above
                .iter()
                .enumerate()
                .fold(0usize, |acc, (k, &a)| acc | (usize::from(a) << k));
            if case == 0 || case == 15 {
                continue;
            }
            // crossing on edge k, between corner k and corner k+1
            let cross = |k: usize| {
                let l = (k + 1) % 4;
                interp(p[k], f[k], p[l], f[l])
            };
            let crossing_edges: Vec<usize> = (0..4).filter(|&k| above[k] != above[(k + 1) % 4]).collect();
            if crossing_edges.len() == 2 {
                segments.push([cross(crossing_edges[0]), cross(crossing_edges[1])]);
                continue;
            }
            // ambiguous cell: decide by the mean of the corners
            let center_above = f.iter().sum::<f64>() / 4.0 >= level;
            if above[0] == center_above {
                segments.push([cross(0), cross(1)]);
                segments.push([cross(2), cross(3)]);
            } else {
                segments.push([cross(3), cross(0)]);
                segments.push([cross(1), cross(2)]);
            }
        }
    }
    segments
}

fn segments_path(canvas: &Canvas, segments: &[[[f64; 2]; 2]]) -> String {
    let mut d = String::new();
    for s in segments {
        let (x0, y0) = canvas.point(s[0]);
        let (x1, y1) = canvas.point(s[1]);
        write!(d, "M{x0:.2} {y0:.2}L{x1:.2} {y1:.2}").unwrap();
    }
    d
}

/// Split an unwrapped polyline into pieces inside the fundamental domain.
fn wrapped_pieces(pair: &FramedPair, polyline: &[[f64; 2]]) -> Vec<Vec<[f64; 2]>> {
    let scene = pair.scene();
    let (du, dv) = scene.domain();
    if !scene.is_torus() {
        return vec![polyline.to_vec()];
    }
    let (pu, pv) = (du[1] - du[0], dv[1] - dv[0]);
    let wrap = |p: [f64; 2]| {
        [
            du[0] + (p[0] - du[0]).rem_euclid(pu),
            dv[0] + (p[1] - dv[0]).rem_euclid(pv),
        ]
    };
    let mut pieces: Vec<Vec<[f64; 2]>> = Vec::new();
    let mut current: Vec<[f64; 2]> = Vec::new();
    for &p in polyline {
        let w = wrap(p);
        if let Some(last) = current.last() {
            if (w[0] - last[0]).abs() > 0.5 * pu || (w[1] - last[1]).abs() > 0.5 * pv {
                pieces.push(std::mem::take(&mut current));
            }
        }
        current.push(w);
    }
    if !current.is_empty() {
        pieces.push(current);
    }
    pieces.retain(|p| p.len() > 1);
    pieces
}

/// Level sets, separatrices and critical points of an analyzed pair.
///
/// Contours are drawn at every saddle value (class `saddle-level`) and at
/// the regular levels `±0.25`, `±0.5`, `±0.75`, `0` that are not saddle
/// values. Glyphs carry the classes `cp min`, `cp saddle` and `cp max`.
pub fn portrait_svg(pair: &FramedPair, analysis: &Analysis) -> String {
    let scene = pair.scene();
    let canvas = Canvas::new(scene.domain());
    let (du, dv) = scene.domain();
    let m = pair.grid_n().min(MAX_CONTOUR_GRID);
    let nodes: Vec<f64> = (0..=m).map(|i| du[0] + (du[1] - du[0]) * i as f64 / m as f64).collect();
    let nodes_v: Vec<f64> = (0..=m).map(|j| dv[0] + (dv[1] - dv[0]) * j as f64 / m as f64).collect();
    let values: Vec<Vec<f64>> = nodes
        .iter()
        .map(|&u| nodes_v.iter().map(|&v| pair.value(u, v)).collect())
        .collect();

    let mut out = String::new();
    let params: Vec<String> = scene.params().iter().map(|(k, v)| format!("{k}={v}")).collect();
    header(&mut out, PORTRAIT_STYLE, &format!("{} ({})", scene.name(), params.join(", ")));
    writeln!(
        out,
        "<rect class=\"frame\" x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{w}\" height=\"{w}\"/>",
        w = SIZE - 2.0 * MARGIN
    )
    .unwrap();

    let mut saddle_levels: Vec<f64> = analysis.c.clone();
    saddle_levels.sort_by(f64::total_cmp);
    saddle_levels.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let regular: Vec<f64> = (-3..=3)
        .map(|k| k as f64 * 0.25)
        .filter(|l| saddle_levels.iter().all(|s| (s - l).abs() > 1e-3))
        .collect();
    for level in regular {
        let d = segments_path(&canvas, &marching_squares(&values, &nodes, &nodes_v, level));
        if !d.is_empty() {
            writeln!(out, "<path class=\"level\" data-level=\"{level:.4}\" d=\"{d}\"/>").unwrap();
        }
    }
    for &level in &saddle_levels {
        let d = segments_path(&canvas, &marching_squares(&values, &nodes, &nodes_v, level));
        if !d.is_empty() {
            writeln!(out, "<path class=\"saddle-level\" data-level=\"{level:.6}\" d=\"{d}\"/>").unwrap();
        }
    }

    for edge in &analysis.graph.edges {
        let class = if edge.ascending { "ascending" } else { "descending" };
        let mut d = String::new();
        for piece in wrapped_pieces(pair, &edge.polyline) {
            for (k, &p) in piece.iter().enumerate() {
                let (x, y) = canvas.point(p);
                write!(d, "{}{x:.2} {y:.2}", if k == 0 { 'M' } else { 'L' }).unwrap();
            }
        }
        writeln!(
            out,
            "<path class=\"separatrix {class}\" data-from=\"{}\" data-to=\"{}\" d=\"{d}\"/>",
            edge.from + 1,
            edge.to + 1
        )
        .unwrap();
    }

    for (k, cp) in analysis.critical_points.iter().enumerate() {
        let (x, y) = canvas.point(cp.position);
        let id = k + 1;
        match cp.index {
            0 => writeln!(out, "<circle class=\"cp min\" data-id=\"{id}\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"6\"/>"),
            1 => writeln!(
                out,
                "<rect class=\"cp saddle\" data-id=\"{id}\" x=\"{:.2}\" y=\"{:.2}\" width=\"10\" height=\"10\"/>",
                x - 5.0,
                y - 5.0
            ),
            _ => writeln!(
                out,
                "<path class=\"cp max\" data-id=\"{id}\" d=\"M{x:.2} {:.2}L{:.2} {:.2}L{:.2} {:.2}Z\"/>",
                y - 7.0,
                x + 6.0,
                y + 5.0,
                x - 6.0,
                y + 5.0
            ),
        }
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// Orthonormal coordinates in the hyperplane `Σx = 0` for `q ∈ {2, 3}`;
/// the component along `(1, …, 1)` is dropped.
fn plane_coords(x: &[f64]) -> [f64; 2] {
    match x.len() {
        2 => [(x[0] - x[1]) / 2f64.sqrt(), 0.0],
        _ => [
            (x[0] - x[1]) / 2f64.sqrt(),
            (x[0] + x[1] - 2.0 * x[2]) / 6f64.sqrt(),
        ],
    }
}

/// The permutohedron `κ·P^{q-1}` for `q ∈ {2, 3}` as a segment or hexagon,
/// with the points `c` and `c_prime`, and the closed face `face` of
/// `c_prime` highlighted. Vertices carry the class `vertex`.
pub fn permutohedron_svg(
    c: &[f64],
    c_prime: &[f64],
    kappa: f64,
    face: &OrderedPartition,
    labels: [&str; 2],
) -> CliResult<String> {
    let q = c.len();
    if !(2..=3).contains(&q) || c_prime.len() != q || face.q() != q {
        return Err(super::CliError::Usage(format!(
            "permutohedron plots need q ∈ {{2, 3}}, got {q}"
        )));
    }
    // vertices in cyclic order: sort by angle in the plane
    let mut verts: Vec<(Vec<usize>, [f64; 2])> = permutations(q)
        .into_iter()
        .map(|rho| {
            let v: Vec<f64> = vertex(&rho).expect("permutation").iter().map(|x| kappa * x).collect();
            (rho, plane_coords(&v))
        })
        .collect();
    verts.sort_by(|a, b| {
        a.1[1]
            .atan2(a.1[0])
            .total_cmp(&b.1[1].atan2(b.1[0]))
    });

    let pc = plane_coords(c);
    let pp = plane_coords(c_prime);
    let extent = verts
        .iter()
        .map(|v| v.1[0].hypot(v.1[1]))
        .chain([pc[0].hypot(pc[1]), pp[0].hypot(pp[1])])
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let scale = (SIZE / 2.0 - 3.0 * MARGIN) / extent;
    let to_canvas = |p: [f64; 2]| (SIZE / 2.0 + scale * p[0], SIZE / 2.0 - scale * p[1]);

    let mut out = String::new();
    let blocks: Vec<String> = face.to_one_based().iter().map(|b| {
        let items: Vec<String> = b.iter().map(|j| j.to_string()).collect();
        format!("{{{}}}", items.join(","))
    }).collect();
    header(
        &mut out,
        POLYTOPE_STYLE,
        &format!("permutohedron κ={kappa:.6}, q={q}, face ({})", blocks.join(",")),
    );

    let points: Vec<String> = verts
        .iter()
        .map(|v| {
            let (x, y) = to_canvas(v.1);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    if q == 2 {
        writeln!(out, "<polyline class=\"polytope\" points=\"{}\"/>", points.join(" ")).unwrap();
    } else {
        writeln!(out, "<polygon class=\"polytope\" points=\"{}\"/>", points.join(" ")).unwrap();
    }

    let face_verts: Vec<[f64; 2]> = verts
        .iter()
        .filter(|(rho, _)| refines(&OrderedPartition::singletons(rho).expect("permutation"), face))
        .map(|v| v.1)
        .collect();
    match face_verts.len() {
        1 => {
            let (x, y) = to_canvas(face_verts[0]);
            writeln!(out, "<circle class=\"face face-point\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"9\"/>").unwrap();
        }
        2 => {
            let (x0, y0) = to_canvas(face_verts[0]);
            let (x1, y1) = to_canvas(face_verts[1]);
            writeln!(
                out,
                "<line class=\"face\" x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y1:.2}\"/>"
            )
            .unwrap();
        }
        _ => {
            let pts: Vec<String> = face_verts
                .iter()
                .map(|&p| {
                    let (x, y) = to_canvas(p);
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            writeln!(out, "<polygon class=\"face\" points=\"{}\"/>", pts.join(" ")).unwrap();
        }
    }

    for (rho, p) in &verts {
        let (x, y) = to_canvas(*p);
        let label: Vec<String> = rho.iter().map(|j| (j + 1).to_string()).collect();
        writeln!(
            out,
            "<circle class=\"vertex\" data-rho=\"{}\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4\"/>",
            label.join("")
        )
        .unwrap();
    }

    let (cx, cy) = to_canvas(pc);
    let (px, py) = to_canvas(pp);
    writeln!(
        out,
        "<line class=\"link\" x1=\"{cx:.2}\" y1=\"{cy:.2}\" x2=\"{px:.2}\" y2=\"{py:.2}\"/>"
    )
    .unwrap();
    for ((x, y), class, label) in [((cx, cy), "c", labels[0]), ((px, py), "c-prime", labels[1])] {
        writeln!(out, "<circle class=\"point {class}\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"5\"/>").unwrap();
        writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\">{label}</text>", x + 8.0, y - 8.0).unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}
