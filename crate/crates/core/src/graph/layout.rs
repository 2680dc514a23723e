//! Deterministic force-directed placement on the unit square.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CausalGraph;
use crate::model::{canonicalize_name, ViewHint};

/// Fraction of nodes that must carry a view hint before hints are used
/// instead of the simulation.
pub const HINT_COVERAGE: f64 = 0.8;
/// Guaranteed minimum distance between any two placed nodes (graphs of up
/// to 50 nodes).
pub const MIN_SEPARATION: f64 = 0.02;

const ITERATIONS: usize = 300;
const INITIAL_TEMPERATURE: f64 = 0.1;
const REPULSION: f64 = 0.05;
const SPRING: f64 = 0.1;
const REST_LENGTH: f64 = 0.15;
const MARGIN: f64 = 0.05;
const SEPARATION_TARGET: f64 = 0.025;
const SEPARATION_ROUNDS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutResult {
    pub seed: u64,
    pub positions: BTreeMap<String, Point>,
}

pub fn layout(graph: &CausalGraph, seed: u64) -> LayoutResult {
    layout_with_hints(graph, seed, &[])
}

/// Like [`layout`], but returns the normalized hint positions when at least
/// [`HINT_COVERAGE`] of the nodes have one. Unhinted nodes then sit at the
/// centroid of their hinted neighbours.
pub fn layout_with_hints(graph: &CausalGraph, seed: u64, hints: &[ViewHint]) -> LayoutResult {
    let names: Vec<&str> = graph.node_names().collect();
    let n = names.len();
    let edges = undirected_edges(graph);

    let mut hinted: Vec<Option<[f64; 2]>> = vec![None; n];
    for hint in hints {
        let Ok(name) = canonicalize_name(&hint.variable) else { continue };
        if let Some(i) = graph.index_of(&name) {
            if hinted[i].is_none() && hint.x.is_finite() && hint.y.is_finite() {
                hinted[i] = Some([hint.x, hint.y]);
            }
        }
    }
    let covered = hinted.iter().filter(|h| h.is_some()).count();

    let mut pos = if n > 0 && covered as f64 >= HINT_COVERAGE * n as f64 {
        from_hints(&hinted, &edges)
    } else {
        simulate(n, &edges, seed)
    };
    normalize(&mut pos);
    separate(&mut pos);

    LayoutResult {
        seed,
        positions: names
            .iter()
            .zip(pos)
            .map(|(name, [x, y])| (name.to_string(), Point { x, y }))
            .collect(),
    }
}

fn undirected_edges(graph: &CausalGraph) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = graph
        .adjacency()
        .into_iter()
        .flat_map(|(v, ws)| ws.into_iter().map(move |w| (v.min(w), v.max(w))))
        .filter(|(a, b)| a != b)
        .collect();
    edges.sort_unstable();
    edges.dedup();
    edges
}

fn from_hints(hinted: &[Option<[f64; 2]>], edges: &[(usize, usize)]) -> Vec<[f64; 2]> {
    let known: Vec<[f64; 2]> = hinted.iter().flatten().copied().collect();
    let centroid = mean(&known).unwrap_or([0.0, 0.0]);
    hinted
        .iter()
        .enumerate()
        .map(|(i, h)| {
            h.unwrap_or_else(|| {
                let neighbours: Vec<[f64; 2]> = edges
                    .iter()
                    .filter_map(|&(a, b)| match (a == i, b == i) {
                        (true, _) => hinted[b],
                        (_, true) => hinted[a],
                        _ => None,
                    })
                    .collect();
                mean(&neighbours).unwrap_or(centroid)
            })
        })
        .collect()
}

fn mean(points: &[[f64; 2]]) -> Option<[f64; 2]> {
    if points.is_empty() {
        return None;
    }
    let k = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
    Some([sx / k, sy / k])
}

fn simulate(n: usize, edges: &[(usize, usize)], seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
    let mut disp = vec![[0.0f64; 2]; n];

    for step in 0..ITERATIONS {
        let temperature = INITIAL_TEMPERATURE * (1.0 - step as f64 / ITERATIONS as f64);
        disp.iter_mut().for_each(|d| *d = [0.0, 0.0]);

        for i in 0..n {
            for j in (i + 1)..n {
                let (dx, dy, d) = delta(pos[i], pos[j]);
                let f = REPULSION / (d * d);
                disp[i][0] += dx / d * f;
                disp[i][1] += dy / d * f;
                disp[j][0] -= dx / d * f;
                disp[j][1] -= dy / d * f;
            }
        }
        for &(a, b) in edges {
            let (dx, dy, d) = delta(pos[a], pos[b]);
            let f = SPRING * (d - REST_LENGTH);
            disp[a][0] -= dx / d * f;
            disp[a][1] -= dy / d * f;
            disp[b][0] += dx / d * f;
            disp[b][1] += dy / d * f;
        }
        for (p, d) in pos.iter_mut().zip(&disp) {
            let len = d[0].hypot(d[1]);
            if len > 0.0 {
                let step = len.min(temperature);
                p[0] += d[0] / len * step;
                p[1] += d[1] / len * step;
            }
        }
    }
    pos
}

/// Vector from `b` to `a` and its length, with coincident points nudged
/// apart along a fixed direction.
fn delta(a: [f64; 2], b: [f64; 2]) -> (f64, f64, f64) {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    let d = dx.hypot(dy);
    if d < 1e-9 {
        (1e-9, 0.0, 1e-9)
    } else {
        (dx, dy, d)
    }
}

/// Uniform scaling into `[MARGIN, 1 - MARGIN]`, centred on 0.5. A single
/// point, or all points coinciding, lands at the centre.
fn normalize(pos: &mut [[f64; 2]]) {
    if pos.is_empty() {
        return;
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in pos.iter() {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let scale = if span > 0.0 { (1.0 - 2.0 * MARGIN) / span } else { 0.0 };
    for p in pos.iter_mut() {
        for k in 0..2 {
            let mid = (lo[k] + hi[k]) / 2.0;
            p[k] = 0.5 + (p[k] - mid) * scale;
        }
    }
}

fn min_distance(pos: &[[f64; 2]]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..pos.len() {
        for j in (i + 1)..pos.len() {
            best = best.min(delta(pos[i], pos[j]).2);
        }
    }
    best
}

/// Pushes close pairs apart until every distance reaches the separation
/// target. If that does not settle, nodes are snapped to distinct cells of
/// a regular grid fine enough for the target.
fn separate(pos: &mut [[f64; 2]]) {
    let n = pos.len();
    for _ in 0..SEPARATION_ROUNDS {
        let mut moved = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let (dx, dy, d) = delta(pos[i], pos[j]);
                if d < SEPARATION_TARGET {
                    let push = (SEPARATION_TARGET - d) / 2.0 + 1e-6;
                    let (ux, uy) = (dx / d, dy / d);
                    pos[i] = clamp([pos[i][0] + ux * push, pos[i][1] + uy * push]);
                    pos[j] = clamp([pos[j][0] - ux * push, pos[j][1] - uy * push]);
                    moved = true;
                }
            }
        }
        if !moved {
            return;
        }
    }
    if min_distance(pos) < MIN_SEPARATION {
        snap_to_grid(pos);
    }
}

fn clamp(p: [f64; 2]) -> [f64; 2] {
    [p[0].clamp(0.0, 1.0), p[1].clamp(0.0, 1.0)]
}

fn snap_to_grid(pos: &mut [[f64; 2]]) {
    let n = pos.len();
    let side = ((n as f64).sqrt().ceil() as usize * 2).max(2);
    let pitch = 1.0 / (side - 1) as f64;
    let mut taken = vec![false; side * side];
    for p in pos.iter_mut() {
        let cell = (0..side * side)
            .filter(|&c| !taken[c])
            .min_by(|&a, &b| {
                let da = delta(*p, cell_point(a, side, pitch)).2;
                let db = delta(*p, cell_point(b, side, pitch)).2;
                da.total_cmp(&db).then(a.cmp(&b))
            })
            .expect("grid has a free cell for every node");
        taken[cell] = true;
        *p = cell_point(cell, side, pitch);
    }
}

fn cell_point(cell: usize, side: usize, pitch: f64) -> [f64; 2] {
    [(cell % side) as f64 * pitch, (cell / side) as f64 * pitch]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::CausalNode;

    fn nodes(k: usize) -> CausalGraph {
        CausalGraph::new((0..k).map(|i| CausalNode::new(format!("v{i:02}"))).collect(), vec![]).unwrap()
    }

    #[test]
    fn single_node_is_centred() {
        for seed in [0, 1, 42, u64::MAX] {
            let r = layout(&nodes(1), seed);
            assert_eq!(r.positions["v00"], Point { x: 0.5, y: 0.5 });
        }
    }

    #[test]
    fn empty_graph_has_no_positions() {
        assert!(layout(&CausalGraph::empty(), 3).positions.is_empty());
    }

    #[test]
    fn deterministic_and_bounded() {
        let g = nodes(30);
        let a = layout(&g, 7);
        assert_eq!(a, layout(&g, 7));
        assert_ne!(a, layout(&g, 8));
        for p in a.positions.values() {
            assert!((0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y));
        }
    }

    #[test]
    fn coincident_hints_are_separated() {
        let g = nodes(5);
        let hints: Vec<ViewHint> =
            (0..5).map(|i| ViewHint { variable: format!("v{i:02}"), x: 10.0, y: 10.0 }).collect();
        let r = layout_with_hints(&g, 0, &hints);
        let pts: Vec<[f64; 2]> = r.positions.values().map(|p| [p.x, p.y]).collect();
        assert!(min_distance(&pts) >= MIN_SEPARATION);
    }

    #[test]
    fn grid_snap_separates() {
        let mut pts = vec![[0.5, 0.5]; 50];
        snap_to_grid(&mut pts);
        assert!(min_distance(&pts) >= MIN_SEPARATION);
    }
}
