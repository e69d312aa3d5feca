//! Best-first search over the mode-transition graph.
//!
//! A* with the admissible heuristic `lambda_com * distance(CoM, goal)`;
//! every edge costs at least its lambda-weighted CoM travel, so the
//! heuristic never overestimates. Ties break toward fewer edges, then lower
//! vertex discovery id, which makes results fully deterministic.

use super::graph::{Mode, ModeGraph};
use super::weights::{edge_footholds, edge_weight, EdgeWeightTerms, WeightContext};
use super::FootId;
use crate::geometry::PrimitiveId;
use serde::Serialize;
use std::collections::{BinaryHeap, HashMap};
use std::time::Instant;

/// One planned transition.
#[derive(Debug, Clone, Serialize)]
pub struct PlanEdge {
    pub swing_foot: FootId,
    /// Full-stance foothold positions, ordered LF, RF, LH, RH.
    pub footholds: [[f64; 3]; 4],
    pub terms: EdgeWeightTerms,
    pub cost: f64,
    #[serde(skip)]
    pub source: Mode,
    #[serde(skip)]
    pub dest: Mode,
    #[serde(skip)]
    pub landing: u32,
    /// Object the landing foothold rests on.
    #[serde(skip)]
    pub landing_object: PrimitiveId,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct SearchStats {
    pub nodes_expanded: usize,
    pub edges_evaluated: usize,
    /// Wall time is reported on the console, never serialized, so repeated
    /// runs produce identical artifacts.
    #[serde(skip)]
    pub wall_time_s: f64,
}

/// A foothold sequence from the start stance toward the goal.
#[derive(Debug, Clone, Serialize)]
pub struct PlanResult {
    pub edges: Vec<PlanEdge>,
    pub total_cost: f64,
    pub stats: SearchStats,
}

impl PlanResult {
    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plan serializes");
        s.push('\n');
        s
    }

    /// Consecutive edges must chain: each edge's destination is the next
    /// edge's source.
    pub fn chain_is_consistent(&self) -> bool {
        self.edges.windows(2).all(|w| w[0].dest == w[1].source)
    }
}

/// Search failure: no path within the expansion budget.
#[derive(Debug)]
pub struct NoPath {
    pub stats: SearchStats,
    /// Cheapest path to the expanded vertex nearest the goal, when any
    /// vertex other than the start was reached.
    pub partial: Option<PlanResult>,
    pub frontier_size: usize,
}

impl std::fmt::Display for NoPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "no path to goal: expanded {} vertices, evaluated {} edges, frontier {}",
            self.stats.nodes_expanded, self.stats.edges_evaluated, self.frontier_size
        )
    }
}

impl std::error::Error for NoPath {}

struct HeapEntry {
    f: f64,
    hops: u32,
    vid: u32,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.f == other.f && self.hops == other.hops && self.vid == other.vid
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // BinaryHeap is a max-heap; invert for smallest-first.
        other
            .f
            .total_cmp(&self.f)
            .then(other.hops.cmp(&self.hops))
            .then(other.vid.cmp(&self.vid))
    }
}

/// Run the search from the graph's start mode to its goal region.
pub fn search(graph: &ModeGraph, ctx: &WeightContext) -> Result<PlanResult, NoPath> {
    let t0 = Instant::now();
    let lattice = graph.lattice;
    let goal_center = graph.goal.center_point();
    let h = |m: &Mode| -> f64 {
        ctx.lambda.com * ((m.com(lattice) - goal_center).norm() - graph.goal.radius).max(0.0)
    };

    let mut vertices: Vec<Mode> = vec![graph.start];
    let mut index: HashMap<Mode, u32> = HashMap::from([(graph.start, 0u32)]);
    let mut g: Vec<f64> = vec![0.0];
    let mut hops: Vec<u32> = vec![0];
    let mut parent: Vec<Option<(u32, PlanEdge)>> = vec![None];
    let mut closed: Vec<bool> = vec![false];
    let mut heap = BinaryHeap::new();
    heap.push(HeapEntry { f: h(&graph.start), hops: 0, vid: 0 });

    let mut stats = SearchStats::default();
    let mut best_seen: Option<(f64, u32)> = None; // (h, vid) over expanded

    let reconstruct = |vid: u32,
                       parent: &Vec<Option<(u32, PlanEdge)>>,
                       g: &Vec<f64>,
                       stats: SearchStats|
     -> PlanResult {
        let mut edges = Vec::new();
        let mut cur = vid;
        while let Some((prev, edge)) = &parent[cur as usize] {
            edges.push(edge.clone());
            cur = *prev;
        }
        edges.reverse();
        PlanResult { edges, total_cost: g[vid as usize], stats }
    };

    while let Some(entry) = heap.pop() {
        let vid = entry.vid;
        if closed[vid as usize] {
            continue;
        }
        closed[vid as usize] = true;
        stats.nodes_expanded += 1;
        let mode = vertices[vid as usize];
        let hv = h(&mode);
        if best_seen.map_or(true, |(bh, _)| hv < bh - 1e-15) {
            best_seen = Some((hv, vid));
        }
        if graph.goal.contains(&mode.com(lattice)) {
            stats.wall_time_s = t0.elapsed().as_secs_f64();
            return Ok(reconstruct(vid, &parent, &g, stats));
        }
        if stats.nodes_expanded > graph.config.max_expansions {
            break;
        }
        for e in graph.successors(&mode) {
            stats.edges_evaluated += 1;
            let terms = edge_weight(lattice, &mode, &e, ctx);
            let cost = terms.total(&ctx.lambda);
            if !cost.is_finite() {
                continue;
            }
            let tentative = g[vid as usize] + cost;
            let dvid = match index.get(&e.dest) {
                Some(&d) => d,
                None => {
                    let d = vertices.len() as u32;
                    vertices.push(e.dest);
                    index.insert(e.dest, d);
                    g.push(f64::INFINITY);
                    hops.push(u32::MAX);
                    parent.push(None);
                    closed.push(false);
                    d
                }
            };
            let improves = tentative < g[dvid as usize] - 1e-15
                || ((tentative - g[dvid as usize]).abs() <= 1e-15
                    && hops[vid as usize] + 1 < hops[dvid as usize]);
            if improves && !closed[dvid as usize] {
                g[dvid as usize] = tentative;
                hops[dvid as usize] = hops[vid as usize] + 1;
                let footholds = edge_footholds(lattice, &e);
                parent[dvid as usize] = Some((
                    vid,
                    PlanEdge {
                        swing_foot: e.swing,
                        footholds: [
                            [footholds[0].x, footholds[0].y, footholds[0].z],
                            [footholds[1].x, footholds[1].y, footholds[1].z],
                            [footholds[2].x, footholds[2].y, footholds[2].z],
                            [footholds[3].x, footholds[3].y, footholds[3].z],
                        ],
                        terms,
                        cost,
                        source: mode,
                        dest: e.dest,
                        landing: e.landing,
                        landing_object: lattice.point(e.landing).object,
                    },
                ));
                heap.push(HeapEntry {
                    f: tentative + h(&e.dest),
                    hops: hops[dvid as usize],
                    vid: dvid,
                });
            }
        }
    }

    stats.wall_time_s = t0.elapsed().as_secs_f64();
    let partial = best_seen.and_then(|(_, vid)| {
        if vid == 0 {
            None
        } else {
            Some(reconstruct(vid, &parent, &g, stats))
        }
    });
    Err(NoPath { stats, partial, frontier_size: heap.len() })
}
