//! Foothold planning over a mode-transition graph.
//!
//! Vertices are partial stances: three feet in contact with known steppable
//! objects, one foot in the air. An edge is the full stance realized when
//! the airborne foot lands; its weight combines accumulated transition-cost
//! experience, CoM travel, deviation from a guiding torso path, and the
//! mask-projected steppability term. Contact positions are discretized onto
//! a per-face foothold lattice, which keeps the graph finite and the search
//! deterministic.

mod experience;
mod graph;
mod lattice;
mod search;
mod weights;

pub use experience::{ExperienceStore, Outcome};
pub use graph::{build_graph, snap_stance, FullStance, GraphConfig, GraphStats, Mode, ModeGraph};
pub use lattice::{build_lattice, FootholdLattice, LatticeOptions, LatticePoint};
pub use search::{search, NoPath, PlanEdge, PlanResult, SearchStats};
pub use weights::{
    edge_weight, steppability_weight, EdgeWeightTerms, Lambda, MaskContext, TorsoPath,
    WeightContext,
};

use crate::geometry::PrimitiveId;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The four feet of the quadruped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FootId {
    /// Left front.
    LF,
    /// Right front.
    RF,
    /// Left hind.
    LH,
    /// Right hind.
    RH,
}

impl FootId {
    pub const ALL: [FootId; 4] = [FootId::LF, FootId::RF, FootId::LH, FootId::RH];

    /// Crawl-gait swing order.
    pub const GAIT_CYCLE: [FootId; 4] = [FootId::LF, FootId::RH, FootId::RF, FootId::LH];

    pub fn index(self) -> usize {
        match self {
            FootId::LF => 0,
            FootId::RF => 1,
            FootId::LH => 2,
            FootId::RH => 3,
        }
    }

    /// Stance position relative to the torso center (x forward, y left).
    pub fn nominal_offset(self) -> [f64; 2] {
        match self {
            FootId::LF => [0.17, 0.13],
            FootId::RF => [0.17, -0.13],
            FootId::LH => [-0.17, 0.13],
            FootId::RH => [-0.17, -0.13],
        }
    }

    /// Next swing foot in the crawl cycle.
    pub fn next_in_cycle(self) -> FootId {
        let cycle = FootId::GAIT_CYCLE;
        let pos = cycle.iter().position(|f| *f == self).unwrap();
        cycle[(pos + 1) % 4]
    }
}

/// Height of the nominal CoM above the stance centroid, meters.
pub const NOMINAL_COM_HEIGHT: f64 = 0.30;

/// Contact assignment of one stance foot: which object, at which lattice
/// point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Contact {
    pub foot: FootId,
    pub point: u32,
}

/// Combinatorial part of a mode: which feet stand on which objects.
/// Ordered by foot for canonical comparison.
pub type ModeFamily = [(FootId, PrimitiveId); 3];

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("no steppable faces available to the planner")]
    NoSteppableFaces,
    #[error("lattice resolution must be positive, got {0}")]
    BadResolution(f64),
    #[error("{side} stance unreachable in the lattice: {detail}")]
    StanceUnreachable { side: &'static str, detail: String },
    #[error("lattice point index {0} out of range")]
    BadPointIndex(u32),
}
