//! Synthetic terrain toolkit for quadruped foothold planning.
//!
//! The pipeline runs in five stages, each living in its own module:
//!
//! * [`geometry`] — primitive shape classes, steppability label policies,
//!   and scene assembly (generated, preset, or manual).
//! * [`camera`] — pinhole model, jittered trajectories, world-to-pixel
//!   projection.
//! * [`render`] — raycast depth images and ground-truth steppability masks,
//!   dataset export (PFM depth + indexed PNG masks), external mask ingestion.
//! * [`planner`] — foothold lattice, mode-transition graph, edge weights with
//!   the mask-projected steppability term, best-first search, and the
//!   experience store fed by trajectory-optimizer outcomes.
//! * [`trajopt`] — reduced centroidal transition optimizer (direct
//!   transcription, friction pyramid, obstacle clearance) solved by an
//!   iterative penalty method.
//! * [`nav`] — event-driven navigation: per-tick execution, boundary- and
//!   disturbance-triggered re-planning, offline experience trials.

pub mod camera;
pub mod geometry;
pub mod nav;
pub mod planner;
pub mod render;
pub mod trajopt;
