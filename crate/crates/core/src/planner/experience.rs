//! Experience-accumulated transition cost statistics.
//!
//! Keyed by (source mode family, destination mode family) and the nominal
//! CoM displacement quantized into bins, so one observed transition informs
//! every geometrically similar candidate between the same object pairs.

use super::graph::Mode;
use super::lattice::FootholdLattice;
use super::{FootId, ModeFamily};
use crate::geometry::PrimitiveId;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct ExpKey {
    src: ModeFamily,
    dst: ModeFamily,
    bin: [i32; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinStats {
    pub count: u64,
    pub mean: f64,
    pub failures: u64,
}

/// Result of attempting the trajectory optimization for one transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Converged(f64),
    Failed,
}

#[derive(Debug, Clone)]
pub struct ExperienceStore {
    /// Prior cost reported for unseen transitions.
    pub d0: f64,
    /// Displacement quantization, meters.
    pub bin_size: f64,
    map: HashMap<ExpKey, BinStats>,
}

impl Default for ExperienceStore {
    fn default() -> Self {
        ExperienceStore::new(0.0)
    }
}

impl ExperienceStore {
    pub fn new(d0: f64) -> ExperienceStore {
        ExperienceStore { d0, bin_size: 0.10, map: HashMap::new() }
    }

    /// Penalty cost folded into the mean when a transition fails.
    pub fn c_fail(&self) -> f64 {
        10.0 * self.d0 + 100.0
    }

    fn key(&self, lattice: &FootholdLattice, src: &Mode, dst: &Mode) -> ExpKey {
        let delta = dst.com(lattice) - src.com(lattice);
        let q = |v: f64| (v / self.bin_size).floor() as i32;
        ExpKey {
            src: src.family(lattice),
            dst: dst.family(lattice),
            bin: [q(delta.x), q(delta.y), q(delta.z)],
        }
    }

    /// Mean observed cost for this transition's bin, or the prior.
    pub fn lookup(&self, lattice: &FootholdLattice, src: &Mode, dst: &Mode) -> f64 {
        self.map
            .get(&self.key(lattice, src, dst))
            .map_or(self.d0, |b| b.mean)
    }

    /// Fold an optimizer outcome into the transition's bin: converged costs
    /// update the running mean, failures add the failure penalty as a
    /// sample and bump the failure count.
    pub fn update(&mut self, lattice: &FootholdLattice, src: &Mode, dst: &Mode, outcome: Outcome) {
        let c_fail = self.c_fail();
        let entry = self
            .map
            .entry(self.key(lattice, src, dst))
            .or_insert(BinStats { count: 0, mean: 0.0, failures: 0 });
        let sample = match outcome {
            Outcome::Converged(c) => c,
            Outcome::Failed => {
                entry.failures += 1;
                c_fail
            }
        };
        entry.count += 1;
        entry.mean += (sample - entry.mean) / entry.count as f64;
    }

    pub fn total_samples(&self) -> u64 {
        self.map.values().map(|b| b.count).sum()
    }

    pub fn bins(&self) -> usize {
        self.map.len()
    }

    pub fn to_json_pretty(&self) -> String {
        let mut entries: Vec<ExpEntry> = self
            .map
            .iter()
            .map(|(k, v)| ExpEntry {
                src: k.src.iter().map(|(f, o)| FamilyPart { foot: *f, object: o.0 }).collect(),
                dst: k.dst.iter().map(|(f, o)| FamilyPart { foot: *f, object: o.0 }).collect(),
                bin: k.bin,
                stats: *v,
            })
            .collect();
        entries.sort_by(|a, b| (&a.src, &a.dst, a.bin).cmp(&(&b.src, &b.dst, b.bin)));
        let doc = ExpDoc { d0: self.d0, bin_size: self.bin_size, entries };
        let mut s = serde_json::to_string_pretty(&doc).expect("experience serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<ExperienceStore, serde_json::Error> {
        let doc: ExpDoc = serde_json::from_str(s)?;
        let mut store = ExperienceStore::new(doc.d0);
        store.bin_size = doc.bin_size;
        for e in doc.entries {
            let fam = |parts: &[FamilyPart]| -> ModeFamily {
                let mut out = [(FootId::LF, PrimitiveId(0)); 3];
                for (k, p) in parts.iter().take(3).enumerate() {
                    out[k] = (p.foot, PrimitiveId(p.object));
                }
                out
            };
            store
                .map
                .insert(ExpKey { src: fam(&e.src), dst: fam(&e.dst), bin: e.bin }, e.stats);
        }
        Ok(store)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
struct FamilyPart {
    foot: FootId,
    object: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ExpEntry {
    src: Vec<FamilyPart>,
    dst: Vec<FamilyPart>,
    bin: [i32; 3],
    stats: BinStats,
}

#[derive(Debug, Serialize, Deserialize)]
struct ExpDoc {
    d0: f64,
    bin_size: f64,
    entries: Vec<ExpEntry>,
}
