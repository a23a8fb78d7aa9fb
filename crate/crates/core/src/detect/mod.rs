//! Community detectors available to the analyst.
//!
//! Every detector maps a graph and a seed to a [`CommunityCover`]; the same
//! inputs always give the same cover.

mod bpoverlap;
mod clique;
mod hlc;
mod leiden;
mod louvain;
mod stable;
mod umst;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::triage::CommunityCover;

pub use bpoverlap::{bp_overlap, bp_overlap_fit, BpFit, BpOptions};
pub use clique::{clique_percolation, maximal_cliques};
pub use hlc::{hlc, hlc_edge_clusters, EdgeClusters};
pub use leiden::{leiden, leiden_run};
pub use louvain::{louvain, louvain_run, PhasedPartition};
pub use stable::{stable_structures, structures_from_runs, StableStructureSet};
pub use umst::{umst_edges, umst_method};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorKind {
    Louvain,
    Leiden,
    CliquePercolation,
    Hlc,
    Umst,
    BpOverlap,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 6] = [
        DetectorKind::Louvain,
        DetectorKind::Leiden,
        DetectorKind::CliquePercolation,
        DetectorKind::Hlc,
        DetectorKind::Umst,
        DetectorKind::BpOverlap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Louvain => "louvain",
            DetectorKind::Leiden => "leiden",
            DetectorKind::CliquePercolation => "cp",
            DetectorKind::Hlc => "hlc",
            DetectorKind::Umst => "umst",
            DetectorKind::BpOverlap => "bp-overlap",
        }
    }

    /// Whether the method may assign a node to several communities.
    pub fn is_overlapping(self) -> bool {
        !matches!(self, DetectorKind::Louvain | DetectorKind::Leiden)
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let kind = match lower.as_str() {
            "louvain" | "lv" => DetectorKind::Louvain,
            "leiden" | "ld" => DetectorKind::Leiden,
            "cp" | "clique-percolation" => DetectorKind::CliquePercolation,
            "hlc" => DetectorKind::Hlc,
            "umst" => DetectorKind::Umst,
            "bp-overlap" | "bpoverlap" | "nocd" => DetectorKind::BpOverlap,
            _ => {
                let names: Vec<_> = DetectorKind::ALL.iter().map(|k| k.name()).collect();
                return Err(Error::InvalidInput(format!(
                    "unknown detector {s:?} (valid: {})",
                    names.join(", ")
                )));
            }
        };
        Ok(kind)
    }
}

/// Tunable detector parameters. Fields not used by a kind are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    pub clique_size: usize,
    /// HLC similarity cut; `None` cuts at the partition-density maximum.
    pub hlc_threshold: Option<f64>,
    pub umst_merge_overlap: f64,
    /// BP-Overlap dimension; `None` uses the Louvain community count.
    pub bp_dimension: Option<usize>,
    pub bp_iterations: usize,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            clique_size: 3,
            hlc_threshold: None,
            umst_merge_overlap: 0.5,
            bp_dimension: None,
            bp_iterations: 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    pub kind: DetectorKind,
    #[serde(default)]
    pub params: DetectorParams,
}

impl DetectorSpec {
    pub fn new(kind: DetectorKind) -> Self {
        DetectorSpec {
            kind,
            params: DetectorParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.params.clique_size < 3 {
            return Err(Error::InvalidInput(format!(
                "clique size {} must be at least 3",
                self.params.clique_size
            )));
        }
        if self.params.bp_dimension == Some(0) {
            return Err(Error::InvalidInput(
                "bp-overlap dimension must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn run(&self, g: &Graph, seed: u64) -> Result<CommunityCover> {
        self.validate()?;
        let p = &self.params;
        match self.kind {
            DetectorKind::Louvain => Ok(louvain(g, seed)),
            DetectorKind::Leiden => Ok(leiden(g, seed)),
            DetectorKind::CliquePercolation => clique_percolation(g, p.clique_size),
            DetectorKind::Hlc => Ok(hlc(g, p.hlc_threshold)),
            DetectorKind::Umst => umst_method(g, p.umst_merge_overlap),
            DetectorKind::BpOverlap => bp_overlap(
                g,
                &BpOptions {
                    dimension: p.bp_dimension,
                    iterations: p.bp_iterations,
                    seed,
                },
            ),
        }
    }
}

impl From<DetectorKind> for DetectorSpec {
    fn from(kind: DetectorKind) -> Self {
        DetectorSpec::new(kind)
    }
}

/// A detector bound to a fixed seed: the query interface handed to attack
/// strategies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeededDetector {
    pub spec: DetectorSpec,
    pub seed: u64,
}

impl SeededDetector {
    pub fn new(spec: DetectorSpec, seed: u64) -> Self {
        SeededDetector { spec, seed }
    }

    pub fn kind(&self) -> DetectorKind {
        self.spec.kind
    }

    pub fn detect(&self, g: &Graph) -> Result<CommunityCover> {
        self.spec.run(g, self.seed)
    }
}

/// JSON form of a detector result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverRecord {
    pub detector: DetectorSpec,
    pub seed: u64,
    pub node_count: usize,
    pub augmented_singletons: usize,
    pub communities: Vec<Vec<usize>>,
}

impl CoverRecord {
    pub fn new(detector: &SeededDetector, cover: &CommunityCover) -> Self {
        CoverRecord {
            detector: detector.spec.clone(),
            seed: detector.seed,
            node_count: cover.node_count(),
            augmented_singletons: cover.augmented_singletons(),
            communities: cover.communities().to_vec(),
        }
    }

    pub fn cover(&self) -> Result<CommunityCover> {
        CommunityCover::new(self.node_count, self.communities.clone())
    }
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns the new root if the sets were distinct.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> Option<usize> {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        Some(ra)
    }

    /// Groups of element indices, ordered by smallest member.
    pub(crate) fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut slot = vec![usize::MAX; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            let r = self.find(x);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(x);
        }
        out
    }
}

/// Split every community into the connected pieces of its induced subgraph.
pub(crate) fn split_disconnected(g: &Graph, labels: &[usize]) -> Vec<usize> {
    let n = g.node_count();
    let mut out = vec![usize::MAX; n];
    let mut next = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if out[s] != usize::MAX {
            continue;
        }
        out[s] = next;
        stack.push(s);
        while let Some(v) = stack.pop() {
            for &w in g.neighbors(v) {
                if out[w] == usize::MAX && labels[w] == labels[s] {
                    out[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    out
}
