use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DetectorSpec, UnionFind};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::seed;
use crate::triage::CommunityCover;

/// Node groups that a detector puts together in every one of several runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StableStructureSet {
    /// Disjoint sorted node sets of size ≥ 2, ordered by smallest member.
    pub structures: Vec<Vec<NodeId>>,
    pub trials: usize,
    pub detector: DetectorSpec,
}

impl StableStructureSet {
    /// Structure index of every node, `None` for nodes in no structure.
    pub fn membership(&self, node_count: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; node_count];
        for (i, s) in self.structures.iter().enumerate() {
            for &v in s {
                out[v] = Some(i);
            }
        }
        out
    }
}

/// Run the detector `trials` times with derived seeds and keep the groups
/// of nodes that always share a community.
pub fn stable_structures(
    g: &Graph,
    spec: &DetectorSpec,
    trials: usize,
    master_seed: u64,
) -> Result<StableStructureSet> {
    if trials < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 trials, got {trials}"
        )));
    }
    let runs = (0..trials)
        .into_par_iter()
        .map(|t| spec.run(g, seed::sub_seed(master_seed, "stable-trial", &[t as u64])))
        .collect::<Result<Vec<_>>>()?;
    Ok(StableStructureSet {
        structures: structures_from_runs(g.node_count(), &runs),
        trials,
        detector: spec.clone(),
    })
}

/// Connected components (size ≥ 2) of the graph linking two nodes iff
/// every run has a community holding both.
pub fn structures_from_runs(node_count: usize, runs: &[CommunityCover]) -> Vec<Vec<NodeId>> {
    let Some((first, rest)) = runs.split_first() else {
        return Vec::new();
    };
    let mut pairs: HashSet<(NodeId, NodeId)> = HashSet::new();
    for members in first.communities() {
        for (i, &u) in members.iter().enumerate() {
            for &v in &members[i + 1..] {
                pairs.insert((u, v));
            }
        }
    }
    for run in rest {
        let memberships = run.memberships();
        pairs.retain(|&(u, v)| shares_community(&memberships[u], &memberships[v]));
    }
    let mut uf = UnionFind::new(node_count);
    let mut sorted: Vec<_> = pairs.into_iter().collect();
    sorted.sort_unstable();
    for (u, v) in sorted {
        uf.union(u, v);
    }
    uf.groups().into_iter().filter(|g| g.len() >= 2).collect()
}

fn shares_community(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}
