//! Temperatures, community scoring and the rank an analyst assigns to a node.
//!
//! Community temperatures are mean values of integers in `{-1, 0, 1}`; they
//! are compared as exact fractions so that rank never depends on float ties.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Analyst side information about a node.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Temperature {
    Cold,
    Unknown,
    Hot,
}

impl Temperature {
    pub fn value(self) -> i64 {
        match self {
            Temperature::Cold => -1,
            Temperature::Unknown => 0,
            Temperature::Hot => 1,
        }
    }

    pub fn from_value(v: i64) -> Result<Self> {
        match v {
            -1 => Ok(Temperature::Cold),
            0 => Ok(Temperature::Unknown),
            1 => Ok(Temperature::Hot),
            _ => Err(Error::InvalidInput(format!(
                "temperature {v} not in {{-1, 0, 1}}"
            ))),
        }
    }
}

/// Per-node temperature.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemperatureMap(Vec<Temperature>);

impl TemperatureMap {
    pub fn new(values: Vec<Temperature>) -> Self {
        TemperatureMap(values)
    }

    pub fn uniform(n: usize, t: Temperature) -> Self {
        TemperatureMap(vec![t; n])
    }

    pub fn from_values(values: &[i64]) -> Result<Self> {
        values
            .iter()
            .map(|&v| Temperature::from_value(v))
            .collect::<Result<Vec<_>>>()
            .map(TemperatureMap)
    }

    #[inline]
    pub fn get(&self, v: NodeId) -> Temperature {
        self.0[v]
    }

    pub fn set(&mut self, v: NodeId, t: Temperature) {
        self.0[v] = t;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Temperature] {
        &self.0
    }
}

/// Exact mean temperature `sum / size` of a non-empty node set.
#[derive(Copy, Clone, Debug, Serialize, Deserialize)]
pub struct MeanTemperature {
    pub sum: i64,
    pub size: u64,
}

impl MeanTemperature {
    pub fn to_f64(self) -> f64 {
        self.sum as f64 / self.size as f64
    }
}

impl PartialEq for MeanTemperature {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for MeanTemperature {}

impl PartialOrd for MeanTemperature {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MeanTemperature {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = i128::from(self.sum) * i128::from(other.size);
        let rhs = i128::from(other.sum) * i128::from(self.size);
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for MeanTemperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.sum, self.size)
    }
}

/// Exact mean temperature of `members`.
pub fn mean_temperature(members: &[NodeId], temps: &TemperatureMap) -> Result<MeanTemperature> {
    if members.is_empty() {
        return Err(Error::EmptyCommunity);
    }
    let sum = members.iter().map(|&v| temps.get(v).value()).sum();
    Ok(MeanTemperature {
        sum,
        size: members.len() as u64,
    })
}

/// Mean temperature of a community.
pub fn community_temperature(members: &[NodeId], temps: &TemperatureMap) -> Result<f64> {
    mean_temperature(members, temps).map(MeanTemperature::to_f64)
}

/// A collection of non-empty node sets covering every node.
///
/// Communities are stored sorted and in lexicographic order, so two covers
/// built from the same sets compare equal regardless of input order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityCover {
    node_count: usize,
    communities: Vec<Vec<NodeId>>,
    /// Nodes the detector left unassigned, added back as singletons.
    augmented: usize,
}

impl CommunityCover {
    /// Normalize `sets` into a cover of `0..node_count`.
    ///
    /// Empty sets and repeated communities are dropped; nodes that appear in
    /// no set become singleton communities.
    pub fn new(node_count: usize, sets: Vec<Vec<NodeId>>) -> Result<Self> {
        let mut covered = vec![false; node_count];
        let mut communities = Vec::with_capacity(sets.len());
        for mut set in sets {
            set.sort_unstable();
            set.dedup();
            if set.is_empty() {
                continue;
            }
            if let Some(&bad) = set.iter().find(|&&v| v >= node_count) {
                return Err(Error::NodeOutOfRange {
                    node: bad,
                    node_count,
                });
            }
            for &v in &set {
                covered[v] = true;
            }
            communities.push(set);
        }
        let mut augmented = 0;
        for (v, c) in covered.iter().enumerate() {
            if !c {
                communities.push(vec![v]);
                augmented += 1;
            }
        }
        communities.sort_unstable();
        communities.dedup();
        Ok(CommunityCover {
            node_count,
            communities,
            augmented,
        })
    }

    /// Partition from one community label per node.
    pub fn from_labels(labels: &[usize]) -> Self {
        let k = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut sets = vec![Vec::new(); k];
        for (v, &c) in labels.iter().enumerate() {
            sets[c].push(v);
        }
        CommunityCover::new(labels.len(), sets).expect("labels index their own nodes")
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    pub fn communities(&self) -> &[Vec<NodeId>] {
        &self.communities
    }

    pub fn augmented_singletons(&self) -> usize {
        self.augmented
    }

    /// Indices of the communities containing each node.
    pub fn memberships(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.node_count];
        for (c, members) in self.communities.iter().enumerate() {
            for &v in members {
                out[v].push(c);
            }
        }
        out
    }

    pub fn communities_of(&self, v: NodeId) -> Vec<usize> {
        self.communities
            .iter()
            .enumerate()
            .filter(|(_, m)| m.binary_search(&v).is_ok())
            .map(|(c, _)| c)
            .collect()
    }

    pub fn is_partition(&self) -> bool {
        self.communities.iter().map(Vec::len).sum::<usize>() == self.node_count
    }

    /// Community index of every node, or an error if some node is shared.
    pub fn partition_labels(&self) -> Result<Vec<usize>> {
        let mut labels = vec![usize::MAX; self.node_count];
        let mut counts = vec![0usize; self.node_count];
        for (c, members) in self.communities.iter().enumerate() {
            for &v in members {
                labels[v] = c;
                counts[v] += 1;
            }
        }
        if let Some((node, &count)) = counts.iter().enumerate().find(|(_, &n)| n > 1) {
            return Err(Error::Overlapping { node, count });
        }
        Ok(labels)
    }
}

/// Exact temperature of the hottest community containing `v`.
pub fn hottest_membership(
    v: NodeId,
    cover: &CommunityCover,
    temps: &TemperatureMap,
) -> Result<MeanTemperature> {
    let mut best: Option<MeanTemperature> = None;
    for members in cover.communities() {
        if members.binary_search(&v).is_ok() {
            let t = mean_temperature(members, temps)?;
            if best.is_none_or(|b| t > b) {
                best = Some(t);
            }
        }
    }
    best.ok_or_else(|| Error::InvalidInput(format!("node {v} is in no community")))
}

/// `T_comm(v)`: temperature of the hottest community containing `v`.
pub fn node_community_temperature(
    v: NodeId,
    cover: &CommunityCover,
    temps: &TemperatureMap,
) -> Result<f64> {
    hottest_membership(v, cover, temps).map(MeanTemperature::to_f64)
}

/// Rank and community temperature of one node under a cover.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Standing {
    pub rank: usize,
    pub t_comm: MeanTemperature,
}

/// Number of nodes in the union of all communities at least as hot as
/// `v`'s hottest community, together with that temperature.
pub fn standing(v: NodeId, cover: &CommunityCover, temps: &TemperatureMap) -> Result<Standing> {
    let scores = cover
        .communities()
        .iter()
        .map(|m| mean_temperature(m, temps))
        .collect::<Result<Vec<_>>>()?;
    let mut t_comm: Option<MeanTemperature> = None;
    for (members, &t) in cover.communities().iter().zip(&scores) {
        if members.binary_search(&v).is_ok() && t_comm.is_none_or(|b| t > b) {
            t_comm = Some(t);
        }
    }
    let t_comm =
        t_comm.ok_or_else(|| Error::InvalidInput(format!("node {v} is in no community")))?;
    let mut in_union = vec![false; cover.node_count()];
    let mut rank = 0;
    for (members, &t) in cover.communities().iter().zip(&scores) {
        if t >= t_comm {
            for &u in members {
                if !in_union[u] {
                    in_union[u] = true;
                    rank += 1;
                }
            }
        }
    }
    Ok(Standing { rank, t_comm })
}

/// Rank of `v`: the number of nodes the analyst examines before reaching it.
pub fn rank(v: NodeId, cover: &CommunityCover, temps: &TemperatureMap) -> Result<usize> {
    standing(v, cover, temps).map(|s| s.rank)
}

/// Newman modularity of a partition.
///
/// Returns 0 for an edgeless graph.
pub fn modularity(g: &Graph, partition: &CommunityCover) -> Result<f64> {
    if partition.node_count() != g.node_count() {
        return Err(Error::InvalidInput(format!(
            "partition covers {} nodes, graph has {}",
            partition.node_count(),
            g.node_count()
        )));
    }
    let labels = partition.partition_labels()?;
    Ok(modularity_of_labels(g, &labels))
}

/// Modularity of a label vector (one community id per node).
pub fn modularity_of_labels(g: &Graph, labels: &[usize]) -> f64 {
    let m = g.edge_count() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let k = labels.iter().copied().max().map_or(0, |x| x + 1);
    let mut internal = vec![0usize; k];
    let mut degree = vec![0usize; k];
    for v in 0..g.node_count() {
        degree[labels[v]] += g.degree(v);
    }
    for (u, v) in g.edges() {
        if labels[u] == labels[v] {
            internal[labels[u]] += 1;
        }
    }
    internal
        .iter()
        .zip(&degree)
        .map(|(&l, &d)| {
            let frac = d as f64 / (2.0 * m);
            l as f64 / m - frac * frac
        })
        .sum()
}

/// Binary node labels (classes 0 and 1).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap(Vec<u8>);

impl LabelMap {
    pub fn new(values: Vec<u8>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|&&x| x > 1) {
            return Err(Error::InvalidInput(format!("label {bad} not in {{0, 1}}")));
        }
        Ok(LabelMap(values))
    }

    #[inline]
    pub fn get(&self, v: NodeId) -> u8 {
        self.0[v]
    }

    pub fn set(&mut self, v: NodeId, label: u8) {
        debug_assert!(label <= 1);
        self.0[v] = label;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    /// `(|V_0|, |V_1|)`.
    pub fn class_sizes(&self) -> (usize, usize) {
        let ones = self.0.iter().filter(|&&x| x == 1).count();
        (self.0.len() - ones, ones)
    }

    pub fn swapped(&self) -> LabelMap {
        LabelMap(self.0.iter().map(|&x| 1 - x).collect())
    }
}

/// Edge counts `(|E_00|, |E_11|, |E_01|)`.
pub fn label_edge_counts(g: &Graph, labels: &LabelMap) -> (usize, usize, usize) {
    let (mut e00, mut e11, mut e01) = (0, 0, 0);
    for (u, v) in g.edges() {
        match (labels.get(u), labels.get(v)) {
            (0, 0) => e00 += 1,
            (1, 1) => e11 += 1,
            _ => e01 += 1,
        }
    }
    (e00, e11, e01)
}

/// Cross-label edges divided by their expectation under random rewiring.
pub fn heterophilicity(g: &Graph, labels: &LabelMap) -> Result<f64> {
    let (n0, n1) = labels.class_sizes();
    if n0 == 0 || n1 == 0 {
        return Err(Error::InvalidInput("a label class is empty".into()));
    }
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::InvalidInput("graph has no edges".into()));
    }
    let n = g.node_count() as f64;
    let pairs = n * (n - 1.0) / 2.0;
    let (_, _, cross) = label_edge_counts(g, labels);
    let expected = n0 as f64 * n1 as f64 * m as f64 / pairs;
    Ok(cross as f64 / expected)
}

/// Within-label edges minus cross-label edges.
pub fn delta_homophily(g: &Graph, labels: &LabelMap) -> i64 {
    let (e00, e11, e01) = label_edge_counts(g, labels);
    e00 as i64 + e11 as i64 - e01 as i64
}
