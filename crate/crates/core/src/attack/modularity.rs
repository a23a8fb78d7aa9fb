use super::{AttackPlan, Strategy};
use crate::detect::SeededDetector;
use crate::error::Result;
use crate::graph::{Graph, NodeId};
use crate::triage::{mean_temperature, CommunityCover, TemperatureMap};

/// Partition labels placing every node in its hottest community, ties to
/// the earlier community. Communities left empty are dropped and the rest
/// renumbered in cover order.
pub fn disjoint_by_temperature(
    cover: &CommunityCover,
    temps: &TemperatureMap,
) -> Result<Vec<usize>> {
    let scores = cover
        .communities()
        .iter()
        .map(|m| mean_temperature(m, temps))
        .collect::<Result<Vec<_>>>()?;
    let mut raw = vec![usize::MAX; cover.node_count()];
    for (v, comms) in cover.memberships().into_iter().enumerate() {
        for c in comms {
            if raw[v] == usize::MAX || scores[c] > scores[raw[v]] {
                raw[v] = c;
            }
        }
    }
    let mut renumber = vec![usize::MAX; cover.len()];
    let mut used: Vec<usize> = raw.clone();
    used.sort_unstable();
    used.dedup();
    for (i, c) in used.into_iter().enumerate() {
        renumber[c] = i;
    }
    Ok(raw.into_iter().map(|c| renumber[c]).collect())
}

/// Per-community edge and degree totals under a fixed partition.
struct ModularityState {
    labels: Vec<usize>,
    degree: Vec<usize>,
    edges: usize,
    internal: Vec<f64>,
    degree_sum: Vec<f64>,
}

impl ModularityState {
    fn new(g: &Graph, labels: Vec<usize>) -> Self {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut internal = vec![0.0; k];
        let mut degree_sum = vec![0.0; k];
        for (u, v) in g.edges() {
            if labels[u] == labels[v] {
                internal[labels[u]] += 1.0;
            }
        }
        for v in 0..g.node_count() {
            degree_sum[labels[v]] += g.degree(v) as f64;
        }
        ModularityState {
            labels,
            degree: (0..g.node_count()).map(|v| g.degree(v)).collect(),
            edges: g.edge_count(),
            internal,
            degree_sum,
        }
    }

    fn term(&self, internal: f64, degree_sum: f64) -> f64 {
        let m = self.edges as f64;
        internal / m - (degree_sum / (2.0 * m)).powi(2)
    }

    /// Change in Q if `v` moved from its community to `c`, given `links[c]`
    /// edges from `v` into each community.
    fn move_gain(&self, v: NodeId, c: usize, links: &[f64]) -> f64 {
        let a = self.labels[v];
        let d = self.degree[v] as f64;
        let before = self.term(self.internal[a], self.degree_sum[a])
            + self.term(self.internal[c], self.degree_sum[c]);
        let after = self.term(self.internal[a] - links[a], self.degree_sum[a] - d)
            + self.term(self.internal[c] + links[c], self.degree_sum[c] + d);
        after - before
    }

    fn add_edge(&mut self, u: NodeId, v: NodeId) {
        self.edges += 1;
        self.degree[u] += 1;
        self.degree[v] += 1;
        self.degree_sum[self.labels[u]] += 1.0;
        self.degree_sum[self.labels[v]] += 1.0;
        if self.labels[u] == self.labels[v] {
            self.internal[self.labels[u]] += 1.0;
        }
    }
}

/// Greedy modularity attack: repeatedly pick the community the target
/// would most profitably join and link to its best-connected member.
///
/// The detector runs once on the clean graph; the partition then stays
/// fixed while the modularity of each hypothetical move is updated for the
/// edges added so far.
pub fn modularity_attack(
    g: &Graph,
    target: NodeId,
    detector: &SeededDetector,
    temps: &TemperatureMap,
    budget: usize,
) -> Result<AttackPlan> {
    g.check_node(target)?;
    let cover = detector.detect(g)?;
    let labels = disjoint_by_temperature(&cover, temps)?;
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut members = vec![Vec::new(); k];
    for (v, &c) in labels.iter().enumerate() {
        members[c].push(v);
    }
    let mut state = ModularityState::new(g, labels);
    let mut linked = vec![false; g.node_count()];
    linked[target] = true;
    let mut links = vec![0.0; k];
    for &w in g.neighbors(target) {
        linked[w] = true;
        links[state.labels[w]] += 1.0;
    }
    let own = state.labels[target];

    let mut plan = AttackPlan::new(Strategy::Modularity, target, budget, detector.seed);
    while plan.edges.len() < budget && state.edges > 0 {
        let mut best: Option<(f64, usize)> = None;
        for c in (0..k).filter(|&c| c != own) {
            if members[c].iter().all(|&u| linked[u]) {
                continue;
            }
            let gain = state.move_gain(target, c, &links);
            if best.is_none_or(|(b, _)| gain > b) {
                best = Some((gain, c));
            }
        }
        let Some((_, c)) = best else { break };
        let u = members[c]
            .iter()
            .copied()
            .filter(|&u| !linked[u])
            .max_by_key(|&u| (state.degree[u], std::cmp::Reverse(u)))
            .expect("community has an unlinked member");
        plan.edges.push((target, u));
        linked[u] = true;
        links[c] += 1.0;
        state.add_edge(target, u);
    }
    Ok(plan)
}
