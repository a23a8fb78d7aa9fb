use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{Graph, NodeId};
use crate::seed;
use crate::triage::{modularity_of_labels, CommunityCover};

const GAIN_EPS: f64 = 1e-12;

/// Partition plus the modularity reached after each aggregation phase.
#[derive(Clone, Debug)]
pub struct PhasedPartition {
    pub labels: Vec<usize>,
    pub phase_modularity: Vec<f64>,
}

impl PhasedPartition {
    pub fn cover(&self) -> CommunityCover {
        CommunityCover::from_labels(&self.labels)
    }
}

/// Greedy modularity maximization by local moves and aggregation.
pub fn louvain(g: &Graph, seed: u64) -> CommunityCover {
    louvain_run(g, seed).cover()
}

pub fn louvain_run(g: &Graph, seed: u64) -> PhasedPartition {
    let mut rng = seed::rng_for(seed, "louvain", &[]);
    let mut wg = WeightedGraph::from_graph(g);
    let mut membership: Vec<usize> = (0..g.node_count()).collect();
    let mut phase_modularity = Vec::new();
    if g.edge_count() == 0 {
        return PhasedPartition {
            labels: membership,
            phase_modularity,
        };
    }
    loop {
        let mut comm: Vec<usize> = (0..wg.len()).collect();
        if !wg.local_moves(&mut comm, &mut rng) {
            break;
        }
        let k = renumber(&mut comm);
        for m in membership.iter_mut() {
            *m = comm[*m];
        }
        phase_modularity.push(modularity_of_labels(g, &membership));
        wg = wg.aggregate(&comm, k);
    }
    PhasedPartition {
        labels: membership,
        phase_modularity,
    }
}

/// Relabel to `0..k` in order of first appearance; returns `k`.
pub(super) fn renumber(labels: &mut [usize]) -> usize {
    let mut map = std::collections::HashMap::new();
    for l in labels.iter_mut() {
        let next = map.len();
        *l = *map.entry(*l).or_insert(next);
    }
    map.len()
}

/// Weighted graph used across aggregation levels. Self-loop weight counts
/// once towards internal weight and twice towards degree.
#[derive(Clone, Debug)]
pub(super) struct WeightedGraph {
    pub(super) adj: Vec<Vec<(usize, f64)>>,
    pub(super) self_loop: Vec<f64>,
    pub(super) degree: Vec<f64>,
    /// Twice the total edge weight.
    pub(super) total: f64,
}

impl WeightedGraph {
    pub(super) fn from_graph(g: &Graph) -> Self {
        let n = g.node_count();
        let adj: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|v| g.neighbors(v).iter().map(|&w| (w, 1.0)).collect())
            .collect();
        let degree: Vec<f64> = (0..n).map(|v| g.degree(v) as f64).collect();
        WeightedGraph {
            adj,
            self_loop: vec![0.0; n],
            degree,
            total: 2.0 * g.edge_count() as f64,
        }
    }

    pub(super) fn len(&self) -> usize {
        self.adj.len()
    }

    /// Repeated passes of single-node moves in a shuffled order until no
    /// node changes community. Returns whether anything moved.
    pub(super) fn local_moves<R: Rng + ?Sized>(&self, comm: &mut [usize], rng: &mut R) -> bool {
        let n = self.len();
        let mut order: Vec<NodeId> = (0..n).collect();
        order.shuffle(rng);
        let mut tot = vec![0.0; n];
        for v in 0..n {
            tot[comm[v]] += self.degree[v];
        }
        let mut weight_to = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut any = false;
        loop {
            let mut moved = false;
            for &v in &order {
                let own = comm[v];
                let kv = self.degree[v];
                for &(w, x) in &self.adj[v] {
                    let c = comm[w];
                    if weight_to[c] == 0.0 {
                        touched.push(c);
                    }
                    weight_to[c] += x;
                }
                tot[own] -= kv;
                let mut best = own;
                let mut best_gain = weight_to[own] - tot[own] * kv / self.total;
                for &c in &touched {
                    let gain = weight_to[c] - tot[c] * kv / self.total;
                    if gain > best_gain + GAIN_EPS {
                        best = c;
                        best_gain = gain;
                    }
                }
                tot[best] += kv;
                if best != own {
                    comm[v] = best;
                    moved = true;
                }
                for &c in &touched {
                    weight_to[c] = 0.0;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
            any = true;
        }
        any
    }

    /// Collapse each of the `k` communities into one node.
    pub(super) fn aggregate(&self, comm: &[usize], k: usize) -> WeightedGraph {
        let mut self_loop = vec![0.0; k];
        let mut degree = vec![0.0; k];
        let mut rows: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); k];
        for v in 0..self.len() {
            let c = comm[v];
            self_loop[c] += self.self_loop[v];
            degree[c] += self.degree[v];
            for &(w, x) in &self.adj[v] {
                let d = comm[w];
                if d == c {
                    // each internal edge is seen from both ends
                    self_loop[c] += x / 2.0;
                } else {
                    *rows[c].entry(d).or_insert(0.0) += x;
                }
            }
        }
        WeightedGraph {
            adj: rows.into_iter().map(|r| r.into_iter().collect()).collect(),
            self_loop,
            degree,
            total: self.total,
        }
    }
}
