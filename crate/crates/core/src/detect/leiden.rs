use rand::seq::SliceRandom;
use rand::Rng;

use super::louvain::{renumber, PhasedPartition, WeightedGraph};
use super::split_disconnected;
use crate::graph::{Graph, NodeId};
use crate::seed;
use crate::triage::{modularity_of_labels, CommunityCover};

const MAX_LEVELS: usize = 64;

/// Louvain with a refinement step before aggregation. Every returned
/// community induces a connected subgraph.
pub fn leiden(g: &Graph, seed: u64) -> CommunityCover {
    leiden_run(g, seed).cover()
}

pub fn leiden_run(g: &Graph, seed: u64) -> PhasedPartition {
    let mut rng = seed::rng_for(seed, "leiden", &[]);
    let n = g.node_count();
    let mut phase_modularity = Vec::new();
    if g.edge_count() == 0 {
        return PhasedPartition {
            labels: (0..n).collect(),
            phase_modularity,
        };
    }
    let mut wg = WeightedGraph::from_graph(g);
    // original node -> aggregate node
    let mut membership: Vec<usize> = (0..n).collect();
    let mut comm: Vec<usize> = (0..n).collect();
    for _ in 0..MAX_LEVELS {
        let moved = wg.local_moves(&mut comm, &mut rng);
        let k = renumber(&mut comm);
        let flat: Vec<usize> = membership.iter().map(|&a| comm[a]).collect();
        if moved {
            phase_modularity.push(modularity_of_labels(g, &flat));
        }
        if k == wg.len() {
            break;
        }
        let mut refined = refine(&wg, &comm, &mut rng);
        let r = renumber(&mut refined);
        if r == wg.len() {
            // refinement kept everything apart: aggregation would not shrink
            break;
        }
        let mut parent = vec![0; r];
        for v in 0..wg.len() {
            parent[refined[v]] = comm[v];
        }
        for m in membership.iter_mut() {
            *m = refined[*m];
        }
        wg = wg.aggregate(&refined, r);
        comm = parent;
    }
    let flat: Vec<usize> = membership.iter().map(|&a| comm[a]).collect();
    let mut labels = split_disconnected(g, &flat);
    renumber(&mut labels);
    let final_q = modularity_of_labels(g, &labels);
    if phase_modularity.last().is_some_and(|&q| final_q > q) {
        phase_modularity.push(final_q);
    }
    PhasedPartition {
        labels,
        phase_modularity,
    }
}

/// Within each community, greedily merge singleton nodes into
/// well-connected sub-communities.
fn refine<R: Rng + ?Sized>(wg: &WeightedGraph, comm: &[usize], rng: &mut R) -> Vec<usize> {
    let n = wg.len();
    let mut comm_tot = vec![0.0; n];
    for v in 0..n {
        comm_tot[comm[v]] += wg.degree[v];
    }
    let mut refined: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];
    let mut tot: Vec<f64> = wg.degree.clone();
    // weight from each refined set to the rest of its community
    let mut external: Vec<f64> = (0..n)
        .map(|v| {
            wg.adj[v]
                .iter()
                .filter(|&&(w, _)| comm[w] == comm[v])
                .map(|&(_, x)| x)
                .sum()
        })
        .collect();

    let mut order: Vec<NodeId> = (0..n).collect();
    order.shuffle(rng);
    let mut weight_to = vec![0.0; n];
    let mut touched = Vec::new();
    for &v in &order {
        if refined[v] != v || size[v] != 1 {
            continue;
        }
        let c = comm[v];
        let kv = wg.degree[v];
        if external[v] < kv * (comm_tot[c] - kv) / wg.total {
            continue;
        }
        for &(w, x) in &wg.adj[v] {
            if comm[w] != c || w == v {
                continue;
            }
            let r = refined[w];
            if weight_to[r] == 0.0 {
                touched.push(r);
            }
            weight_to[r] += x;
        }
        let mut best: Option<(usize, f64)> = None;
        for &r in &touched {
            let well_connected = external[r] >= tot[r] * (comm_tot[c] - tot[r]) / wg.total;
            if !well_connected {
                continue;
            }
            let gain = weight_to[r] - kv * tot[r] / wg.total;
            if gain >= 0.0 && best.is_none_or(|(_, b)| gain > b) {
                best = Some((r, gain));
            }
        }
        if let Some((r, _)) = best {
            external[r] += external[v] - 2.0 * weight_to[r];
            tot[r] += kv;
            size[r] += 1;
            size[v] = 0;
            refined[v] = r;
        }
        for &r in &touched {
            weight_to[r] = 0.0;
        }
        touched.clear();
    }
    refined
}
