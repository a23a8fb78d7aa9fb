use std::collections::HashMap;

use super::UnionFind;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::triage::CommunityCover;

/// All maximal cliques with at least `min_size` nodes, each sorted, in
/// lexicographic order.
pub fn maximal_cliques(g: &Graph, min_size: usize) -> Vec<Vec<NodeId>> {
    let n = g.node_count();
    let order = degeneracy_order(g);
    let mut position = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    let mut out = Vec::new();
    let mut clique = Vec::new();
    for &v in &order {
        let (later, earlier): (Vec<NodeId>, Vec<NodeId>) = g
            .neighbors(v)
            .iter()
            .partition(|&&w| position[w] > position[v]);
        clique.push(v);
        bron_kerbosch(g, &mut clique, later, earlier, min_size, &mut out);
        clique.pop();
    }
    for c in out.iter_mut() {
        c.sort_unstable();
    }
    out.sort_unstable();
    out
}

fn bron_kerbosch(
    g: &Graph,
    clique: &mut Vec<NodeId>,
    candidates: Vec<NodeId>,
    excluded: Vec<NodeId>,
    min_size: usize,
    out: &mut Vec<Vec<NodeId>>,
) {
    if candidates.is_empty() {
        if excluded.is_empty() && clique.len() >= min_size {
            out.push(clique.clone());
        }
        return;
    }
    if clique.len() + candidates.len() < min_size {
        return;
    }
    // pivot with the most candidate neighbours
    let pivot = candidates
        .iter()
        .chain(&excluded)
        .copied()
        .max_by_key(|&u| candidates.iter().filter(|&&w| g.has_edge(u, w)).count())
        .expect("non-empty");
    let branch: Vec<NodeId> = candidates
        .iter()
        .copied()
        .filter(|&w| !g.has_edge(pivot, w))
        .collect();
    let mut candidates = candidates;
    let mut excluded = excluded;
    for v in branch {
        let next_candidates = candidates
            .iter()
            .copied()
            .filter(|&w| g.has_edge(v, w))
            .collect();
        let next_excluded = excluded
            .iter()
            .copied()
            .filter(|&w| g.has_edge(v, w))
            .collect();
        clique.push(v);
        bron_kerbosch(g, clique, next_candidates, next_excluded, min_size, out);
        clique.pop();
        candidates.retain(|&w| w != v);
        excluded.push(v);
    }
}

/// Nodes in order of repeatedly removing a minimum-degree node.
fn degeneracy_order(g: &Graph) -> Vec<NodeId> {
    let n = g.node_count();
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let max_deg = degree.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<Vec<NodeId>> = vec![Vec::new(); max_deg + 1];
    for v in (0..n).rev() {
        buckets[degree[v]].push(v);
    }
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut d = 0;
    while order.len() < n {
        d = d.min(max_deg);
        while buckets[d].is_empty() {
            d += 1;
        }
        let v = buckets[d].pop().expect("non-empty bucket");
        if removed[v] || degree[v] != d {
            continue;
        }
        removed[v] = true;
        order.push(v);
        for &w in g.neighbors(v) {
            if !removed[w] {
                degree[w] -= 1;
                buckets[degree[w]].push(w);
                d = d.min(degree[w]);
            }
        }
    }
    order
}

/// k-clique percolation: unions of maximal cliques (size ≥ k) chained by
/// overlaps of at least k − 1 nodes. Nodes in no k-clique become
/// singletons.
pub fn clique_percolation(g: &Graph, k: usize) -> Result<CommunityCover> {
    if k < 3 {
        return Err(Error::InvalidInput(format!(
            "clique size {k} must be at least 3"
        )));
    }
    let cliques = maximal_cliques(g, k);
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); g.node_count()];
    for (i, c) in cliques.iter().enumerate() {
        for &v in c {
            containing[v].push(i);
        }
    }
    let mut uf = UnionFind::new(cliques.len());
    let mut shared: HashMap<usize, usize> = HashMap::new();
    for (i, c) in cliques.iter().enumerate() {
        shared.clear();
        for &v in c {
            for &j in &containing[v] {
                if j > i {
                    *shared.entry(j).or_insert(0) += 1;
                }
            }
        }
        for (&j, &count) in &shared {
            if count >= k - 1 {
                uf.union(i, j);
            }
        }
    }
    let communities = uf
        .groups()
        .into_iter()
        .map(|group| {
            group
                .iter()
                .flat_map(|&i| cliques[i].iter().copied())
                .collect()
        })
        .collect();
    CommunityCover::new(g.node_count(), communities)
}
