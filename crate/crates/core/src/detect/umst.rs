use std::cmp::Ordering;
use std::collections::BTreeSet;

use super::UnionFind;
use crate::error::{Error, Result};
use crate::graph::{closed_neighborhood, sorted_intersection_len, Graph, NodeId};
use crate::triage::CommunityCover;

/// Edges lying on at least one maximum spanning tree, with edges weighted
/// by the Jaccard similarity of their endpoints' closed neighbourhoods.
///
/// An edge belongs to some maximum spanning tree exactly when its
/// endpoints are not already joined by strictly heavier edges.
pub fn umst_edges(g: &Graph) -> Vec<(NodeId, NodeId)> {
    let closed: Vec<Vec<NodeId>> = (0..g.node_count())
        .map(|v| closed_neighborhood(g, v))
        .collect();
    let mut weighted: Vec<(u64, u64, NodeId, NodeId)> = g
        .edges()
        .map(|(u, v)| {
            let inter = sorted_intersection_len(&closed[u], &closed[v]) as u64;
            let union = (closed[u].len() + closed[v].len()) as u64 - inter;
            (inter, union, u, v)
        })
        .collect();
    let heavier = |a: &(u64, u64, NodeId, NodeId), b: &(u64, u64, NodeId, NodeId)| -> Ordering {
        (b.0 as u128 * a.1 as u128).cmp(&(a.0 as u128 * b.1 as u128))
    };
    weighted.sort_by(|a, b| heavier(a, b).then((a.2, a.3).cmp(&(b.2, b.3))));

    let mut uf = UnionFind::new(g.node_count());
    let mut kept = Vec::new();
    let mut start = 0;
    while start < weighted.len() {
        let mut end = start + 1;
        while end < weighted.len() && heavier(&weighted[start], &weighted[end]) == Ordering::Equal {
            end += 1;
        }
        for &(_, _, u, v) in &weighted[start..end] {
            if uf.find(u) != uf.find(v) {
                kept.push((u, v));
            }
        }
        for &(_, _, u, v) in &weighted[start..end] {
            uf.union(u, v);
        }
        start = end;
    }
    kept.sort_unstable();
    kept
}

/// Communities grown from triangles of the maximum-spanning-tree union,
/// merged while their overlap coefficient reaches `merge_overlap`.
pub fn umst_method(g: &Graph, merge_overlap: f64) -> Result<CommunityCover> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    if !g.is_connected() {
        return Err(Error::Disconnected {
            components: g.components().len(),
        });
    }
    let tree = Graph::from_edges(g.node_count(), umst_edges(g));
    let seeds: Vec<Vec<NodeId>> = (0..g.node_count())
        .map(|v| {
            let nbrs = tree.neighbors(v);
            let mut members = BTreeSet::from([v]);
            for (i, &a) in nbrs.iter().enumerate() {
                for &b in &nbrs[i + 1..] {
                    if tree.has_edge(a, b) {
                        members.insert(a);
                        members.insert(b);
                    }
                }
            }
            members.into_iter().collect()
        })
        .collect();
    let merged = merge_overlapping(seeds, g.node_count(), merge_overlap);
    CommunityCover::new(g.node_count(), merged)
}

fn overlap_coefficient(a: &[NodeId], b: &[NodeId]) -> f64 {
    sorted_intersection_len(a, b) as f64 / a.len().min(b.len()) as f64
}

fn merge_sorted(a: &[NodeId], b: &[NodeId]) -> Vec<NodeId> {
    let mut out: Vec<NodeId> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Merge pairs of sets with overlap coefficient ≥ `threshold` until none
/// remain. Sets are scanned in index order; a set absorbs every partner it
/// qualifies with before the scan moves on.
fn merge_overlapping(sets: Vec<Vec<NodeId>>, n: usize, threshold: f64) -> Vec<Vec<NodeId>> {
    let mut sets: Vec<Option<Vec<NodeId>>> = sets.into_iter().map(Some).collect();
    let mut index: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, s) in sets.iter().enumerate() {
        for &v in s.as_ref().expect("live") {
            index[v].push(i);
        }
    }
    loop {
        let mut changed = false;
        for i in 0..sets.len() {
            while let Some(current) = sets[i].as_ref() {
                let mut candidates: Vec<usize> = current
                    .iter()
                    .flat_map(|&v| index[v].iter().copied())
                    .filter(|&j| j != i && sets[j].is_some())
                    .collect();
                candidates.sort_unstable();
                candidates.dedup();
                let partner = candidates.into_iter().find(|&j| {
                    overlap_coefficient(current, sets[j].as_ref().expect("live")) >= threshold
                });
                let Some(j) = partner else { break };
                let joined = merge_sorted(current, sets[j].as_ref().expect("live"));
                let other = sets[j].take().expect("live");
                for &v in &other {
                    if !index[v].contains(&i) {
                        index[v].push(i);
                    }
                }
                sets[i] = Some(joined);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    sets.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_is_its_own_spanning_tree_union() {
        let g = Graph::from_edges(5, [(0, 1), (0, 2), (2, 3), (2, 4)]);
        assert_eq!(umst_edges(&g), g.edges().collect::<Vec<_>>());
    }

    #[test]
    fn equal_weight_cycle_keeps_every_edge() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!(umst_edges(&g).len(), 4);
    }

    #[test]
    fn heaviest_edges_come_first() {
        // square with a diagonal: the diagonal weighs 1, the four sides 3/4
        // and each side still reaches a node the diagonal leaves apart
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]);
        assert_eq!(umst_edges(&g).len(), 5);
        // 5-cycle with pendants on 0 and 1: (0, 1) weighs 1/3, every other
        // cycle edge at least 2/5, so (0, 1) closes a heavier cycle
        let g = Graph::from_edges(7, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 5), (1, 6)]);
        let kept = umst_edges(&g);
        assert_eq!(kept.len(), 6);
        assert!(!kept.contains(&(0, 1)));
    }

    #[test]
    fn two_cliques_with_bridge() {
        let mut edges = Vec::new();
        for base in [0, 5] {
            for u in 0..5 {
                for v in u + 1..5 {
                    edges.push((base + u, base + v));
                }
            }
        }
        edges.push((4, 5));
        let g = Graph::from_edges(10, edges);
        let cover = umst_method(&g, 0.5).unwrap();
        assert_eq!(
            cover.communities(),
            &[vec![0, 1, 2, 3, 4], vec![5, 6, 7, 8, 9]]
        );
    }

    #[test]
    fn merge_reaches_fixpoint() {
        let merged = merge_overlapping(vec![vec![0, 1], vec![1, 2], vec![5, 6]], 7, 0.5);
        assert_eq!(merged, vec![vec![0, 1, 2], vec![5, 6]]);
    }
}
