use std::cmp::Ordering;
use std::collections::HashSet;

use super::UnionFind;
use crate::graph::{closed_neighborhood, sorted_intersection_len, Graph, NodeId};
use crate::triage::CommunityCover;

/// Exact Jaccard similarity `num / den`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
struct Ratio {
    num: u64,
    den: u64,
}

impl Ratio {
    fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Edge partition produced by link clustering.
#[derive(Clone, Debug)]
pub struct EdgeClusters {
    pub edges: Vec<(NodeId, NodeId)>,
    /// Cluster index of each edge.
    pub cluster: Vec<usize>,
    /// Similarity level of the cut, `None` when no edges were merged.
    pub cut_similarity: Option<f64>,
    pub partition_density: f64,
}

impl EdgeClusters {
    pub fn cluster_count(&self) -> usize {
        self.cluster.iter().copied().max().map_or(0, |m| m + 1)
    }
}

/// Single-linkage clustering of edges. Two edges sharing an endpoint are
/// as similar as the closed neighbourhoods of their other endpoints.
/// The dendrogram is cut at `threshold` if given, else where partition
/// density peaks.
pub fn hlc_edge_clusters(g: &Graph, threshold: Option<f64>) -> EdgeClusters {
    let edges: Vec<(NodeId, NodeId)> = g.edges().collect();
    let m = edges.len();
    let mut incident: Vec<Vec<(NodeId, usize)>> = vec![Vec::new(); g.node_count()];
    for (e, &(u, v)) in edges.iter().enumerate() {
        incident[u].push((v, e));
        incident[v].push((u, e));
    }
    let closed: Vec<Vec<NodeId>> = (0..g.node_count())
        .map(|v| closed_neighborhood(g, v))
        .collect();

    let mut pairs: Vec<(Ratio, usize, usize)> = Vec::new();
    for inc in &incident {
        for a in 0..inc.len() {
            for b in a + 1..inc.len() {
                let (i, ea) = inc[a];
                let (j, eb) = inc[b];
                let inter = sorted_intersection_len(&closed[i], &closed[j]) as u64;
                let union = (closed[i].len() + closed[j].len()) as u64 - inter;
                let (e1, e2) = if ea < eb { (ea, eb) } else { (eb, ea) };
                pairs.push((
                    Ratio {
                        num: inter,
                        den: union,
                    },
                    e1,
                    e2,
                ));
            }
        }
    }
    pairs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    // similarity levels, each the end index of a run of equal ratios
    let mut levels: Vec<(usize, Ratio)> = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        if i + 1 == pairs.len() || pairs[i + 1].0 != p.0 {
            levels.push((i + 1, p.0));
        }
    }

    let cut_level = match threshold {
        Some(t) => levels.iter().rposition(|&(_, r)| r.to_f64() >= t),
        None => densest_level(&edges, &pairs, &levels),
    };
    let merged = cut_level.map_or(0, |l| levels[l].0);
    let mut uf = UnionFind::new(m);
    for &(_, e1, e2) in &pairs[..merged] {
        uf.union(e1, e2);
    }
    let mut cluster = vec![0; m];
    for (c, group) in uf.groups().into_iter().enumerate() {
        for e in group {
            cluster[e] = c;
        }
    }
    let partition_density = density_of(&edges, &cluster);
    EdgeClusters {
        edges,
        cluster,
        cut_similarity: cut_level.map(|l| levels[l].1.to_f64()),
        partition_density,
    }
}

/// Contribution of one edge cluster to the partition density, before the
/// global `2 / M` factor.
fn density_term(edges: usize, nodes: usize) -> f64 {
    if nodes <= 2 {
        return 0.0;
    }
    let (m, n) = (edges as f64, nodes as f64);
    m * (m - (n - 1.0)) / ((n - 2.0) * (n - 1.0))
}

fn density_of(edges: &[(NodeId, NodeId)], cluster: &[usize]) -> f64 {
    if edges.is_empty() {
        return 0.0;
    }
    let k = cluster.iter().copied().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; k];
    let mut nodes: Vec<HashSet<NodeId>> = vec![HashSet::new(); k];
    for (e, &(u, v)) in edges.iter().enumerate() {
        counts[cluster[e]] += 1;
        nodes[cluster[e]].insert(u);
        nodes[cluster[e]].insert(v);
    }
    let sum: f64 = (0..k)
        .map(|c| density_term(counts[c], nodes[c].len()))
        .sum();
    2.0 * sum / edges.len() as f64
}

/// Index of the level whose cut maximizes partition density; earlier
/// (more similar) levels win ties. `None` means no merging at all.
fn densest_level(
    edges: &[(NodeId, NodeId)],
    pairs: &[(Ratio, usize, usize)],
    levels: &[(usize, Ratio)],
) -> Option<usize> {
    let m = edges.len();
    let mut uf = UnionFind::new(m);
    let mut count = vec![1usize; m];
    let mut nodes: Vec<HashSet<NodeId>> =
        edges.iter().map(|&(u, v)| HashSet::from([u, v])).collect();
    let mut sum = 0.0;
    let mut best = (0.0, None);
    let mut start = 0;
    for (l, &(end, _)) in levels.iter().enumerate() {
        for &(_, e1, e2) in &pairs[start..end] {
            let (r1, r2) = (uf.find(e1), uf.find(e2));
            if r1 == r2 {
                continue;
            }
            sum -= density_term(count[r1], nodes[r1].len());
            sum -= density_term(count[r2], nodes[r2].len());
            let root = uf.union(r1, r2).expect("distinct roots");
            let other = if root == r1 { r2 } else { r1 };
            let moved = std::mem::take(&mut nodes[other]);
            nodes[root].extend(moved);
            count[root] += count[other];
            sum += density_term(count[root], nodes[root].len());
        }
        start = end;
        let density = 2.0 * sum / m as f64;
        if density > best.0 + 1e-12 {
            best = (density, Some(l));
        }
    }
    best.1
}

/// Overlapping communities from link clustering: the endpoints of each
/// edge cluster.
pub fn hlc(g: &Graph, threshold: Option<f64>) -> CommunityCover {
    let clusters = hlc_edge_clusters(g, threshold);
    let mut sets: Vec<Vec<NodeId>> = vec![Vec::new(); clusters.cluster_count()];
    for (e, &(u, v)) in clusters.edges.iter().enumerate() {
        sets[clusters.cluster[e]].push(u);
        sets[clusters.cluster[e]].push(v);
    }
    CommunityCover::new(g.node_count(), sets).expect("edge endpoints are in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> Graph {
        Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
    }

    #[test]
    fn two_triangles_and_bridge() {
        let clusters = hlc_edge_clusters(&two_triangles(), None);
        assert_eq!(clusters.cluster_count(), 3);
        assert!((clusters.cut_similarity.unwrap() - 0.75).abs() < 1e-12);
        // (2 / 7) * (3/2 + 3/2): each triangle has m = 3, n = 3
        assert!((clusters.partition_density - 6.0 / 7.0).abs() < 1e-12);
        let cover = hlc(&two_triangles(), None);
        assert_eq!(
            cover.communities(),
            &[vec![0, 1, 2], vec![2, 3], vec![3, 4, 5]]
        );
    }

    #[test]
    fn complete_graph_is_one_community() {
        let g = Graph::from_edges(4, (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v))));
        assert_eq!(hlc(&g, None).communities(), &[vec![0, 1, 2, 3]]);
    }

    #[test]
    fn explicit_threshold_merges_everything_above_it() {
        let cover = hlc(&two_triangles(), Some(0.1));
        assert_eq!(cover.communities(), &[vec![0, 1, 2, 3, 4, 5]]);
        // only the similarity-1 pairs merge: {02, 12} and {34, 35}
        let cover = hlc(&two_triangles(), Some(0.99));
        assert_eq!(
            cover.communities(),
            &[
                vec![0, 1],
                vec![0, 1, 2],
                vec![2, 3],
                vec![3, 4, 5],
                vec![4, 5]
            ]
        );
    }
}
