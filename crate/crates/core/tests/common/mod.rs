//! Brute-force reference implementations used by the integration and
//! acceptance tests. They work on dense adjacency matrices and plain vectors
//! and share no code with the library beyond the graph constructor.
#![allow(dead_code)]

use aca_core::seed;
use aca_core::Graph;
use rand::Rng;

pub type Adjacency = Vec<Vec<bool>>;

pub fn adjacency(g: &Graph) -> Adjacency {
    let n = g.node_count();
    let mut a = vec![vec![false; n]; n];
    for (u, row) in a.iter_mut().enumerate() {
        for &v in g.neighbors(u) {
            row[v] = true;
        }
    }
    a
}

/// G(n, p) graph drawn from a labeled stream.
pub fn random_graph(n: usize, p: f64, stream: &str, index: u64) -> Graph {
    let mut rng = seed::rng_for(0x5eed, stream, &[index]);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// Newman modularity from the double sum over all node pairs.
pub fn modularity(a: &Adjacency, labels: &[usize]) -> f64 {
    let n = a.len();
    let k: Vec<f64> = a
        .iter()
        .map(|row| row.iter().filter(|&&x| x).count() as f64)
        .collect();
    let two_m: f64 = k.iter().sum();
    if two_m == 0.0 {
        return 0.0;
    }
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                let aij = if a[i][j] { 1.0 } else { 0.0 };
                q += aij - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

/// Mean temperature of a community as `(sum, size)`.
pub fn temperature(members: &[usize], temps: &[i64]) -> (i64, i64) {
    (
        members.iter().map(|&v| temps[v]).sum(),
        members.len() as i64,
    )
}

fn at_least(a: (i64, i64), b: (i64, i64)) -> bool {
    a.0 * b.1 >= b.0 * a.1
}

/// Hottest community temperature among those containing `v`.
pub fn node_temperature(v: usize, communities: &[Vec<usize>], temps: &[i64]) -> (i64, i64) {
    let mut best: Option<(i64, i64)> = None;
    for c in communities.iter().filter(|c| c.contains(&v)) {
        let t = temperature(c, temps);
        if best.is_none_or(|b| !at_least(b, t)) {
            best = Some(t);
        }
    }
    best.expect("node is covered")
}

/// Nodes that lie in some community at least as hot as `v`'s.
pub fn rank(v: usize, n: usize, communities: &[Vec<usize>], temps: &[i64]) -> usize {
    let t = node_temperature(v, communities, temps);
    (0..n)
        .filter(|&u| {
            communities
                .iter()
                .any(|c| c.contains(&u) && at_least(temperature(c, temps), t))
        })
        .count()
}

fn label_pairs(a: &Adjacency, labels: &[u8]) -> (i64, i64, i64) {
    let n = a.len();
    let (mut same0, mut same1, mut cross) = (0, 0, 0);
    for i in 0..n {
        for j in i + 1..n {
            if a[i][j] {
                match (labels[i], labels[j]) {
                    (0, 0) => same0 += 1,
                    (1, 1) => same1 += 1,
                    _ => cross += 1,
                }
            }
        }
    }
    (same0, same1, cross)
}

pub fn delta(a: &Adjacency, labels: &[u8]) -> i64 {
    let (s0, s1, c) = label_pairs(a, labels);
    s0 + s1 - c
}

/// Cross-label edges over their expectation `|V0||V1| M / C(N, 2)`.
pub fn heterophilicity(a: &Adjacency, labels: &[u8]) -> f64 {
    let n = a.len() as f64;
    let (s0, s1, c) = label_pairs(a, labels);
    let m = (s0 + s1 + c) as f64;
    let n1 = labels.iter().filter(|&&l| l == 1).count() as f64;
    let n0 = n - n1;
    c as f64 / (n0 * n1 * m / (n * (n - 1.0) / 2.0))
}

/// Every set partition of `0..n` as restricted-growth label strings.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().copied().max().map_or(0, |m| m + 1);
        for c in 0..=next {
            prefix.push(c);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::with_capacity(n), n, &mut out);
    out
}

/// Clique percolation with k = 3 from triangle enumeration: unions of
/// triangles chained through shared edges. Sorted node sets, sorted.
pub fn triangle_percolation(a: &Adjacency) -> Vec<Vec<usize>> {
    let n = a.len();
    let mut triangles = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if a[i][j] && a[j][k] && a[i][k] {
                    triangles.push([i, j, k]);
                }
            }
        }
    }
    let mut comp: Vec<usize> = (0..triangles.len()).collect();
    fn root(comp: &mut [usize], x: usize) -> usize {
        if comp[x] == x {
            x
        } else {
            let r = root(comp, comp[x]);
            comp[x] = r;
            r
        }
    }
    for x in 0..triangles.len() {
        for y in x + 1..triangles.len() {
            let shared = triangles[x]
                .iter()
                .filter(|v| triangles[y].contains(v))
                .count();
            if shared == 2 {
                let (rx, ry) = (root(&mut comp, x), root(&mut comp, y));
                comp[rx] = ry;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (x, t) in triangles.iter().enumerate() {
        let r = root(&mut comp, x);
        groups.entry(r).or_default().extend(t);
    }
    let mut out: Vec<Vec<usize>> = groups
        .into_values()
        .map(|mut s| {
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    out.sort();
    out
}

/// Whether `members` induce a connected subgraph.
pub fn induces_connected(a: &Adjacency, members: &[usize]) -> bool {
    let Some(&start) = members.first() else {
        return true;
    };
    let mut seen = vec![start];
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &w in members {
            if a[u][w] && !seen.contains(&w) {
                seen.push(w);
                stack.push(w);
            }
        }
    }
    seen.len() == members.len()
}

pub mod checks;
