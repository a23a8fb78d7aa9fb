//! Runners for the headline checks. Each returns the list of failures so
//! the caller can either assert on it or print a verdict.

use aca_core::attack::{epa_attack, AttackContext, EpaOptions};
use aca_core::detect::{
    bp_overlap_fit, clique_percolation, hlc, hlc_edge_clusters, leiden_run, louvain_run, BpOptions,
    DetectorKind, SeededDetector,
};
use aca_core::seed;
use aca_core::synth::{build_attribute_profile, swap_to_reduce, AttributeCurve};
use aca_core::triage::{delta_homophily, heterophilicity, mean_temperature, modularity, standing};
use aca_core::{CommunityCover, Graph, LabelMap, TemperatureMap};
use rand::seq::SliceRandom;
use rand::Rng;

use super::*;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Modularity, community temperature, rank, heterophilicity and Δ against
/// the brute-force oracles on `cases` random graphs with at most 8 nodes.
pub fn metric_oracles(cases: usize) -> Vec<String> {
    let mut failures = Vec::new();
    for case in 0..cases as u64 {
        let mut rng = seed::rng_for(0x0a11, "metric-case", &[case]);
        let n = rng.gen_range(2..=8);
        let g = random_graph(n, rng.gen_range(0.15..0.85), "metric-graph", case);
        let a = adjacency(&g);

        let parts: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n.min(4))).collect();
        let q = modularity(&g, &CommunityCover::from_labels(&parts)).unwrap();
        let q_ref = super::modularity(&a, &parts);
        if !close(q, q_ref, 1e-12) {
            failures.push(format!("case {case}: modularity {q} vs {q_ref}"));
        }

        let temps_raw: Vec<i64> = (0..n).map(|_| rng.gen_range(-1..=1)).collect();
        let temps = TemperatureMap::from_values(&temps_raw).unwrap();
        let sets: Vec<Vec<usize>> = (0..rng.gen_range(1..=4))
            .map(|_| (0..n).filter(|_| rng.gen_bool(0.4)).collect())
            .collect();
        let cover = CommunityCover::new(n, sets).unwrap();
        let comms = cover.communities();
        for c in comms {
            let t = mean_temperature(c, &temps).unwrap();
            if (t.sum, t.size as i64) != super::temperature(c, &temps_raw) {
                failures.push(format!("case {case}: temperature of {c:?}"));
            }
        }
        for v in 0..n {
            let s = standing(v, &cover, &temps).unwrap();
            let (sum, size) = node_temperature(v, comms, &temps_raw);
            if s.t_comm.sum * size != sum * s.t_comm.size as i64 {
                failures.push(format!("case {case}: T_comm({v})"));
            }
            let r = super::rank(v, n, comms, &temps_raw);
            if s.rank != r {
                failures.push(format!("case {case}: rank({v}) {} vs {r}", s.rank));
            }
        }

        let mut bits: Vec<u8> = (0..n).map(|_| rng.gen_range(0..=1)).collect();
        bits[0] = 0;
        bits[n - 1] = 1;
        let labels = LabelMap::new(bits.clone()).unwrap();
        if delta_homophily(&g, &labels) != delta(&a, &bits) {
            failures.push(format!("case {case}: delta"));
        }
        if g.edge_count() > 0 {
            let h = heterophilicity(&g, &labels).unwrap();
            let h_ref = super::heterophilicity(&a, &bits);
            if !close(h, h_ref, 1e-12) {
                failures.push(format!("case {case}: heterophilicity {h} vs {h_ref}"));
            }
        }
    }
    failures
}

/// Ring of `k` cliques of size `s`, neighbouring cliques joined by one edge.
pub fn ring_of_cliques(k: usize, s: usize) -> Graph {
    let mut edges = Vec::new();
    for c in 0..k {
        let base = c * s;
        for u in 0..s {
            for v in u + 1..s {
                edges.push((base + u, base + v));
            }
        }
        edges.push((base + s - 1, ((c + 1) % k) * s));
    }
    Graph::from_edges(k * s, edges)
}

/// Planted partition: `groups` blocks of `size` nodes.
pub fn planted_partition(groups: usize, size: usize, p_in: f64, p_out: f64, index: u64) -> Graph {
    let mut rng = seed::rng_for(0x9a7, "planted", &[index]);
    let n = groups * size;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if u / size == v / size { p_in } else { p_out };
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

fn monotone(trace: &[f64]) -> bool {
    trace.windows(2).all(|w| w[1] >= w[0] - 1e-12)
}

/// Detector invariants: per-phase modularity ascent, Leiden connectivity,
/// clique percolation against triangle chains, HLC edge partition and
/// likelihood ascent of the Bernoulli–Poisson fit.
pub fn detector_invariants() -> Vec<String> {
    let mut failures = Vec::new();
    let mut graphs: Vec<Graph> = (0..20)
        .map(|i| planted_partition(4, 10, 0.5, 0.04, i))
        .collect();
    graphs.extend((0..20).map(|i| random_graph(40, 0.1, "detector-graph", i)));
    graphs.push(ring_of_cliques(6, 5));

    for (i, g) in graphs.iter().enumerate() {
        let a = adjacency(g);
        let singletons: Vec<usize> = (0..g.node_count()).collect();
        let q0 = super::modularity(&a, &singletons);
        for (name, run) in [
            ("louvain", louvain_run(g, i as u64)),
            ("leiden", leiden_run(g, i as u64)),
        ] {
            if !monotone(&run.phase_modularity) {
                failures.push(format!(
                    "graph {i}: {name} phases {:?}",
                    run.phase_modularity
                ));
            }
            let q = super::modularity(&a, &run.labels);
            if q < q0 - 1e-12 {
                failures.push(format!("graph {i}: {name} Q {q} below singletons {q0}"));
            }
            if let Some(&last) = run.phase_modularity.last() {
                if !close(last, q, 1e-9) {
                    failures.push(format!(
                        "graph {i}: {name} final phase {last} vs output {q}"
                    ));
                }
            }
            if name == "leiden" {
                for c in run.cover().communities() {
                    if !induces_connected(&a, c) {
                        failures.push(format!("graph {i}: leiden community {c:?} disconnected"));
                    }
                }
            }
        }

        let clusters = hlc_edge_clusters(g, None);
        let mut listed = clusters.edges.clone();
        listed.sort_unstable();
        let all: Vec<_> = g.edges().collect();
        if listed != all || clusters.cluster.len() != clusters.edges.len() {
            failures.push(format!("graph {i}: hlc edge clusters do not partition E"));
        }
        let mut from_edges: Vec<Vec<usize>> = vec![Vec::new(); clusters.cluster_count()];
        for (&(u, v), &c) in clusters.edges.iter().zip(&clusters.cluster) {
            from_edges[c].extend([u, v]);
        }
        for s in &mut from_edges {
            s.sort_unstable();
            s.dedup();
        }
        let cover = hlc(g, None);
        for c in cover.communities().iter().filter(|c| c.len() > 1) {
            if !from_edges.contains(c) {
                failures.push(format!(
                    "graph {i}: hlc community {c:?} is not an edge cluster"
                ));
            }
        }

        if i % 4 == 0 {
            let fit = bp_overlap_fit(g, &BpOptions::default()).unwrap();
            if !monotone(&fit.objective_trace) {
                failures.push(format!("graph {i}: bp-overlap objective decreased"));
            }
        }
    }

    for i in 0..150 {
        let mut rng = seed::rng_for(0xc11, "cp-case", &[i]);
        let n = rng.gen_range(3..=12);
        let g = random_graph(n, rng.gen_range(0.2..0.7), "cp-graph", i);
        let got: Vec<Vec<usize>> = clique_percolation(&g, 3)
            .unwrap()
            .communities()
            .iter()
            .filter(|c| c.len() >= 3)
            .cloned()
            .collect();
        let want = triangle_percolation(&adjacency(&g));
        if got != want {
            failures.push(format!("cp case {i}: {got:?} vs {want:?}"));
        }
    }
    failures
}

/// Swap identities on random labeled graphs: non-adjacent swaps change Δ
/// by exactly −2(d_u − d_v), adjacent ones by a further −4, and class
/// sizes never change. Returns failures and the number of swaps checked.
pub fn swap_identities(graphs: usize, nodes: usize) -> (Vec<String>, usize) {
    let mut failures = Vec::new();
    let mut checked = 0;
    for i in 0..graphs as u64 {
        let g = random_graph(nodes, 0.2, "swap-graph", i);
        let a = adjacency(&g);
        let mut rng = seed::rng_for(0x5a9, "swap-labels", &[i]);
        let mut bits: Vec<u8> = [vec![0; nodes / 2], vec![1; nodes - nodes / 2]].concat();
        bits.shuffle(&mut rng);
        let mut labels = LabelMap::new(bits).unwrap();
        for _ in 0..30 {
            let Ok((next, swap)) = swap_to_reduce(&g, &labels, &mut rng) else {
                break;
            };
            let before = delta(&a, labels.as_slice());
            let after = delta(&a, next.as_slice());
            let adjacency_term = if a[swap.u][swap.v] { 4 } else { 0 };
            if after != before - 2 * (swap.d_u - swap.d_v) - adjacency_term {
                failures.push(format!(
                    "graph {i}: swap {swap:?} moved delta {before} -> {after}"
                ));
            }
            if next.class_sizes() != labels.class_sizes() {
                failures.push(format!("graph {i}: class sizes changed"));
            }
            checked += 1;
            labels = next;
        }
    }
    (failures, checked)
}

/// Independent GLRT: Laplace-smoothed Bernoulli estimates, log-likelihood
/// ratio, ties to class 0.
pub fn glrt_reference(p0: &[f64], p1: &[f64], seed: u64) -> f64 {
    let mut rng = seed::rng_for(seed, "glrt-reference", &[]);
    let mut draw = |p: &[f64]| -> Vec<bool> { p.iter().map(|&x| rng.gen_bool(x)).collect() };
    let mut fit = |p: &[f64]| -> Vec<f64> {
        let mut ones = vec![0.0; p.len()];
        for _ in 0..200 {
            for (o, b) in ones.iter_mut().zip(draw(p)) {
                *o += f64::from(u8::from(b));
            }
        }
        ones.into_iter().map(|o| (o + 1.0) / 202.0).collect()
    };
    let (q0, q1) = (fit(p0), fit(p1));
    let score = |row: &[bool]| -> f64 {
        row.iter()
            .enumerate()
            .map(|(j, &b)| {
                if b {
                    (q1[j] / q0[j]).ln()
                } else {
                    ((1.0 - q1[j]) / (1.0 - q0[j])).ln()
                }
            })
            .sum()
    };
    let mut right = 0usize;
    for _ in 0..1000 {
        right += usize::from(score(&draw(p0)) <= 0.0);
        right += usize::from(score(&draw(p1)) > 0.0);
    }
    right as f64 / 2000.0
}

/// Target accuracy paired with the (reported, re-measured) accuracies.
pub type Calibration = (f64, Result<(f64, f64), String>);

/// Calibrated accuracy for each target, as reported and as re-measured by
/// the reference classifier (mean of five seeds).
pub fn attribute_calibration(targets: &[f64]) -> Vec<Calibration> {
    targets
        .iter()
        .map(|&t| {
            let outcome = build_attribute_profile(t, AttributeCurve::default(), 17)
                .map_err(|e| e.to_string())
                .map(|p| {
                    let (p0, p1) = (p.class_probs(0), p.class_probs(1));
                    let again = (0..5).map(|s| glrt_reference(&p0, &p1, s)).sum::<f64>() / 5.0;
                    (p.measured_accuracy.expect("calibrated"), again)
                });
            (t, outcome)
        })
        .collect()
}

/// Ten-node fixture: a hot group around the target and a cold group.
pub fn epa_fixture() -> (Graph, TemperatureMap) {
    let g = Graph::from_edges(
        10,
        [
            (0, 1),
            (0, 2),
            (1, 2),
            (1, 3),
            (2, 3),
            (3, 4),
            (2, 4),
            (4, 5),
            (5, 6),
            (5, 7),
            (6, 7),
            (6, 8),
            (7, 8),
            (8, 9),
            (7, 9),
        ],
    );
    let temps = TemperatureMap::from_values(&[1, 1, 0, 1, 0, -1, -1, 0, -1, -1]).unwrap();
    (g, temps)
}

/// Best rank over every attack of at most two new target edges.
pub fn exhaustive_best_rank(
    g: &Graph,
    target: usize,
    det: &SeededDetector,
    temps: &TemperatureMap,
) -> usize {
    let raw: Vec<i64> = temps.as_slice().iter().map(|t| t.value()).collect();
    let open: Vec<usize> = (0..g.node_count())
        .filter(|&u| u != target && !g.has_edge(target, u))
        .collect();
    let mut sets: Vec<Vec<usize>> = vec![vec![]];
    for (i, &u) in open.iter().enumerate() {
        sets.push(vec![u]);
        for &w in &open[i + 1..] {
            sets.push(vec![u, w]);
        }
    }
    sets.into_iter()
        .map(|s| {
            let edges: Vec<_> = s.iter().map(|&u| (target, u)).collect();
            let attacked = g.with_added_edges(&edges);
            let cover = det.detect(&attacked).unwrap();
            super::rank(target, g.node_count(), cover.communities(), &raw)
        })
        .max()
        .unwrap()
}

/// EPA (population 50, 20 generations, budget 2) against the exhaustive
/// optimum for ten seeds. Returns `(optimum, rank per seed)`.
pub fn epa_against_exhaustive() -> (usize, Vec<usize>) {
    let (g, temps) = epa_fixture();
    let det = SeededDetector::new(DetectorKind::Louvain.into(), 4);
    let optimum = exhaustive_best_rank(&g, 0, &det, &temps);
    let opts = EpaOptions {
        population: 50,
        generations: 20,
        ..EpaOptions::default()
    };
    let ranks = (0..10)
        .map(|s| {
            let ctx = AttackContext {
                graph: &g,
                target: 0,
                temps: &temps,
                detector: &det,
                budget: 2,
                seed: s,
            };
            epa_attack(&ctx, &opts, &[]).unwrap().best_rank
        })
        .collect();
    (optimum, ranks)
}
