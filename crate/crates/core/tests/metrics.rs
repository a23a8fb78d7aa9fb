mod common;

use aca_core::graph::{jaccard_neighborhood, largest_connected_component};
use aca_core::triage::{
    delta_homophily, heterophilicity, label_edge_counts, mean_temperature, modularity, rank,
    standing,
};
use aca_core::{CommunityCover, EdgeOverlay, Graph, LabelMap, Temperature, TemperatureMap};
use proptest::prelude::*;

#[test]
fn metrics_match_brute_force_oracles() {
    let failures = common::checks::metric_oracles(200);
    assert!(failures.is_empty(), "{failures:#?}");
}

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec((0..n, 0..n), 0..3 * n)
            .prop_map(move |pairs| Graph::from_edges(n, pairs.into_iter().filter(|(u, v)| u != v)))
    })
}

fn with_values(max_n: usize) -> impl Strategy<Value = (Graph, Vec<i64>, Vec<u8>, Vec<usize>)> {
    graph_strategy(max_n).prop_flat_map(|g| {
        let n = g.node_count();
        (
            Just(g),
            proptest::collection::vec(-1i64..=1, n),
            proptest::collection::vec(0u8..=1, n),
            proptest::collection::vec(0..n, n),
        )
    })
}

proptest! {
    #[test]
    fn handshake_identity(g in graph_strategy(20)) {
        let total: usize = (0..g.node_count()).map(|v| g.degree(v)).sum();
        prop_assert_eq!(total, 2 * g.edge_count());
    }

    #[test]
    fn overlay_adds_and_forgets(g in graph_strategy(12), extra in proptest::collection::vec((0usize..12, 0usize..12), 0..6)) {
        let n = g.node_count();
        let mut overlay = EdgeOverlay::new(&g);
        let mut added = Vec::new();
        for (u, v) in extra.into_iter().map(|(u, v)| (u % n, v % n)).filter(|(u, v)| u != v) {
            if overlay.add_edge(u, v).unwrap() {
                added.push((u, v));
            }
        }
        for v in 0..n {
            let mut want: Vec<usize> = g.neighbors(v).to_vec();
            for &(a, b) in &added {
                if a == v { want.push(b) }
                if b == v { want.push(a) }
            }
            want.sort_unstable();
            prop_assert_eq!(overlay.neighbors(v), want);
        }
        let fresh = EdgeOverlay::new(&g);
        prop_assert_eq!(fresh.materialize(), g.clone());
    }

    #[test]
    fn lcc_is_idempotent(g in graph_strategy(15)) {
        let once = largest_connected_component(&g).unwrap().graph;
        let twice = largest_connected_component(&once).unwrap().graph;
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn jaccard_symmetric(g in graph_strategy(10), i in 0usize..10, j in 0usize..10) {
        let n = g.node_count();
        let (i, j) = (i % n, j % n);
        prop_assert_eq!(jaccard_neighborhood(&g, i, j), jaccard_neighborhood(&g, j, i));
        prop_assert_eq!(jaccard_neighborhood(&g, i, i), 1.0);
    }

    #[test]
    fn rank_bounds((g, temps, _, parts) in with_values(10)) {
        let n = g.node_count();
        let temps = TemperatureMap::from_values(&temps).unwrap();
        let cover = CommunityCover::from_labels(&parts);
        for v in 0..n {
            let r = rank(v, &cover, &temps).unwrap();
            prop_assert!(r <= n);
            let s = standing(v, &cover, &temps).unwrap();
            let hottest = cover.communities().iter()
                .filter(|c| c.contains(&v))
                .find(|c| mean_temperature(c, &temps).unwrap() == s.t_comm)
                .unwrap();
            prop_assert!(r >= hottest.len());
        }
    }

    #[test]
    fn hot_node_raises_temperature(temps in proptest::collection::vec(-1i64..=1, 1..10)) {
        let n = temps.len();
        let map = TemperatureMap::from_values(&[temps.clone(), vec![1]].concat()).unwrap();
        let members: Vec<usize> = (0..n).collect();
        let before = mean_temperature(&members, &map).unwrap();
        let with_hot: Vec<usize> = (0..=n).collect();
        let after = mean_temperature(&with_hot, &map).unwrap();
        prop_assert_eq!(after > before, before.sum < before.size as i64);
        prop_assert_eq!(map.get(n), Temperature::Hot);
    }

    #[test]
    fn modularity_range((g, _, _, parts) in with_values(10)) {
        let q = modularity(&g, &CommunityCover::from_labels(&parts)).unwrap();
        prop_assert!((-0.5..=1.0).contains(&q));
    }

    #[test]
    fn label_metrics((g, _, bits, _) in with_values(10)) {
        let labels = LabelMap::new(bits).unwrap();
        let (_, _, cross) = label_edge_counts(&g, &labels);
        prop_assert_eq!(delta_homophily(&g, &labels) + 2 * cross as i64, g.edge_count() as i64);
        let (n0, n1) = labels.class_sizes();
        if n0 > 0 && n1 > 0 && g.edge_count() > 0 {
            let h = heterophilicity(&g, &labels).unwrap();
            prop_assert_eq!(h, heterophilicity(&g, &labels.swapped()).unwrap());
        }
    }
}
