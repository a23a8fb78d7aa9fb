use super::{AttackPlan, Strategy};
use crate::detect::SeededDetector;
use crate::error::Result;
use crate::graph::{sorted_intersection_len, Graph, NodeId};

/// How strongly `u` is embedded in `community` (sorted): the triangles it
/// closes with its in-community neighbours, damped for low degree.
pub fn membership_importance(g: &Graph, u: NodeId, community: &[NodeId]) -> f64 {
    let inside = |v: NodeId| -> Vec<NodeId> {
        g.neighbors(v)
            .iter()
            .copied()
            .filter(|w| community.binary_search(w).is_ok())
            .collect()
    };
    let own = inside(u);
    let shared: usize = own
        .iter()
        .map(|&w| sorted_intersection_len(&own, &inside(w)))
        .sum();
    let deg = g.degree(u).max(1) as f64;
    shared as f64 * (deg - 1.0) / deg
}

/// Hide by joining the community with the most nodes the target is not
/// yet linked to, most important members first; move on when exhausted.
pub fn bih_attack(
    g: &Graph,
    target: NodeId,
    detector: &SeededDetector,
    budget: usize,
) -> Result<AttackPlan> {
    g.check_node(target)?;
    let cover = detector.detect(g)?;
    let mut linked = vec![false; g.node_count()];
    linked[target] = true;
    for &w in g.neighbors(target) {
        linked[w] = true;
    }
    let mut plan = AttackPlan::new(Strategy::Bih, target, budget, detector.seed);
    while plan.edges.len() < budget {
        let mut best: Option<(usize, usize)> = None;
        for (c, members) in cover.communities().iter().enumerate() {
            let open = members.iter().filter(|&&u| !linked[u]).count();
            if open > 0 && best.is_none_or(|(b, _)| open > b) {
                best = Some((open, c));
            }
        }
        let Some((_, c)) = best else { break };
        let members = &cover.communities()[c];
        let mut scored: Vec<(f64, NodeId)> = members
            .iter()
            .copied()
            .filter(|&u| !linked[u])
            .map(|u| (membership_importance(g, u, members), u))
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for (_, u) in scored {
            if plan.edges.len() == budget {
                break;
            }
            plan.edges.push((target, u));
            linked[u] = true;
        }
    }
    Ok(plan)
}
