use super::{non_neighbors, AttackPlan, Strategy};
use crate::graph::{Graph, NodeId};
use crate::triage::TemperatureMap;

/// Connect to cold nodes first, then unknown, then hot; lowest degree
/// first within each temperature.
pub fn cold_and_lonely(
    g: &Graph,
    target: NodeId,
    temps: &TemperatureMap,
    budget: usize,
) -> AttackPlan {
    let mut order = non_neighbors(g, target);
    order.sort_by_key(|&u| (temps.get(u).value(), g.degree(u), u));
    AttackPlan::from_nodes(Strategy::ColdLonely, target, order, budget, 0)
}
