use rand::seq::SliceRandom;

use super::{AttackPlan, Strategy};
use crate::detect::{stable_structures, SeededDetector, StableStructureSet};
use crate::error::Result;
use crate::graph::{Graph, NodeId};
use crate::seed;
use crate::triage::{mean_temperature, TemperatureMap};

/// Nodes in the order the stable-structure attack links them: coldest
/// structures first with members shuffled, then nodes outside every
/// structure from cold to hot. The target and its neighbours are skipped.
pub fn stable_structure_order(
    g: &Graph,
    target: NodeId,
    temps: &TemperatureMap,
    structures: &StableStructureSet,
    seed: u64,
) -> Result<Vec<NodeId>> {
    let mut rng = seed::rng_for(seed, "ss-order", &[target as u64]);
    let usable = |u: NodeId| u != target && !g.has_edge(target, u);

    let mut ranked = structures
        .structures
        .iter()
        .map(|s| Ok((mean_temperature(s, temps)?, s)))
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by_key(|&(t, _)| t);

    let mut order = Vec::new();
    for (_, members) in ranked {
        let mut picked: Vec<NodeId> = members.iter().copied().filter(|&u| usable(u)).collect();
        picked.shuffle(&mut rng);
        order.extend(picked);
    }
    let membership = structures.membership(g.node_count());
    let mut rest: Vec<NodeId> = (0..g.node_count())
        .filter(|&u| membership[u].is_none() && usable(u))
        .collect();
    rest.shuffle(&mut rng);
    rest.sort_by_key(|&u| temps.get(u).value());
    order.extend(rest);
    Ok(order)
}

fn structures_for(
    g: &Graph,
    detector: &SeededDetector,
    trials: usize,
    seed: u64,
    target: NodeId,
) -> Result<StableStructureSet> {
    let master = seed::sub_seed(seed, "ss-structures", &[target as u64]);
    stable_structures(g, &detector.spec, trials, master)
}

/// Link the target to members of cold stable structures.
pub fn stable_structure_attack(
    g: &Graph,
    target: NodeId,
    temps: &TemperatureMap,
    detector: &SeededDetector,
    trials: usize,
    budget: usize,
    seed: u64,
) -> Result<AttackPlan> {
    let structures = structures_for(g, detector, trials, seed, target)?;
    let order = stable_structure_order(g, target, temps, &structures, seed)?;
    Ok(AttackPlan::from_nodes(
        Strategy::StableStructure,
        target,
        order,
        budget,
        seed,
    ))
}

/// Interleave target links in `order` with links from each newly joined
/// node to the target's original neighbours, cut at the budget.
pub fn ss_nbr_plan(
    g: &Graph,
    target: NodeId,
    order: &[NodeId],
    budget: usize,
    seed: u64,
) -> AttackPlan {
    let mut plan = AttackPlan::new(Strategy::SsNbr, target, budget, seed);
    'outer: for &w in order {
        for e in std::iter::once((target, w)).chain(
            g.neighbors(target)
                .iter()
                .filter(|&&n| n != w && !g.has_edge(w, n))
                .map(|&n| (w, n)),
        ) {
            if plan.edges.len() == budget {
                break 'outer;
            }
            plan.edges.push(e);
        }
    }
    plan
}

/// Stable-structure order, also wiring each new contact to the target's
/// neighbours.
pub fn ss_nbr_attack(
    g: &Graph,
    target: NodeId,
    temps: &TemperatureMap,
    detector: &SeededDetector,
    trials: usize,
    budget: usize,
    seed: u64,
) -> Result<AttackPlan> {
    let structures = structures_for(g, detector, trials, seed, target)?;
    let order = stable_structure_order(g, target, temps, &structures, seed)?;
    Ok(ss_nbr_plan(g, target, &order, budget, seed))
}
