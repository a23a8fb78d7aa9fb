//! Edge-addition strategies for a target hiding from the analyst.
//!
//! Each strategy produces an ordered [`AttackPlan`]; the attacker then picks
//! the prefix of that plan that pushes the target's rank highest.

mod bih;
mod cold_lonely;
mod embedding;
mod epa;
mod modularity;
mod stable;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detect::SeededDetector;
use crate::error::{Error, Result};
use crate::graph::{ordered, EdgeOverlay, Graph, NodeId};
use crate::triage::{standing, TemperatureMap};

pub use bih::{bih_attack, membership_importance};
pub use cold_lonely::cold_and_lonely;
pub use embedding::{embedding_attack, embedding_scores};
pub use epa::{epa_attack, EpaOptions, EpaRun};
pub use modularity::{disjoint_by_temperature, modularity_attack};
pub use stable::{ss_nbr_attack, ss_nbr_plan, stable_structure_attack, stable_structure_order};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    ColdLonely,
    StableStructure,
    Embedding,
    Modularity,
    Bih,
    Epa,
    SsNbr,
}

impl Strategy {
    pub const ALL: [Strategy; 7] = [
        Strategy::ColdLonely,
        Strategy::StableStructure,
        Strategy::Embedding,
        Strategy::Modularity,
        Strategy::Bih,
        Strategy::Epa,
        Strategy::SsNbr,
    ];

    /// Strategies enabled unless requested otherwise.
    pub const DEFAULT: [Strategy; 5] = [
        Strategy::ColdLonely,
        Strategy::StableStructure,
        Strategy::Embedding,
        Strategy::Modularity,
        Strategy::Bih,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::ColdLonely => "cl",
            Strategy::StableStructure => "ss",
            Strategy::Embedding => "emb",
            Strategy::Modularity => "mod",
            Strategy::Bih => "bih",
            Strategy::Epa => "epa",
            Strategy::SsNbr => "ss-nbr",
        }
    }

    /// Whether planned edges may avoid the target.
    pub fn links_neighbors(self) -> bool {
        self == Strategy::SsNbr
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let found = match lower.as_str() {
            "c&l" | "cold-lonely" => Some(Strategy::ColdLonely),
            "stable-structure" => Some(Strategy::StableStructure),
            "ssnbr" => Some(Strategy::SsNbr),
            _ => Strategy::ALL.into_iter().find(|st| st.name() == lower),
        };
        found.ok_or_else(|| {
            let names: Vec<_> = Strategy::ALL.iter().map(|s| s.name()).collect();
            Error::InvalidInput(format!(
                "unknown attack {s:?} (valid: {})",
                names.join(", ")
            ))
        })
    }
}

/// Ordered edge additions proposed by one strategy for one target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackPlan {
    pub strategy: Strategy,
    pub target: NodeId,
    pub edges: Vec<(NodeId, NodeId)>,
    pub budget: usize,
    pub seed: u64,
}

impl AttackPlan {
    pub fn new(strategy: Strategy, target: NodeId, budget: usize, seed: u64) -> Self {
        AttackPlan {
            strategy,
            target,
            edges: Vec::new(),
            budget,
            seed,
        }
    }

    /// Plan connecting the target to `nodes` in order, cut at the budget.
    pub(crate) fn from_nodes(
        strategy: Strategy,
        target: NodeId,
        nodes: impl IntoIterator<Item = NodeId>,
        budget: usize,
        seed: u64,
    ) -> Self {
        let mut plan = AttackPlan::new(strategy, target, budget, seed);
        plan.edges = nodes
            .into_iter()
            .take(budget)
            .map(|u| (target, u))
            .collect();
        plan
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Check that the plan only adds new, distinct edges within budget.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        g.check_node(self.target)?;
        if self.edges.len() > self.budget {
            return Err(Error::InvalidInput(format!(
                "plan has {} edges for a budget of {}",
                self.edges.len(),
                self.budget
            )));
        }
        let mut seen = HashSet::new();
        for &(u, v) in &self.edges {
            g.check_node(u)?;
            g.check_node(v)?;
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop on node {u}")));
            }
            if g.has_edge(u, v) {
                return Err(Error::InvalidInput(format!(
                    "edge ({u}, {v}) already exists"
                )));
            }
            if !seen.insert(ordered(u, v)) {
                return Err(Error::InvalidInput(format!(
                    "edge ({u}, {v}) planned twice"
                )));
            }
            if !self.strategy.links_neighbors() && u != self.target && v != self.target {
                return Err(Error::InvalidInput(format!(
                    "edge ({u}, {v}) does not touch target {}",
                    self.target
                )));
            }
        }
        Ok(())
    }
}

/// Rank and community temperature of the target after one plan prefix.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrefixPoint {
    pub prefix: usize,
    pub rank: usize,
    pub t_comm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrefixEvaluation {
    /// One point per prefix size, starting with the unattacked graph.
    pub points: Vec<PrefixPoint>,
    pub best_prefix: usize,
}

impl PrefixEvaluation {
    pub fn from_points(points: Vec<PrefixPoint>) -> Self {
        let best_prefix = best_prefix(&points);
        PrefixEvaluation {
            points,
            best_prefix,
        }
    }

    pub fn best(&self) -> PrefixPoint {
        self.points[self.best_prefix]
    }

    pub fn baseline(&self) -> PrefixPoint {
        self.points[0]
    }
}

/// Largest rank, smallest prefix on ties.
fn best_prefix(points: &[PrefixPoint]) -> usize {
    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        if p.rank > points[best].rank {
            best = i;
        }
    }
    best
}

/// Target standing after applying `edges` to `g`.
pub fn attacked_standing(
    g: &Graph,
    edges: &[(NodeId, NodeId)],
    target: NodeId,
    detector: &SeededDetector,
    temps: &TemperatureMap,
) -> Result<PrefixPoint> {
    let mut overlay = EdgeOverlay::new(g);
    for &(u, v) in edges {
        overlay.add_edge(u, v)?;
    }
    let cover = detector.detect(&overlay.materialize())?;
    let s = standing(target, &cover, temps)?;
    Ok(PrefixPoint {
        prefix: edges.len(),
        rank: s.rank,
        t_comm: s.t_comm.to_f64(),
    })
}

/// Rank and community temperature of the target for every prefix of
/// `plan`, prefixes evaluated in parallel.
pub fn evaluate_prefixes(
    g: &Graph,
    plan: &AttackPlan,
    detector: &SeededDetector,
    temps: &TemperatureMap,
) -> Result<PrefixEvaluation> {
    plan.validate(g)?;
    let points = (0..=plan.edges.len())
        .into_par_iter()
        .map(|s| {
            attacked_standing(g, &plan.edges[..s], plan.target, detector, temps).map_err(|e| {
                Error::Prefix {
                    prefix: s,
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PrefixEvaluation::from_points(points))
}

/// Strategy parameters shared by all attacks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackOptions {
    /// Detector runs used to find stable structures.
    pub stable_trials: usize,
    pub embedding_dim: usize,
    pub epa: EpaOptions,
}

impl Default for AttackOptions {
    fn default() -> Self {
        AttackOptions {
            stable_trials: 8,
            embedding_dim: 32,
            epa: EpaOptions::default(),
        }
    }
}

/// Everything a strategy may look at: the graph, the temperatures, and a
/// query handle on the analyst's detector.
#[derive(Clone, Copy, Debug)]
pub struct AttackContext<'a> {
    pub graph: &'a Graph,
    pub target: NodeId,
    pub temps: &'a TemperatureMap,
    pub detector: &'a SeededDetector,
    pub budget: usize,
    pub seed: u64,
}

/// Build the plan of one strategy. `seed_plans` feeds the evolutionary
/// strategy's initial population and is ignored by the others.
pub fn plan_attack(
    strategy: Strategy,
    ctx: &AttackContext<'_>,
    opts: &AttackOptions,
    seed_plans: &[AttackPlan],
) -> Result<AttackPlan> {
    let AttackContext {
        graph: g,
        target,
        temps,
        detector,
        budget,
        seed,
    } = *ctx;
    g.check_node(target)?;
    match strategy {
        Strategy::ColdLonely => Ok(cold_and_lonely(g, target, temps, budget)),
        Strategy::StableStructure => {
            stable_structure_attack(g, target, temps, detector, opts.stable_trials, budget, seed)
        }
        Strategy::Embedding => embedding_attack(g, target, budget, opts.embedding_dim, seed),
        Strategy::Modularity => modularity_attack(g, target, detector, temps, budget),
        Strategy::Bih => bih_attack(g, target, detector, budget),
        Strategy::Epa => epa_attack(ctx, &opts.epa, seed_plans).map(|run| run.plan),
        Strategy::SsNbr => {
            ss_nbr_attack(g, target, temps, detector, opts.stable_trials, budget, seed)
        }
    }
}

/// Nodes the target could still connect to, in id order.
pub(crate) fn non_neighbors(g: &Graph, target: NodeId) -> Vec<NodeId> {
    (0..g.node_count())
        .filter(|&u| u != target && !g.has_edge(target, u))
        .collect()
}
