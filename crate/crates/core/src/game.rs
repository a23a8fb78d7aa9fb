//! The analyst/attacker game.
//!
//! The analyst commits to a detector; for every target the attacker then
//! runs each strategy, evaluates every budget prefix and keeps the one that
//! pushes the target's rank highest. The analyst picks the detector with the
//! lowest mean best-response rank, or, when attacks happen only with some
//! probability, the lowest mixture of attacked and clean rank.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{
    attacked_standing, evaluate_prefixes, plan_attack, AttackContext, AttackOptions, AttackPlan,
    PrefixEvaluation, PrefixPoint, Strategy,
};
use crate::detect::{
    stable_structures, DetectorKind, DetectorSpec, SeededDetector, StableStructureSet,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::seed;
use crate::triage::{Temperature, TemperatureMap};

pub const DEFAULT_BUDGET: usize = 50;
/// Budget when the attacker may also link to the target's neighbours.
pub const NEIGHBOR_LINK_BUDGET: usize = 51;
/// Louvain runs used to find candidate targets.
pub const TARGET_TRIALS: usize = 20;

pub fn default_budget(strategies: &[Strategy]) -> usize {
    if strategies.contains(&Strategy::SsNbr) {
        NEIGHBOR_LINK_BUDGET
    } else {
        DEFAULT_BUDGET
    }
}

/// Probability that the target attacks, held as an exact fraction.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackProbability {
    pub numerator: u64,
    pub denominator: u64,
}

impl AttackProbability {
    pub const NEVER: AttackProbability = AttackProbability {
        numerator: 0,
        denominator: 1,
    };
    pub const ALWAYS: AttackProbability = AttackProbability {
        numerator: 1,
        denominator: 1,
    };

    pub fn new(numerator: u64, denominator: u64) -> Result<Self> {
        if denominator == 0 || numerator > denominator {
            return Err(Error::InvalidInput(format!(
                "attack probability {numerator}/{denominator} outside [0, 1]"
            )));
        }
        Ok(AttackProbability {
            numerator,
            denominator,
        })
    }

    pub fn to_f64(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

impl fmt::Display for AttackProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

impl FromStr for AttackProbability {
    type Err = Error;

    /// Parses decimals such as `0.25` exactly, or fractions such as `1/3`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("bad attack probability {s:?}"));
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = n.trim().parse().map_err(|_| bad())?;
            let d = d.trim().parse().map_err(|_| bad())?;
            return AttackProbability::new(n, d);
        }
        let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
        if frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let whole: u64 = if whole.is_empty() {
            0
        } else {
            whole.parse().map_err(|_| bad())?
        };
        let denominator = 10u64.pow(frac.len() as u32);
        let frac: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad())?
        };
        let numerator = whole
            .checked_mul(denominator)
            .and_then(|w| w.checked_add(frac))
            .ok_or_else(bad)?;
        AttackProbability::new(numerator, denominator)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub detectors: Vec<DetectorSpec>,
    pub strategies: Vec<Strategy>,
    pub budget: usize,
    pub targets: Vec<NodeId>,
    /// Attack probabilities at which the mixed objective is evaluated.
    pub attack_probabilities: Vec<AttackProbability>,
    pub seed: u64,
    pub attack: AttackOptions,
}

impl GameConfig {
    /// Config with the budget matched to the strategy set and default
    /// strategy parameters.
    pub fn new(
        detectors: Vec<DetectorSpec>,
        strategies: Vec<Strategy>,
        targets: Vec<NodeId>,
        seed: u64,
    ) -> Self {
        GameConfig {
            budget: default_budget(&strategies),
            detectors,
            strategies,
            targets,
            attack_probabilities: Vec::new(),
            seed,
            attack: AttackOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.detectors.is_empty() {
            return Err(Error::InvalidInput("no detectors configured".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::InvalidInput(
                "no attack strategies configured".into(),
            ));
        }
        if self.targets.is_empty() {
            return Err(Error::InvalidInput("no targets configured".into()));
        }
        for (i, s) in self.strategies.iter().enumerate() {
            if self.strategies[..i].contains(s) {
                return Err(Error::InvalidInput(format!("strategy {s} listed twice")));
            }
        }
        for p in &self.attack_probabilities {
            AttackProbability::new(p.numerator, p.denominator)?;
        }
        for d in &self.detectors {
            d.validate()?;
        }
        self.attack.epa.validate()
    }

    fn detector(&self, index: usize) -> SeededDetector {
        SeededDetector::new(
            self.detectors[index].clone(),
            seed::sub_seed(self.seed, "detector", &[index as u64]),
        )
    }

    fn strategy_seed(&self, detector: usize, target: NodeId, strategy: Strategy) -> u64 {
        let code = Strategy::ALL
            .iter()
            .position(|&s| s == strategy)
            .expect("listed") as u64;
        seed::sub_seed(self.seed, "attack", &[detector as u64, target as u64, code])
    }
}

/// A target together with the temperatures the analyst sees for it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSetup {
    pub target: NodeId,
    pub temperatures: TemperatureMap,
}

/// Targets drawn from homogeneous stable structures.
#[derive(Clone, Debug)]
pub struct TargetSelection {
    pub targets: Vec<NodeId>,
    /// Class of every node used for temperature assignment: the ground
    /// truth when given, otherwise the stable structure (nodes outside any
    /// structure get a class of their own).
    pub labels: Vec<usize>,
    pub structures: StableStructureSet,
    /// Indices of the structures targets were drawn from.
    pub kept: Vec<usize>,
}

/// Draw up to `count` distinct targets uniformly from the stable structures
/// of repeated Louvain runs, keeping only single-label structures when
/// labels are known.
pub fn select_targets(
    g: &Graph,
    labels: Option<&[usize]>,
    count: usize,
    seed: u64,
) -> Result<TargetSelection> {
    if count == 0 {
        return Err(Error::InvalidInput(
            "target count must be at least 1".into(),
        ));
    }
    if let Some(l) = labels {
        if l.len() != g.node_count() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} nodes",
                l.len(),
                g.node_count()
            )));
        }
    }
    let structures = stable_structures(
        g,
        &DetectorSpec::new(DetectorKind::Louvain),
        TARGET_TRIALS,
        seed::sub_seed(seed, "target-structures", &[]),
    )?;
    let kept: Vec<usize> = structures
        .structures
        .iter()
        .enumerate()
        .filter(|(_, s)| labels.is_none_or(|l| s.iter().all(|&v| l[v] == l[s[0]])))
        .map(|(i, _)| i)
        .collect();
    let mut pool: Vec<NodeId> = kept
        .iter()
        .flat_map(|&i| structures.structures[i].iter().copied())
        .collect();
    pool.sort_unstable();
    if pool.is_empty() {
        return Err(Error::NoQualifyingStructure);
    }
    let mut rng = seed::rng_for(seed, "targets", &[]);
    let mut targets: Vec<NodeId> = sample(&mut rng, pool.len(), count.min(pool.len()))
        .into_iter()
        .map(|i| pool[i])
        .collect();
    targets.sort_unstable();

    let labels = match labels {
        Some(l) => l.to_vec(),
        None => {
            let k = structures.structures.len();
            structures
                .membership(g.node_count())
                .into_iter()
                .enumerate()
                .map(|(v, s)| s.unwrap_or(k + v))
                .collect()
        }
    };
    Ok(TargetSelection {
        targets,
        labels,
        structures,
        kept,
    })
}

/// Random temperatures for one target: nodes of the target's class are hot
/// with probability 0.3 and cold with 0.1, other nodes the reverse; the
/// rest are unknown.
pub fn assign_temperatures(labels: &[usize], target: NodeId, seed: u64) -> Result<TemperatureMap> {
    let Some(&own) = labels.get(target) else {
        return Err(Error::NodeOutOfRange {
            node: target,
            node_count: labels.len(),
        });
    };
    let mut rng = seed::rng_for(seed, "temperatures", &[target as u64]);
    Ok(TemperatureMap::new(
        labels
            .iter()
            .map(|&l| {
                let (hot, cold) = if l == own { (0.3, 0.1) } else { (0.1, 0.3) };
                let r: f64 = rng.gen();
                if r < hot {
                    Temperature::Hot
                } else if r < hot + cold {
                    Temperature::Cold
                } else {
                    Temperature::Unknown
                }
            })
            .collect(),
    ))
}

/// One strategy's plan and prefix curve, or why it failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyOutcome {
    pub strategy: Strategy,
    pub plan: Option<AttackPlan>,
    pub evaluation: Option<PrefixEvaluation>,
    pub error: Option<String>,
}

impl StrategyOutcome {
    pub fn best(&self) -> Option<PrefixPoint> {
        self.evaluation.as_ref().map(PrefixEvaluation::best)
    }
}

/// The attacker's best response for one target under one detector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetOutcome {
    pub target: NodeId,
    /// Standing under the clean graph.
    pub baseline: PrefixPoint,
    pub outcomes: Vec<StrategyOutcome>,
    /// `None` when every strategy failed and the attacker adds nothing.
    pub chosen: Option<Strategy>,
    pub chosen_prefix: usize,
    pub max_rank: usize,
    pub max_t_comm: f64,
}

/// Index of the best strategy: highest best-prefix rank, earlier strategy
/// on ties.
fn choose_strategy(outcomes: &[StrategyOutcome]) -> Option<usize> {
    let mut best: Option<(usize, usize)> = None;
    for (i, o) in outcomes.iter().enumerate() {
        if let Some(p) = o.best() {
            if best.is_none_or(|(r, _)| p.rank > r) {
                best = Some((p.rank, i));
            }
        }
    }
    best.map(|(_, i)| i)
}

/// Run every configured strategy against one target and keep the best
/// prefix. Strategy failures are recorded and the strategy skipped. The
/// evolutionary strategy runs last, seeded with the other plans.
pub fn best_attack(
    g: &Graph,
    setup: &TargetSetup,
    detector: &SeededDetector,
    detector_index: usize,
    config: &GameConfig,
) -> Result<TargetOutcome> {
    let target = setup.target;
    let temps = &setup.temperatures;
    g.check_node(target)?;
    if temps.len() != g.node_count() {
        return Err(Error::InvalidInput(format!(
            "{} temperatures for {} nodes",
            temps.len(),
            g.node_count()
        )));
    }
    let baseline = attacked_standing(g, &[], target, detector, temps)?;

    let run = |strategy: Strategy, seeds: &[AttackPlan]| -> StrategyOutcome {
        let ctx = AttackContext {
            graph: g,
            target,
            temps,
            detector,
            budget: config.budget,
            seed: config.strategy_seed(detector_index, target, strategy),
        };
        let result = plan_attack(strategy, &ctx, &config.attack, seeds)
            .and_then(|plan| evaluate_prefixes(g, &plan, detector, temps).map(|e| (plan, e)));
        match result {
            Ok((plan, eval)) => StrategyOutcome {
                strategy,
                plan: Some(plan),
                evaluation: Some(eval),
                error: None,
            },
            Err(e) => StrategyOutcome {
                strategy,
                plan: None,
                evaluation: None,
                error: Some(e.to_string()),
            },
        }
    };

    let mut slots: Vec<Option<StrategyOutcome>> = config
        .strategies
        .iter()
        .map(|&s| (s != Strategy::Epa).then(|| run(s, &[])))
        .collect();
    let seed_plans: Vec<AttackPlan> = slots
        .iter()
        .flatten()
        .filter_map(|o| o.plan.clone())
        .collect();
    for (slot, &s) in slots.iter_mut().zip(&config.strategies) {
        if slot.is_none() {
            *slot = Some(run(s, &seed_plans));
        }
    }
    let outcomes: Vec<StrategyOutcome> = slots.into_iter().flatten().collect();

    let (chosen, best) = match choose_strategy(&outcomes) {
        Some(i) => (
            Some(outcomes[i].strategy),
            outcomes[i].best().expect("evaluated"),
        ),
        None => (None, baseline),
    };
    Ok(TargetOutcome {
        target,
        baseline,
        outcomes,
        chosen,
        chosen_prefix: best.prefix,
        max_rank: best.rank,
        max_t_comm: best.t_comm,
    })
}

/// Mean of per-target values as an exact fraction.
#[derive(Copy, Clone, Debug, Serialize, Deserialize)]
pub struct ExactMean {
    pub numerator: u128,
    pub denominator: u128,
}

impl ExactMean {
    pub fn to_f64(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

impl PartialEq for ExactMean {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExactMean {}

impl PartialOrd for ExactMean {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactMean {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.numerator * other.denominator).cmp(&(other.numerator * self.denominator))
    }
}

/// All targets under one detector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorResult {
    pub detector: SeededDetector,
    pub targets: Vec<TargetOutcome>,
    pub rank_sum: u64,
    pub baseline_rank_sum: u64,
    pub mean_rank: f64,
    /// Standard error of the mean best-response rank.
    pub std_error: f64,
}

impl DetectorResult {
    fn new(detector: SeededDetector, targets: Vec<TargetOutcome>) -> Self {
        let ranks: Vec<f64> = targets.iter().map(|t| t.max_rank as f64).collect();
        let n = ranks.len() as f64;
        let mean_rank = ranks.iter().sum::<f64>() / n;
        let std_error = if ranks.len() > 1 {
            let var = ranks.iter().map(|r| (r - mean_rank).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        DetectorResult {
            detector,
            rank_sum: targets.iter().map(|t| t.max_rank as u64).sum(),
            baseline_rank_sum: targets.iter().map(|t| t.baseline.rank as u64).sum(),
            targets,
            mean_rank,
            std_error,
        }
    }

    /// Mean over targets of `p·attacked + (1 − p)·clean` rank.
    pub fn mixed_objective(&self, p: AttackProbability) -> ExactMean {
        let (num, den) = (u128::from(p.numerator), u128::from(p.denominator));
        let numerator = self
            .targets
            .iter()
            .map(|t| num * t.max_rank as u128 + (den - num) * t.baseline.rank as u128)
            .sum();
        ExactMean {
            numerator,
            denominator: den * self.targets.len() as u128,
        }
    }
}

/// The analyst's choice at one attack probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedPoint {
    pub probability: AttackProbability,
    pub objectives: Vec<ExactMean>,
    pub chosen: usize,
}

fn argmin<T: Ord>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Detector minimising the mixed objective, earliest on ties.
pub fn mixed_defender_select(detectors: &[DetectorResult], p: AttackProbability) -> MixedPoint {
    let objectives: Vec<ExactMean> = detectors.iter().map(|d| d.mixed_objective(p)).collect();
    MixedPoint {
        probability: p,
        chosen: argmin(&objectives),
        objectives,
    }
}

/// The full outcome of one game on one graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub dataset: String,
    pub node_count: usize,
    pub edge_count: usize,
    pub config: GameConfig,
    pub setups: Vec<TargetSetup>,
    pub detectors: Vec<DetectorResult>,
    /// Index of the detector with the lowest mean best-response rank.
    pub chosen_detector: usize,
    pub mixed: Vec<MixedPoint>,
}

/// Play the game: the attacker best-responds to each detector for each
/// target, and the analyst takes the detector with the lowest mean rank.
/// The (detector, target) grid runs in parallel.
pub fn defender_select(
    g: &Graph,
    dataset: &str,
    setups: &[TargetSetup],
    config: &GameConfig,
) -> Result<GameRecord> {
    config.validate()?;
    let configured: Vec<NodeId> = setups.iter().map(|s| s.target).collect();
    if configured != config.targets {
        return Err(Error::InvalidInput(
            "target setups do not match the configured targets".into(),
        ));
    }
    let jobs: Vec<(usize, usize)> = (0..config.detectors.len())
        .flat_map(|d| (0..setups.len()).map(move |t| (d, t)))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(d, t)| best_attack(g, &setups[t], &config.detector(d), d, config))
        .collect::<Result<Vec<_>>>()?;
    let mut outcomes = outcomes.into_iter();
    let detectors: Vec<DetectorResult> = (0..config.detectors.len())
        .map(|d| {
            DetectorResult::new(
                config.detector(d),
                outcomes.by_ref().take(setups.len()).collect(),
            )
        })
        .collect();
    let sums: Vec<u64> = detectors.iter().map(|d| d.rank_sum).collect();
    let mixed = config
        .attack_probabilities
        .iter()
        .map(|&p| mixed_defender_select(&detectors, p))
        .collect();
    Ok(GameRecord {
        dataset: dataset.to_string(),
        node_count: g.node_count(),
        edge_count: g.edge_count(),
        config: config.clone(),
        setups: setups.to_vec(),
        chosen_detector: argmin(&sums),
        detectors,
        mixed,
    })
}

/// One line of a rank/temperature curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub dataset: String,
    pub detector: String,
    pub attack: String,
    pub target: NodeId,
    pub prefix_size: usize,
    pub rank: usize,
    pub t_comm: f64,
}

impl GameRecord {
    /// Every evaluated prefix, in detector, target, strategy order.
    pub fn curve_rows(&self) -> Vec<CurveRow> {
        let mut rows = Vec::new();
        for d in &self.detectors {
            for t in &d.targets {
                for o in &t.outcomes {
                    let Some(eval) = &o.evaluation else { continue };
                    rows.extend(eval.points.iter().map(|p| CurveRow {
                        dataset: self.dataset.clone(),
                        detector: d.detector.kind().name().to_string(),
                        attack: o.strategy.name().to_string(),
                        target: t.target,
                        prefix_size: p.prefix,
                        rank: p.rank,
                        t_comm: p.t_comm,
                    }));
                }
            }
        }
        rows
    }

    /// Internal consistency of the record: every chosen strategy attains
    /// its target's maximum rank, the chosen detector attains the minimum
    /// mean rank, and each mixed objective is the convex combination of
    /// its endpoints. Returns one message per violation.
    pub fn consistency_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (di, d) in self.detectors.iter().enumerate() {
            for t in &d.targets {
                let best = t
                    .outcomes
                    .iter()
                    .filter_map(StrategyOutcome::best)
                    .map(|p| p.rank)
                    .max();
                let expected = best.unwrap_or(t.baseline.rank);
                if t.max_rank != expected {
                    out.push(format!(
                        "detector {di} target {}: max rank {} but strategies reach {expected}",
                        t.target, t.max_rank
                    ));
                }
                if t.max_rank < t.baseline.rank {
                    out.push(format!(
                        "detector {di} target {}: max rank {} below baseline {}",
                        t.target, t.max_rank, t.baseline.rank
                    ));
                }
                let chosen = t
                    .chosen
                    .and_then(|s| t.outcomes.iter().find(|o| o.strategy == s));
                match chosen.and_then(StrategyOutcome::best) {
                    Some(p) if p.rank == t.max_rank && p.prefix == t.chosen_prefix => {}
                    None if t.chosen.is_none() && best.is_none() => {}
                    _ => out.push(format!(
                        "detector {di} target {}: chosen strategy does not attain the maximum",
                        t.target
                    )),
                }
            }
            let sum: u64 = d.targets.iter().map(|t| t.max_rank as u64).sum();
            if sum != d.rank_sum {
                out.push(format!("detector {di}: rank sum {} != {sum}", d.rank_sum));
            }
        }
        let sums: Vec<u64> = self.detectors.iter().map(|d| d.rank_sum).collect();
        if let Some(&min) = sums.iter().min() {
            if sums.get(self.chosen_detector) != Some(&min) {
                out.push(format!(
                    "chosen detector {} does not minimise the mean rank",
                    self.chosen_detector
                ));
            }
        }
        for point in &self.mixed {
            let p = point.probability;
            let (num, den) = (u128::from(p.numerator), u128::from(p.denominator));
            for (di, d) in self.detectors.iter().enumerate() {
                let at = d.mixed_objective(p);
                let attacked = d.mixed_objective(AttackProbability::ALWAYS);
                let clean = d.mixed_objective(AttackProbability::NEVER);
                // both endpoints share the denominator T
                let combined = ExactMean {
                    numerator: num * attacked.numerator + (den - num) * clean.numerator,
                    denominator: den * attacked.denominator,
                };
                if at != combined || point.objectives.get(di) != Some(&at) {
                    out.push(format!(
                        "p = {p}: detector {di} objective is not the mixture"
                    ));
                }
            }
            if point.objectives.get(point.chosen) != point.objectives.iter().min() {
                out.push(format!("p = {p}: chosen detector is not the minimiser"));
            }
        }
        out
    }
}

/// Result of re-running the persisted plans of a record.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReplayReport {
    pub checks: usize,
    pub mismatches: Vec<String>,
}

/// Re-evaluate every stored plan and compare ranks and temperatures
/// against the record.
pub fn replay_record(g: &Graph, record: &GameRecord) -> Result<ReplayReport> {
    if g.node_count() != record.node_count || g.edge_count() != record.edge_count {
        return Err(Error::InvalidInput(format!(
            "graph has {} nodes and {} edges, record expects {} and {}",
            g.node_count(),
            g.edge_count(),
            record.node_count,
            record.edge_count
        )));
    }
    let mut jobs = Vec::new();
    for d in &record.detectors {
        for (t, setup) in d.targets.iter().zip(&record.setups) {
            for o in &t.outcomes {
                if let (Some(plan), Some(eval)) = (&o.plan, &o.evaluation) {
                    jobs.push((&d.detector, setup, plan, eval));
                }
            }
        }
    }
    let mismatches: Vec<Option<String>> = jobs
        .par_iter()
        .map(|&(det, setup, plan, eval)| {
            let label = format!(
                "{} / {} / target {}",
                det.kind().name(),
                plan.strategy,
                plan.target
            );
            match evaluate_prefixes(g, plan, det, &setup.temperatures) {
                Ok(again) if again == *eval => None,
                Ok(_) => Some(format!("{label}: replayed curve differs")),
                Err(e) => Some(format!("{label}: {e}")),
            }
        })
        .collect();
    Ok(ReplayReport {
        checks: mismatches.len(),
        mismatches: mismatches.into_iter().flatten().collect(),
    })
}
