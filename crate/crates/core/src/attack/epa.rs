use std::collections::{HashMap, HashSet};

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{attacked_standing, non_neighbors, AttackContext, AttackPlan, Strategy};
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpaOptions {
    pub population: usize,
    pub generations: usize,
    pub crossover: f64,
    pub mutation: f64,
}

impl Default for EpaOptions {
    fn default() -> Self {
        EpaOptions {
            population: 100,
            generations: 10,
            crossover: 0.7,
            mutation: 0.3,
        }
    }
}

impl EpaOptions {
    pub fn validate(&self) -> Result<()> {
        if self.population == 0 {
            return Err(Error::InvalidInput(
                "epa population must be positive".into(),
            ));
        }
        for (name, p) in [("crossover", self.crossover), ("mutation", self.mutation)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidInput(format!(
                    "epa {name} rate {p} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of an evolutionary search.
#[derive(Clone, Debug)]
pub struct EpaRun {
    pub plan: AttackPlan,
    /// Target rank under the full plan.
    pub best_rank: usize,
    /// Best rank in the population before each generation and at the end.
    pub history: Vec<usize>,
    /// Distinct edge sets evaluated by the detector.
    pub evaluations: usize,
}

/// A gene lists the new contacts of the target in insertion order.
type Gene = Vec<NodeId>;

fn key(gene: &Gene) -> Vec<NodeId> {
    let mut k = gene.clone();
    k.sort_unstable();
    k
}

struct Search<'a> {
    ctx: &'a AttackContext<'a>,
    cache: HashMap<Vec<NodeId>, usize>,
}

impl Search<'_> {
    fn evaluate(&mut self, population: &[Gene]) -> Result<Vec<usize>> {
        let mut fresh: Vec<Vec<NodeId>> = population
            .iter()
            .map(key)
            .filter(|k| !self.cache.contains_key(k))
            .collect();
        fresh.sort_unstable();
        fresh.dedup();
        let ctx = self.ctx;
        let scored = fresh
            .into_par_iter()
            .map(|k| {
                let edges: Vec<_> = k.iter().map(|&u| (ctx.target, u)).collect();
                attacked_standing(ctx.graph, &edges, ctx.target, ctx.detector, ctx.temps)
                    .map(|p| (k, p.rank))
            })
            .collect::<Result<Vec<_>>>()?;
        self.cache.extend(scored);
        Ok(population.iter().map(|g| self.cache[&key(g)]).collect())
    }
}

fn best_index(fitness: &[usize]) -> usize {
    let mut best = 0;
    for (i, &f) in fitness.iter().enumerate() {
        if f > fitness[best] {
            best = i;
        }
    }
    best
}

fn roulette<R: Rng + ?Sized>(fitness: &[usize], rng: &mut R) -> usize {
    match WeightedIndex::new(fitness) {
        Ok(w) => w.sample(rng),
        Err(_) => rng.gen_range(0..fitness.len()),
    }
}

/// Keep shared contacts, take each unshared one with probability 1/2.
fn crossover<R: Rng + ?Sized>(a: &Gene, b: &Gene, budget: usize, rng: &mut R) -> Gene {
    let in_a: HashSet<_> = a.iter().copied().collect();
    let in_b: HashSet<_> = b.iter().copied().collect();
    let mut child: Gene = a.iter().copied().filter(|u| in_b.contains(u)).collect();
    for &u in a
        .iter()
        .filter(|u| !in_b.contains(u))
        .chain(b.iter().filter(|u| !in_a.contains(u)))
    {
        if rng.gen_bool(0.5) {
            child.push(u);
        }
    }
    while child.len() > budget {
        let i = rng.gen_range(0..child.len());
        child.remove(i);
    }
    child
}

/// Add one new contact, favouring nodes far from the target.
fn mutate<R: Rng + ?Sized>(
    gene: &mut Gene,
    candidates: &[NodeId],
    distance: &[f64],
    budget: usize,
    rng: &mut R,
) {
    let present: HashSet<_> = gene.iter().copied().collect();
    let (pool, weights): (Vec<NodeId>, Vec<f64>) = candidates
        .iter()
        .filter(|u| !present.contains(u))
        .map(|&u| (u, distance[u]))
        .unzip();
    let Ok(pick) = WeightedIndex::new(&weights) else {
        return;
    };
    if gene.len() >= budget {
        let i = rng.gen_range(0..gene.len());
        gene.remove(i);
    }
    gene.push(pool[pick.sample(rng)]);
}

/// Genetic search over sets of target contacts, maximising the target's
/// rank under the analyst's detector. `seed_plans` join the initial
/// population; the rest is random.
pub fn epa_attack(
    ctx: &AttackContext<'_>,
    opts: &EpaOptions,
    seed_plans: &[AttackPlan],
) -> Result<EpaRun> {
    opts.validate()?;
    let g = ctx.graph;
    let target = ctx.target;
    let budget = ctx.budget;
    let candidates = non_neighbors(g, target);
    let allowed: HashSet<_> = candidates.iter().copied().collect();
    let mut rng = seed::rng_for(ctx.seed, "epa", &[target as u64]);

    let dist = g.bfs_distances(target);
    let far = dist.iter().flatten().copied().max().unwrap_or(0) + 1;
    let distance: Vec<f64> = dist.iter().map(|d| d.unwrap_or(far) as f64).collect();

    let mut population: Vec<Gene> = Vec::with_capacity(opts.population);
    for plan in seed_plans {
        let mut seen = HashSet::new();
        let gene: Gene = plan
            .edges
            .iter()
            .filter_map(|&(a, b)| match (a == target, b == target) {
                (true, false) => Some(b),
                (false, true) => Some(a),
                _ => None,
            })
            .filter(|u| allowed.contains(u) && seen.insert(*u))
            .take(budget)
            .collect();
        if !gene.is_empty() && population.len() < opts.population {
            population.push(gene);
        }
    }
    let cap = budget.min(candidates.len());
    while population.len() < opts.population {
        if cap == 0 {
            population.push(Vec::new());
            continue;
        }
        let size = rng.gen_range(1..=cap);
        population.push(
            sample(&mut rng, candidates.len(), size)
                .into_iter()
                .map(|i| candidates[i])
                .collect(),
        );
    }

    let mut search = Search {
        ctx,
        cache: HashMap::new(),
    };
    let mut history = Vec::with_capacity(opts.generations + 1);
    let mut fitness = search.evaluate(&population)?;
    for _ in 0..opts.generations {
        let elite = best_index(&fitness);
        history.push(fitness[elite]);
        let mut next = vec![population[elite].clone()];
        while next.len() < opts.population {
            let a = &population[roulette(&fitness, &mut rng)];
            let b = &population[roulette(&fitness, &mut rng)];
            let mut child = if rng.gen_bool(opts.crossover) {
                crossover(a, b, budget, &mut rng)
            } else {
                a.clone()
            };
            if rng.gen_bool(opts.mutation) {
                mutate(&mut child, &candidates, &distance, budget, &mut rng);
            }
            next.push(child);
        }
        population = next;
        fitness = search.evaluate(&population)?;
    }
    let best = best_index(&fitness);
    history.push(fitness[best]);
    Ok(EpaRun {
        plan: AttackPlan::from_nodes(
            Strategy::Epa,
            target,
            population.swap_remove(best),
            budget,
            ctx.seed,
        ),
        best_rank: fitness[best],
        history,
        evaluations: search.cache.len(),
    })
}
