use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{largest_connected_component, ordered, Graph, NodeId};
use crate::seed;

/// Random graph families.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Er,
    Ws,
    Ba,
    Lfr,
    Mag,
}

impl Model {
    pub const ALL: [Model; 5] = [Model::Er, Model::Ws, Model::Ba, Model::Lfr, Model::Mag];

    pub fn name(self) -> &'static str {
        match self {
            Model::Er => "er",
            Model::Ws => "ws",
            Model::Ba => "ba",
            Model::Lfr => "lfr",
            Model::Mag => "mag",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidInput(format!("unknown model {s:?} (er, ws, ba, lfr, mag)"))
            })
    }
}

/// Per-model parameters. Every field has a default derived from the
/// target average degree; all are overridable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelParams {
    Er,
    Ws {
        k: usize,
        beta: f64,
    },
    Ba {
        m: usize,
    },
    Lfr {
        tau1: f64,
        tau2: f64,
        mu: f64,
        min_community: usize,
        max_community: usize,
        max_degree: usize,
    },
    Mag {
        attributes: usize,
        attribute_prob: f64,
        affinity: [[f64; 2]; 2],
    },
}

impl ModelParams {
    pub fn default_for(model: Model, avg_degree: f64) -> Self {
        match model {
            Model::Er => ModelParams::Er,
            Model::Ws => ModelParams::Ws {
                k: ((avg_degree / 2.0).round() as usize * 2).max(2),
                beta: 0.1,
            },
            Model::Ba => ModelParams::Ba {
                m: ((avg_degree / 2.0).round() as usize).max(1),
            },
            Model::Lfr => ModelParams::Lfr {
                tau1: 2.5,
                tau2: 1.5,
                mu: 0.1,
                min_community: 20,
                max_community: 100,
                max_degree: 50,
            },
            Model::Mag => ModelParams::Mag {
                attributes: 8,
                attribute_prob: 0.5,
                affinity: [[0.85, 0.55], [0.55, 0.15]],
            },
        }
    }

    pub fn model(&self) -> Model {
        match self {
            ModelParams::Er => Model::Er,
            ModelParams::Ws { .. } => Model::Ws,
            ModelParams::Ba { .. } => Model::Ba,
            ModelParams::Lfr { .. } => Model::Lfr,
            ModelParams::Mag { .. } => Model::Mag,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n: usize,
    pub target_avg_degree: f64,
    pub params: ModelParams,
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(model: Model, n: usize, target_avg_degree: f64, seed: u64) -> Self {
        SynthConfig {
            n,
            target_avg_degree,
            params: ModelParams::default_for(model, target_avg_degree),
            seed,
        }
    }

    pub fn model(&self) -> Model {
        self.params.model()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::InvalidInput(format!(
                "n = {} must be at least 4",
                self.n
            )));
        }
        if !(self.target_avg_degree > 0.0 && self.target_avg_degree < (self.n - 1) as f64) {
            return Err(Error::InvalidInput(format!(
                "average degree {} must lie in (0, n - 1)",
                self.target_avg_degree
            )));
        }
        match &self.params {
            ModelParams::Ws { k, beta } => {
                if *k < 2 || *k >= self.n {
                    return Err(Error::InvalidInput(format!("ws k = {k} out of range")));
                }
                if !(0.0..=1.0).contains(beta) {
                    return Err(Error::InvalidInput(format!(
                        "ws beta = {beta} not in [0, 1]"
                    )));
                }
            }
            ModelParams::Ba { m } => {
                if *m < 1 || *m >= self.n {
                    return Err(Error::InvalidInput(format!("ba m = {m} out of range")));
                }
            }
            ModelParams::Lfr {
                mu,
                min_community,
                max_community,
                tau1,
                tau2,
                ..
            } => {
                if !(0.0..=1.0).contains(mu) {
                    return Err(Error::InvalidInput(format!("lfr mu = {mu} not in [0, 1]")));
                }
                if min_community > max_community || *min_community < 2 {
                    return Err(Error::InvalidInput("lfr community size bounds".into()));
                }
                if *tau1 <= 1.0 || *tau2 <= 1.0 {
                    return Err(Error::InvalidInput("lfr exponents must exceed 1".into()));
                }
            }
            ModelParams::Mag {
                attributes,
                attribute_prob,
                affinity,
            } => {
                if *attributes == 0 || *attributes > 16 {
                    return Err(Error::InvalidInput(
                        "mag attributes must be in 1..=16".into(),
                    ));
                }
                if !(0.0..=1.0).contains(attribute_prob)
                    || affinity.iter().flatten().any(|p| !(0.0..=1.0).contains(p))
                {
                    return Err(Error::InvalidInput(
                        "mag probabilities must be in [0, 1]".into(),
                    ));
                }
            }
            ModelParams::Er => {}
        }
        Ok(())
    }
}

/// Generated graph after restriction to its largest component.
#[derive(Clone, Debug)]
pub struct SynthGraph {
    pub graph: Graph,
    /// Pre-restriction id of each node.
    pub original: Vec<NodeId>,
    pub raw_node_count: usize,
    pub raw_edge_count: usize,
}

impl SynthGraph {
    pub fn raw_mean_degree(&self) -> f64 {
        2.0 * self.raw_edge_count as f64 / self.raw_node_count as f64
    }
}

/// Sample the configured model, then keep the largest connected component.
pub fn generate(config: &SynthConfig) -> Result<SynthGraph> {
    let raw = generate_raw(config)?;
    let lcc = largest_connected_component(&raw)?;
    Ok(SynthGraph {
        graph: lcc.graph,
        original: lcc.original,
        raw_node_count: raw.node_count(),
        raw_edge_count: raw.edge_count(),
    })
}

/// Sample the configured model without component filtering.
pub fn generate_raw(config: &SynthConfig) -> Result<Graph> {
    config.validate()?;
    let mut rng = seed::rng_for(config.seed, "synth", &[config.model() as u64]);
    let n = config.n;
    match &config.params {
        ModelParams::Er => Ok(erdos_renyi(
            n,
            config.target_avg_degree / (n - 1) as f64,
            &mut rng,
        )),
        ModelParams::Ws { k, beta } => Ok(watts_strogatz(n, *k, *beta, &mut rng)),
        ModelParams::Ba { m } => Ok(barabasi_albert(n, *m, &mut rng)),
        ModelParams::Lfr {
            tau1,
            tau2,
            mu,
            min_community,
            max_community,
            max_degree,
        } => lfr(
            n,
            config.target_avg_degree,
            &LfrShape {
                tau1: *tau1,
                tau2: *tau2,
                mu: *mu,
                min_community: *min_community,
                max_community: *max_community,
                max_degree: *max_degree,
            },
            &mut rng,
        ),
        ModelParams::Mag {
            attributes,
            attribute_prob,
            affinity,
        } => Ok(mag(
            n,
            config.target_avg_degree,
            *attributes,
            *attribute_prob,
            affinity,
            &mut rng,
        )),
    }
}

fn erdos_renyi<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

fn watts_strogatz<R: Rng>(n: usize, k: usize, beta: f64, rng: &mut R) -> Graph {
    let half = k / 2;
    let mut adj: Vec<HashSet<NodeId>> = vec![HashSet::new(); n];
    for u in 0..n {
        for j in 1..=half {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    if beta > 0.0 {
        for j in 1..=half {
            for u in 0..n {
                let v = (u + j) % n;
                if rng.gen::<f64>() >= beta || !adj[u].contains(&v) {
                    continue;
                }
                if adj[u].len() >= n - 1 {
                    continue;
                }
                let w = loop {
                    let w = rng.gen_range(0..n);
                    if w != u && !adj[u].contains(&w) {
                        break w;
                    }
                };
                adj[u].remove(&v);
                adj[v].remove(&u);
                adj[u].insert(w);
                adj[w].insert(u);
            }
        }
    }
    let edges = adj
        .iter()
        .enumerate()
        .flat_map(|(u, s)| s.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
        .collect::<Vec<_>>();
    Graph::from_edges(n, edges)
}

/// Preferential attachment from an `m`-clique seed.
fn barabasi_albert<R: Rng>(n: usize, m: usize, rng: &mut R) -> Graph {
    let mut edges = Vec::with_capacity(m * n);
    // each node appears once per incident edge
    let mut endpoints: Vec<NodeId> = Vec::with_capacity(2 * m * n);
    for u in 0..m {
        for v in u + 1..m {
            edges.push((u, v));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    let mut chosen = Vec::with_capacity(m);
    for t in m..n {
        chosen.clear();
        while chosen.len() < m {
            let cand = if endpoints.is_empty() {
                rng.gen_range(0..t)
            } else {
                endpoints[rng.gen_range(0..endpoints.len())]
            };
            if !chosen.contains(&cand) {
                chosen.push(cand);
            }
        }
        for &v in &chosen {
            edges.push((t, v));
            endpoints.push(t);
            endpoints.push(v);
        }
    }
    Graph::from_edges(n, edges)
}

struct LfrShape {
    tau1: f64,
    tau2: f64,
    mu: f64,
    min_community: usize,
    max_community: usize,
    max_degree: usize,
}

/// Inverse-CDF draw from a continuous power law on `[lo, hi]`.
fn power_law<R: Rng>(lo: f64, hi: f64, exponent: f64, rng: &mut R) -> f64 {
    let a = 1.0 - exponent;
    let u: f64 = rng.gen();
    (lo.powf(a) + u * (hi.powf(a) - lo.powf(a))).powf(1.0 / a)
}

fn power_law_mean(lo: f64, hi: f64, exponent: f64) -> f64 {
    let a = 1.0 - exponent;
    let b = 2.0 - exponent;
    let norm = (hi.powf(a) - lo.powf(a)) / a;
    let first = if b.abs() < 1e-12 {
        (hi / lo).ln()
    } else {
        (hi.powf(b) - lo.powf(b)) / b
    };
    first / norm
}

/// Benchmark graph with power-law degrees and community sizes.
fn lfr<R: Rng>(n: usize, avg_degree: f64, shape: &LfrShape, rng: &mut R) -> Result<Graph> {
    let max_degree = shape.max_degree.min(n - 1) as f64;
    if avg_degree >= max_degree {
        return Err(Error::Lfr {
            parameter: format!(
                "max_degree {max_degree} must exceed the average degree {avg_degree}"
            ),
        });
    }
    // minimum degree whose truncated power law has the requested mean
    let (mut lo, mut hi) = (1.0_f64, max_degree);
    if power_law_mean(lo, max_degree, shape.tau1) > avg_degree {
        return Err(Error::Lfr {
            parameter: format!(
                "tau1 {} too shallow for average degree {avg_degree}",
                shape.tau1
            ),
        });
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if power_law_mean(mid, max_degree, shape.tau1) < avg_degree {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let min_degree = lo;

    const ATTEMPTS: usize = 20;
    for _ in 0..ATTEMPTS {
        let degrees: Vec<usize> = (0..n)
            .map(|_| {
                power_law(min_degree, max_degree, shape.tau1, rng)
                    .round()
                    .max(1.0) as usize
            })
            .collect();
        let internal: Vec<usize> = degrees
            .iter()
            .map(|&k| ((1.0 - shape.mu) * k as f64).round() as usize)
            .collect();

        let Some(sizes) = community_sizes(n, shape, rng) else {
            continue;
        };
        let Some(membership) = place_nodes(&internal, &sizes, rng) else {
            continue;
        };

        let mut members = vec![Vec::new(); sizes.len()];
        for (v, &c) in membership.iter().enumerate() {
            members[c].push(v);
        }
        let mut edges = HashSet::new();
        for group in &members {
            let mut stubs: Vec<NodeId> = group
                .iter()
                .flat_map(|&v| std::iter::repeat_n(v, internal[v]))
                .collect();
            wire_stubs(&mut stubs, &mut edges, rng);
        }
        let mut stubs: Vec<NodeId> = (0..n)
            .flat_map(|v| std::iter::repeat_n(v, degrees[v] - internal[v].min(degrees[v])))
            .collect();
        wire_stubs(&mut stubs, &mut edges, rng);
        let mut edges: Vec<_> = edges.into_iter().collect();
        edges.sort_unstable();
        return Ok(Graph::from_edges(n, edges));
    }
    Err(Error::Lfr {
        parameter: format!(
            "community sizes [{}, {}] cannot host the degree sequence (mu {}, max_degree {})",
            shape.min_community, shape.max_community, shape.mu, shape.max_degree
        ),
    })
}

fn community_sizes<R: Rng>(n: usize, shape: &LfrShape, rng: &mut R) -> Option<Vec<usize>> {
    let lo = shape.min_community as f64;
    let hi = shape.max_community.min(n) as f64;
    let mut sizes = Vec::new();
    let mut total = 0;
    while total < n {
        let s = power_law(lo, hi, shape.tau2, rng).round() as usize;
        sizes.push(s);
        total += s;
    }
    let mut excess = total - n;
    // trim the largest communities while they stay above the minimum
    while excess > 0 {
        let (i, &s) = sizes.iter().enumerate().max_by_key(|(_, &s)| s)?;
        if s <= shape.min_community {
            // drop the smallest community and retry the trim
            let (j, _) = sizes.iter().enumerate().min_by_key(|(_, &s)| s)?;
            let removed = sizes.swap_remove(j);
            if removed > excess {
                return None;
            }
            excess -= removed;
            continue;
        }
        let cut = excess.min(s - shape.min_community);
        sizes[i] -= cut;
        excess -= cut;
    }
    if sizes.iter().sum::<usize>() != n {
        return None;
    }
    Some(sizes)
}

fn place_nodes<R: Rng>(internal: &[usize], sizes: &[usize], rng: &mut R) -> Option<Vec<usize>> {
    let mut order: Vec<NodeId> = (0..internal.len()).collect();
    order.shuffle(rng);
    order.sort_by_key(|&v| std::cmp::Reverse(internal[v]));
    let mut free: Vec<usize> = sizes.to_vec();
    let mut membership = vec![0; internal.len()];
    let mut options = Vec::new();
    for v in order {
        options.clear();
        options.extend((0..sizes.len()).filter(|&c| free[c] > 0 && sizes[c] > internal[v]));
        let &c = options.choose(rng)?;
        free[c] -= 1;
        membership[v] = c;
    }
    Some(membership)
}

/// Random stub matching with self-loops and repeats erased.
fn wire_stubs<R: Rng>(stubs: &mut [NodeId], edges: &mut HashSet<(NodeId, NodeId)>, rng: &mut R) {
    stubs.shuffle(rng);
    for pair in stubs.chunks_exact(2) {
        if pair[0] != pair[1] {
            edges.insert(ordered(pair[0], pair[1]));
        }
    }
}

/// Multiplicative attribute graph with independent binary attributes.
fn mag<R: Rng>(
    n: usize,
    avg_degree: f64,
    attributes: usize,
    attribute_prob: f64,
    affinity: &[[f64; 2]; 2],
    rng: &mut R,
) -> Graph {
    let types: Vec<usize> = (0..n)
        .map(|_| {
            (0..attributes).fold(0, |acc, l| {
                acc | (usize::from(rng.gen::<f64>() < attribute_prob) << l)
            })
        })
        .collect();
    let type_count = 1usize << attributes;
    let mut counts = vec![0f64; type_count];
    for &t in &types {
        counts[t] += 1.0;
    }
    let prob = |a: usize, b: usize| -> f64 {
        (0..attributes)
            .map(|l| affinity[(a >> l) & 1][(b >> l) & 1])
            .product()
    };
    let mut table = vec![0.0; type_count * type_count];
    let mut expected = 0.0;
    for a in 0..type_count {
        for b in 0..type_count {
            let p = prob(a, b);
            table[a * type_count + b] = p;
            let pairs = if a == b {
                counts[a] * (counts[a] - 1.0) / 2.0
            } else if a < b {
                counts[a] * counts[b]
            } else {
                0.0
            };
            expected += pairs * p;
        }
    }
    let scale = if expected > 0.0 {
        n as f64 * avg_degree / 2.0 / expected
    } else {
        0.0
    };
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = (scale * table[types[u] * type_count + types[v]]).min(1.0);
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ba_edge_count_matches_construction() {
        let cfg = SynthConfig {
            n: 1000,
            target_avg_degree: 10.0,
            params: ModelParams::Ba { m: 5 },
            seed: 3,
        };
        let g = generate_raw(&cfg).unwrap();
        assert_eq!(g.edge_count(), 5 * (1000 - 5) + 10);
    }

    #[test]
    fn ws_without_rewiring_is_ring_lattice() {
        let cfg = SynthConfig {
            n: 50,
            target_avg_degree: 6.0,
            params: ModelParams::Ws { k: 6, beta: 0.0 },
            seed: 1,
        };
        let g = generate_raw(&cfg).unwrap();
        for u in 0..50 {
            assert_eq!(g.degree(u), 6);
            for j in 1..=3 {
                assert!(g.has_edge(u, (u + j) % 50));
            }
        }
    }

    #[test]
    fn generators_are_reproducible() {
        for model in Model::ALL {
            let cfg = SynthConfig::new(model, 400, 10.0, 11);
            let a = generate(&cfg).unwrap();
            let b = generate(&cfg).unwrap();
            assert_eq!(a.graph, b.graph, "{model}");
            let c = generate(&SynthConfig::new(model, 400, 10.0, 12)).unwrap();
            assert_ne!(a.graph, c.graph, "{model}");
            assert!(a.graph.is_connected());
        }
    }

    #[test]
    fn lfr_rejects_impossible_degree() {
        let mut cfg = SynthConfig::new(Model::Lfr, 200, 10.0, 1);
        cfg.params = ModelParams::Lfr {
            tau1: 2.5,
            tau2: 1.5,
            mu: 0.1,
            min_community: 5,
            max_community: 8,
            max_degree: 9,
        };
        assert!(matches!(generate_raw(&cfg), Err(Error::Lfr { .. })));
        cfg.params = ModelParams::Lfr {
            tau1: 2.5,
            tau2: 1.5,
            mu: 0.1,
            min_community: 5,
            max_community: 8,
            max_degree: 40,
        };
        // nodes with ~36 internal links cannot fit communities of at most 8
        assert!(matches!(generate_raw(&cfg), Err(Error::Lfr { .. })));
    }

    #[test]
    fn config_validation() {
        assert!(SynthConfig::new(Model::Er, 3, 1.0, 0).validate().is_err());
        assert!(SynthConfig::new(Model::Er, 10, 9.0, 0).validate().is_err());
        assert!(SynthConfig::new(Model::Er, 10, 4.0, 0).validate().is_ok());
        assert_eq!("LFR".parse::<Model>().unwrap(), Model::Lfr);
        assert!("sbm".parse::<Model>().is_err());
    }
}
