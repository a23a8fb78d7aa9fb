use rand::Rng;
use serde::{Deserialize, Serialize};

use super::louvain::louvain_run;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seed;
use crate::triage::CommunityCover;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpOptions {
    /// Number of latent communities; `None` uses the Louvain count.
    pub dimension: Option<usize>,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for BpOptions {
    fn default() -> Self {
        BpOptions {
            dimension: None,
            iterations: 500,
            seed: 0,
        }
    }
}

/// Fitted nonnegative memberships.
#[derive(Clone, Debug)]
pub struct BpFit {
    pub dimension: usize,
    /// Row-major `n × dimension` membership strengths.
    pub memberships: Vec<f64>,
    /// Objective before the first step and after each accepted step.
    pub objective_trace: Vec<f64>,
    /// Strength at which a node joins a community.
    pub threshold: f64,
}

impl BpFit {
    pub fn row(&self, v: usize) -> &[f64] {
        &self.memberships[v * self.dimension..(v + 1) * self.dimension]
    }

    pub fn edge_probability(&self, u: usize, v: usize) -> f64 {
        let z: f64 = self
            .row(u)
            .iter()
            .zip(self.row(v))
            .map(|(a, b)| a * b)
            .sum();
        -(-z).exp_m1()
    }

    pub fn cover(&self) -> CommunityCover {
        let n = self.memberships.len() / self.dimension.max(1);
        let mut sets = vec![Vec::new(); self.dimension];
        for v in 0..n {
            for (c, &x) in self.row(v).iter().enumerate() {
                if x >= self.threshold {
                    sets[c].push(v);
                }
            }
        }
        CommunityCover::new(n, sets).expect("rows index their own nodes")
    }
}

const MIN_STRENGTH: f64 = 1e-10;

struct Model<'a> {
    g: &'a Graph,
    dim: usize,
    /// Weight of each non-edge relative to an edge.
    non_edge_weight: f64,
}

impl Model<'_> {
    fn dot(&self, x: &[f64], u: usize, v: usize) -> f64 {
        let d = self.dim;
        x[u * d..(u + 1) * d]
            .iter()
            .zip(&x[v * d..(v + 1) * d])
            .map(|(a, b)| a * b)
            .sum()
    }

    fn column_sums(&self, x: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.dim];
        for row in x.chunks(self.dim) {
            for (acc, &xi) in s.iter_mut().zip(row) {
                *acc += xi;
            }
        }
        s
    }

    /// Balanced log-likelihood: edges contribute `log(1 - e^{-z})`,
    /// non-edges `-z`, reweighted so both classes carry equal mass.
    fn objective(&self, x: &[f64]) -> f64 {
        let mut edge_term = 0.0;
        let mut edge_z = 0.0;
        for (u, v) in self.g.edges() {
            let z = self.dot(x, u, v).max(MIN_STRENGTH);
            edge_term += (-(-z).exp_m1()).ln();
            edge_z += z;
        }
        let s = self.column_sums(x);
        let squares: f64 = x.iter().map(|a| a * a).sum();
        let all_pairs_z = (s.iter().map(|a| a * a).sum::<f64>() - squares) / 2.0;
        edge_term - self.non_edge_weight * (all_pairs_z - edge_z)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let w = self.non_edge_weight;
        let s = self.column_sums(x);
        let mut grad = vec![0.0; x.len()];
        for u in 0..self.g.node_count() {
            for c in 0..d {
                grad[u * d + c] = -w * (s[c] - x[u * d + c]);
            }
        }
        for (u, v) in self.g.edges() {
            let z = self.dot(x, u, v).max(MIN_STRENGTH);
            let coef = 1.0 / z.exp_m1() + w;
            for c in 0..d {
                grad[u * d + c] += coef * x[v * d + c];
                grad[v * d + c] += coef * x[u * d + c];
            }
        }
        grad
    }
}

/// Fit Bernoulli–Poisson memberships by projected gradient ascent,
/// starting from the Louvain partition.
pub fn bp_overlap_fit(g: &Graph, opts: &BpOptions) -> Result<BpFit> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let start = louvain_run(g, opts.seed).labels;
    let louvain_count = start.iter().copied().max().map_or(0, |m| m + 1);
    let dim = opts.dimension.unwrap_or(louvain_count).max(1);
    let threshold = (-(1.0 - 1.0 / n as f64).ln()).sqrt();
    let m = g.edge_count();
    let pairs = n * (n - 1) / 2;
    let non_edges = pairs - m;
    let model = Model {
        g,
        dim,
        non_edge_weight: if non_edges == 0 {
            0.0
        } else {
            m as f64 / non_edges as f64
        },
    };

    let mut rng = seed::rng_for(opts.seed, "bp-overlap", &[]);
    let mut x: Vec<f64> = (0..n * dim).map(|_| rng.gen_range(0.0..0.1)).collect();
    for (v, &c) in start.iter().enumerate() {
        x[v * dim + c % dim] += 1.0;
    }
    if m == 0 {
        return Ok(BpFit {
            dimension: dim,
            memberships: x,
            objective_trace: Vec::new(),
            threshold,
        });
    }

    let mut value = model.objective(&x);
    if !value.is_finite() {
        return Err(Error::NonFinite("bp-overlap likelihood"));
    }
    let mut trace = vec![value];
    let mut step = 0.01;
    let mut candidate = vec![0.0; x.len()];
    for _ in 0..opts.iterations {
        let grad = model.gradient(&x);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("bp-overlap gradient"));
        }
        loop {
            for ((c, &xi), &gi) in candidate.iter_mut().zip(&x).zip(&grad) {
                *c = (xi + step * gi).max(0.0);
            }
            let next = model.objective(&candidate);
            if next.is_finite() && next >= value {
                std::mem::swap(&mut x, &mut candidate);
                value = next;
                trace.push(value);
                step *= 1.5;
                break;
            }
            step /= 2.0;
            if step < 1e-14 {
                break;
            }
        }
        if step < 1e-14 {
            break;
        }
    }
    Ok(BpFit {
        dimension: dim,
        memberships: x,
        objective_trace: trace,
        threshold,
    })
}

pub fn bp_overlap(g: &Graph, opts: &BpOptions) -> Result<CommunityCover> {
    Ok(bp_overlap_fit(g, opts)?.cover())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_never_decreases() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]);
        let fit = bp_overlap_fit(&g, &BpOptions::default()).unwrap();
        assert!(fit.objective_trace.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn single_edge_becomes_near_certain() {
        let g = Graph::from_edges(2, [(0, 1)]);
        let fit = bp_overlap_fit(
            &g,
            &BpOptions {
                dimension: Some(1),
                ..BpOptions::default()
            },
        )
        .unwrap();
        assert!(fit.edge_probability(0, 1) > 0.99);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]);
        let model = Model {
            g: &g,
            dim: 2,
            non_edge_weight: 0.7,
        };
        let mut rng = seed::rng_for(3, "t", &[]);
        let x: Vec<f64> = (0..10).map(|_| rng.gen_range(0.2..1.0)).collect();
        let grad = model.gradient(&x);
        for i in 0..x.len() {
            let h = 1e-6;
            let mut up = x.clone();
            up[i] += h;
            let mut down = x.clone();
            down[i] -= h;
            let numeric = (model.objective(&up) - model.objective(&down)) / (2.0 * h);
            assert!(
                (numeric - grad[i]).abs() < 1e-5,
                "{i}: {numeric} vs {}",
                grad[i]
            );
        }
    }

    #[test]
    fn two_disjoint_cliques_are_recovered() {
        let mut edges = Vec::new();
        for base in [0, 4] {
            for u in 0..4 {
                for v in u + 1..4 {
                    edges.push((base + u, base + v));
                }
            }
        }
        let g = Graph::from_edges(8, edges);
        let cover = bp_overlap(
            &g,
            &BpOptions {
                dimension: Some(2),
                ..BpOptions::default()
            },
        )
        .unwrap();
        assert_eq!(cover.communities(), &[vec![0, 1, 2, 3], vec![4, 5, 6, 7]]);
    }
}
