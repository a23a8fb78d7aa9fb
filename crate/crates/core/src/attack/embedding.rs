use super::{non_neighbors, AttackPlan, Strategy};
use crate::error::Result;
use crate::graph::{Graph, NodeId};
use crate::linalg::{lanczos, LanczosOptions, Spectrum};
use crate::seed;

/// Estimated embedding loss after adding each candidate edge `(target, u)`.
///
/// The loss is the spectral energy of the normalised adjacency left outside
/// its `dim` largest-magnitude eigenvalues. Total energy is recomputed
/// exactly; the kept eigenvalues move by first-order perturbation of
/// `A u = λ D u`. Returned in candidate id order.
pub fn embedding_scores(
    g: &Graph,
    target: NodeId,
    dim: usize,
    seed: u64,
) -> Result<Vec<(NodeId, f64)>> {
    g.check_node(target)?;
    let n = g.node_count();
    let candidates = non_neighbors(g, target);
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    let deg: Vec<f64> = (0..n).map(|v| g.degree(v) as f64).collect();
    let inv_sqrt: Vec<f64> = deg
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let opts = LanczosOptions {
        count: dim.clamp(1, n),
        which: Spectrum::LargestMagnitude,
        seed: seed::sub_seed(seed, "emb", &[target as u64]),
        ..LanczosOptions::default()
    };
    let pairs = lanczos(
        n,
        |x, y| {
            for (v, out) in y.iter_mut().enumerate() {
                *out = inv_sqrt[v]
                    * g.neighbors(v)
                        .iter()
                        .map(|&w| inv_sqrt[w] * x[w])
                        .sum::<f64>();
            }
        },
        &[],
        &opts,
    )?;
    // generalized eigenvectors u = D^{-1/2} v, only two coordinates needed
    let coord = |k: usize, v: NodeId| pairs.vectors[k][v] * inv_sqrt[v];

    // ‖M‖_F² = Σ_edges 2 / (d_i d_j); S_v = Σ_{w ∼ v} 1 / d_w
    let total: f64 = g.edges().map(|(i, j)| 2.0 / (deg[i] * deg[j])).sum();
    let inv_nbr_sum = |v: NodeId| g.neighbors(v).iter().map(|&w| 1.0 / deg[w]).sum::<f64>();
    let s_t = inv_nbr_sum(target);
    let d_t = deg[target];
    let t_part = |d: f64| if d > 0.0 { 2.0 * s_t / d } else { 0.0 };

    Ok(candidates
        .into_iter()
        .map(|u| {
            let d_u = deg[u];
            let s_u = inv_nbr_sum(u);
            let u_part = |d: f64| if d > 0.0 { 2.0 * s_u / d } else { 0.0 };
            let new_total = total - t_part(d_t) - u_part(d_u)
                + t_part(d_t + 1.0)
                + u_part(d_u + 1.0)
                + 2.0 / ((d_t + 1.0) * (d_u + 1.0));
            let kept: f64 = pairs
                .values
                .iter()
                .enumerate()
                .map(|(k, &lambda)| {
                    let (a, b) = (coord(k, target), coord(k, u));
                    let moved = lambda + 2.0 * a * b - lambda * (a * a + b * b);
                    moved * moved
                })
                .sum();
            (u, new_total - kept)
        })
        .collect())
}

/// Link the target to the nodes whose edge most degrades a low-rank
/// spectral embedding.
pub fn embedding_attack(
    g: &Graph,
    target: NodeId,
    budget: usize,
    dim: usize,
    seed: u64,
) -> Result<AttackPlan> {
    let mut scored = embedding_scores(g, target, dim, seed)?;
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(AttackPlan::from_nodes(
        Strategy::Embedding,
        target,
        scored.into_iter().map(|(u, _)| u),
        budget,
        seed,
    ))
}
