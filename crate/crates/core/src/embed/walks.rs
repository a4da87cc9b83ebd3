use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{mix_seed, WalkConfig};
use crate::graph::MentionGraph;

/// Second-order biased walks. Walks are ordered by round, then start node;
/// each walk has its own RNG so the result does not depend on scheduling.
pub fn generate_walks(graph: &MentionGraph, cfg: &WalkConfig) -> Vec<Vec<usize>> {
    let n = graph.n_nodes;
    (0..cfg.walks_per_node * n)
        .into_par_iter()
        .map(|k| {
            let (round, start) = (k / n, k % n);
            let mut rng =
                ChaCha8Rng::seed_from_u64(mix_seed(&[cfg.seed, start as u64, round as u64]));
            walk(graph, start, cfg, &mut rng)
        })
        .collect()
}

fn walk(graph: &MentionGraph, start: usize, cfg: &WalkConfig, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut path = Vec::with_capacity(cfg.walk_length);
    path.push(start);
    let (inv_p, inv_q) = (1.0 / cfg.p, 1.0 / cfg.q);
    let mut weights = Vec::new();
    while path.len() < cfg.walk_length {
        let cur = *path.last().unwrap();
        let nbrs = graph.neighbors(cur);
        if nbrs.is_empty() {
            break;
        }
        let next = if path.len() == 1 {
            nbrs[rng.random_range(0..nbrs.len())]
        } else {
            let prev = path[path.len() - 2];
            weights.clear();
            weights.extend(nbrs.iter().map(|&x| {
                if x == prev {
                    inv_p
                } else if graph.has_edge(prev, x) {
                    1.0
                } else {
                    inv_q
                }
            }));
            let total: f64 = weights.iter().sum();
            let mut u = rng.random::<f64>() * total;
            let mut pick = nbrs.len() - 1;
            for (i, w) in weights.iter().enumerate() {
                if u < *w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            nbrs[pick]
        };
        path.push(next);
    }
    path
}

/// Node-id walks as sequences of node names, for skip-gram training.
pub fn walks_to_sequences(graph: &MentionGraph, walks: &[Vec<usize>]) -> Vec<Vec<String>> {
    walks
        .iter()
        .map(|w| w.iter().map(|&i| graph.node_names[i].clone()).collect())
        .collect()
}
