#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tmp_core::filtration::{clique_complex, NodeIndex, SimplicialComplex};
use tmp_core::graph::{NodeId, Snapshot, TemporalGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random temporal graph on labels `v0..v{n-1}`; each snapshot keeps a random
/// node subset and each pair among them with probability `p`.
pub fn random_temporal_graph(rng: &mut ChaCha8Rng, n: usize, t: usize, p: f64) -> TemporalGraph {
    let snaps = (0..t)
        .map(|i| {
            let nodes: Vec<NodeId> = (0..n)
                .filter(|_| rng.gen_bool(0.85))
                .map(|v| NodeId::new(format!("v{v}")))
                .collect();
            let mut edges = Vec::new();
            for a in 0..nodes.len() {
                for b in a + 1..nodes.len() {
                    if rng.gen_bool(p) {
                        edges.push((nodes[a].clone(), nodes[b].clone(), rng.gen_range(0.5..4.0)));
                    }
                }
            }
            Snapshot::from_edges(i + 1, nodes.clone(), edges).unwrap()
        })
        .collect();
    TemporalGraph::new(snaps).unwrap()
}

pub fn clique_sequence(tg: &TemporalGraph, maxdim: usize) -> Vec<SimplicialComplex> {
    let index = NodeIndex::for_graph(tg);
    tg.snapshots().iter().map(|g| clique_complex(g, &index, maxdim)).collect()
}
