//! Synthetic evolving graphs and a timing harness that compares the
//! fingerprint pipeline with a per-cell recomputation baseline.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use tmp_core::filtration::{
    centrality::dijkstra, clique_complex, clique_complex_of_edges, node_filter_values, NodeIndex,
};
use tmp_core::graph::induced_subgraph;
use tmp_core::homology::betti_numbers;
use tmp_core::pipeline::fast_betti_grid;
use tmp_core::{
    FilterFunction, NodeId, Orientation, PipelineConfig, Result, Snapshot, TemporalGraph, ThresholdGrid, TmpError,
    Vectorization,
};

/// Node labels `n000, n001, ...`, zero-padded so label order is numeric.
pub fn node_label(i: usize, n: usize) -> String {
    let width = n.saturating_sub(1).to_string().len().max(3);
    format!("n{i:0width$}")
}

/// Edge probability giving a mean degree of about 5, capped at 1/2.
pub fn default_edge_probability(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        (5.0 / (n - 1) as f64).min(0.5)
    }
}

/// [`generate_synthetic_with`] at [`default_edge_probability`].
pub fn generate_synthetic(n: usize, times: usize, churn: f64, seed: u64) -> Result<TemporalGraph> {
    generate_synthetic_with(n, times, default_edge_probability(n), churn, seed)
}

/// Erdős–Rényi graph on `n` nodes with edge probability `p`; at every later
/// step each node pair is independently redrawn with probability `churn`.
/// Edge weights are uniform in `[1, 10)` and are redrawn with their pair.
pub fn generate_synthetic_with(n: usize, times: usize, p: f64, churn: f64, seed: u64) -> Result<TemporalGraph> {
    if n == 0 || times == 0 {
        return Err(TmpError::validation("need at least one node and one snapshot"));
    }
    if !(0.0..=1.0).contains(&churn) || !(0.0..=1.0).contains(&p) {
        return Err(TmpError::validation("edge probability and churn must lie in [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<NodeId> = (0..n).map(|i| NodeId::new(node_label(i, n))).collect();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let draw = |rng: &mut ChaCha8Rng| rng.gen_bool(p).then(|| rng.gen_range(1.0..10.0));
    let mut state: Vec<Option<f64>> = pairs.iter().map(|_| draw(&mut rng)).collect();
    let mut snapshots = Vec::with_capacity(times);
    for t in 1..=times {
        if t > 1 {
            for slot in state.iter_mut() {
                if rng.gen_bool(churn) {
                    *slot = draw(&mut rng);
                }
            }
        }
        let edges = pairs
            .iter()
            .zip(&state)
            .filter_map(|(&(a, b), w)| w.map(|w| (labels[a].clone(), labels[b].clone(), w)))
            .collect();
        snapshots.push(Snapshot::from_edges(t, labels.iter().cloned(), edges)?);
    }
    TemporalGraph::new(snapshots)
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchConfig {
    pub nodes: usize,
    pub times: usize,
    pub resolution: usize,
    pub edge_probability: f64,
    pub churn: f64,
    pub seed: u64,
    pub filter: FilterFunction,
    pub maxdim: usize,
    pub dims: Vec<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            nodes: 100,
            times: 50,
            resolution: 20,
            edge_probability: default_edge_probability(100),
            churn: 0.1,
            seed: 7,
            filter: FilterFunction::Degree,
            maxdim: 2,
            dims: vec![0, 1],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchResult {
    pub nodes: usize,
    pub times: usize,
    pub levels: usize,
    pub tmp_seconds: f64,
    pub naive_seconds: f64,
    pub speedup: f64,
    pub outputs_equal: bool,
}

impl BenchResult {
    pub const CSV_HEADER: &'static str = "nodes,times,levels,tmp_seconds,naive_seconds,speedup,outputs_equal";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6},{:.3},{}",
            self.nodes, self.times, self.levels, self.tmp_seconds, self.naive_seconds, self.speedup, self.outputs_equal
        )
    }
}

pub fn results_csv(results: &[BenchResult]) -> String {
    let mut out = String::from(BenchResult::CSV_HEADER);
    out.push('\n');
    for r in results {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

fn pipeline_config(cfg: &BenchConfig) -> PipelineConfig {
    PipelineConfig {
        filter: cfg.filter,
        orientation: Orientation::Sublevel,
        resolution: cfg.resolution,
        dims: cfg.dims.clone(),
        maxdim: cfg.maxdim,
        vectorization: Vectorization::BettiFast,
        ..Default::default()
    }
}

/// Complex of a single (level, time) cell built from scratch: filter
/// values, thresholding and clique expansion are all redone.
pub fn naive_cell(
    g: &Snapshot,
    index: &NodeIndex,
    function: FilterFunction,
    orientation: Orientation,
    grid: &ThresholdGrid,
    j: usize,
    maxdim: usize,
) -> Result<tmp_core::SimplicialComplex> {
    let m = grid.resolution();
    let (sign, threshold) = match orientation {
        Orientation::Sublevel => (1.0, grid.values()[j - 1]),
        Orientation::Superlevel => (-1.0, -grid.values()[m - j]),
    };
    let inside = |x: f64| sign * x <= threshold;
    Ok(match function {
        FilterFunction::EdgeWeight => {
            let kept: Vec<_> = g
                .edges()
                .filter(|&(_, w)| inside(w))
                .map(|(e, _)| {
                    let (a, b) = e.endpoints();
                    (a.clone(), b.clone(), 1.0)
                })
                .collect();
            clique_complex(&Snapshot::from_edges(g.timestamp(), g.nodes().iter().cloned(), kept)?, index, maxdim)
        }
        FilterFunction::PowerGeodesic => {
            let (labels, adj) = g.adjacency();
            let ids: Vec<u32> = labels.iter().map(|l| index.id(l).expect("indexed")).collect();
            let mut edges = Vec::new();
            for u in 0..adj.len() {
                for (v, d) in dijkstra(&adj, u).into_iter().enumerate().skip(u + 1) {
                    if d.is_some_and(inside) {
                        edges.push((ids[u], ids[v]));
                    }
                }
            }
            let mut vertices = ids.clone();
            vertices.sort_unstable();
            clique_complex_of_edges(&vertices, &edges, maxdim)
        }
        node => {
            let values = node_filter_values(g, node)?;
            let keep: BTreeSet<NodeId> = values
                .into_iter()
                .filter(|&(_, x)| inside(x))
                .map(|(n, _)| n)
                .collect();
            clique_complex(&induced_subgraph(g, &keep), index, maxdim)
        }
    })
}

/// Fast-Betti tensor data `out[d][j - 1][t - 1]` computed cell by cell.
pub fn naive_betti_grid(tg: &TemporalGraph, config: &PipelineConfig, grid: &ThresholdGrid) -> Result<Vec<Vec<Vec<f64>>>> {
    let index = NodeIndex::for_graph(tg);
    let (m, times) = (grid.resolution(), tg.len());
    let cells: Vec<Vec<usize>> = (0..m * times)
        .into_par_iter()
        .map(|c| {
            let (j, t) = (c / times + 1, c % times + 1);
            let complex = naive_cell(tg.at(t), &index, config.filter, config.orientation, grid, j, config.maxdim)?;
            Ok(betti_numbers(&complex))
        })
        .collect::<Result<_>>()?;
    Ok(config
        .dims
        .iter()
        .map(|&k| {
            (0..m)
                .map(|j| (0..times).map(|t| cells[j * times + t][k] as f64).collect())
                .collect()
        })
        .collect())
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, Duration)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed()))
}

/// Times both arms on one synthetic dataset. Both share the threshold grid
/// computation cost and the rayon pool. Fails if their outputs differ.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchResult> {
    let tg = generate_synthetic_with(cfg.nodes, cfg.times, cfg.edge_probability, cfg.churn, cfg.seed)?;
    let pipeline = pipeline_config(cfg);
    pipeline.validate()?;
    let (tmp, tmp_time) = timed(|| {
        let grid = pipeline.threshold_grid(&tg)?;
        fast_betti_grid(&tg, &pipeline, &grid)
    })?;
    let (naive, naive_time) = timed(|| {
        let grid = pipeline.threshold_grid(&tg)?;
        naive_betti_grid(&tg, &pipeline, &grid)
    })?;
    let outputs_equal = tmp == naive;
    if !outputs_equal {
        return Err(TmpError::Consistency(
            "pipeline and per-cell baseline disagree on Betti numbers".into(),
        ));
    }
    let (tmp_seconds, naive_seconds) = (tmp_time.as_secs_f64(), naive_time.as_secs_f64());
    Ok(BenchResult {
        nodes: cfg.nodes,
        times: cfg.times,
        levels: tmp.first().map_or(0, Vec::len),
        tmp_seconds,
        naive_seconds,
        speedup: naive_seconds / tmp_seconds.max(1e-12),
        outputs_equal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_sort_numerically() {
        assert_eq!(node_label(7, 100), "n007");
        assert_eq!(node_label(7, 5000), "n0007");
        assert!(node_label(9, 100) < node_label(10, 100));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(generate_synthetic(0, 3, 0.1, 1).is_err());
        assert!(generate_synthetic(3, 3, 1.5, 1).is_err());
        assert!(generate_synthetic_with(3, 3, -0.1, 0.5, 1).is_err());
    }

    #[test]
    fn naive_matches_pipeline_for_every_filter() {
        let tg = generate_synthetic_with(12, 4, 0.35, 0.3, 3).unwrap();
        for filter in [
            FilterFunction::Degree,
            FilterFunction::Closeness,
            FilterFunction::Betweenness,
            FilterFunction::EdgeWeight,
            FilterFunction::PowerGeodesic,
        ] {
            for orientation in [Orientation::Sublevel, Orientation::Superlevel] {
                let cfg = PipelineConfig {
                    filter,
                    orientation,
                    resolution: 6,
                    vectorization: Vectorization::BettiFast,
                    ..Default::default()
                };
                let grid = cfg.threshold_grid(&tg).unwrap();
                assert_eq!(
                    naive_betti_grid(&tg, &cfg, &grid).unwrap(),
                    fast_betti_grid(&tg, &cfg, &grid).unwrap(),
                    "{filter} {orientation:?}"
                );
            }
        }
    }
}
