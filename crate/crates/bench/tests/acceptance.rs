//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tmp_bench::{generate_synthetic, run_bench, BenchConfig};
use tmp_core::distance::{stability_check, wasserstein};
use tmp_core::filtration::{clique_complex, sublevel_bifiltration, NodeIndex, SimplicialComplex, ThresholdGrid};
use tmp_core::format::{tensor_from_bytes, tensor_to_bytes};
use tmp_core::pipeline::{diagram_grid, fingerprint, DiagramGrid};
use tmp_core::vectorize::{
    betti_vector_fast, betti_vector_zigzag, landscape_vector, EvaluationGrid, ImageConfig, Vectorization,
};
use tmp_core::zigzag::oracle::{homology_dimension_oracle, interval_multiplicity_oracle};
use tmp_core::zigzag::{zigzag_persistence, UnionMode, ZigzagComplexSequence, ZigzagDiagram};
use tmp_core::{FilterFunction, NodeId, PipelineConfig, Snapshot, TemporalGraph};

fn random_temporal_graph(rng: &mut ChaCha8Rng, n: usize, t: usize, p: f64) -> TemporalGraph {
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
            Snapshot::from_edges(i + 1, nodes, edges).unwrap()
        })
        .collect();
    TemporalGraph::new(snaps).unwrap()
}

fn clique_snapshots(tg: &TemporalGraph) -> Vec<SimplicialComplex> {
    let index = NodeIndex::for_graph(tg);
    tg.snapshots().iter().map(|g| clique_complex(g, &index, 2)).collect()
}

/// Counts diagrams checked against per-position homology dimensions.
#[derive(Default)]
struct IdentityLedger {
    diagrams: usize,
    failures: Vec<String>,
}

impl IdentityLedger {
    fn check(&mut self, seq: &ZigzagComplexSequence, pd: &ZigzagDiagram, context: &str) {
        self.diagrams += 1;
        for s in 1..=seq.len() {
            let want = homology_dimension_oracle(seq.at(s), pd.dim());
            if pd.rank_at(s) != want {
                self.failures.push(format!("{context}: position {s} has {} bars, H = {want}", pd.rank_at(s)));
                return;
            }
        }
    }

    fn check_grid(&mut self, tg: &TemporalGraph, cfg: &PipelineConfig, grid: &ThresholdGrid, pds: &DiagramGrid, context: &str) {
        let bf = sublevel_bifiltration(tg, cfg.filter_kind(), grid, cfg.maxdim).unwrap();
        for j in 1..=bf.levels() {
            let seq = ZigzagComplexSequence::build(bf.slice(j), cfg.union_mode).unwrap();
            for &k in pds.dims() {
                self.check(&seq, pds.get(j, k).unwrap(), &format!("{context} slice {j} dim {k}"));
            }
        }
    }
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

struct Instance {
    seq: ZigzagComplexSequence,
    snapshots: Vec<SimplicialComplex>,
    diagrams: Vec<ZigzagDiagram>,
}

fn criterion_oracle(ledger: &mut IdentityLedger, instances: &mut Vec<Instance>) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cases = 250;
    let mut mismatches = Vec::new();
    for case in 0..cases {
        let n = rng.gen_range(2..=8);
        let t = rng.gen_range(1..=5);
        let p = rng.gen_range(0.15..0.9);
        let tg = random_temporal_graph(&mut rng, n, t, p);
        let snapshots = clique_snapshots(&tg);
        let seq = ZigzagComplexSequence::build(snapshots.clone(), UnionMode::default()).unwrap();
        let mut diagrams = Vec::new();
        for k in 0..2 {
            let fast = zigzag_persistence(&seq, k).unwrap();
            let slow = interval_multiplicity_oracle(&seq, k).unwrap();
            if fast != slow {
                mismatches.push(format!("case {case} dim {k}"));
            }
            ledger.check(&seq, &fast, &format!("oracle case {case} dim {k}"));
            diagrams.push(fast);
        }
        instances.push(Instance {
            seq,
            snapshots,
            diagrams,
        });
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        mismatches.is_empty() && secs < 60.0,
        format!("{cases} graphs, {} mismatches, {secs:.2} s", mismatches.len()),
    )
}

fn criterion_shapes(ledger: &mut IdentityLedger) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut bad = Vec::new();
    let draws = 25;
    for draw in 0..draws {
        let t = rng.gen_range(1..=6);
        let m = rng.gen_range(1..=8);
        let (k, l) = (rng.gen_range(1..=12), rng.gen_range(1..=12));
        let tg = random_temporal_graph(&mut rng, 6, t, 0.5);
        let mut thresholds: Vec<f64> = (0..m).map(|i| i as f64 + rng.gen_range(0.0..0.9)).collect();
        thresholds.sort_by(f64::total_cmp);
        let image = Vectorization::Image(ImageConfig {
            rows: k,
            cols: l,
            ..Default::default()
        });
        let kinds = [
            (Vectorization::Landscape { level: 1 }, vec![m, 4 * t - 3]),
            (Vectorization::Silhouette { power: 1.0 }, vec![m, 4 * t - 3]),
            (Vectorization::Entropy, vec![m, 4 * t - 3]),
            (Vectorization::BettiZigzag, vec![m, 2 * t - 1]),
            (Vectorization::BettiFast, vec![m, t]),
            (image, vec![m, k, l]),
        ];
        for (v, want) in kinds {
            let cfg = PipelineConfig {
                filter: FilterFunction::Degree,
                thresholds: Some(thresholds.clone()),
                vectorization: v.clone(),
                ..Default::default()
            };
            for tensor in fingerprint(&tg, &cfg).unwrap() {
                if tensor.shape() != want.as_slice() {
                    bad.push(format!("draw {draw} {}: {:?} != {want:?}", v.name(), tensor.shape()));
                }
            }
        }
        let cfg = PipelineConfig {
            thresholds: Some(thresholds),
            ..Default::default()
        };
        let grid = cfg.threshold_grid(&tg).unwrap();
        let pds = diagram_grid(&tg, &cfg, &grid).unwrap();
        ledger.check_grid(&tg, &cfg, &grid, &pds, &format!("shape draw {draw}"));
    }
    outcome(bad.is_empty(), format!("{draws} random (m, T, k, l) draws × 6 kinds, {} mismatches", bad.len()))
}

fn oracle_point_cost(a: (f64, f64), b: (f64, f64)) -> f64 {
    f64::max((a.0 - b.0).abs(), (a.1 - b.1).abs())
}

/// ∞-norm distance to the closest diagonal point `((b+d)/2, (b+d)/2)`.
fn oracle_diagonal_cost(a: (f64, f64)) -> f64 {
    let mid = (a.0 + a.1) / 2.0;
    oracle_point_cost(a, (mid, mid))
}

/// Minimum over every partial injection from `a` to `b`, unmatched points
/// going to the diagonal.
fn brute_force_wasserstein(a: &[(f64, f64)], b: &[(f64, f64)], p: f64) -> f64 {
    fn go(i: usize, a: &[(f64, f64)], b: &[(f64, f64)], used: &mut Vec<bool>, costs: &mut Vec<f64>, p: f64, best: &mut f64) {
        if i == a.len() {
            let mut all = costs.clone();
            all.extend((0..b.len()).filter(|&j| !used[j]).map(|j| oracle_diagonal_cost(b[j])));
            let value = if p.is_infinite() {
                all.into_iter().fold(0.0, f64::max)
            } else {
                all.into_iter().map(|c| c.powf(p)).sum::<f64>().powf(1.0 / p)
            };
            *best = best.min(value);
            return;
        }
        costs.push(oracle_diagonal_cost(a[i]));
        go(i + 1, a, b, used, costs, p, best);
        costs.pop();
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                costs.push(oracle_point_cost(a[i], b[j]));
                go(i + 1, a, b, used, costs, p, best);
                costs.pop();
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(0, a, b, &mut vec![false; b.len()], &mut Vec::new(), p, &mut best);
    best
}

fn random_diagram(rng: &mut ChaCha8Rng, max_points: usize) -> Vec<(f64, f64)> {
    let n = rng.gen_range(0..=max_points);
    (0..n)
        .map(|_| {
            let b: f64 = rng.gen_range(0.0..10.0);
            // some points sit on grid values to provoke ties
            let b = if rng.gen_bool(0.3) { b.round() } else { b };
            let len = if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..5.0) };
            (b, b + len)
        })
        .collect()
}

fn criterion_wasserstein() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pairs = 600;
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let a = random_diagram(&mut rng, 5);
        let b = random_diagram(&mut rng, 5);
        for p in [1.0, 2.0, f64::INFINITY] {
            let fast = wasserstein(&a, &b, p).unwrap();
            let slow = brute_force_wasserstein(&a, &b, p);
            worst = worst.max((fast - slow).abs());
        }
    }
    outcome(worst <= 1e-9, format!("{pairs} pairs × p ∈ {{1, 2, ∞}}, max |Δ| = {worst:.2e}"))
}

fn perturb(rng: &mut ChaCha8Rng, tg: &TemporalGraph, mode: usize) -> TemporalGraph {
    let t = rng.gen_range(0..tg.len());
    let snaps = tg
        .snapshots()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut edges: Vec<(NodeId, NodeId, f64)> = s
                .edges()
                .map(|(e, w)| {
                    let (a, b) = e.endpoints();
                    (a.clone(), b.clone(), w)
                })
                .collect();
            match mode {
                0 => {
                    for e in &mut edges {
                        e.2 = (e.2 + rng.gen_range(-0.3..0.3)).max(0.05);
                    }
                }
                1 if i == t => {
                    let nodes: Vec<&NodeId> = s.nodes().iter().collect();
                    let missing: Vec<(usize, usize)> = (0..nodes.len())
                        .flat_map(|a| (a + 1..nodes.len()).map(move |b| (a, b)))
                        .filter(|&(a, b)| !s.has_edge(nodes[a], nodes[b]))
                        .collect();
                    if !missing.is_empty() {
                        let (a, b) = missing[rng.gen_range(0..missing.len())];
                        edges.push((nodes[a].clone(), nodes[b].clone(), rng.gen_range(0.5..4.0)));
                    }
                }
                2 if i == t && !edges.is_empty() => {
                    let k = rng.gen_range(0..edges.len());
                    edges.remove(k);
                }
                _ => {}
            }
            Snapshot::from_edges(s.timestamp(), s.nodes().iter().cloned(), edges).unwrap()
        })
        .collect();
    TemporalGraph::new(snaps).unwrap()
}

fn criterion_stability(ledger: &mut IdentityLedger) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut tested = 0;
    let mut violations = 0;
    let mut max_ratio = 0.0f64;
    let v = Vectorization::Landscape { level: 1 };
    for round in 0..20 {
        let (n, t) = (rng.gen_range(5..=8), rng.gen_range(2..=4));
        let tg = random_temporal_graph(&mut rng, n, t, 0.5);
        let filter = [FilterFunction::EdgeWeight, FilterFunction::Degree, FilterFunction::PowerGeodesic][round % 3];
        let cfg = PipelineConfig {
            filter,
            resolution: 6,
            vectorization: v.clone(),
            ..Default::default()
        };
        let perturbations: Vec<TemporalGraph> = (0..3).map(|mode| perturb(&mut rng, &tg, mode)).collect();
        let report = stability_check(&tg, &perturbations, &cfg, &v, 1.0, f64::INFINITY).unwrap();
        tested += report.tested();
        violations += report.violations();
        max_ratio = max_ratio.max(report.max_ratio().unwrap_or(0.0));
        let grid = cfg.threshold_grid(&tg).unwrap();
        for (i, h) in std::iter::once(&tg).chain(&perturbations).enumerate() {
            let pds = diagram_grid(h, &cfg, &grid).unwrap();
            ledger.check_grid(h, &cfg, &grid, &pds, &format!("stability round {round} graph {i}"));
        }
    }

    let mut lipschitz_bad = 0;
    let diagram_pairs = 200;
    let grid = EvaluationGrid::new((0..=300).map(|i| i as f64 * 0.05).collect()).unwrap();
    for _ in 0..diagram_pairs {
        let a = random_diagram(&mut rng, 8);
        let b = random_diagram(&mut rng, 8);
        let w = wasserstein(&a, &b, f64::INFINITY).unwrap();
        for level in 1..=3 {
            let la = landscape_vector(&a, &grid, level).unwrap();
            let lb = landscape_vector(&b, &grid, level).unwrap();
            let sup = la.iter().zip(&lb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            if sup > w + 1e-12 {
                lipschitz_bad += 1;
            }
        }
    }
    outcome(
        tested >= 50 && violations == 0 && lipschitz_bad == 0,
        format!(
            "{tested} graph pairs, {violations} violations, max ratio {max_ratio:.3}; \
             {diagram_pairs} diagram pairs, {lipschitz_bad} landscape bound failures"
        ),
    )
}

fn criterion_fast_betti(instances: &[Instance]) -> Outcome {
    let mut bad = 0;
    for inst in instances {
        for pd in &inst.diagrams {
            let fast = betti_vector_fast(&inst.snapshots, pd.dim());
            let sampled: Vec<f64> = betti_vector_zigzag(pd).into_iter().step_by(2).collect();
            if fast != sampled || sampled.len() != inst.seq.times() {
                bad += 1;
            }
        }
    }
    outcome(bad == 0, format!("{} diagrams, {bad} mismatches", instances.len() * 2))
}

fn criterion_bench() -> Outcome {
    let start = Instant::now();
    match run_bench(&BenchConfig::default()) {
        Ok(r) => {
            let secs = start.elapsed().as_secs_f64();
            outcome(
                r.outputs_equal && r.speedup >= 2.0 && secs < 600.0,
                format!(
                    "N={} T={} m={}: pipeline {:.3} s, per-cell {:.3} s, speedup {:.1}×, equal {}, total {secs:.1} s",
                    r.nodes, r.times, r.levels, r.tmp_seconds, r.naive_seconds, r.speedup, r.outputs_equal
                ),
            )
        }
        Err(e) => outcome(false, format!("bench failed: {e}")),
    }
}

fn criterion_serialization() -> Outcome {
    let run = || -> Vec<Vec<u8>> {
        let tg = generate_synthetic(20, 5, 0.3, 17).unwrap();
        let mut out = Vec::new();
        for v in [
            Vectorization::Landscape { level: 1 },
            Vectorization::BettiFast,
            Vectorization::Image(ImageConfig {
                rows: 8,
                cols: 8,
                ..Default::default()
            }),
        ] {
            let cfg = PipelineConfig {
                resolution: 6,
                vectorization: v,
                ..Default::default()
            };
            for t in fingerprint(&tg, &cfg).unwrap() {
                out.push(tensor_to_bytes(&t).unwrap());
            }
        }
        out
    };
    let first = run();
    let second = run();
    let round_trips = first
        .iter()
        .all(|bytes| tensor_to_bytes(&tensor_from_bytes(bytes).unwrap()).unwrap() == *bytes);
    let dir = std::env::temp_dir().join(format!("tmp-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut files_equal = true;
    for (i, (a, b)) in first.iter().zip(&second).enumerate() {
        let (pa, pb) = (dir.join(format!("a{i}.tmpt")), dir.join(format!("b{i}.tmpt")));
        std::fs::write(&pa, a).unwrap();
        std::fs::write(&pb, b).unwrap();
        files_equal &= std::fs::read(&pa).unwrap() == std::fs::read(&pb).unwrap();
    }
    let _ = std::fs::remove_dir_all(&dir);
    outcome(
        round_trips && files_equal && first == second,
        format!("{} tensors: round trip {round_trips}, repeat runs identical {files_equal}", first.len()),
    )
}

fn main() {
    let mut ledger = IdentityLedger::default();
    let mut instances = Vec::new();
    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (1, "zigzag oracle equivalence", criterion_oracle(&mut ledger, &mut instances)),
        (3, "shape contracts", criterion_shapes(&mut ledger)),
        (4, "wasserstein vs brute force", criterion_wasserstein()),
        (5, "stability", criterion_stability(&mut ledger)),
        (6, "fast betti consistency", criterion_fast_betti(&instances)),
        (7, "benchmark property", criterion_bench()),
        (8, "serialization", criterion_serialization()),
    ];
    let identity = outcome(
        ledger.failures.is_empty(),
        format!("{} diagrams checked, {} failures", ledger.diagrams, ledger.failures.len()),
    );
    results.insert(1, (2, "pointwise dimension identity", identity));

    let mut failed = 0;
    for (n, name, o) in &results {
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {n} [{verdict}] {name}: {}", o.detail);
        failed += usize::from(!o.passed);
    }
    println!("criterion 9 [SKIP] forecasting metrics: excluded, needs the neural forecaster and full datasets");
    for f in ledger.failures.iter().take(5) {
        println!("  identity failure: {f}");
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
