use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use tmp_bench::{default_edge_probability, results_csv, run_bench, BenchConfig};
use tmp_core::distance::{tmp_distance, zpd_matching_distance};
use tmp_core::format::{
    is_tensor_file, read_diagrams, tensor_from_bytes, tensor_sidecar, write_diagrams, write_tensor,
};
use tmp_core::graph::{parse_temporal_edge_list, EdgeListSchema};
use tmp_core::pipeline::{diagram_grid, run, windows_of, WindowSpec};
use tmp_core::vectorize::{ImageConfig, SliceMetric};
use tmp_core::zigzag::UnionMode;
use tmp_core::{Orientation, PipelineConfig, Result, TemporalGraph, TmpError, Vectorization};

use crate::{plot, Command, MetricArg, OrientationArg, PipelineArgs, SchemaArgs, UnionArg, VectorizationArg};

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Ingest { input, schema } => ingest(&input, &schema),
        Command::Fingerprint {
            input,
            schema,
            pipeline,
        } => fingerprint(&input, &schema, &pipeline),
        Command::Pd {
            input,
            schema,
            pipeline,
        } => pd(&input, &schema, &pipeline),
        Command::Distance { a, b, metric, p } => distance(&a, &b, metric, p),
        Command::Plot { input, out } => plot_file(&input, &out),
        Command::Bench {
            nodes,
            times,
            resolution,
            churn,
            edge_probability,
            seed,
            filter,
            sweep,
        } => {
            let cfg = BenchConfig {
                nodes,
                times,
                resolution,
                churn,
                seed,
                edge_probability: edge_probability.unwrap_or_else(|| default_edge_probability(nodes)),
                filter: filter.parse()?,
                ..Default::default()
            };
            bench(cfg, sweep)
        }
    }
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| TmpError::validation(format!("cannot read {}: {e}", path.display())))
}

fn load_graph(path: &Path, args: &SchemaArgs) -> Result<TemporalGraph> {
    let schema = EdgeListSchema {
        time: args.time_col.clone(),
        source: args.source_col.clone(),
        target: args.target_col.clone(),
        weight: (!args.unweighted).then(|| args.weight_col.clone()),
    };
    let tg = parse_temporal_edge_list(read_input(path)?.as_slice(), &schema)?;
    Ok(match args.top_nodes {
        Some(n) => tg.restrict_to_most_active(n),
        None => tg,
    })
}

fn ingest(path: &Path, args: &SchemaArgs) -> Result<()> {
    let tg = load_graph(path, args)?;
    let nodes: Vec<String> = tg.node_universe().iter().map(|n| n.to_string()).collect();
    println!("T={}, nodes={{{}}}", tg.len(), nodes.join(","));
    let mut weights = Vec::new();
    for s in tg.snapshots() {
        let total: f64 = s.edges().map(|(_, w)| w).sum();
        println!(
            "t={} nodes={} edges={} total_weight={total}",
            s.timestamp(),
            s.node_count(),
            s.edge_count()
        );
        weights.extend(s.edges().map(|(_, w)| w));
    }
    if weights.is_empty() {
        println!("weights: count=0");
    } else {
        let min = weights.iter().copied().fold(f64::INFINITY, f64::min);
        let max = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = weights.iter().sum::<f64>() / weights.len() as f64;
        println!("weights: count={} min={min} max={max} mean={mean}", weights.len());
    }
    Ok(())
}

fn fresh_vectorization(kind: VectorizationArg) -> Vectorization {
    match kind {
        VectorizationArg::Landscape => Vectorization::Landscape { level: 1 },
        VectorizationArg::Silhouette => Vectorization::Silhouette { power: 1.0 },
        VectorizationArg::BettiZigzag => Vectorization::BettiZigzag,
        VectorizationArg::BettiFast => Vectorization::BettiFast,
        VectorizationArg::Entropy => Vectorization::Entropy,
        VectorizationArg::Image => Vectorization::Image(ImageConfig::default()),
    }
}

fn only_for(flag: &str, kind: &str) -> TmpError {
    TmpError::validation(format!("--{flag} applies only to the {kind} vectorization"))
}

/// Config file (or defaults) with command-line overrides applied.
fn pipeline_config(args: &PipelineArgs) -> Result<PipelineConfig> {
    let mut cfg = match &args.config {
        Some(path) => serde_json::from_slice(&read_input(path)?)?,
        None => PipelineConfig::default(),
    };
    if let Some(f) = &args.filter {
        cfg.filter = f.parse()?;
    }
    if let Some(o) = args.orientation {
        cfg.orientation = match o {
            OrientationArg::Sublevel => Orientation::Sublevel,
            OrientationArg::Superlevel => Orientation::Superlevel,
        };
    }
    if let Some(m) = args.resolution {
        cfg.resolution = m;
    }
    if let Some(t) = &args.thresholds {
        cfg.thresholds = Some(t.clone());
    }
    if let Some(d) = &args.dims {
        cfg.dims = d.clone();
    }
    if let Some(d) = args.maxdim {
        cfg.maxdim = d;
    }
    if let Some(kind) = args.vectorization {
        cfg.vectorization = fresh_vectorization(kind);
    }
    if let Some(level) = args.level {
        match &mut cfg.vectorization {
            Vectorization::Landscape { level: l } => *l = level,
            _ => return Err(only_for("level", "landscape")),
        }
    }
    if let Some(power) = args.power {
        match &mut cfg.vectorization {
            Vectorization::Silhouette { power: p } => *p = power,
            _ => return Err(only_for("power", "silhouette")),
        }
    }
    for (flag, value) in [("rows", args.rows), ("cols", args.cols)] {
        if let Some(n) = value {
            match &mut cfg.vectorization {
                Vectorization::Image(img) if flag == "rows" => img.rows = n,
                Vectorization::Image(img) => img.cols = n,
                _ => return Err(only_for(flag, "image")),
            }
        }
    }
    if let Some(sigma) = args.sigma {
        match &mut cfg.vectorization {
            Vectorization::Image(img) => img.sigma = Some(sigma),
            _ => return Err(only_for("sigma", "image")),
        }
    }
    match (args.window, args.stride, cfg.window.as_mut()) {
        (Some(width), stride, _) => {
            cfg.window = Some(WindowSpec {
                width,
                stride: stride.unwrap_or(1),
            })
        }
        (None, Some(stride), Some(w)) => w.stride = stride,
        (None, Some(_), None) => return Err(TmpError::validation("--stride needs a window width")),
        (None, None, _) => {}
    }
    if let Some(u) = args.union_mode {
        cfg.union_mode = match u {
            UnionArg::Clique => UnionMode::CliqueOfUnionGraph,
            UnionArg::Simplex => UnionMode::SimplexUnion,
        };
    }
    if let Some(out) = &args.out {
        cfg.output = Some(out.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn fingerprint(input: &Path, schema: &SchemaArgs, args: &PipelineArgs) -> Result<()> {
    let tg = load_graph(input, schema)?;
    let cfg = pipeline_config(args)?;
    let dir = cfg.output.clone().unwrap_or_else(|| PathBuf::from("."));
    let output = run(&tg, &cfg)?;
    fs::create_dir_all(&dir)?;
    for w in &output.windows {
        for t in &w.tensors {
            let k = t.meta().homology_dim.unwrap_or(0);
            let stem = match cfg.window {
                Some(_) => format!("fingerprint-w{:04}-h{k}", w.start),
                None => format!("fingerprint-h{k}"),
            };
            let path = dir.join(format!("{stem}.tmpt"));
            let mut f = create(&path)?;
            write_tensor(t, &mut f)?;
            f.flush()?;
            fs::write(dir.join(format!("{stem}.json")), tensor_sidecar(t))?;
            println!("{} shape={:?}", path.display(), t.shape());
        }
    }
    Ok(())
}

fn pd(input: &Path, schema: &SchemaArgs, args: &PipelineArgs) -> Result<()> {
    let tg = load_graph(input, schema)?;
    let cfg = pipeline_config(args)?;
    let grid = cfg.threshold_grid(&tg)?;
    let parts = windows_of(&tg, &cfg)?;
    match (&cfg.output, cfg.window) {
        (None, None) => {
            let pds = diagram_grid(&tg, &cfg, &grid)?;
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_diagrams(&pds, &mut lock)?;
            lock.flush()?;
        }
        (Some(path), None) => {
            let pds = diagram_grid(&tg, &cfg, &grid)?;
            let mut f = create(path)?;
            write_diagrams(&pds, &mut f)?;
            f.flush()?;
        }
        (None, Some(_)) => {
            return Err(TmpError::validation("windowed diagram dumps need --out DIRECTORY"));
        }
        (Some(dir), Some(_)) => {
            fs::create_dir_all(dir)?;
            for (start, g) in parts {
                let pds = diagram_grid(&g, &cfg, &grid)?;
                let path = dir.join(format!("diagrams-w{start:04}.csv"));
                let mut f = create(&path)?;
                write_diagrams(&pds, &mut f)?;
                f.flush()?;
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn distance(a: &Path, b: &Path, metric: Option<MetricArg>, p: f64) -> Result<()> {
    let (bytes_a, bytes_b) = (read_input(a)?, read_input(b)?);
    let d = match (is_tensor_file(&bytes_a), is_tensor_file(&bytes_b)) {
        (true, true) => {
            let metric = metric.map(|m| match m {
                MetricArg::Sup => SliceMetric::Sup,
                MetricArg::L2 => SliceMetric::L2,
            });
            tmp_distance(&tensor_from_bytes(&bytes_a)?, &tensor_from_bytes(&bytes_b)?, metric)?
        }
        (false, false) => {
            let (ga, gb) = (read_diagrams(bytes_a.as_slice())?, read_diagrams(bytes_b.as_slice())?);
            if ga.dims() != gb.dims() {
                return Err(TmpError::contract(format!(
                    "diagram files cover dims {:?} and {:?}",
                    ga.dims(),
                    gb.dims()
                )));
            }
            let mut d = 0.0f64;
            for (ca, cb) in ga.by_dim().iter().zip(gb.by_dim()) {
                d = d.max(zpd_matching_distance(ca, cb, p)?);
            }
            d
        }
        _ => return Err(TmpError::validation("cannot compare a tensor file with a diagram file")),
    };
    println!("{d}");
    Ok(())
}

fn plot_file(input: &Path, out: &Path) -> Result<()> {
    let bytes = read_input(input)?;
    let (csv, svg) = if is_tensor_file(&bytes) {
        plot::tensor(&tensor_from_bytes(&bytes)?)
    } else {
        plot::diagrams(&read_diagrams(bytes.as_slice())?)
    };
    let with_ext = |ext: &str| {
        let mut name = out.as_os_str().to_owned();
        name.push(ext);
        PathBuf::from(name)
    };
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(with_ext(".csv"), csv)?;
    fs::write(with_ext(".svg"), svg)?;
    Ok(())
}

fn bench(cfg: BenchConfig, sweep: bool) -> Result<()> {
    let mut configs = Vec::new();
    if sweep {
        configs.push(BenchConfig {
            nodes: (cfg.nodes / 2).max(1),
            ..cfg.clone()
        });
        configs.push(BenchConfig {
            times: (cfg.times / 2).max(1),
            ..cfg.clone()
        });
        configs.push(BenchConfig {
            resolution: (cfg.resolution / 2).max(1),
            ..cfg.clone()
        });
    }
    configs.push(cfg);
    let results = configs.iter().map(run_bench).collect::<Result<Vec<_>>>()?;
    print!("{}", results_csv(&results));
    Ok(())
}
