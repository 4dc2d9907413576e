//! End-to-end computation: temporal graph, bifiltration, zigzag diagrams per
//! slice, then one tensor per homology dimension.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TmpError};
use crate::filtration::{
    grid_for, sublevel_bifiltration, FilterFunction, FilterKind, Orientation, ThresholdGrid, DEFAULT_MAXDIM,
    DEFAULT_RESOLUTION, MAX_MAXDIM,
};
use crate::graph::{window, TemporalGraph};
use crate::homology::level_betti_curves;
use crate::vectorize::{assemble_tmp, ImageBounds, TensorMeta, TmpTensor, Vectorization};
use crate::zigzag::{zigzag_diagrams, UnionMode, ZigzagComplexSequence, ZigzagDiagram};

/// Environment variable holding the worker count.
pub const THREADS_ENV: &str = "TMP_NUM_THREADS";

/// Sizes the global rayon pool from [`THREADS_ENV`] when it is set; returns
/// the resulting worker count. Only the first call in a process has effect.
pub fn init_thread_pool_from_env() -> Result<usize> {
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| TmpError::validation(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
        // a pool built earlier in the process wins; that is fine
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(rayon::current_num_threads())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub width: usize,
    pub stride: usize,
}

/// Everything needed to turn a temporal graph into fingerprints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub filter: FilterFunction,
    pub orientation: Orientation,
    /// Requested number of quantile thresholds.
    pub resolution: usize,
    /// Explicit thresholds; overrides `resolution`.
    pub thresholds: Option<Vec<f64>>,
    pub dims: Vec<usize>,
    pub maxdim: usize,
    pub vectorization: Vectorization,
    pub window: Option<WindowSpec>,
    pub union_mode: UnionMode,
    /// Output directory for tensor and diagram files.
    pub output: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            filter: FilterFunction::Degree,
            orientation: Orientation::Sublevel,
            resolution: DEFAULT_RESOLUTION,
            thresholds: None,
            dims: vec![0, 1],
            maxdim: DEFAULT_MAXDIM,
            vectorization: Vectorization::Landscape { level: 1 },
            window: None,
            union_mode: UnionMode::default(),
            output: None,
        }
    }
}

impl PipelineConfig {
    pub fn filter_kind(&self) -> FilterKind {
        FilterKind {
            function: self.filter,
            orientation: self.orientation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_MAXDIM).contains(&self.maxdim) {
            return Err(TmpError::validation(format!("maxdim must be in 1..={MAX_MAXDIM}")));
        }
        if self.dims.is_empty() {
            return Err(TmpError::validation("no homology dimensions requested"));
        }
        if let Some(&k) = self.dims.iter().find(|&&k| k >= self.maxdim) {
            return Err(TmpError::validation(format!(
                "homology dimension {k} needs maxdim > {k}, got {}",
                self.maxdim
            )));
        }
        if self.thresholds.is_none() && self.resolution == 0 {
            return Err(TmpError::validation("resolution must be at least 1"));
        }
        if let Some(w) = self.window {
            if w.width == 0 || w.stride == 0 {
                return Err(TmpError::validation("window width and stride must be at least 1"));
            }
        }
        match &self.vectorization {
            Vectorization::Landscape { level } if *level == 0 => {
                Err(TmpError::validation("landscape level starts at 1"))
            }
            Vectorization::Silhouette { power } if !(*power >= 0.0 && power.is_finite()) => {
                Err(TmpError::validation("silhouette power must be finite and nonnegative"))
            }
            Vectorization::Image(cfg) if cfg.rows == 0 || cfg.cols == 0 => {
                Err(TmpError::validation("image needs at least one pixel"))
            }
            Vectorization::Image(cfg) if cfg.sigma.is_some_and(|s| !(s > 0.0 && s.is_finite())) => {
                Err(TmpError::validation("image sigma must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Thresholds for `tg`: the explicit list if given, else quantiles of
    /// the filter values of the whole graph.
    pub fn threshold_grid(&self, tg: &TemporalGraph) -> Result<ThresholdGrid> {
        match &self.thresholds {
            Some(values) => ThresholdGrid::explicit(values.clone()),
            None => grid_for(tg, self.filter, self.resolution),
        }
    }
}

/// Zigzag diagrams of every slice for several homology dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagramGrid {
    dims: Vec<usize>,
    times: usize,
    thresholds: Vec<f64>,
    // cells[d][j - 1]
    cells: Vec<Vec<ZigzagDiagram>>,
}

impl DiagramGrid {
    /// `cells[d][j - 1]` is the diagram of dimension `dims[d]` at level `j`.
    pub fn new(dims: Vec<usize>, times: usize, thresholds: Vec<f64>, cells: Vec<Vec<ZigzagDiagram>>) -> Result<Self> {
        if cells.len() != dims.len() {
            return Err(TmpError::Shape("one diagram column per dimension expected".into()));
        }
        for (d, column) in cells.iter().enumerate() {
            if column.len() != thresholds.len() {
                return Err(TmpError::Shape(format!(
                    "dimension {} has {} slices, expected {}",
                    dims[d],
                    column.len(),
                    thresholds.len()
                )));
            }
            if column.iter().any(|pd| pd.dim() != dims[d] || pd.times() != times) {
                return Err(TmpError::Shape("diagram dimension or length mismatch".into()));
            }
        }
        Ok(DiagramGrid {
            dims,
            times,
            thresholds,
            cells,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn times(&self) -> usize {
        self.times
    }

    pub fn levels(&self) -> usize {
        self.thresholds.len()
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Per dimension, the diagrams of levels `1..=m`.
    pub fn by_dim(&self) -> &[Vec<ZigzagDiagram>] {
        &self.cells
    }

    /// Diagram of homology dimension `k` at level `j` (1-based).
    pub fn get(&self, j: usize, k: usize) -> Option<&ZigzagDiagram> {
        let d = self.dims.iter().position(|&x| x == k)?;
        self.cells[d].get(j.checked_sub(1)?)
    }
}

/// Zigzag diagrams of every slice of `tg` over `grid`.
pub fn diagram_grid(tg: &TemporalGraph, config: &PipelineConfig, grid: &ThresholdGrid) -> Result<DiagramGrid> {
    config.validate()?;
    let bf = sublevel_bifiltration(tg, config.filter_kind(), grid, config.maxdim)?;
    let per_level = (1..=bf.levels())
        .into_par_iter()
        .map(|j| {
            let seq = ZigzagComplexSequence::build(bf.slice(j), config.union_mode)?;
            zigzag_diagrams(&seq, &config.dims)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cells = vec![Vec::with_capacity(per_level.len()); config.dims.len()];
    for diagrams in per_level {
        for (d, pd) in diagrams.into_iter().enumerate() {
            cells[d].push(pd);
        }
    }
    DiagramGrid::new(config.dims.clone(), tg.len(), grid.values().to_vec(), cells)
}

/// Betti numbers of every cell, `out[d][j - 1][t - 1]`, without zigzag
/// persistence: one persistence reduction per snapshot covers all levels.
pub fn fast_betti_grid(tg: &TemporalGraph, config: &PipelineConfig, grid: &ThresholdGrid) -> Result<Vec<Vec<Vec<f64>>>> {
    config.validate()?;
    let bf = sublevel_bifiltration(tg, config.filter_kind(), grid, config.maxdim)?;
    let m = bf.levels();
    let curves: Vec<Vec<Vec<usize>>> = (1..=bf.times())
        .into_par_iter()
        .map(|t| level_betti_curves(bf.column(t), m))
        .collect();
    Ok(config
        .dims
        .iter()
        .map(|&k| {
            (0..m)
                .map(|j| curves.iter().map(|c| c[k][j] as f64).collect())
                .collect()
        })
        .collect())
}

fn tensor_meta(config: &PipelineConfig, vectorization: &Vectorization, times: usize, k: usize, grid: &ThresholdGrid) -> TensorMeta {
    let mut meta = TensorMeta::new(vectorization.clone(), times);
    meta.homology_dim = Some(k);
    meta.thresholds = grid.values().to_vec();
    let p = &mut meta.provenance;
    p.insert("filter".into(), serde_json::to_value(config.filter_kind()).unwrap());
    p.insert("grid-rule".into(), serde_json::to_value(grid.rule()).unwrap());
    p.insert("maxdim".into(), config.maxdim.into());
    p.insert("union-mode".into(), serde_json::to_value(config.union_mode).unwrap());
    meta
}

/// Tensors of one temporal graph, one per requested dimension.
/// `vectorization` must already have its image bounds resolved if it is an
/// image; see [`run`] for the dataset-wide resolution.
pub fn fingerprint_with(
    tg: &TemporalGraph,
    config: &PipelineConfig,
    vectorization: &Vectorization,
    grid: &ThresholdGrid,
) -> Result<Vec<TmpTensor>> {
    let times = tg.len();
    let shape = vectorization.slice_shape(times);
    let per_dim: Vec<Vec<Vec<f64>>> = match vectorization {
        Vectorization::BettiFast => fast_betti_grid(tg, config, grid)?,
        v => {
            let pds = diagram_grid(tg, config, grid)?;
            pds.by_dim()
                .iter()
                .map(|cells| cells.par_iter().map(|pd| v.apply(pd)).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?
        }
    };
    per_dim
        .into_iter()
        .zip(&config.dims)
        .map(|(slices, &k)| assemble_tmp(slices, &shape, tensor_meta(config, vectorization, times, k, grid)))
        .collect()
}

/// Tensors of one temporal graph with the grid computed from it; any window
/// setting is ignored.
pub fn fingerprint(tg: &TemporalGraph, config: &PipelineConfig) -> Result<Vec<TmpTensor>> {
    let whole = PipelineConfig {
        window: None,
        ..config.clone()
    };
    Ok(run(tg, &whole)?.windows.remove(0).tensors)
}

#[derive(Debug, Clone)]
pub struct WindowOutput {
    /// First snapshot of the window in the full sequence, 1-based.
    pub start: usize,
    pub width: usize,
    pub tensors: Vec<TmpTensor>,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub grid: ThresholdGrid,
    /// Vectorization with every default resolved.
    pub vectorization: Vectorization,
    pub windows: Vec<WindowOutput>,
}

/// Splits `tg` into the configured windows (or keeps it whole).
pub fn windows_of(tg: &TemporalGraph, config: &PipelineConfig) -> Result<Vec<(usize, TemporalGraph)>> {
    Ok(match config.window {
        Some(w) => window(tg, w.width, w.stride)?
            .into_iter()
            .enumerate()
            .map(|(i, g)| (1 + i * w.stride, g))
            .collect(),
        None => vec![(1, tg.clone())],
    })
}

/// Full pipeline. The threshold grid comes from the whole dataset so that
/// windows share levels; image bounds default to the box around every
/// diagram of every window, so that pixels align across slices and windows.
pub fn run(tg: &TemporalGraph, config: &PipelineConfig) -> Result<PipelineOutput> {
    config.validate()?;
    let grid = config.threshold_grid(tg)?;
    let parts = windows_of(tg, config)?;
    let vectorization = match &config.vectorization {
        Vectorization::Image(img) => {
            let bounds = match img.bounds {
                Some(b) => b,
                None => {
                    let mut pairs = Vec::new();
                    for (_, g) in &parts {
                        let pds = diagram_grid(g, config, &grid)?;
                        pairs.extend(pds.by_dim().iter().flatten().map(|pd| pd.time_pairs()));
                    }
                    let times = parts[0].1.len();
                    ImageBounds::covering(pairs.iter().map(Vec::as_slice), ImageBounds::time_axis(times))
                }
            };
            let width = (bounds.birth.1 - bounds.birth.0) / img.cols as f64;
            Vectorization::Image(crate::vectorize::ImageConfig {
                bounds: Some(bounds),
                sigma: Some(img.sigma.unwrap_or(width)),
                ..*img
            })
        }
        v => v.clone(),
    };
    let windows = parts
        .iter()
        .map(|(start, g)| {
            let mut tensors = fingerprint_with(g, config, &vectorization, &grid)?;
            if config.window.is_some() {
                for t in &mut tensors {
                    t.meta_mut()
                        .provenance
                        .insert("window".into(), serde_json::json!({ "start": start, "width": g.len() }));
                }
            }
            Ok(WindowOutput {
                start: *start,
                width: g.len(),
                tensors,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PipelineOutput {
        grid,
        vectorization,
        windows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Snapshot;

    fn square_then_triangle() -> TemporalGraph {
        TemporalGraph::new(vec![
            Snapshot::unweighted(1, &["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d"), ("a", "d")]),
            Snapshot::unweighted(2, &["a", "b", "c"], &[("a", "b"), ("b", "c"), ("a", "c")]),
            Snapshot::unweighted(3, &["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d"), ("a", "d")]),
        ])
        .unwrap()
    }

    #[test]
    fn default_config_round_trips() {
        let cfg = PipelineConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<PipelineConfig>(&text).unwrap(), cfg);
        let partial: PipelineConfig = serde_json::from_str(r#"{"resolution": 7}"#).unwrap();
        assert_eq!(partial.resolution, 7);
        assert_eq!(partial.dims, vec![0, 1]);
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"resolutoin": 7}"#).is_err());
    }

    #[test]
    fn validation() {
        let bad = PipelineConfig {
            dims: vec![2],
            ..Default::default()
        };
        assert!(bad.validate().unwrap_err().is_validation());
        let bad = PipelineConfig {
            vectorization: Vectorization::Landscape { level: 0 },
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn shapes_per_kind() {
        let tg = square_then_triangle();
        let kinds = [
            (Vectorization::Landscape { level: 1 }, vec![9]),
            (Vectorization::Silhouette { power: 1.0 }, vec![9]),
            (Vectorization::Entropy, vec![9]),
            (Vectorization::BettiZigzag, vec![5]),
            (Vectorization::BettiFast, vec![3]),
            (
                Vectorization::Image(crate::vectorize::ImageConfig {
                    rows: 4,
                    cols: 6,
                    ..Default::default()
                }),
                vec![4, 6],
            ),
        ];
        for (v, slice) in kinds {
            let cfg = PipelineConfig {
                vectorization: v,
                resolution: 3,
                ..Default::default()
            };
            let tensors = fingerprint(&tg, &cfg).unwrap();
            assert_eq!(tensors.len(), 2);
            let m = tensors[0].levels();
            let mut expected = vec![m];
            expected.extend(slice);
            assert_eq!(tensors[0].shape(), expected.as_slice());
        }
    }

    #[test]
    fn fast_betti_agrees_with_zigzag() {
        let tg = square_then_triangle();
        let cfg = PipelineConfig {
            resolution: 3,
            ..Default::default()
        };
        let grid = cfg.threshold_grid(&tg).unwrap();
        let fast = fast_betti_grid(&tg, &cfg, &grid).unwrap();
        let pds = diagram_grid(&tg, &cfg, &grid).unwrap();
        for (d, cells) in pds.by_dim().iter().enumerate() {
            for (j, pd) in cells.iter().enumerate() {
                let zz: Vec<f64> = crate::vectorize::betti_vector_zigzag(pd).into_iter().step_by(2).collect();
                assert_eq!(zz, fast[d][j]);
            }
        }
        // the top level holds the whole graph: a loop, then none, then a loop
        assert_eq!(fast[1][grid.resolution() - 1], vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn windows_share_the_grid() {
        let tg = square_then_triangle();
        let cfg = PipelineConfig {
            resolution: 3,
            window: Some(WindowSpec { width: 2, stride: 1 }),
            ..Default::default()
        };
        let out = run(&tg, &cfg).unwrap();
        assert_eq!(out.windows.len(), 2);
        assert_eq!(out.windows[1].start, 2);
        for w in &out.windows {
            assert_eq!(w.tensors[0].meta().thresholds, out.grid.values());
            assert_eq!(w.tensors[0].shape()[1], 5);
        }
    }
}
