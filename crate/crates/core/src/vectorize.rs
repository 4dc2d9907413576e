//! Fixed-size summaries of persistence diagrams and their assembly into
//! level-by-feature tensors.
//!
//! Diagram-based summaries take `(birth, death)` pairs on the real axis; for
//! zigzag diagrams these are the times `1, 1.5, ..., T`
//! (see [`ZigzagDiagram::time_pairs`]). Intervals reaching the last position
//! end at `T`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TmpError};
use crate::filtration::SimplicialComplex;
use crate::homology::betti_numbers;
use crate::zigzag::ZigzagDiagram;

pub const DEFAULT_IMAGE_RESOLUTION: usize = 50;

/// Strictly increasing evaluation points.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationGrid {
    points: Vec<f64>,
}

impl EvaluationGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TmpError::validation("evaluation grid must be nonempty and strictly increasing"));
        }
        Ok(EvaluationGrid { points })
    }

    /// Thresholds plus the midpoint of every consecutive pair: `2q - 1` points.
    pub fn with_midpoints(thresholds: &[f64]) -> Result<Self> {
        let mut points = Vec::with_capacity(2 * thresholds.len());
        for (i, &x) in thresholds.iter().enumerate() {
            if i > 0 {
                points.push((thresholds[i - 1] + x) / 2.0);
            }
            points.push(x);
        }
        EvaluationGrid::new(points)
    }

    /// `{1, 1.25, 1.5, ..., T}`: the zigzag times `1, 1.5, ..., T` with
    /// midpoints, `4T - 3` points.
    pub fn time_axis(times: usize) -> Self {
        let thresholds: Vec<f64> = (1..2 * times).map(|s| (s + 1) as f64 / 2.0).collect();
        EvaluationGrid::with_midpoints(&thresholds).expect("times >= 1")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Tent over `[b, d]` peaking at the midpoint with height `(d - b) / 2`.
fn tent(b: f64, d: f64, t: f64) -> f64 {
    (t - b).min(d - t).max(0.0)
}

/// `level`-th largest tent value at every grid point (level 1 is the
/// pointwise maximum).
pub fn landscape_vector(pairs: &[(f64, f64)], grid: &EvaluationGrid, level: usize) -> Result<Vec<f64>> {
    if level == 0 {
        return Err(TmpError::contract("landscape level starts at 1"));
    }
    let mut values = Vec::with_capacity(pairs.len());
    Ok(grid
        .points()
        .iter()
        .map(|&t| {
            values.clear();
            values.extend(pairs.iter().map(|&(b, d)| tent(b, d, t)));
            if values.len() < level {
                return 0.0;
            }
            let (_, kth, _) = values.select_nth_unstable_by(level - 1, |x, y| y.total_cmp(x));
            *kth
        })
        .collect())
}

/// Weighted average of tents with weights `(d - b)^power`. All-zero weights
/// give the zero vector.
pub fn silhouette_vector(pairs: &[(f64, f64)], grid: &EvaluationGrid, power: f64) -> Vec<f64> {
    let weights: Vec<f64> = pairs
        .iter()
        .map(|&(b, d)| if d > b { (d - b).powf(power) } else { 0.0 })
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return vec![0.0; grid.len()];
    }
    grid.points()
        .iter()
        .map(|&t| {
            pairs
                .iter()
                .zip(&weights)
                .map(|(&(b, d), &w)| w * tent(b, d, t))
                .sum::<f64>()
                / total
        })
        .collect()
}

/// Number of intervals alive at each position `1..=2T-1`.
pub fn betti_vector_zigzag(pd: &ZigzagDiagram) -> Vec<f64> {
    let mut counts = vec![0i64; pd.length() + 2];
    for iv in pd.intervals() {
        counts[iv.birth] += 1;
        counts[iv.death + 1] -= 1;
    }
    let mut acc = 0;
    (1..=pd.length())
        .map(|s| {
            acc += counts[s];
            acc as f64
        })
        .collect()
}

/// `β_k` of each snapshot complex directly, without unions or diagrams.
pub fn betti_vector_fast(complexes: &[SimplicialComplex], k: usize) -> Vec<f64> {
    complexes
        .iter()
        .map(|c| betti_numbers(c).get(k).copied().unwrap_or(0) as f64)
        .collect()
}

/// Life entropy of the bars alive at each grid point: with lifespans `ℓ_i`
/// of the alive bars and `L = Σ ℓ_i`, `E = -Σ (ℓ_i/L) ln(ℓ_i/L)`.
pub fn entropy_vector(pairs: &[(f64, f64)], grid: &EvaluationGrid) -> Vec<f64> {
    grid.points()
        .iter()
        .map(|&t| {
            let alive: Vec<f64> = pairs
                .iter()
                .filter(|&&(b, d)| b <= t && t <= d)
                .map(|&(b, d)| d - b)
                .collect();
            let total: f64 = alive.iter().sum();
            if alive.len() <= 1 || total <= 0.0 {
                return 0.0;
            }
            -alive
                .iter()
                .filter(|&&l| l > 0.0)
                .map(|&l| {
                    let p = l / total;
                    p * p.ln()
                })
                .sum::<f64>()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum ImageWeight {
    /// Weight equal to persistence.
    #[default]
    Persistence,
    Constant,
    /// Persistence raised to `exponent`.
    Power { exponent: f64 },
}

impl ImageWeight {
    fn weight(self, persistence: f64) -> f64 {
        let p = persistence.max(0.0);
        match self {
            ImageWeight::Persistence => p,
            ImageWeight::Constant => 1.0,
            ImageWeight::Power { exponent } => p.powf(exponent),
        }
    }
}

/// Region of the (birth, persistence) plane covered by the image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageBounds {
    pub birth: (f64, f64),
    pub persistence: (f64, f64),
}

impl ImageBounds {
    /// Everything a zigzag diagram over `T` snapshots can reach:
    /// births in `[1, T]`, persistence in `[0, T - 1]`.
    pub fn time_axis(times: usize) -> Self {
        let hi = times.max(2) as f64;
        ImageBounds {
            birth: (1.0, hi),
            persistence: (0.0, hi - 1.0),
        }
    }

    /// Tightest box around the points of several diagrams, so that images of
    /// different slices share pixels. Falls back to `fallback` along an axis
    /// with zero extent.
    pub fn covering<'a>(diagrams: impl IntoIterator<Item = &'a [(f64, f64)]>, fallback: ImageBounds) -> Self {
        let mut birth = (f64::INFINITY, f64::NEG_INFINITY);
        let mut pers = (0.0f64, f64::NEG_INFINITY);
        for &(b, d) in diagrams.into_iter().flatten() {
            birth = (birth.0.min(b), birth.1.max(b));
            pers.1 = pers.1.max(d - b);
        }
        ImageBounds {
            birth: if birth.1 > birth.0 { birth } else { fallback.birth },
            persistence: if pers.1 > pers.0 { pers } else { fallback.persistence },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageConfig {
    /// Pixels along the persistence axis.
    pub rows: usize,
    /// Pixels along the birth axis.
    pub cols: usize,
    /// Gaussian standard deviation; one birth-axis pixel width when absent.
    pub sigma: Option<f64>,
    #[serde(default)]
    pub weight: ImageWeight,
    /// Covered region; when absent, the pipeline uses the box around all
    /// diagrams of the dataset and a lone diagram uses its own box.
    #[serde(default)]
    pub bounds: Option<ImageBounds>,
}

impl Default for ImageConfig {
    fn default() -> Self {
        ImageConfig {
            rows: DEFAULT_IMAGE_RESOLUTION,
            cols: DEFAULT_IMAGE_RESOLUTION,
            sigma: None,
            weight: ImageWeight::default(),
            bounds: None,
        }
    }
}

impl ImageConfig {
    pub fn new(rows: usize, cols: usize, bounds: ImageBounds) -> Self {
        ImageConfig {
            rows,
            cols,
            bounds: Some(bounds),
            ..Default::default()
        }
    }

    pub fn with_bounds(mut self, bounds: ImageBounds) -> Self {
        self.bounds = Some(bounds);
        self
    }

    fn bounds_for(&self, pairs: &[(f64, f64)]) -> ImageBounds {
        self.bounds.unwrap_or_else(|| {
            ImageBounds::covering(
                [pairs],
                ImageBounds {
                    birth: (0.0, 1.0),
                    persistence: (0.0, 1.0),
                },
            )
        })
    }
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

/// Persistence image, row-major with shape `(rows, cols)`; row 0 holds the
/// lowest persistence band and column 0 the earliest births.
///
/// Each point `(b, d - b)` contributes an isotropic Gaussian of mass `w`,
/// integrated exactly over every pixel. Points with zero persistence
/// contribute nothing.
pub fn persistence_image(pairs: &[(f64, f64)], config: &ImageConfig) -> Result<Vec<f64>> {
    let bounds = config.bounds_for(pairs);
    let sigma = config
        .sigma
        .unwrap_or((bounds.birth.1 - bounds.birth.0) / config.cols.max(1) as f64);
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(TmpError::contract(format!("image sigma must be positive, got {sigma}")));
    }
    if config.rows == 0 || config.cols == 0 {
        return Err(TmpError::contract("image needs at least one pixel"));
    }
    let edges = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
    };
    let xs = edges(bounds.birth.0, bounds.birth.1, config.cols);
    let ys = edges(bounds.persistence.0, bounds.persistence.1, config.rows);
    let mut image = vec![0.0; config.rows * config.cols];
    let mut col_mass = vec![0.0; config.cols];
    let mut row_mass = vec![0.0; config.rows];
    for &(b, d) in pairs {
        let p = d - b;
        if p <= 0.0 {
            continue;
        }
        let w = config.weight.weight(p);
        if w == 0.0 {
            continue;
        }
        let cdf_x: Vec<f64> = xs.iter().map(|&x| normal_cdf((x - b) / sigma)).collect();
        let cdf_y: Vec<f64> = ys.iter().map(|&y| normal_cdf((y - p) / sigma)).collect();
        for c in 0..config.cols {
            col_mass[c] = cdf_x[c + 1] - cdf_x[c];
        }
        for r in 0..config.rows {
            row_mass[r] = cdf_y[r + 1] - cdf_y[r];
        }
        for r in 0..config.rows {
            for c in 0..config.cols {
                image[r * config.cols + c] += w * row_mass[r] * col_mass[c];
            }
        }
    }
    Ok(image)
}

/// A vectorization and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Vectorization {
    Landscape {
        level: usize,
    },
    Silhouette {
        power: f64,
    },
    BettiZigzag,
    /// Betti numbers of the snapshots only; skips zigzag persistence.
    BettiFast,
    Entropy,
    Image(ImageConfig),
}

impl Vectorization {
    pub fn name(&self) -> &'static str {
        match self {
            Vectorization::Landscape { .. } => "landscape",
            Vectorization::Silhouette { .. } => "silhouette",
            Vectorization::BettiZigzag => "betti-zigzag",
            Vectorization::BettiFast => "betti-fast",
            Vectorization::Entropy => "entropy",
            Vectorization::Image(_) => "image",
        }
    }

    /// Shape of one slice for a sequence of `times` snapshots.
    pub fn slice_shape(&self, times: usize) -> Vec<usize> {
        match self {
            Vectorization::Landscape { .. } | Vectorization::Silhouette { .. } | Vectorization::Entropy => {
                vec![4 * times - 3]
            }
            Vectorization::BettiZigzag => vec![2 * times - 1],
            Vectorization::BettiFast => vec![times],
            Vectorization::Image(cfg) => vec![cfg.rows, cfg.cols],
        }
    }

    pub fn default_slice_metric(&self) -> SliceMetric {
        match self {
            Vectorization::Image(_) => SliceMetric::L2,
            _ => SliceMetric::Sup,
        }
    }

    /// Vectorizes one zigzag diagram. Fast Betti reads the diagram at
    /// snapshot positions, which equals the per-snapshot Betti numbers.
    pub fn apply(&self, pd: &ZigzagDiagram) -> Result<Vec<f64>> {
        let times = pd.times();
        let pairs = pd.time_pairs();
        let grid = || EvaluationGrid::time_axis(times);
        Ok(match self {
            Vectorization::Landscape { level } => landscape_vector(&pairs, &grid(), *level)?,
            Vectorization::Silhouette { power } => silhouette_vector(&pairs, &grid(), *power),
            Vectorization::Entropy => entropy_vector(&pairs, &grid()),
            Vectorization::BettiZigzag => betti_vector_zigzag(pd),
            Vectorization::BettiFast => betti_vector_zigzag(pd).into_iter().step_by(2).collect(),
            Vectorization::Image(cfg) => {
                let cfg = ImageConfig {
                    bounds: Some(cfg.bounds.unwrap_or_else(|| ImageBounds::time_axis(times))),
                    ..*cfg
                };
                persistence_image(&pairs, &cfg)?
            }
        })
    }
}

/// Metric between two slices of a tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SliceMetric {
    Sup,
    L2,
}

/// What a tensor holds; carried in its file metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorMeta {
    pub vectorization: Vectorization,
    /// Names of the axes, the first always the filtration level.
    pub axes: Vec<String>,
    pub homology_dim: Option<usize>,
    pub times: usize,
    /// Filtration thresholds, one per level.
    #[serde(default)]
    pub thresholds: Vec<f64>,
    /// Free-form provenance (filter, window, union mode, ...).
    #[serde(default)]
    pub provenance: serde_json::Map<String, serde_json::Value>,
}

impl TensorMeta {
    pub fn new(vectorization: Vectorization, times: usize) -> Self {
        let axes = match &vectorization {
            Vectorization::Image(_) => vec!["level", "persistence", "birth"],
            Vectorization::BettiFast => vec!["level", "time"],
            _ => vec!["level", "zigzag-time"],
        };
        TensorMeta {
            vectorization,
            axes: axes.into_iter().map(String::from).collect(),
            homology_dim: None,
            times,
            thresholds: Vec::new(),
            provenance: Default::default(),
        }
    }
}

/// Dense row-major tensor of per-level vectorizations.
#[derive(Debug, Clone, PartialEq)]
pub struct TmpTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
    meta: TensorMeta,
}

impl TmpTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>, meta: TensorMeta) -> Result<Self> {
        if shape.iter().product::<usize>() != data.len() {
            return Err(TmpError::Shape(format!(
                "shape {shape:?} does not match {} entries",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(TmpError::Consistency("tensor has non-finite entries".into()));
        }
        Ok(TmpTensor { shape, data, meta })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn meta(&self) -> &TensorMeta {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut TensorMeta {
        &mut self.meta
    }

    /// Number of filtration levels.
    pub fn levels(&self) -> usize {
        self.shape[0]
    }

    /// Entries of level `j` (0-based), flattened.
    pub fn slice(&self, j: usize) -> &[f64] {
        let stride = self.data.len() / self.shape[0].max(1);
        &self.data[j * stride..(j + 1) * stride]
    }
}

/// Stacks per-level vectors along a new leading axis.
pub fn assemble_tmp(slices: Vec<Vec<f64>>, slice_shape: &[usize], meta: TensorMeta) -> Result<TmpTensor> {
    let expected: usize = slice_shape.iter().product();
    if let Some((j, bad)) = slices.iter().enumerate().find(|(_, s)| s.len() != expected) {
        return Err(TmpError::Shape(format!(
            "slice {} has {} entries, expected {expected}",
            j + 1,
            bad.len()
        )));
    }
    let mut shape = vec![slices.len()];
    shape.extend_from_slice(slice_shape);
    TmpTensor::new(shape, slices.concat(), meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zigzag::Interval;

    fn grid(lo: f64, hi: f64, step: f64) -> EvaluationGrid {
        let n = ((hi - lo) / step).round() as usize;
        EvaluationGrid::new((0..=n).map(|i| lo + step * i as f64).collect()).unwrap()
    }

    #[test]
    fn time_axis_size() {
        assert_eq!(EvaluationGrid::time_axis(1).len(), 1);
        assert_eq!(EvaluationGrid::time_axis(5).len(), 17);
        assert_eq!(EvaluationGrid::time_axis(2).points(), &[1.0, 1.25, 1.5, 1.75, 2.0]);
        assert_eq!(EvaluationGrid::with_midpoints(&[0.0, 1.0, 4.0]).unwrap().len(), 5);
    }

    #[test]
    fn landscapes() {
        let g = grid(0.0, 2.0, 0.5);
        assert_eq!(landscape_vector(&[], &g, 1).unwrap(), vec![0.0; 5]);
        assert_eq!(landscape_vector(&[(0.0, 2.0)], &g, 1).unwrap(), vec![0.0, 0.5, 1.0, 0.5, 0.0]);
        let g = grid(0.0, 3.0, 0.5);
        assert_eq!(
            landscape_vector(&[(0.0, 2.0), (1.0, 3.0)], &g, 1).unwrap(),
            vec![0.0, 0.5, 1.0, 0.5, 1.0, 0.5, 0.0]
        );
        assert_eq!(
            landscape_vector(&[(0.0, 2.0), (1.0, 3.0)], &g, 2).unwrap(),
            vec![0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0]
        );
        assert!(landscape_vector(&[], &g, 0).is_err());
        // zero-length bars vanish
        assert_eq!(landscape_vector(&[(1.0, 1.0)], &g, 1).unwrap(), vec![0.0; 7]);
    }

    #[test]
    fn silhouettes() {
        let g = grid(0.0, 4.0, 1.0);
        assert_eq!(silhouette_vector(&[], &g, 1.0), vec![0.0; 5]);
        let single = silhouette_vector(&[(0.0, 2.0)], &g, 1.0);
        assert_eq!(single, landscape_vector(&[(0.0, 2.0)], &g, 1).unwrap());
        let two = silhouette_vector(&[(0.0, 2.0), (0.0, 4.0)], &g, 1.0);
        assert_eq!(two[1], 1.0);
        assert!((two[2] - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(silhouette_vector(&[(1.0, 1.0)], &g, 1.0), vec![0.0; 5]);
    }

    fn diagram(bars: &[(usize, usize)], times: usize) -> ZigzagDiagram {
        let n = 2 * times - 1;
        let ivs = bars
            .iter()
            .map(|&(b, d)| Interval {
                birth: b,
                death: d,
                right_open: d == n,
            })
            .collect();
        ZigzagDiagram::new(0, n, ivs).unwrap()
    }

    #[test]
    fn zigzag_betti() {
        assert_eq!(betti_vector_zigzag(&diagram(&[(1, 3)], 2)), vec![1.0, 1.0, 1.0]);
        assert_eq!(betti_vector_zigzag(&diagram(&[(1, 2), (2, 3)], 2)), vec![1.0, 2.0, 1.0]);
        assert_eq!(betti_vector_zigzag(&diagram(&[], 3)), vec![0.0; 5]);
    }

    #[test]
    fn entropy() {
        let g = grid(0.0, 4.0, 1.0);
        assert_eq!(entropy_vector(&[(0.0, 4.0)], &g), vec![0.0; 5]);
        let two = entropy_vector(&[(0.0, 2.0), (1.0, 3.0)], &g);
        assert!((two[1] - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(two[0], 0.0);
        assert_eq!(entropy_vector(&[], &g), vec![0.0; 5]);
    }

    #[test]
    fn image_rejects_bad_sigma() {
        let mut cfg = ImageConfig::new(2, 2, ImageBounds::time_axis(3));
        cfg.sigma = Some(0.0);
        assert!(persistence_image(&[], &cfg).is_err());
        cfg.sigma = Some(-1.0);
        assert!(persistence_image(&[], &cfg).is_err());
    }

    #[test]
    fn image_of_empty_diagram_is_zero() {
        let cfg = ImageConfig::new(3, 4, ImageBounds::time_axis(3));
        assert_eq!(persistence_image(&[], &cfg).unwrap(), vec![0.0; 12]);
    }

    #[test]
    fn assemble_shapes() {
        let v = Vectorization::Landscape { level: 1 };
        let t = assemble_tmp(vec![vec![0.0; 17]; 3], &v.slice_shape(5), TensorMeta::new(v.clone(), 5)).unwrap();
        assert_eq!(t.shape(), &[3, 17]);
        let err = assemble_tmp(vec![vec![0.0; 17], vec![0.0; 16]], &[17], TensorMeta::new(v, 5));
        assert!(matches!(err, Err(TmpError::Shape(_))));
    }
}
