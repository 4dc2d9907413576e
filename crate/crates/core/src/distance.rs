//! Wasserstein and bottleneck distances between diagrams, the slice-wise
//! matching distance between diagram grids, tensor distances and an
//! empirical stability check.
//!
//! Diagrams are multisets of `(birth, death)` pairs. Matched points cost the
//! ∞-norm of their difference; a point sent to the diagonal costs
//! `(death - birth) / 2`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, TmpError};
use crate::graph::TemporalGraph;
use crate::pipeline::{diagram_grid, PipelineConfig};
use crate::vectorize::{SliceMetric, TmpTensor};
use crate::zigzag::ZigzagDiagram;

/// How one side of an optimal matching is paired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    Points(usize, usize),
    FirstToDiagonal(usize),
    SecondToDiagonal(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pub distance: f64,
    pub pairs: Vec<Pairing>,
}

impl Matching {
    /// Largest single cost in the matching.
    pub fn max_cost(&self, pd1: &[(f64, f64)], pd2: &[(f64, f64)]) -> f64 {
        self.pairs
            .iter()
            .map(|&p| match p {
                Pairing::Points(i, j) => point_cost(pd1[i], pd2[j]),
                Pairing::FirstToDiagonal(i) => diagonal_cost(pd1[i]),
                Pairing::SecondToDiagonal(j) => diagonal_cost(pd2[j]),
            })
            .fold(0.0, f64::max)
    }
}

pub fn point_cost(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

pub fn diagonal_cost(a: (f64, f64)) -> f64 {
    ((a.1 - a.0) / 2.0).max(0.0)
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(TmpError::contract(format!("wasserstein order must satisfy 1 <= p <= inf, got {p}")));
    }
    Ok(())
}

fn off_diagonal(pd: &[(f64, f64)]) -> Vec<usize> {
    (0..pd.len()).filter(|&i| pd[i].1 > pd[i].0).collect()
}

/// `W_p` between two diagrams; `p = f64::INFINITY` gives the bottleneck
/// distance.
pub fn wasserstein(pd1: &[(f64, f64)], pd2: &[(f64, f64)], p: f64) -> Result<f64> {
    Ok(wasserstein_matching(pd1, pd2, p)?.distance)
}

/// Optimal matching realizing [`wasserstein`]. Points on the diagonal are
/// left out of the matching.
pub fn wasserstein_matching(pd1: &[(f64, f64)], pd2: &[(f64, f64)], p: f64) -> Result<Matching> {
    check_p(p)?;
    let a = off_diagonal(pd1);
    let b = off_diagonal(pd2);
    let (n1, n2) = (a.len(), b.len());
    let n = n1 + n2;
    if n == 0 {
        return Ok(Matching {
            distance: 0.0,
            pairs: Vec::new(),
        });
    }
    // rows: points of pd1 then diagonal slots for pd2; columns: points of
    // pd2 then diagonal slots for pd1
    let cost = |r: usize, c: usize| -> f64 {
        match (r < n1, c < n2) {
            (true, true) => point_cost(pd1[a[r]], pd2[b[c]]),
            (true, false) => diagonal_cost(pd1[a[r]]),
            (false, true) => diagonal_cost(pd2[b[c]]),
            (false, false) => 0.0,
        }
    };
    let assignment = if p.is_infinite() {
        bottleneck_assignment(n, &cost)
    } else {
        hungarian(n, &|r, c| cost(r, c).powf(p))
    };
    let mut pairs = Vec::new();
    let mut total = 0.0;
    let mut worst = 0.0f64;
    for (r, &c) in assignment.iter().enumerate() {
        let x = cost(r, c);
        match (r < n1, c < n2) {
            (true, true) => pairs.push(Pairing::Points(a[r], b[c])),
            (true, false) => pairs.push(Pairing::FirstToDiagonal(a[r])),
            (false, true) => pairs.push(Pairing::SecondToDiagonal(b[c])),
            (false, false) => continue,
        }
        worst = worst.max(x);
        if p.is_finite() {
            total += x.powf(p);
        }
    }
    let distance = if p.is_infinite() { worst } else { total.powf(1.0 / p) };
    Ok(Matching { distance, pairs })
}

/// Minimum-cost perfect assignment on an `n × n` matrix (shortest
/// augmenting paths with potentials). Returns the column of each row.
fn hungarian(n: usize, cost: &dyn Fn(usize, usize) -> f64) -> Vec<usize> {
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    // row matched to each column, 1-based; 0 = free
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0; n];
    for j in 1..=n {
        row_to_col[p[j] - 1] = j - 1;
    }
    row_to_col
}

/// Perfect assignment minimizing the largest cost: binary search over the
/// sorted candidate costs with a maximum-matching feasibility test.
fn bottleneck_assignment(n: usize, cost: &dyn Fn(usize, usize) -> f64) -> Vec<usize> {
    let mut candidates: Vec<f64> = (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).map(|(r, c)| cost(r, c)).collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    let mut best = perfect_matching(n, &|r, c| cost(r, c) <= candidates[hi]).expect("complete graph has a perfect matching");
    while lo < hi {
        let mid = (lo + hi) / 2;
        match perfect_matching(n, &|r, c| cost(r, c) <= candidates[mid]) {
            Some(m) => {
                best = m;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    best
}

/// Kuhn's augmenting-path matching; `None` unless every row is matched.
fn perfect_matching(n: usize, allowed: &dyn Fn(usize, usize) -> bool) -> Option<Vec<usize>> {
    let adj: Vec<Vec<usize>> = (0..n).map(|r| (0..n).filter(|&c| allowed(r, c)).collect()).collect();
    let mut col_owner: Vec<Option<usize>> = vec![None; n];

    fn augment(r: usize, adj: &[Vec<usize>], seen: &mut [bool], col_owner: &mut [Option<usize>]) -> bool {
        for &c in &adj[r] {
            if seen[c] {
                continue;
            }
            seen[c] = true;
            if col_owner[c].is_none_or(|o| augment(o, adj, seen, col_owner)) {
                col_owner[c] = Some(r);
                return true;
            }
        }
        false
    }

    for r in 0..n {
        let mut seen = vec![false; n];
        if !augment(r, &adj, &mut seen, &mut col_owner) {
            return None;
        }
    }
    let mut row_to_col = vec![0; n];
    for (c, owner) in col_owner.iter().enumerate() {
        row_to_col[owner.expect("perfect")] = c;
    }
    Some(row_to_col)
}

/// Largest [`wasserstein`] distance over corresponding cells of two diagram
/// grids.
pub fn zpd_matching_distance(grid1: &[ZigzagDiagram], grid2: &[ZigzagDiagram], p: f64) -> Result<f64> {
    check_p(p)?;
    if grid1.len() != grid2.len() {
        return Err(TmpError::contract(format!(
            "diagram grids have {} and {} cells",
            grid1.len(),
            grid2.len()
        )));
    }
    if let Some((a, b)) = grid1
        .iter()
        .zip(grid2)
        .find(|(a, b)| a.dim() != b.dim() || a.length() != b.length())
    {
        return Err(TmpError::contract(format!(
            "diagram cells disagree: dim {} length {} vs dim {} length {}",
            a.dim(),
            a.length(),
            b.dim(),
            b.length()
        )));
    }
    let distances = grid1
        .par_iter()
        .zip(grid2.par_iter())
        .map(|(a, b)| wasserstein(&a.time_pairs(), &b.time_pairs(), p))
        .collect::<Result<Vec<_>>>()?;
    Ok(distances.into_iter().fold(0.0, f64::max))
}

pub fn slice_distance(a: &[f64], b: &[f64], metric: SliceMetric) -> f64 {
    let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
    match metric {
        SliceMetric::Sup => diffs.fold(0.0, f64::max),
        SliceMetric::L2 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
    }
}

/// Largest slice distance between two tensors of the same shape and
/// vectorization. `None` selects the vectorization's default metric.
pub fn tmp_distance(t1: &TmpTensor, t2: &TmpTensor, metric: Option<SliceMetric>) -> Result<f64> {
    if t1.shape() != t2.shape() {
        return Err(TmpError::contract(format!(
            "tensor shapes differ: {:?} vs {:?}",
            t1.shape(),
            t2.shape()
        )));
    }
    let (v1, v2) = (&t1.meta().vectorization, &t2.meta().vectorization);
    if v1.name() != v2.name() {
        return Err(TmpError::contract(format!(
            "tensor kinds differ: {} vs {}",
            v1.name(),
            v2.name()
        )));
    }
    let metric = metric.unwrap_or_else(|| v1.default_slice_metric());
    Ok((0..t1.levels())
        .map(|j| slice_distance(t1.slice(j), t2.slice(j), metric))
        .fold(0.0, f64::max))
}

/// A map from zigzag diagrams to vectors, compared slice-wise by `metric`.
pub trait Vectorizer: Sync {
    fn name(&self) -> String;
    fn metric(&self) -> SliceMetric;
    fn vectorize(&self, pd: &ZigzagDiagram) -> Result<Vec<f64>>;
}

impl Vectorizer for crate::vectorize::Vectorization {
    fn name(&self) -> String {
        crate::vectorize::Vectorization::name(self).to_string()
    }

    fn metric(&self) -> SliceMetric {
        self.default_slice_metric()
    }

    fn vectorize(&self, pd: &ZigzagDiagram) -> Result<Vec<f64>> {
        self.apply(pd)
    }
}

/// Wraps a closure as a [`Vectorizer`].
pub struct FnVectorizer<F> {
    pub name: String,
    pub metric: SliceMetric,
    pub f: F,
}

impl<F> Vectorizer for FnVectorizer<F>
where
    F: Fn(&ZigzagDiagram) -> Result<Vec<f64>> + Sync,
{
    fn name(&self) -> String {
        self.name.clone()
    }

    fn metric(&self) -> SliceMetric {
        self.metric
    }

    fn vectorize(&self, pd: &ZigzagDiagram) -> Result<Vec<f64>> {
        (self.f)(pd)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityPair {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, absent when `rhs = 0`.
    pub ratio: Option<f64>,
    pub violated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub vectorization: String,
    pub constant: f64,
    pub p: f64,
    pub pairs: Vec<StabilityPair>,
}

impl StabilityReport {
    pub fn tested(&self) -> usize {
        self.pairs.len()
    }

    pub fn violations(&self) -> usize {
        self.pairs.iter().filter(|p| p.violated).count()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }

    pub fn max_ratio(&self) -> Option<f64> {
        self.pairs.iter().filter_map(|p| p.ratio).reduce(f64::max)
    }
}

const STABILITY_TOLERANCE: f64 = 1e-9;

/// Compares `D(M(base), M(h))` with `C · D(ZPD(base), ZPD(h))` for every
/// perturbation `h`, where both distances take the maximum over slices and
/// homology dimensions. The threshold grid comes from `base` and is reused
/// for every perturbation.
pub fn stability_check(
    base: &TemporalGraph,
    perturbations: &[TemporalGraph],
    config: &PipelineConfig,
    vectorizer: &dyn Vectorizer,
    constant: f64,
    p: f64,
) -> Result<StabilityReport> {
    check_p(p)?;
    let grid = config.threshold_grid(base)?;
    let base_pd = diagram_grid(base, config, &grid)?;
    let vectorize_all = |pds: &crate::pipeline::DiagramGrid| -> Result<Vec<Vec<Vec<f64>>>> {
        pds.by_dim()
            .iter()
            .map(|cells| cells.par_iter().map(|pd| vectorizer.vectorize(pd)).collect())
            .collect()
    };
    let base_vec = vectorize_all(&base_pd)?;
    let metric = vectorizer.metric();
    let pairs = perturbations
        .iter()
        .map(|h| {
            if h.len() != base.len() {
                return Err(TmpError::contract("perturbation has a different number of snapshots"));
            }
            let pd = diagram_grid(h, config, &grid)?;
            let vecs = vectorize_all(&pd)?;
            let mut lhs = 0.0f64;
            let mut rhs = 0.0f64;
            for (d, cells) in pd.by_dim().iter().enumerate() {
                rhs = rhs.max(zpd_matching_distance(&base_pd.by_dim()[d], cells, p)?);
                for (a, b) in base_vec[d].iter().zip(&vecs[d]) {
                    if a.len() != b.len() {
                        return Err(TmpError::Shape("vectorizer output length varies".into()));
                    }
                    lhs = lhs.max(slice_distance(a, b, metric));
                }
            }
            let ratio = (rhs > 0.0).then(|| lhs / rhs);
            let violated = lhs > constant * rhs + STABILITY_TOLERANCE;
            Ok(StabilityPair {
                lhs,
                rhs,
                ratio,
                violated,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityReport {
        vectorization: vectorizer.name(),
        constant,
        p,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn spec_examples() {
        let a = [(0.0, 2.0)];
        assert_eq!(wasserstein(&a, &a, 1.0).unwrap(), 0.0);
        assert_eq!(wasserstein(&a, &[], INF).unwrap(), 1.0);
        assert_eq!(wasserstein(&a, &[(0.0, 4.0)], INF).unwrap(), 2.0);
        assert_eq!(wasserstein(&a, &[(0.0, 4.0)], 1.0).unwrap(), 2.0);
        assert!(wasserstein(&a, &a, 0.5).is_err());
        assert!(wasserstein(&a, &a, f64::NAN).is_err());
        assert_eq!(wasserstein(&[], &[], 2.0).unwrap(), 0.0);
    }

    #[test]
    fn diagonal_points_are_ignored() {
        let a = [(0.0, 2.0), (1.0, 1.0)];
        let b = [(0.0, 2.0)];
        assert_eq!(wasserstein(&a, &b, 2.0).unwrap(), 0.0);
        assert_eq!(wasserstein(&a, &b, INF).unwrap(), 0.0);
    }

    #[test]
    fn p2_combines_costs() {
        // both points go to the diagonal at cost 1 each
        let d = wasserstein(&[(0.0, 2.0), (10.0, 12.0)], &[], 2.0).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn matching_covers_every_point() {
        let a = [(0.0, 3.0), (1.0, 2.0)];
        let b = [(0.0, 3.5)];
        let m = wasserstein_matching(&a, &b, 1.0).unwrap();
        assert_eq!(m.pairs.len(), 2);
        assert!(m.pairs.contains(&Pairing::Points(0, 0)));
        assert!(m.pairs.contains(&Pairing::FirstToDiagonal(1)));
        assert!((m.distance - 1.0).abs() < 1e-15);
    }

    #[test]
    fn slice_metrics() {
        assert_eq!(slice_distance(&[0.0, 1.0], &[3.0, 5.0], SliceMetric::Sup), 4.0);
        assert_eq!(slice_distance(&[0.0, 1.0], &[3.0, 5.0], SliceMetric::L2), 5.0);
    }
}
