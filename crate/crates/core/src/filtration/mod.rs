//! Filtering functions, threshold grids and the (level × time) bifiltration
//! of clique complexes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TmpError};
use crate::graph::{NodeId, Snapshot, TemporalGraph};

pub mod centrality;
mod complex;

pub use complex::{
    clique_complex, clique_complex_of_edges, FilteredComplex, LevelGraph, NodeIndex, Simplex,
    SimplicialComplex,
};

/// Default number of thresholds along the filtration axis.
pub const DEFAULT_RESOLUTION: usize = 50;
/// Default maximal simplex dimension (homology in dimensions 0 and 1).
pub const DEFAULT_MAXDIM: usize = 2;
pub const MAX_MAXDIM: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterFunction {
    Degree,
    Closeness,
    Betweenness,
    /// Thresholds edge weights; every node of the snapshot is kept.
    EdgeWeight,
    /// Connects node pairs whose weighted geodesic distance is under the threshold.
    PowerGeodesic,
}

impl FilterFunction {
    pub fn is_node_valued(self) -> bool {
        matches!(self, FilterFunction::Degree | FilterFunction::Closeness | FilterFunction::Betweenness)
    }
}

impl fmt::Display for FilterFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FilterFunction::Degree => "degree",
            FilterFunction::Closeness => "closeness",
            FilterFunction::Betweenness => "betweenness",
            FilterFunction::EdgeWeight => "edge-weight",
            FilterFunction::PowerGeodesic => "power-geodesic",
        };
        f.write_str(s)
    }
}

impl FromStr for FilterFunction {
    type Err = TmpError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "degree" => FilterFunction::Degree,
            "closeness" => FilterFunction::Closeness,
            "betweenness" => FilterFunction::Betweenness,
            "edge-weight" => FilterFunction::EdgeWeight,
            "power-geodesic" | "power" => FilterFunction::PowerGeodesic,
            other => return Err(TmpError::validation(format!("unknown filter function {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    #[default]
    Sublevel,
    Superlevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FilterKind {
    pub function: FilterFunction,
    #[serde(default)]
    pub orientation: Orientation,
}

impl FilterKind {
    pub fn sublevel(function: FilterFunction) -> Self {
        FilterKind {
            function,
            orientation: Orientation::Sublevel,
        }
    }

    pub fn superlevel(function: FilterFunction) -> Self {
        FilterKind {
            function,
            orientation: Orientation::Superlevel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule")]
pub enum GridRule {
    /// Equally spaced empirical quantiles; `requested` before duplicate collapse.
    Quantile { requested: usize },
    Explicit,
}

/// Strictly increasing thresholds `α_1 < ... < α_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGrid {
    values: Vec<f64>,
    rule: GridRule,
}

impl ThresholdGrid {
    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(TmpError::validation("threshold grid is empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(TmpError::validation("threshold grid has non-finite values"));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TmpError::validation("thresholds must be strictly increasing"));
        }
        Ok(ThresholdGrid {
            values,
            rule: GridRule::Explicit,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn resolution(&self) -> usize {
        self.values.len()
    }

    pub fn rule(&self) -> &GridRule {
        &self.rule
    }

    /// Smallest 1-based level `j` with `x <= α_j`.
    pub fn level_of(&self, x: f64) -> Option<usize> {
        let j = self.values.partition_point(|&a| a < x);
        (j < self.values.len()).then_some(j + 1)
    }

    fn negated_reversed(&self) -> ThresholdGrid {
        ThresholdGrid {
            values: self.values.iter().rev().map(|v| -v).collect(),
            rule: self.rule.clone(),
        }
    }
}

/// Empirical quantiles at levels `j/m`, `j = 1..=m`, interpolating linearly
/// between order statistics. Equal thresholds are collapsed, so the grid
/// may come out shorter than `m`.
pub fn quantile_thresholds(values: &[f64], m: usize) -> Result<ThresholdGrid> {
    if values.is_empty() {
        return Err(TmpError::validation("no filter values to take quantiles of"));
    }
    if m == 0 {
        return Err(TmpError::validation("resolution must be at least 1"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(TmpError::validation("filter values must be finite"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut grid: Vec<f64> = Vec::with_capacity(m);
    for j in 1..=m {
        let q = if j == m {
            sorted[n - 1]
        } else {
            let h = (n - 1) as f64 * j as f64 / m as f64;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        };
        if grid.last().is_none_or(|&last| q > last) {
            grid.push(q);
        }
    }
    Ok(ThresholdGrid {
        values: grid,
        rule: GridRule::Quantile { requested: m },
    })
}

/// Raw values of a node-valued filter on one snapshot.
pub fn node_filter_values(g: &Snapshot, function: FilterFunction) -> Result<BTreeMap<NodeId, f64>> {
    let (labels, adj) = g.adjacency();
    let values = match function {
        FilterFunction::Degree => centrality::weighted_degree(&adj),
        FilterFunction::Closeness => centrality::closeness(&adj),
        FilterFunction::Betweenness => centrality::betweenness(&adj),
        other => {
            return Err(TmpError::contract(format!("{other} is not a node-valued filter")));
        }
    };
    Ok(labels.into_iter().zip(values).collect())
}

/// Finite weighted geodesic distances between distinct node pairs, keyed by
/// positions in `g.nodes()` order.
fn pairwise_geodesics(g: &Snapshot) -> Vec<(usize, usize, f64)> {
    let (_, adj) = g.adjacency();
    let mut out = Vec::new();
    for u in 0..adj.len() {
        let dist = centrality::dijkstra(&adj, u);
        for (v, d) in dist.into_iter().enumerate().skip(u + 1) {
            if let Some(d) = d {
                out.push((u, v, d));
            }
        }
    }
    out
}

/// Every value the filter takes over the whole sequence; the multiset that
/// quantile thresholds are drawn from. For the power filtration these are
/// the finite pairwise geodesic distances.
pub fn filter_value_pool(tg: &TemporalGraph, function: FilterFunction) -> Result<Vec<f64>> {
    let per_snapshot: Vec<Vec<f64>> = tg
        .snapshots()
        .par_iter()
        .map(|g| -> Result<Vec<f64>> {
            Ok(match function {
                FilterFunction::EdgeWeight => g.edges().map(|(_, w)| w).collect(),
                FilterFunction::PowerGeodesic => pairwise_geodesics(g).into_iter().map(|p| p.2).collect(),
                node => node_filter_values(g, node)?.into_values().collect(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(per_snapshot.into_iter().flatten().collect())
}

/// Quantile grid over the pooled filter values of the whole sequence.
pub fn grid_for(tg: &TemporalGraph, function: FilterFunction, m: usize) -> Result<ThresholdGrid> {
    quantile_thresholds(&filter_value_pool(tg, function)?, m)
}

/// Level graph of one snapshot: the clique complex of its subgraph at
/// level `j` is the cell `(j, t)` of the bifiltration.
fn level_graph(g: &Snapshot, index: &NodeIndex, kind: FilterKind, grid: &ThresholdGrid) -> Result<LevelGraph> {
    let (sign, grid) = match kind.orientation {
        Orientation::Sublevel => (1.0, grid.clone()),
        Orientation::Superlevel => (-1.0, grid.negated_reversed()),
    };
    let (labels, _) = g.adjacency();
    let ids: Vec<u32> = labels
        .iter()
        .map(|l| index.id(l).ok_or_else(|| TmpError::contract(format!("node {l} missing from index"))))
        .collect::<Result<_>>()?;
    let mut lg = LevelGraph::new();
    match kind.function {
        FilterFunction::EdgeWeight => {
            ids.iter().for_each(|&v| lg.add_vertex(v, 1));
            for (e, w) in g.edges() {
                if let Some(level) = grid.level_of(sign * w) {
                    let (a, b) = e.endpoints();
                    lg.add_edge(index.id(a).unwrap(), index.id(b).unwrap(), level);
                }
            }
        }
        FilterFunction::PowerGeodesic => {
            ids.iter().for_each(|&v| lg.add_vertex(v, 1));
            for (u, v, d) in pairwise_geodesics(g) {
                if let Some(level) = grid.level_of(sign * d) {
                    lg.add_edge(ids[u], ids[v], level);
                }
            }
        }
        node => {
            let values = node_filter_values(g, node)?;
            let mut kept = std::collections::HashMap::new();
            for (label, &id) in labels.iter().zip(&ids) {
                if let Some(level) = grid.level_of(sign * values[label]) {
                    lg.add_vertex(id, level);
                    kept.insert(label, id);
                }
            }
            for (e, _) in g.edges() {
                let (a, b) = e.endpoints();
                if let (Some(&ia), Some(&ib)) = (kept.get(a), kept.get(b)) {
                    lg.add_edge(ia, ib, 1);
                }
            }
        }
    }
    Ok(lg)
}

/// Grid of clique complexes indexed by filtration level `j` and time `t`,
/// stored as one filtered complex per time step.
#[derive(Debug, Clone)]
pub struct Bifiltration {
    kind: FilterKind,
    grid: ThresholdGrid,
    index: NodeIndex,
    maxdim: usize,
    columns: Vec<FilteredComplex>,
}

impl Bifiltration {
    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn grid(&self) -> &ThresholdGrid {
        &self.grid
    }

    pub fn index(&self) -> &NodeIndex {
        &self.index
    }

    pub fn maxdim(&self) -> usize {
        self.maxdim
    }

    /// Number of filtration levels `m`.
    pub fn levels(&self) -> usize {
        self.grid.resolution()
    }

    /// Number of time steps `T`.
    pub fn times(&self) -> usize {
        self.columns.len()
    }

    /// The filtered complex at time `t` (1-based).
    pub fn column(&self, t: usize) -> &FilteredComplex {
        &self.columns[t - 1]
    }

    /// Cell `(j, t)`, both 1-based.
    pub fn cell(&self, j: usize, t: usize) -> SimplicialComplex {
        self.columns[t - 1].cell(j)
    }

    /// The time sequence of complexes at level `j`.
    pub fn slice(&self, j: usize) -> Vec<SimplicialComplex> {
        self.columns.iter().map(|c| c.cell(j)).collect()
    }
}

/// Builds the bifiltration of a temporal graph for one filter and grid.
///
/// Node filters keep the subgraph induced by nodes with value `<= α_j`; the
/// edge-weight filter keeps every node and the edges with weight `<= α_j`;
/// the power filtration joins pairs at geodesic distance `<= α_j`.
/// Superlevel orientation reads the grid from the top: level `j` keeps
/// values `>= α_{m+1-j}`.
pub fn sublevel_bifiltration(
    tg: &TemporalGraph,
    kind: FilterKind,
    grid: &ThresholdGrid,
    maxdim: usize,
) -> Result<Bifiltration> {
    if grid.resolution() == 0 {
        return Err(TmpError::validation("threshold grid is empty"));
    }
    if !(1..=MAX_MAXDIM).contains(&maxdim) {
        return Err(TmpError::validation(format!("maxdim must be in 1..={MAX_MAXDIM}")));
    }
    let index = NodeIndex::for_graph(tg);
    let columns = tg
        .snapshots()
        .par_iter()
        .map(|g| Ok(level_graph(g, &index, kind, grid)?.clique_filtration(maxdim)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Bifiltration {
        kind,
        grid: grid.clone(),
        index,
        maxdim,
        columns,
    })
}

/// Power filtration of one snapshot: at threshold `α_j` the complex is the
/// clique complex of the graph joining pairs at geodesic distance `<= α_j`.
/// Vertex ids refer to the snapshot's own sorted node set.
pub fn power_filtration_sequence(g: &Snapshot, grid: &ThresholdGrid, maxdim: usize) -> Vec<SimplicialComplex> {
    let index = NodeIndex::new(g.nodes().iter().cloned());
    let filtered = level_graph(g, &index, FilterKind::sublevel(FilterFunction::PowerGeodesic), grid)
        .expect("index built from the snapshot")
        .clique_filtration(maxdim);
    (1..=grid.resolution()).map(|j| filtered.cell(j)).collect()
}
