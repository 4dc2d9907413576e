//! Time-stamped weighted graphs with node identity carried by label.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TmpError};

mod ingest;

pub use ingest::{parse_temporal_edge_list, write_temporal_edge_list, EdgeListSchema};

/// Opaque node label. The same label at different timestamps is the same node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(label: impl Into<String>) -> Self {
        NodeId(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

/// Unordered node pair, stored with the smaller label first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(NodeId, NodeId);

impl Edge {
    /// Returns `None` for self-loops.
    pub fn new(a: NodeId, b: NodeId) -> Option<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Edge(a, b)),
            std::cmp::Ordering::Greater => Some(Edge(b, a)),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn endpoints(&self) -> (&NodeId, &NodeId) {
        (&self.0, &self.1)
    }
}

/// One weighted graph of the sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    timestamp: usize,
    nodes: BTreeSet<NodeId>,
    edges: BTreeMap<Edge, f64>,
}

impl Snapshot {
    pub fn empty(timestamp: usize) -> Self {
        Snapshot {
            timestamp,
            nodes: BTreeSet::new(),
            edges: BTreeMap::new(),
        }
    }

    /// Builds a snapshot, adding edge endpoints to the node set.
    ///
    /// Rejects self-loops and non-positive or non-finite weights. Repeated
    /// edges have their weights summed.
    pub fn from_edges<I>(timestamp: usize, nodes: I, edges: Vec<(NodeId, NodeId, f64)>) -> Result<Self>
    where
        I: IntoIterator<Item = NodeId>,
    {
        let mut snap = Snapshot::empty(timestamp);
        snap.nodes.extend(nodes);
        for (a, b, w) in edges {
            if !(w.is_finite() && w > 0.0) {
                return Err(TmpError::validation(format!(
                    "edge {a}-{b} has non-positive weight {w}"
                )));
            }
            let e = Edge::new(a.clone(), b.clone())
                .ok_or_else(|| TmpError::validation(format!("self-loop on node {a}")))?;
            snap.nodes.insert(a);
            snap.nodes.insert(b);
            *snap.edges.entry(e).or_insert(0.0) += w;
        }
        Ok(snap)
    }

    /// Unit-weight convenience constructor, mostly for tests and examples.
    pub fn unweighted(timestamp: usize, nodes: &[&str], edges: &[(&str, &str)]) -> Self {
        let edges = edges
            .iter()
            .map(|&(a, b)| (NodeId::from(a), NodeId::from(b), 1.0))
            .collect();
        Snapshot::from_edges(timestamp, nodes.iter().map(|&n| NodeId::from(n)), edges)
            .expect("unit weights and distinct endpoints")
    }

    pub fn timestamp(&self) -> usize {
        self.timestamp
    }

    pub fn nodes(&self) -> &BTreeSet<NodeId> {
        &self.nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = (&Edge, f64)> {
        self.edges.iter().map(|(e, &w)| (e, w))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Weight of the edge between `a` and `b`, 0 when absent.
    pub fn weight(&self, a: &NodeId, b: &NodeId) -> f64 {
        Edge::new(a.clone(), b.clone())
            .and_then(|e| self.edges.get(&e).copied())
            .unwrap_or(0.0)
    }

    pub fn has_edge(&self, a: &NodeId, b: &NodeId) -> bool {
        self.weight(a, b) > 0.0
    }

    pub(crate) fn with_timestamp(mut self, timestamp: usize) -> Self {
        self.timestamp = timestamp;
        self
    }

    /// Adjacency lists over positions in `self.nodes()` order.
    pub fn adjacency(&self) -> (Vec<NodeId>, Vec<Vec<(usize, f64)>>) {
        let labels: Vec<NodeId> = self.nodes.iter().cloned().collect();
        let index: HashMap<&NodeId, usize> = labels.iter().enumerate().map(|(i, n)| (n, i)).collect();
        let mut adj = vec![Vec::new(); labels.len()];
        for (e, w) in self.edges() {
            let (a, b) = e.endpoints();
            let (ia, ib) = (index[a], index[b]);
            adj[ia].push((ib, w));
            adj[ib].push((ia, w));
        }
        (labels, adj)
    }
}

/// Node and edge set union. Edges present in both keep the larger weight.
pub fn union_graph(g1: &Snapshot, g2: &Snapshot) -> Snapshot {
    let mut out = g1.clone();
    out.nodes.extend(g2.nodes.iter().cloned());
    for (e, &w) in &g2.edges {
        out.edges
            .entry(e.clone())
            .and_modify(|x| *x = x.max(w))
            .or_insert(w);
    }
    out
}

/// Subgraph induced by `keep ∩ nodes(g)`.
pub fn induced_subgraph(g: &Snapshot, keep: &BTreeSet<NodeId>) -> Snapshot {
    let nodes: BTreeSet<NodeId> = g.nodes.intersection(keep).cloned().collect();
    let edges = g
        .edges
        .iter()
        .filter(|(e, _)| nodes.contains(&e.0) && nodes.contains(&e.1))
        .map(|(e, &w)| (e.clone(), w))
        .collect();
    Snapshot {
        timestamp: g.timestamp,
        nodes,
        edges,
    }
}

/// Ordered sequence of snapshots with timestamps `1..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalGraph {
    snapshots: Vec<Snapshot>,
}

impl TemporalGraph {
    /// Takes snapshots in time order and re-indexes their timestamps to `1..=T`.
    pub fn new(snapshots: Vec<Snapshot>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(TmpError::validation("temporal graph needs at least one snapshot"));
        }
        let snapshots = snapshots
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.with_timestamp(i + 1))
            .collect();
        Ok(TemporalGraph { snapshots })
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    /// Snapshot at time `t` (1-based).
    pub fn at(&self, t: usize) -> &Snapshot {
        &self.snapshots[t - 1]
    }

    /// Every label that appears at some time, sorted.
    pub fn node_universe(&self) -> Vec<NodeId> {
        let set: BTreeSet<&NodeId> = self.snapshots.iter().flat_map(|s| s.nodes.iter()).collect();
        set.into_iter().cloned().collect()
    }

    /// Keeps the `n` nodes with the largest total incident weight over all
    /// snapshots (ties broken by label) and restricts every snapshot to them.
    pub fn restrict_to_most_active(&self, n: usize) -> TemporalGraph {
        let mut activity: BTreeMap<&NodeId, f64> = BTreeMap::new();
        for s in &self.snapshots {
            for node in &s.nodes {
                activity.entry(node).or_insert(0.0);
            }
            for (e, w) in s.edges() {
                *activity.get_mut(&e.0).unwrap() += w;
                *activity.get_mut(&e.1).unwrap() += w;
            }
        }
        let mut ranked: Vec<(&NodeId, f64)> = activity.into_iter().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let keep: BTreeSet<NodeId> = ranked.into_iter().take(n).map(|(k, _)| k.clone()).collect();
        TemporalGraph {
            snapshots: self.snapshots.iter().map(|s| induced_subgraph(s, &keep)).collect(),
        }
    }
}

/// Sliding windows `[t, t + width - 1]` for `t = 1, 1 + stride, ...`, each
/// re-indexed to `1..=width`.
pub fn window(tg: &TemporalGraph, width: usize, stride: usize) -> Result<Vec<TemporalGraph>> {
    if width == 0 || stride == 0 {
        return Err(TmpError::validation("window width and stride must be at least 1"));
    }
    if width > tg.len() {
        return Err(TmpError::validation(format!(
            "window width {width} exceeds sequence length {}",
            tg.len()
        )));
    }
    let out = (0..=tg.len() - width)
        .step_by(stride)
        .map(|start| TemporalGraph::new(tg.snapshots[start..start + width].to_vec()).unwrap())
        .collect();
    Ok(out)
}
